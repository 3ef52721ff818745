#ifndef DELAYMAP_SELECTION_HPP
#define DELAYMAP_SELECTION_HPP

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace delaymap {

// |S| = count paths, any paths.
struct Cardinality {
    int count = 1;
};

// Measure all paths originating at `count` chosen end-nodes; groups list the
// path ids per end-node (declaration order).
struct NodeBudget {
    int count = 1;
    std::vector<std::vector<int>> groups;
};

// At most caps[g] paths from each origin group; greedy fills until no
// feasible candidate remains.
struct PartitionMatroid {
    std::vector<std::vector<int>> groups;
    std::vector<int> caps;
};

using Constraint = std::variant<Cardinality, NodeBudget, PartitionMatroid>;

// phi = (M(t-1) + c_eta + c_nu) / sigma2, the normalized covariance the
// greedy design operates on.
struct SelectionProblem {
    Eigen::MatrixXd phi;
    Constraint constraint;
    bool lazy = false;  // Minoux accelerator; result identical to plain greedy
};

struct SelectionResult {
    std::vector<int> chosen;              // paths, in pick order
    Eigen::MatrixXd v_matrix;             // (phi_SS + I)^-1 in pick order
    std::vector<double> objective_trace;  // normalized increment per step
    std::vector<int> chosen_groups;       // node-budget only, in pick order
};

// Reference objective: log det of the prediction error covariance over the
// unmeasured paths,
//   f(S) = log det( sigma2 I + Sbar [ (sigma2 phi)^-1 + S^T S / sigma2 ]^-1 Sbar^T ),
// with f(full set) = 0 by the empty-matrix convention. Used as the oracle the
// incremental formulas are tested against; the greedy loop never calls it.
double objective_f(const Eigen::MatrixXd& phi, double sigma2, const std::vector<int>& sel);

// Normalized increment of adding p to the set behind v:
//   -log(1 + phi_pp - w^T v w),  w = phi_{S,p}.
// Equals f(S + p) - f(S) + log(sigma2); the sigma2 shift is constant in p, so
// rankings are unaffected. v must be (phi_SS + I)^-1 in sel order.
double increment_delta(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& v,
                       const std::vector<int>& sel, int p);

SelectionResult greedy_select(const SelectionProblem& problem);

// Single measuring node: the group maximizing log det(I + phi_gg), i.e. the
// node whose paths remove the most log-volume from the prediction error.
// Ties go to the earliest group. Returns the group index.
int select_single_node(const Eigen::MatrixXd& phi, const std::vector<std::vector<int>>& groups);

struct SupermodularityReport {
    long increment_checks = 0;
    long monotonicity_checks = 0;
    long violations = 0;
    double worst_violation = 0.0;  // largest margin beyond the slack
    bool ok() const { return violations == 0; }
};

// Exhaustively verifies, over every pair A subset of B and p outside B, that
// the increments are monotonically increasing and nonpositive (P <= 12).
SupermodularityReport verify_supermodularity(const Eigen::MatrixXd& phi, double slack = 1e-10);

}  // namespace delaymap

#endif
