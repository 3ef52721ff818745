#include "delaymap/selection.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

#include "delaymap/linalg.hpp"

namespace delaymap {

namespace {

void check_phi(const Eigen::MatrixXd& phi) {
    if (phi.rows() != phi.cols()) throw std::invalid_argument("phi must be square");
    if (!is_symmetric(phi, 1e-9)) throw std::invalid_argument("phi must be symmetric");
}

double score_of(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& v,
                const std::vector<int>& sel, int p) {
    if (sel.empty()) return phi(p, p);
    Eigen::VectorXd w(sel.size());
    for (std::size_t i = 0; i < sel.size(); ++i) w(i) = phi(sel[i], p);
    return phi(p, p) - w.dot(v * w);
}

// Checks that `groups` partitions 0..P-1 (used by the matroid constraint) or
// at least is disjoint (node budget allows uncovered paths).
void check_groups(const std::vector<std::vector<int>>& groups, int p, bool require_cover) {
    std::vector<char> seen(p, 0);
    int covered = 0;
    for (const auto& g : groups)
        for (int id : g) {
            if (id < 0 || id >= p) throw std::invalid_argument("group references unknown path");
            if (seen[id]) throw std::invalid_argument("groups must be disjoint");
            seen[id] = 1;
            ++covered;
        }
    if (require_cover && covered != p)
        throw std::invalid_argument("matroid groups must cover every path");
}

struct GreedyState {
    std::vector<int> chosen;
    Eigen::MatrixXd v;  // (phi_SS + I)^-1, chosen order
    std::vector<double> trace;

    void add(const Eigen::MatrixXd& phi, int p, double score) {
        if (chosen.empty()) {
            v = Eigen::MatrixXd::Constant(1, 1, 1.0 / (phi(p, p) + 1.0));
        } else {
            Eigen::VectorXd w(chosen.size());
            for (std::size_t i = 0; i < chosen.size(); ++i) w(i) = phi(chosen[i], p);
            v = rank_one_extend_inverse(v, w, score + 1.0);
        }
        chosen.push_back(p);
        trace.push_back(-std::log1p(score));
    }
};

// One greedy pass over path-level candidates; `feasible` filters the
// candidate set per step (matroid caps). Ties break toward the lowest id.
template <typename Feasible>
void greedy_paths(const Eigen::MatrixXd& phi, int budget, bool lazy, Feasible&& feasible,
                  GreedyState& st) {
    const int p_dim = static_cast<int>(phi.rows());

    if (!lazy) {
        while (static_cast<int>(st.chosen.size()) < budget) {
            int best = -1;
            double best_score = 0.0;
            for (int p = 0; p < p_dim; ++p) {
                if (std::find(st.chosen.begin(), st.chosen.end(), p) != st.chosen.end()) continue;
                if (!feasible(p)) continue;
                const double s = score_of(phi, st.v, st.chosen, p);
                if (best < 0 || s > best_score) {
                    best = p;
                    best_score = s;
                }
            }
            if (best < 0) break;  // no feasible candidate left
            st.add(phi, best, best_score);
        }
        return;
    }

    // Minoux: scores only decrease as the set grows, so stale values are
    // upper bounds. Recompute lazily until the top of the heap is fresh.
    struct Entry {
        double score;
        int id;
        int stamp;
    };
    auto worse = [](const Entry& a, const Entry& b) {
        return a.score < b.score || (a.score == b.score && a.id > b.id);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
    for (int p = 0; p < p_dim; ++p) heap.push({phi(p, p), p, 0});

    while (static_cast<int>(st.chosen.size()) < budget && !heap.empty()) {
        Entry top = heap.top();
        heap.pop();
        if (!feasible(top.id)) continue;  // dropped for good: caps only tighten
        const int stamp = static_cast<int>(st.chosen.size());
        if (top.stamp == stamp) {
            st.add(phi, top.id, top.score);
        } else {
            top.score = score_of(phi, st.v, st.chosen, top.id);
            top.stamp = stamp;
            heap.push(top);
        }
    }
}

SelectionResult greedy_cardinality(const Eigen::MatrixXd& phi, const Cardinality& c, bool lazy) {
    const int p_dim = static_cast<int>(phi.rows());
    if (c.count < 1 || c.count > p_dim)
        throw std::invalid_argument("cardinality budget must be in 1..P");
    GreedyState st;
    greedy_paths(phi, c.count, lazy, [](int) { return true; }, st);
    return {st.chosen, st.v, st.trace, {}};
}

SelectionResult greedy_matroid(const Eigen::MatrixXd& phi, const PartitionMatroid& m, bool lazy) {
    const int p_dim = static_cast<int>(phi.rows());
    check_groups(m.groups, p_dim, /*require_cover=*/true);
    if (m.caps.size() != m.groups.size())
        throw std::invalid_argument("matroid caps must match groups");
    for (int cap : m.caps)
        if (cap < 1) throw std::invalid_argument("matroid caps must be >= 1");

    std::vector<int> group_of(p_dim, -1);
    for (std::size_t g = 0; g < m.groups.size(); ++g)
        for (int id : m.groups[g]) group_of[id] = static_cast<int>(g);

    GreedyState st;
    auto feasible = [&](int p) {
        int used = 0;
        for (int c : st.chosen)
            if (group_of[c] == group_of[p]) ++used;
        return used < m.caps[group_of[p]];
    };
    // budget = p_dim lets the pass run until feasibility is exhausted
    greedy_paths(phi, p_dim, lazy, feasible, st);
    return {st.chosen, st.v, st.trace, {}};
}

SelectionResult greedy_node_budget(const Eigen::MatrixXd& phi, const NodeBudget& nb) {
    check_groups(nb.groups, static_cast<int>(phi.rows()), /*require_cover=*/false);
    if (nb.count < 1 || nb.count > static_cast<int>(nb.groups.size()))
        throw std::invalid_argument("node budget must be in 1..#groups");
    for (const auto& g : nb.groups)
        if (g.empty()) throw std::invalid_argument("every end-node group needs at least one path");

    SelectionResult result;
    std::vector<char> taken(nb.groups.size(), 0);
    for (int step = 0; step < nb.count; ++step) {
        int best_g = -1;
        double best_gain = 0.0;
        Eigen::MatrixXd best_d;
        for (std::size_t g = 0; g < nb.groups.size(); ++g) {
            if (taken[g]) continue;
            const auto& ids = nb.groups[g];
            Eigen::MatrixXd d = submatrix(phi, ids);
            d.diagonal().array() += 1.0;
            if (!result.chosen.empty()) {
                Eigen::MatrixXd w(result.chosen.size(), ids.size());
                for (std::size_t i = 0; i < result.chosen.size(); ++i)
                    for (std::size_t j = 0; j < ids.size(); ++j)
                        w(i, j) = phi(result.chosen[i], ids[j]);
                d -= w.transpose() * result.v_matrix * w;
            }
            const double gain = logdet_psd(d, "node-budget pivot");
            if (best_g < 0 || gain > best_gain) {
                best_g = static_cast<int>(g);
                best_gain = gain;
                best_d = d;
            }
        }
        const auto& ids = nb.groups[best_g];
        if (result.chosen.empty()) {
            result.v_matrix = SymmetricPsd(best_d, "node-budget pivot").inverse();
        } else {
            Eigen::MatrixXd w(result.chosen.size(), ids.size());
            for (std::size_t i = 0; i < result.chosen.size(); ++i)
                for (std::size_t j = 0; j < ids.size(); ++j)
                    w(i, j) = phi(result.chosen[i], ids[j]);
            result.v_matrix = block_extend_inverse(result.v_matrix, w, best_d);
        }
        result.chosen.insert(result.chosen.end(), ids.begin(), ids.end());
        result.chosen_groups.push_back(best_g);
        result.objective_trace.push_back(-best_gain);
        taken[best_g] = 1;
    }
    return result;
}

}  // namespace

double objective_f(const Eigen::MatrixXd& phi, double sigma2, const std::vector<int>& sel) {
    check_phi(phi);
    const int p = static_cast<int>(phi.rows());
    if (!sel.empty() && sigma2 <= 0.0)
        throw std::invalid_argument("objective_f requires sigma2 > 0 when paths are measured");
    std::vector<char> in_sel(p, 0);
    for (int id : sel) {
        if (id < 0 || id >= p) throw std::invalid_argument("selection references unknown path");
        in_sel[id] = 1;
    }
    std::vector<int> unmeasured;
    for (int i = 0; i < p; ++i)
        if (!in_sel[i]) unmeasured.push_back(i);
    if (unmeasured.empty()) return 0.0;

    Eigen::MatrixXd a = sigma2 * phi;
    Eigen::MatrixXd inner = SymmetricPsd(a, "phi").inverse();
    for (int id : sel) inner(id, id) += 1.0 / sigma2;
    Eigen::MatrixXd err = submatrix(SymmetricPsd(inner, "phi inner term").inverse(), unmeasured);
    err.diagonal().array() += sigma2;
    return logdet_psd(err, "prediction error covariance");
}

double increment_delta(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& v,
                       const std::vector<int>& sel, int p) {
    if (std::find(sel.begin(), sel.end(), p) != sel.end())
        throw std::invalid_argument("candidate is already selected");
    return -std::log1p(score_of(phi, v, sel, p));
}

SelectionResult greedy_select(const SelectionProblem& problem) {
    check_phi(problem.phi);
    return std::visit(
        [&](const auto& c) -> SelectionResult {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Cardinality>)
                return greedy_cardinality(problem.phi, c, problem.lazy);
            else if constexpr (std::is_same_v<T, PartitionMatroid>)
                return greedy_matroid(problem.phi, c, problem.lazy);
            else
                return greedy_node_budget(problem.phi, c);
        },
        problem.constraint);
}

int select_single_node(const Eigen::MatrixXd& phi, const std::vector<std::vector<int>>& groups) {
    check_phi(phi);
    if (groups.empty()) throw std::invalid_argument("no end-node groups");
    check_groups(groups, static_cast<int>(phi.rows()), /*require_cover=*/false);
    int best = -1;
    double best_gain = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw std::invalid_argument("every end-node group needs at least one path");
        Eigen::MatrixXd d = submatrix(phi, groups[g]);
        d.diagonal().array() += 1.0;
        const double gain = logdet_psd(d, "single-node block");
        if (best < 0 || gain > best_gain) {
            best = static_cast<int>(g);
            best_gain = gain;
        }
    }
    return best;
}

SupermodularityReport verify_supermodularity(const Eigen::MatrixXd& phi, double slack) {
    check_phi(phi);
    const int p = static_cast<int>(phi.rows());
    if (p > 12) throw std::invalid_argument("exhaustive check limited to P <= 12");
    const int n_masks = 1 << p;

    // increments delta[mask][p] in normalized units, via the V-form scores
    std::vector<std::vector<double>> delta(n_masks, std::vector<double>(p, 0.0));
    for (int mask = 0; mask < n_masks; ++mask) {
        std::vector<int> sel;
        for (int i = 0; i < p; ++i)
            if (mask & (1 << i)) sel.push_back(i);
        Eigen::MatrixXd v;
        if (!sel.empty()) {
            Eigen::MatrixXd m = submatrix(phi, sel);
            m.diagonal().array() += 1.0;
            v = SymmetricPsd(m, "phi submatrix").inverse();
        }
        for (int cand = 0; cand < p; ++cand)
            if (!(mask & (1 << cand))) delta[mask][cand] = increment_delta(phi, v, sel, cand);
    }

    SupermodularityReport report;
    auto record = [&](double margin) {
        if (margin > slack) {
            ++report.violations;
            report.worst_violation = std::max(report.worst_violation, margin);
        }
    };
    for (int b = 0; b < n_masks; ++b) {
        // monotonicity: every increment from any set is <= 0
        for (int cand = 0; cand < p; ++cand)
            if (!(b & (1 << cand))) {
                ++report.monotonicity_checks;
                record(delta[b][cand]);
            }
        // supermodularity against every proper subset of b
        if (b == 0) continue;
        for (int a = (b - 1) & b; ; a = (a - 1) & b) {
            for (int cand = 0; cand < p; ++cand)
                if (!(b & (1 << cand))) {
                    ++report.increment_checks;
                    record(delta[a][cand] - delta[b][cand]);
                }
            if (a == 0) break;
        }
    }
    return report;
}

}  // namespace delaymap
