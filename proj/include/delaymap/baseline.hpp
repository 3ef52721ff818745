#ifndef DELAYMAP_BASELINE_HPP
#define DELAYMAP_BASELINE_HPP

#include <Eigen/Dense>
#include <vector>

namespace delaymap {

// Memoryless per-slot predictor: a GLS trend fit (nu treated as correlated
// noise) followed by the kriging correction. Default trend basis is a single
// all-ones column, i.e. one scalar trend level per slot.
struct KrigingConfig {
    Eigen::MatrixXd c_nu;
    double sigma2 = 1e-3;
    Eigen::MatrixXd trend_basis;  // P x K; empty -> ones column

    static KrigingConfig with_default_basis(const Eigen::MatrixXd& c_nu, double sigma2);
};

struct KrigingPrediction {
    std::vector<int> unmeasured;   // sorted
    Eigen::VectorXd predicted;
    Eigen::VectorXd trend;         // trend_basis * beta_hat over all paths
};

// beta_hat = (B^T Sigma^-1 B)^-1 B^T Sigma^-1 y_s with B = S * trend_basis and
// Sigma = S c_nu S^T + sigma2 I, then
//   y_hat = Sbar B0 beta_hat + Sbar c_nu S^T Sigma^-1 (y_s - S B0 beta_hat).
KrigingPrediction network_kriging_predict(const KrigingConfig& cfg, const std::vector<int>& sel,
                                          const Eigen::VectorXd& y_s);

}  // namespace delaymap

#endif
