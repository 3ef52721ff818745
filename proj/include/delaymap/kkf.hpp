#ifndef DELAYMAP_KKF_HPP
#define DELAYMAP_KKF_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "delaymap/model.hpp"

namespace delaymap {

// Posterior carried between slots: trend estimate chi_hat(t) and its error
// covariance M(t). The covariance is re-symmetrized after every update.
struct FilterState {
    Eigen::VectorXd chi_hat;
    Eigen::MatrixXd m;
    int slot = 0;
};

// Output of one slot: kriged predictions for the unmeasured paths, their
// closed-form error covariance, and the Kalman gain used in the update.
struct PredictionResult {
    std::vector<int> unmeasured;   // sorted ids the predictions refer to
    Eigen::VectorXd predicted;     // |unmeasured|
    Eigen::MatrixXd error_cov;     // |unmeasured| x |unmeasured|
    Eigen::MatrixXd kalman_gain;   // P x |S|
};

// Kalman gain K(t) for measuring `sel` given the previous covariance:
//   K = M_prior S^T [ S (c_nu + M_prior) S^T + sigma2 I ]^-1,
// with M_prior = b^2 M(t-1) + c_eta.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& m_prev, const ModelParams& params,
                            const std::vector<int>& sel);

// One measurement update. `sel` must be nonempty and sorted; use
// predict_only for slots without measurements.
FilterState kf_step(const FilterState& state, const ModelParams& params,
                    const std::vector<int>& sel, const Eigen::VectorXd& y_s);

// Time update without measurements: chi_hat <- b chi_hat, M <- b^2 M + c_eta.
// Applying it tau times yields the tau-step prediction.
FilterState predict_only(const FilterState& state, const ModelParams& params);

// Closed-form prediction error covariance over the unmeasured paths,
//   sigma2 I + Sbar [ (b^2 M(t-1) + c_eta + c_nu)^-1 + S^T S / sigma2 ]^-1 Sbar^T.
Eigen::MatrixXd error_covariance(const Eigen::MatrixXd& m_prev, const ModelParams& params,
                                 const std::vector<int>& sel);

// Kriged prediction for the unmeasured paths given the post-update state and
// the covariance the slot started from:
//   y_hat = Sbar chi_hat + Sbar c_nu S^T (S c_nu S^T + sigma2 I)^-1 (y_s - S chi_hat).
PredictionResult kkf_predict(const FilterState& post_state, const Eigen::MatrixXd& m_prev,
                             const ModelParams& params, const std::vector<int>& sel,
                             const Eigen::VectorXd& y_s);

struct SlotResult {
    int slot = 0;
    std::vector<int> selection;
    PredictionResult prediction;
};

struct FilterRun {
    std::vector<SlotResult> slots;
    FilterState final_state;
};

// Runs the filter over every slot of the trace: kf_step (or predict_only when
// the slot has no measurements) followed by kkf_predict. Deterministic.
FilterRun run_filter(const ModelParams& params, const DelayTrace& trace,
                     const Eigen::VectorXd& chi0, const Eigen::MatrixXd& m0);
void run_filter(const ModelParams& params, const DelayTrace& trace,
                const Eigen::VectorXd& chi0, const Eigen::MatrixXd& m0,
                const std::function<void(const SlotResult&, const FilterState&)>& sink,
                FilterState* final_state = nullptr);

// Diffuse default: chi_hat(0) = mean of the first slot's measurements on all
// paths, M(0) = (10 trace(c_nu) / P) I.
FilterState default_initial_state(const DelayTrace& trace, const ModelParams& params);

// Ids in 0..P-1 not contained in the sorted set `sel`.
std::vector<int> complement_ids(int path_count, const std::vector<int>& sel);

}  // namespace delaymap

#endif
