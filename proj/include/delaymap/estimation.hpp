#ifndef DELAYMAP_ESTIMATION_HPP
#define DELAYMAP_ESTIMATION_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "delaymap/kkf.hpp"
#include "delaymap/model.hpp"

namespace delaymap {

struct QStatistics {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // 1/(n-1) normalization around the final mean
};

// Sample mean and covariance of the trend increments q(t) = chi_hat(t) -
// chi_hat(t-1). Needs at least 3 samples.
QStatistics q_statistics(const std::vector<Eigen::VectorXd>& q_samples);

// Unbiased state-noise estimate: c_q plus the mean one-step drift of the
// filter covariance, computed by the literal sum
//   c_eta_hat = c_q + (1/(n)) sum_t (M(t) - M(t-1)),   n = |history| - 1,
// which telescopes to (M(end) - M(front)) / n. Result is symmetrized.
Eigen::MatrixXd estimate_c_eta(const Eigen::MatrixXd& c_q,
                               const std::vector<Eigen::MatrixXd>& m_history);

// Least-squares fit of c_nu_hat to gamma * G:
//   gamma_hat = sum_pq G_pq [c_nu_hat]_pq / ||G||_F^2, clamped at 0.
double fit_gamma(const Eigen::MatrixXd& c_nu_hat, const Eigen::MatrixXd& gramian);

// Online sufficient statistics gathered while the filter runs: trend
// increments, covariance drift, and per-pair innovation products
// iota_p(t) = y_p(t) - b chi_hat_p(t-1) for co-measured path pairs.
// Only running sums are kept.
class TrainingAccumulator {
public:
    explicit TrainingAccumulator(int path_dim);

    // Records one filter transition. `prev` is the state the slot started
    // from, `next` the post-update state, `sel`/`y_s` the measurements.
    void add_slot(const FilterState& prev, const FilterState& next, double damping_b,
                  const std::vector<int>& sel, const Eigen::VectorXd& y_s);

    void reset();

    long q_count() const { return q_count_; }
    QStatistics q_stats() const;
    Eigen::MatrixXd c_eta_hat() const;  // q covariance + telescoped M drift

    // Innovation-based spatial covariance. Pairs never co-measured keep the
    // entry of `prior_c_nu`; the measurement-error variance is removed from
    // diagonal entries only (eps is uncorrelated across paths).
    Eigen::MatrixXd finalize_c_nu(const Eigen::MatrixXd& c_eta,
                                  double sigma2,
                                  const Eigen::MatrixXd& prior_c_nu) const;

    const Eigen::MatrixXd& pair_counts() const { return innov_count_; }

private:
    int p_;
    long q_count_ = 0;
    Eigen::VectorXd q_sum_;
    Eigen::MatrixXd q_outer_sum_;
    Eigen::MatrixXd m_first_;
    bool has_prev_ = false;
    Eigen::MatrixXd m_last_;
    Eigen::MatrixXd innov_sum_;    // sum of iota_p iota_q per pair
    Eigen::MatrixXd innov_count_;  // |T_pq|
    Eigen::MatrixXd m_pair_sum_;   // sum of [M(t-1)]_pq over co-measured slots
};

struct EstimatedParams {
    Eigen::MatrixXd c_eta_hat;  // symmetrized, possibly indefinite
    Eigen::MatrixXd c_nu_hat;   // innovation-based entries (gamma-model fallback)
    double gamma_hat = 0.0;
    Eigen::VectorXd mean_delay;  // per-path training mean of measured values
};

struct TrainingConfig {
    int t_l = 1000;       // training horizon (slots 1..t_l of the trace)
    int burn_in = 500;    // filter-only warmup before statistics are gathered
    double gamma0 = 1.0;
    std::optional<Eigen::MatrixXd> c_eta_init;  // default: gamma0 * G
    double sigma2 = 1e-3;
    double damping_b = 1.0;
    // Re-derive the working covariances from the accumulated statistics every
    // this many slots (0 disables). The accumulator restarts afterwards so the
    // final estimates come from the last, best-matched segment.
    int refresh_every = 500;
};

// Runs the filter over the trace prefix with the initial covariances and
// produces the data-driven estimates. Deterministic.
EstimatedParams training_phase(const Eigen::MatrixXd& gramian, const DelayTrace& trace,
                               const TrainingConfig& cfg);

// Filter-ready parameters: c_nu = gamma_hat * G, c_eta projected to PSD.
ModelParams to_model_params(const EstimatedParams& est, const Eigen::MatrixXd& gramian,
                            double sigma2, double damping_b);

}  // namespace delaymap

#endif
