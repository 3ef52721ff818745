#include "delaymap/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "delaymap/linalg.hpp"

namespace delaymap {

QStatistics q_statistics(const std::vector<Eigen::VectorXd>& q_samples) {
    const long n = static_cast<long>(q_samples.size());
    if (n < 3) throw std::invalid_argument("q_statistics needs at least 3 samples");
    const Eigen::Index p = q_samples.front().size();

    QStatistics st;
    st.mean = Eigen::VectorXd::Zero(p);
    for (const auto& q : q_samples) {
        if (q.size() != p) throw std::invalid_argument("q samples have mixed dimensions");
        st.mean += q;
    }
    st.mean /= static_cast<double>(n);

    st.covariance = Eigen::MatrixXd::Zero(p, p);
    for (const auto& q : q_samples) {
        Eigen::VectorXd d = q - st.mean;
        st.covariance += d * d.transpose();
    }
    st.covariance /= static_cast<double>(n - 1);
    st.covariance = symmetrize(st.covariance);
    return st;
}

Eigen::MatrixXd estimate_c_eta(const Eigen::MatrixXd& c_q,
                               const std::vector<Eigen::MatrixXd>& m_history) {
    if (m_history.size() < 2)
        throw std::invalid_argument("estimate_c_eta needs at least 2 covariance snapshots");
    const double n = static_cast<double>(m_history.size() - 1);
    Eigen::MatrixXd drift = Eigen::MatrixXd::Zero(c_q.rows(), c_q.cols());
    for (std::size_t t = 1; t < m_history.size(); ++t)
        drift += m_history[t] - m_history[t - 1];
    return symmetrize(c_q + drift / n);
}

double fit_gamma(const Eigen::MatrixXd& c_nu_hat, const Eigen::MatrixXd& gramian) {
    const double denom = gramian.squaredNorm();
    if (denom <= 0.0) throw std::invalid_argument("fit_gamma: Gramian is zero");
    const double num = (gramian.array() * c_nu_hat.array()).sum();
    return std::max(0.0, num / denom);
}

TrainingAccumulator::TrainingAccumulator(int path_dim) : p_(path_dim) { reset(); }

void TrainingAccumulator::reset() {
    q_count_ = 0;
    q_sum_ = Eigen::VectorXd::Zero(p_);
    q_outer_sum_ = Eigen::MatrixXd::Zero(p_, p_);
    has_prev_ = false;
    m_first_.resize(0, 0);
    m_last_.resize(0, 0);
    innov_sum_ = Eigen::MatrixXd::Zero(p_, p_);
    innov_count_ = Eigen::MatrixXd::Zero(p_, p_);
    m_pair_sum_ = Eigen::MatrixXd::Zero(p_, p_);
}

void TrainingAccumulator::add_slot(const FilterState& prev, const FilterState& next,
                                   double damping_b, const std::vector<int>& sel,
                                   const Eigen::VectorXd& y_s) {
    if (prev.chi_hat.size() != p_ || next.chi_hat.size() != p_)
        throw std::invalid_argument("accumulator dimension mismatch");

    if (!has_prev_) {
        m_first_ = prev.m;
        has_prev_ = true;
    }
    m_last_ = next.m;

    Eigen::VectorXd q = next.chi_hat - prev.chi_hat;
    q_sum_ += q;
    q_outer_sum_ += q * q.transpose();
    ++q_count_;

    for (std::size_t i = 0; i < sel.size(); ++i) {
        const double iota_i = y_s(i) - damping_b * prev.chi_hat(sel[i]);
        for (std::size_t j = i; j < sel.size(); ++j) {
            const double iota_j = y_s(j) - damping_b * prev.chi_hat(sel[j]);
            innov_sum_(sel[i], sel[j]) += iota_i * iota_j;
            innov_count_(sel[i], sel[j]) += 1.0;
            m_pair_sum_(sel[i], sel[j]) += prev.m(sel[i], sel[j]);
        }
    }
}

QStatistics TrainingAccumulator::q_stats() const {
    if (q_count_ < 3) throw std::invalid_argument("q_statistics needs at least 3 samples");
    QStatistics st;
    st.mean = q_sum_ / static_cast<double>(q_count_);
    st.covariance = symmetrize(
        (q_outer_sum_ - static_cast<double>(q_count_) * st.mean * st.mean.transpose()) /
        static_cast<double>(q_count_ - 1));
    return st;
}

Eigen::MatrixXd TrainingAccumulator::c_eta_hat() const {
    QStatistics st = q_stats();
    return symmetrize(st.covariance + (m_last_ - m_first_) / static_cast<double>(q_count_));
}

Eigen::MatrixXd TrainingAccumulator::finalize_c_nu(const Eigen::MatrixXd& c_eta, double sigma2,
                                                   const Eigen::MatrixXd& prior_c_nu) const {
    Eigen::MatrixXd out = prior_c_nu;
    for (int i = 0; i < p_; ++i) {
        for (int j = i; j < p_; ++j) {
            const double n = innov_count_(i, j);
            if (n < 1.0) continue;  // never co-measured: keep the prior entry
            double v = innov_sum_(i, j) / n - m_pair_sum_(i, j) / n - c_eta(i, j);
            if (i == j) v -= sigma2;
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return symmetrize(out);
}

EstimatedParams training_phase(const Eigen::MatrixXd& gramian, const DelayTrace& trace,
                               const TrainingConfig& cfg) {
    const int p = trace.path_dim();
    if (gramian.rows() != p) throw std::invalid_argument("Gramian does not match trace dimension");
    if (cfg.t_l > trace.horizon())
        throw std::invalid_argument("trace too short: t_l exceeds the horizon");
    if (cfg.burn_in < 0 || cfg.t_l - cfg.burn_in < 5)
        throw std::invalid_argument("training window must leave at least 5 slots after burn-in");

    ModelParams params;
    params.gamma = cfg.gamma0;
    params.c_nu = build_c_nu(cfg.gamma0, gramian);
    params.c_eta = cfg.c_eta_init ? *cfg.c_eta_init : params.c_nu;
    params.sigma2 = cfg.sigma2;
    params.damping_b = cfg.damping_b;
    params.validate();

    FilterState state = default_initial_state(trace, params);
    TrainingAccumulator acc(p);

    Eigen::VectorXd measured_sum = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd measured_count = Eigen::VectorXd::Zero(p);

    auto estimates_from = [&](const TrainingAccumulator& a) {
        EstimatedParams est;
        est.c_eta_hat = a.c_eta_hat();
        est.c_nu_hat = a.finalize_c_nu(est.c_eta_hat, cfg.sigma2, params.c_nu);
        est.gamma_hat = fit_gamma(est.c_nu_hat, gramian);
        return est;
    };

    for (int t = 1; t <= cfg.t_l; ++t) {
        const auto& sel = trace.selection[t - 1];
        const Eigen::VectorXd y_s = trace.measured(t);
        for (std::size_t i = 0; i < sel.size(); ++i) {
            measured_sum(sel[i]) += y_s(i);
            measured_count(sel[i]) += 1.0;
        }

        const FilterState prev = state;
        state = sel.empty() ? predict_only(state, params) : kf_step(state, params, sel, y_s);
        if (t > cfg.burn_in) acc.add_slot(prev, state, params.damping_b, sel, y_s);

        const bool refresh_due = cfg.refresh_every > 0 && t > cfg.burn_in &&
                                 (t - cfg.burn_in) % cfg.refresh_every == 0 &&
                                 cfg.t_l - t >= cfg.refresh_every && acc.q_count() >= 8;
        if (refresh_due) {
            EstimatedParams est = estimates_from(acc);
            params.gamma = est.gamma_hat;
            params.c_nu = build_c_nu(est.gamma_hat, gramian);
            params.c_eta = psd_project(est.c_eta_hat);
            acc.reset();
        }
    }

    EstimatedParams est = estimates_from(acc);
    est.mean_delay = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < p; ++i)
        if (measured_count(i) > 0.0) est.mean_delay(i) = measured_sum(i) / measured_count(i);
    return est;
}

ModelParams to_model_params(const EstimatedParams& est, const Eigen::MatrixXd& gramian,
                            double sigma2, double damping_b) {
    ModelParams params;
    params.gamma = est.gamma_hat;
    params.c_nu = build_c_nu(est.gamma_hat, gramian);
    params.c_eta = psd_project(est.c_eta_hat);
    params.sigma2 = sigma2;
    params.damping_b = damping_b;
    params.validate();
    return params;
}

}  // namespace delaymap
