#include "delaymap/kkf.hpp"

#include <algorithm>
#include <stdexcept>

#include "delaymap/linalg.hpp"

namespace delaymap {

namespace {

void check_selection(const std::vector<int>& sel, int p) {
    if (!std::is_sorted(sel.begin(), sel.end()) ||
        std::adjacent_find(sel.begin(), sel.end()) != sel.end())
        throw std::invalid_argument("selection must be sorted and unique");
    if (!sel.empty() && (sel.front() < 0 || sel.back() >= p))
        throw std::invalid_argument("selection references unknown path");
}

Eigen::MatrixXd prior_cov(const Eigen::MatrixXd& m_prev, const ModelParams& params) {
    const double b2 = params.damping_b * params.damping_b;
    return symmetrize(b2 * m_prev + params.c_eta);
}

// S A S^T for a sorted index set
Eigen::MatrixXd sandwich(const Eigen::MatrixXd& a, const std::vector<int>& sel) {
    return submatrix(a, sel);
}

}  // namespace

std::vector<int> complement_ids(int path_count, const std::vector<int>& sel) {
    std::vector<int> out;
    out.reserve(path_count - sel.size());
    std::size_t si = 0;
    for (int p = 0; p < path_count; ++p) {
        while (si < sel.size() && sel[si] < p) ++si;
        if (si == sel.size() || sel[si] != p) out.push_back(p);
    }
    return out;
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& m_prev, const ModelParams& params,
                            const std::vector<int>& sel) {
    const int p = params.path_dim();
    check_selection(sel, p);
    Eigen::MatrixXd m_prior = prior_cov(m_prev, params);
    Eigen::MatrixXd innov = sandwich(m_prior + params.c_nu, sel);
    innov.diagonal().array() += params.sigma2;
    Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(innov));
    if (llt.info() != Eigen::Success)
        throw FactorizationError("innovation covariance",
                                 params.sigma2 == 0.0
                                     ? "singular with sigma2 = 0; measurement noise is required"
                                     : "matrix is not positive definite");
    // K = M_prior S^T innov^-1, assembled column-set first
    Eigen::MatrixXd m_prior_cols(p, sel.size());
    for (std::size_t j = 0; j < sel.size(); ++j) m_prior_cols.col(j) = m_prior.col(sel[j]);
    return llt.solve(m_prior_cols.transpose()).transpose();
}

FilterState kf_step(const FilterState& state, const ModelParams& params,
                    const std::vector<int>& sel, const Eigen::VectorXd& y_s) {
    const int p = params.path_dim();
    if (state.chi_hat.size() != p || state.m.rows() != p)
        throw std::invalid_argument("filter state dimension mismatch");
    if (sel.empty()) throw std::invalid_argument("kf_step requires measurements; use predict_only");
    if (static_cast<int>(sel.size()) != y_s.size())
        throw std::invalid_argument("y_s length does not match selection");

    Eigen::MatrixXd k = kalman_gain(state.m, params, sel);
    Eigen::MatrixXd m_prior = prior_cov(state.m, params);

    Eigen::VectorXd chi_pred = params.damping_b * state.chi_hat;
    Eigen::VectorXd innovation = y_s - select_entries(chi_pred, sel);

    FilterState next;
    next.chi_hat = chi_pred + k * innovation;
    // M = (I - K S) M_prior, with K S expanded over the selected columns only
    Eigen::MatrixXd ks_m = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t j = 0; j < sel.size(); ++j) ks_m += k.col(j) * m_prior.row(sel[j]);
    next.m = symmetrize(m_prior - ks_m);
    next.slot = state.slot + 1;
    return next;
}

FilterState predict_only(const FilterState& state, const ModelParams& params) {
    FilterState next;
    next.chi_hat = params.damping_b * state.chi_hat;
    next.m = prior_cov(state.m, params);
    next.slot = state.slot + 1;
    return next;
}

Eigen::MatrixXd error_covariance(const Eigen::MatrixXd& m_prev, const ModelParams& params,
                                 const std::vector<int>& sel) {
    const int p = params.path_dim();
    check_selection(sel, p);
    if (!sel.empty() && params.sigma2 <= 0.0)
        throw std::invalid_argument("error_covariance requires sigma2 > 0 when paths are measured");
    const std::vector<int> unmeasured = complement_ids(p, sel);

    Eigen::MatrixXd a = prior_cov(m_prev, params) + params.c_nu;
    SymmetricPsd a_fac(a, "M(t-1) + c_eta + c_nu");
    Eigen::MatrixXd inner = a_fac.inverse();
    if (params.sigma2 > 0.0)
        for (int idx : sel) inner(idx, idx) += 1.0 / params.sigma2;
    Eigen::MatrixXd mid = SymmetricPsd(inner, "Woodbury inner term").inverse();

    Eigen::MatrixXd out = submatrix(mid, unmeasured);
    out.diagonal().array() += params.sigma2;
    return symmetrize(out);
}

PredictionResult kkf_predict(const FilterState& post_state, const Eigen::MatrixXd& m_prev,
                             const ModelParams& params, const std::vector<int>& sel,
                             const Eigen::VectorXd& y_s) {
    const int p = params.path_dim();
    check_selection(sel, p);
    if (static_cast<int>(sel.size()) != y_s.size())
        throw std::invalid_argument("y_s length does not match selection");

    PredictionResult result;
    result.unmeasured = complement_ids(p, sel);
    result.error_cov = error_covariance(m_prev, params, sel);
    result.kalman_gain =
        sel.empty() ? Eigen::MatrixXd(p, 0) : kalman_gain(m_prev, params, sel);

    Eigen::VectorXd y_hat = select_entries(post_state.chi_hat, result.unmeasured);
    if (!sel.empty()) {
        Eigen::MatrixXd c_ss = sandwich(params.c_nu, sel);
        c_ss.diagonal().array() += params.sigma2;
        Eigen::VectorXd residual = y_s - select_entries(post_state.chi_hat, sel);
        Eigen::VectorXd weights = SymmetricPsd(c_ss, "kriging covariance").solve(residual);
        Eigen::MatrixXd cross(result.unmeasured.size(), sel.size());  // Sbar c_nu S^T
        for (std::size_t i = 0; i < result.unmeasured.size(); ++i)
            for (std::size_t j = 0; j < sel.size(); ++j)
                cross(i, j) = params.c_nu(result.unmeasured[i], sel[j]);
        y_hat += cross * weights;
    }
    result.predicted = y_hat;
    return result;
}

void run_filter(const ModelParams& params, const DelayTrace& trace,
                const Eigen::VectorXd& chi0, const Eigen::MatrixXd& m0,
                const std::function<void(const SlotResult&, const FilterState&)>& sink,
                FilterState* final_state) {
    params.validate();
    if (trace.path_dim() != params.path_dim())
        throw std::invalid_argument("trace path dimension does not match model");
    if (chi0.size() != params.path_dim() || m0.rows() != params.path_dim())
        throw std::invalid_argument("initial state dimension mismatch");

    FilterState state{chi0, symmetrize(m0), 0};
    for (int t = 1; t <= trace.horizon(); ++t) {
        const auto& sel = trace.selection[t - 1];
        const Eigen::VectorXd y_s = trace.measured(t);
        const Eigen::MatrixXd m_prev = state.m;
        state = sel.empty() ? predict_only(state, params) : kf_step(state, params, sel, y_s);

        SlotResult slot;
        slot.slot = t;
        slot.selection = sel;
        slot.prediction = kkf_predict(state, m_prev, params, sel, y_s);
        sink(slot, state);
    }
    if (final_state) *final_state = state;
}

FilterRun run_filter(const ModelParams& params, const DelayTrace& trace,
                     const Eigen::VectorXd& chi0, const Eigen::MatrixXd& m0) {
    FilterRun run;
    run.slots.reserve(trace.horizon());
    run_filter(params, trace, chi0, m0,
               [&](const SlotResult& s, const FilterState&) { run.slots.push_back(s); },
               &run.final_state);
    return run;
}

FilterState default_initial_state(const DelayTrace& trace, const ModelParams& params) {
    const int p = params.path_dim();
    FilterState state;
    double mean = 0.0;
    if (trace.horizon() >= 1 && !trace.selection[0].empty())
        mean = trace.measured(1).mean();
    state.chi_hat = Eigen::VectorXd::Constant(p, mean);
    state.m = (10.0 * params.c_nu.trace() / p) * Eigen::MatrixXd::Identity(p, p);
    state.slot = 0;
    return state;
}

}  // namespace delaymap
