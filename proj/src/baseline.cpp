#include "delaymap/baseline.hpp"

#include <algorithm>
#include <stdexcept>

#include "delaymap/kkf.hpp"
#include "delaymap/linalg.hpp"

namespace delaymap {

KrigingConfig KrigingConfig::with_default_basis(const Eigen::MatrixXd& c_nu, double sigma2) {
    KrigingConfig cfg;
    cfg.c_nu = c_nu;
    cfg.sigma2 = sigma2;
    cfg.trend_basis = Eigen::MatrixXd::Ones(c_nu.rows(), 1);
    return cfg;
}

KrigingPrediction network_kriging_predict(const KrigingConfig& cfg, const std::vector<int>& sel,
                                          const Eigen::VectorXd& y_s) {
    const int p = static_cast<int>(cfg.c_nu.rows());
    Eigen::MatrixXd basis =
        cfg.trend_basis.size() ? cfg.trend_basis : Eigen::MatrixXd::Ones(p, 1);
    if (basis.rows() != p) throw std::invalid_argument("trend basis row count must equal P");
    const int k = static_cast<int>(basis.cols());
    if (static_cast<int>(sel.size()) < k)
        throw std::invalid_argument("network kriging needs at least as many measurements as trend columns");
    if (static_cast<int>(sel.size()) != y_s.size())
        throw std::invalid_argument("y_s length does not match selection");

    KrigingPrediction out;
    out.unmeasured = complement_ids(p, sel);

    Eigen::MatrixXd sigma = submatrix(cfg.c_nu, sel);
    sigma.diagonal().array() += cfg.sigma2;
    SymmetricPsd sigma_fac(sigma, "kriging noise covariance");

    Eigen::MatrixXd b_s = select_rows(basis, sel);
    Eigen::MatrixXd sigma_inv_b = sigma_fac.solve(b_s);
    Eigen::MatrixXd gram = b_s.transpose() * sigma_inv_b;  // k x k
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw std::invalid_argument("trend basis is rank deficient on the measured rows");
    Eigen::VectorXd beta = lu.solve(sigma_inv_b.transpose() * y_s);

    out.trend = basis * beta;
    Eigen::VectorXd weights = sigma_fac.solve(y_s - select_entries(out.trend, sel));
    out.predicted = select_entries(out.trend, out.unmeasured);
    if (!out.unmeasured.empty() && !sel.empty()) {
        Eigen::MatrixXd cross(out.unmeasured.size(), sel.size());
        for (std::size_t i = 0; i < out.unmeasured.size(); ++i)
            for (std::size_t j = 0; j < sel.size(); ++j)
                cross(i, j) = cfg.c_nu(out.unmeasured[i], sel[j]);
        out.predicted += cross * weights;
    }
    return out;
}

}  // namespace delaymap
