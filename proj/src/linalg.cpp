#include "delaymap/linalg.hpp"

#include <cmath>

namespace delaymap {

SymmetricPsd::SymmetricPsd(const Eigen::MatrixXd& a, std::string role) {
    if (a.rows() != a.cols())
        throw FactorizationError(role, "matrix is not square");
    a_ = symmetrize(a);
    llt_.compute(a_);
    if (llt_.info() != Eigen::Success) {
        // one diagonal shift, then give up
        const double shift = 1e-9 * a_.trace() / static_cast<double>(std::max<Eigen::Index>(1, a_.rows()));
        if (shift > 0.0) {
            a_.diagonal().array() += shift;
            llt_.compute(a_);
        }
        if (llt_.info() != Eigen::Success)
            throw FactorizationError(role, "matrix is not positive definite");
    }
}

double SymmetricPsd::logdet() const {
    return 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd SymmetricPsd::inverse() const {
    return llt_.solve(Eigen::MatrixXd::Identity(a_.rows(), a_.cols()));
}

Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs,
                           const std::string& role) {
    return SymmetricPsd(a, role).solve(rhs);
}

double logdet_psd(const Eigen::MatrixXd& a, const std::string& role) {
    if (a.rows() == 0) return 0.0;  // empty-matrix convention: det = 1
    return SymmetricPsd(a, role).logdet();
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
    return 0.5 * (a + a.transpose());
}

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(a));
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return symmetrize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
}

Eigen::MatrixXd rank_one_extend_inverse(const Eigen::MatrixXd& v,
                                        const Eigen::VectorXd& w, double d) {
    if (d <= 1e-12)
        throw FactorizationError("greedy inverse update",
                                 "pivot d = " + std::to_string(d) + " <= 1e-12 (input not PSD?)");
    const Eigen::Index k = v.rows();
    Eigen::VectorXd u = -(v * w);
    Eigen::MatrixXd out(k + 1, k + 1);
    out.topLeftCorner(k, k) = v + u * u.transpose() / d;
    out.topRightCorner(k, 1) = u / d;
    out.bottomLeftCorner(1, k) = u.transpose() / d;
    out(k, k) = 1.0 / d;
    return out;
}

Eigen::MatrixXd block_extend_inverse(const Eigen::MatrixXd& v,
                                     const Eigen::MatrixXd& w,
                                     const Eigen::MatrixXd& d_block) {
    const Eigen::Index k = v.rows();
    const Eigen::Index b = d_block.rows();
    SymmetricPsd d(d_block, "block pivot");
    Eigen::MatrixXd d_inv = d.inverse();
    Eigen::MatrixXd vw = v * w;  // k x b
    Eigen::MatrixXd out(k + b, k + b);
    out.topLeftCorner(k, k) = v + vw * d_inv * vw.transpose();
    out.topRightCorner(k, b) = -vw * d_inv;
    out.bottomLeftCorner(b, k) = out.topRightCorner(k, b).transpose();
    out.bottomRightCorner(b, b) = d_inv;
    return symmetrize(out);
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const std::vector<int>& idx) {
    Eigen::MatrixXd out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out(i, j) = a(idx[i], idx[j]);
    return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const std::vector<int>& idx) {
    Eigen::MatrixXd out(idx.size(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = a.row(idx[i]);
    return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

}  // namespace delaymap
