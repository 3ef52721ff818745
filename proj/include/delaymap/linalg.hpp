#ifndef DELAYMAP_LINALG_HPP
#define DELAYMAP_LINALG_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaymap {

// Factorization failure, tagged with the role of the offending matrix
// ("innovation covariance", "phi", ...) so callers can surface a useful
// message instead of a bare lapack-style code.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& role, const std::string& detail)
        : std::runtime_error("factorization of " + role + " failed: " + detail),
          role_(role) {}
    const std::string& role() const { return role_; }

private:
    std::string role_;
};

// Symmetric positive semidefinite matrix with a cached Cholesky factor.
// Construction symmetrizes the input; if the plain factorization fails the
// matrix gets a single diagonal shift of 1e-9 * trace / n before retrying.
class SymmetricPsd {
public:
    explicit SymmetricPsd(const Eigen::MatrixXd& a, std::string role = "matrix");

    const Eigen::MatrixXd& matrix() const { return a_; }
    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

    template <typename Rhs>
    auto solve(const Eigen::MatrixBase<Rhs>& rhs) const {
        return llt_.solve(rhs.derived()).eval();
    }
    double logdet() const;
    Eigen::MatrixXd inverse() const;

private:
    Eigen::MatrixXd a_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Convenience wrappers around SymmetricPsd for one-shot use.
Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs,
                           const std::string& role = "matrix");
double logdet_psd(const Eigen::MatrixXd& a, const std::string& role = "matrix");

// 0.5 * (a + a^T)
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

// max |a_ij - a_ji| relative to the matrix norm
bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol = 1e-12);

// Smallest eigenvalue of the symmetrized input (dense, for validation only).
double min_eigenvalue(const Eigen::MatrixXd& a);

// Clamps negative eigenvalues at zero and re-symmetrizes.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& a);

// Given v = (a_ss + I)^-1 for the current index set and the new column
// w = a_{S,p} with diagonal entry a_pp, grows the inverse by one row/column:
//
//   d = a_pp - w^T v w + 1,   u = -v w
//   v' = [ v + u u^T / d   u / d ]
//        [ u^T / d         1 / d ]
//
// d must be strictly positive; values below 1e-12 indicate a corrupted
// (non-PSD) input and raise FactorizationError.
Eigen::MatrixXd rank_one_extend_inverse(const Eigen::MatrixXd& v,
                                        const Eigen::VectorXd& w, double d);

// Block (rank-k) version: given v = (a_SS + I)^-1, the cross block
// w = a_{S,B} and the Schur complement d_block = (a_BB + I) - w^T v w,
// returns the inverse of [[a_SS + I, w], [w^T, a_BB + I]].
Eigen::MatrixXd block_extend_inverse(const Eigen::MatrixXd& v,
                                     const Eigen::MatrixXd& w,
                                     const Eigen::MatrixXd& d_block);

// Extracts the square submatrix a(idx, idx).
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const std::vector<int>& idx);

// Rows of a restricted to idx (selection-matrix product S * a without
// materializing S).
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& a, const std::vector<int>& idx);
Eigen::VectorXd select_entries(const Eigen::VectorXd& v, const std::vector<int>& idx);

}  // namespace delaymap

#endif
