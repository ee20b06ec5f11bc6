#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "stdloc/errors.hpp"

namespace stdloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vector2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

inline constexpr double kEpsFloor = 1e-14;
inline constexpr double kPsdClamp = -1e-12;
inline constexpr double kTieTolerance = 1e-9;
inline constexpr double kMaxCondition = 1e12;

inline void require_square(const Matrix& A, const char* what) {
    if (A.rows() != A.cols())
        throw validation_error(std::string(what) + ": matrix must be square");
}

inline void require_symmetric(const Matrix& A, const char* what,
                              double tol = 1e-10) {
    require_square(A, what);
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol * scale)
        throw validation_error(std::string(what) + ": matrix must be symmetric");
}

// Symmetric PSD square root via self-adjoint eigendecomposition. Eigenvalues
// in [-1e-12, 0) are treated as rounding noise and clamped to zero; anything
// more negative is a genuinely indefinite input and is rejected.
inline Matrix matrix_sqrt_psd(const Matrix& A) {
    require_symmetric(A, "matrix_sqrt_psd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success)
        throw numeric_error("matrix_sqrt_psd: eigendecomposition failed");
    Vector w = es.eigenvalues();
    double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] < kPsdClamp * scale)
            throw numeric_error("matrix_sqrt_psd: matrix is indefinite");
        if (w[i] < 0.0) w[i] = 0.0;
    }
    return es.eigenvectors() * w.cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

// Square root and inverse square root of a strictly positive definite matrix,
// computed from one eigendecomposition.
struct SqrtPair {
    Matrix sqrt;
    Matrix inv_sqrt;
};

inline SqrtPair matrix_sqrt_spd_pair(const Matrix& A) {
    require_symmetric(A, "matrix_sqrt_spd_pair");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success)
        throw numeric_error("matrix_sqrt_spd_pair: eigendecomposition failed");
    Vector w = es.eigenvalues();
    double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    Vector s(w.size()), si(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] < kPsdClamp * scale)
            throw numeric_error("matrix_sqrt_spd_pair: matrix is indefinite");
        double v = std::max(w[i], 0.0);
        s[i] = std::sqrt(v);
        si[i] = v > kEpsFloor ? 1.0 / s[i] : 0.0;
        if (v <= kEpsFloor)
            throw numeric_error("matrix_sqrt_spd_pair: matrix is singular");
    }
    const Matrix& V = es.eigenvectors();
    return {V * s.asDiagonal() * V.transpose(),
            V * si.asDiagonal() * V.transpose()};
}

// (λ_min, λ_max) of a symmetric matrix.
inline std::pair<double, double> eigen_extremes(const Matrix& A) {
    require_symmetric(A, "eigen_extremes");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw numeric_error("eigen_extremes: eigendecomposition failed");
    const Vector& w = es.eigenvalues();
    return {w[0], w[w.size() - 1]};
}

// Condition number of a symmetric positive definite matrix.
inline double spd_condition(const Matrix& A) {
    auto [lo, hi] = eigen_extremes(A);
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

// Factorized solve helper for the m-by-m data-space system. Rejects systems
// whose condition number exceeds 1e12 instead of quietly amplifying noise.
class SpdSolver {
public:
    explicit SpdSolver(const Matrix& A, const char* what = "SpdSolver") {
        require_symmetric(A, what);
        if (spd_condition(A) > kMaxCondition)
            throw numeric_error(std::string(what) +
                                ": system is ill-conditioned (cond > 1e12)");
        llt_.compute(A);
        if (llt_.info() != Eigen::Success)
            throw numeric_error(std::string(what) +
                                ": matrix is not positive definite");
    }

    Vector solve(const Vector& b) const { return llt_.solve(b); }
    Matrix solve(const Matrix& B) const { return llt_.solve(B); }
    Matrix inverse() const {
        return llt_.solve(Matrix::Identity(llt_.rows(), llt_.rows()));
    }

private:
    Eigen::LLT<Matrix> llt_;
};

inline bool is_diagonal(const Matrix& A) {
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (i != j && A(i, j) != 0.0) return false;
    return true;
}

inline Matrix symmetrize(const Matrix& A) {
    return 0.5 * (A + A.transpose());
}

inline double rms(const Vector& v) {
    if (v.size() == 0) throw validation_error("rms: empty vector");
    return v.norm() / std::sqrt(static_cast<double>(v.size()));
}

} // namespace stdloc
