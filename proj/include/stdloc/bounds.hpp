#pragma once

#include <optional>
#include <string>

#include "stdloc/errors.hpp"
#include "stdloc/forward.hpp"
#include "stdloc/inverse.hpp"
#include "stdloc/linalg.hpp"
#include "stdloc/special.hpp"

namespace stdloc {

enum class BoundVariant { eigen, snr };

inline const char* to_string(BoundVariant v) {
    return v == BoundVariant::eigen ? "eigen" : "snr";
}

// Analytic lower bound on the probability that the standardized estimate peaks
// at the true node, together with the quantities entering it.
struct BoundReport {
    int node = -1;
    double theta = 0.0;            // admissible separation margin, in (0, 1]
    double quadratic_form = 0.0;   // Lhat_k^T Sigma^{-1} Lhat_k
    double lambda_min_sigma = 0.0;
    double lambda_max_sigma = 0.0;
    double lambda_max_c = 0.0;
    double probability = 0.0;
    BoundVariant variant = BoundVariant::eigen;
    int effective_m = 0;           // sensor-space dimension actually used
    std::string caveat;
};

// Orthonormal basis of the zero-sum subspace of R^m (columns orthogonal to the
// all-ones vector), built from a single deterministic Householder reflector.
inline Matrix mean_free_basis(int m) {
    if (m < 2) throw validation_error("mean_free_basis: need at least 2 sensors");
    Vector v = Vector::Constant(m, 1.0 / std::sqrt(double(m)));
    v[0] -= 1.0;
    Matrix H = Matrix::Identity(m, m) - (2.0 / v.squaredNorm()) * (v * v.transpose());
    return H.rightCols(m - 1);
}

// Tightest admissible separation margin for node k: the smallest value of
// 1 - |nsp_Sigma(Lhat_k, Lhat_i)| over columns i outside the feasible set of
// Lhat_k. Columns inside the feasible set are indistinguishable from k and do
// not constrain the margin.
inline double theta_for(int k, const Matrix& Lhat, const Matrix& sigma,
                        const FeasibleSet& sk) {
    if (k < 0 || k >= Lhat.cols())
        throw validation_error("theta_for: node index out of range");
    SpdSolver solver(sigma, "theta_for");
    Vector sik = solver.solve(Vector(Lhat.col(k)));
    double qk = Lhat.col(k).dot(sik);
    std::vector<bool> feasible(Lhat.cols(), false);
    for (int i : sk.indices) feasible[i] = true;
    double theta = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < Lhat.cols(); ++i) {
        if (feasible[i]) continue;
        double qi = Lhat.col(i).dot(solver.solve(Vector(Lhat.col(i))));
        double p = std::abs(Lhat.col(i).dot(sik)) / std::sqrt(qk * qi);
        theta = std::min(theta, 1.0 - p);
    }
    if (!std::isfinite(theta))
        throw validation_error("theta_for: trivial problem, every column is "
                               "feasible for node " + std::to_string(k));
    return theta;
}

namespace detail {

// Common-average-referenced systems annihilate the all-ones direction, which
// drives lambda_min(Sigma) down to lambda_min(C) and makes the bound vacuous.
// The peak statistic is invariant to that direction, so when every column is
// zero-sum the bound is evaluated on the (m-1)-dimensional zero-sum subspace.
struct DeflatedSystem {
    Matrix Lhat;
    Matrix noise_cov;
    int effective_m = 0;
    bool deflated = false;
};

inline DeflatedSystem deflate_if_zero_sum(const Matrix& Lhat, const Matrix& C) {
    DeflatedSystem out;
    int m = static_cast<int>(Lhat.rows());
    double scale = std::max(1.0, Lhat.cwiseAbs().maxCoeff());
    double colsum = (Vector::Ones(m).transpose() * Lhat).cwiseAbs().maxCoeff();
    if (m >= 2 && colsum <= 1e-10 * scale) {
        Matrix Q = mean_free_basis(m);
        out.Lhat = Q.transpose() * Lhat;
        out.noise_cov = symmetrize(Q.transpose() * C * Q);
        out.effective_m = m - 1;
        out.deflated = true;
    } else {
        out.Lhat = Lhat;
        out.noise_cov = C;
        out.effective_m = m;
        out.deflated = false;
    }
    return out;
}

inline std::string bound_caveat(bool deflated) {
    std::string c = "assumes the signal term dominates the noise at the true "
                    "node; not verified per draw";
    if (deflated)
        c += "; evaluated on the zero-sum subspace of the referenced data "
             "(effective sensor count m-1)";
    return c;
}

} // namespace detail

// Lower bound on the perfect-localization probability at node k:
//   P >= Ga( theta^2 lambda_min(Sigma) (Lhat_k^T Sigma^{-1} Lhat_k)
//            / (2 lambda_max(C)); m/2 ).
// If a prior covariance is supplied the system matrix is whitened to
// Lhat = L prior^{1/2} first.
inline BoundReport localization_bound(int k, const SystemMatrix& L,
                                      const Matrix& noise_cov,
                                      const std::optional<Matrix>& prior_cov =
                                          std::nullopt) {
    if (k < 0 || k >= L.cols())
        throw validation_error("localization_bound: node index out of range");
    if (noise_cov.rows() != L.rows())
        throw validation_error("localization_bound: noise covariance size mismatch");
    Matrix lhat = L.entries;
    if (prior_cov) {
        if (prior_cov->rows() != L.cols())
            throw validation_error("localization_bound: prior covariance size mismatch");
        lhat = L.entries * matrix_sqrt_psd(*prior_cov);
    }
    detail::DeflatedSystem sys = detail::deflate_if_zero_sum(lhat, noise_cov);
    Matrix sigma = symmetrize(sys.Lhat * sys.Lhat.transpose() + sys.noise_cov);

    BoundReport rep;
    rep.node = k;
    rep.variant = BoundVariant::eigen;
    rep.effective_m = sys.effective_m;
    rep.caveat = detail::bound_caveat(sys.deflated);
    FeasibleSet sk = feasible_set(sys.Lhat, Vector(sys.Lhat.col(k)), sigma);
    rep.theta = theta_for(k, sys.Lhat, sigma, sk);
    SpdSolver solver(sigma, "localization_bound");
    rep.quadratic_form = sys.Lhat.col(k).dot(solver.solve(Vector(sys.Lhat.col(k))));
    auto [smin, smax] = eigen_extremes(sigma);
    rep.lambda_min_sigma = smin;
    rep.lambda_max_sigma = smax;
    rep.lambda_max_c = eigen_extremes(sys.noise_cov).second;
    double arg = rep.theta * rep.theta * rep.lambda_min_sigma * rep.quadratic_form /
                 (2.0 * rep.lambda_max_c);
    rep.probability = reg_lower_gamma(0.5 * sys.effective_m, arg);
    return rep;
}

// SNR corollary of the bound, valid for i.i.d. noise C = sigma^2 I:
//   P >= Ga( theta^2 (lambda_min(Sigma) / (2 lambda_max(Sigma))) SNR; m/2 ).
inline BoundReport snr_bound(int k, const SystemMatrix& L, const Matrix& noise_cov,
                             double snr) {
    if (k < 0 || k >= L.cols())
        throw validation_error("snr_bound: node index out of range");
    if (noise_cov.rows() != L.rows())
        throw validation_error("snr_bound: noise covariance size mismatch");
    if (!(snr >= 0.0))
        throw validation_error("snr_bound: snr must be nonnegative");
    double c00 = noise_cov(0, 0);
    double scale = std::max(1.0, std::abs(c00));
    if (!is_diagonal(noise_cov) ||
        (noise_cov.diagonal().array() - c00).abs().maxCoeff() > 1e-12 * scale)
        throw validation_error("snr_bound: variant requires scalar noise covariance "
                               "sigma^2 I");
    detail::DeflatedSystem sys = detail::deflate_if_zero_sum(L.entries, noise_cov);
    Matrix sigma = symmetrize(sys.Lhat * sys.Lhat.transpose() + sys.noise_cov);

    BoundReport rep;
    rep.node = k;
    rep.variant = BoundVariant::snr;
    rep.effective_m = sys.effective_m;
    rep.caveat = detail::bound_caveat(sys.deflated);
    FeasibleSet sk = feasible_set(sys.Lhat, Vector(sys.Lhat.col(k)), sigma);
    rep.theta = theta_for(k, sys.Lhat, sigma, sk);
    SpdSolver solver(sigma, "snr_bound");
    rep.quadratic_form = sys.Lhat.col(k).dot(solver.solve(Vector(sys.Lhat.col(k))));
    auto [smin, smax] = eigen_extremes(sigma);
    rep.lambda_min_sigma = smin;
    rep.lambda_max_sigma = smax;
    rep.lambda_max_c = eigen_extremes(sys.noise_cov).second;
    double arg = rep.theta * rep.theta * (smin / (2.0 * smax)) * snr;
    rep.probability = reg_lower_gamma(0.5 * sys.effective_m, arg);
    return rep;
}

} // namespace stdloc
