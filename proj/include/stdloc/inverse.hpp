#pragma once

#include <algorithm>
#include <vector>

#include "stdloc/errors.hpp"
#include "stdloc/forward.hpp"
#include "stdloc/linalg.hpp"

namespace stdloc {

// Gaussian linear model: zero-mean prior with covariance prior_cov on the
// sources, additive noise with covariance noise_cov on the sensors.
struct GaussianModel {
    Matrix prior_cov;  // n x n SPD
    Matrix noise_cov;  // m x m SPD

    void validate() const {
        require_symmetric(prior_cov, "GaussianModel.prior_cov", 1e-12);
        require_symmetric(noise_cov, "GaussianModel.noise_cov", 1e-12);
        if (eigen_extremes(prior_cov).first <= 0.0)
            throw validation_error("GaussianModel: prior_cov must be positive definite");
        if (eigen_extremes(noise_cov).first <= 0.0)
            throw validation_error("GaussianModel: noise_cov must be positive definite");
    }
};

inline GaussianModel scalar_model(int n, int m, double delta, double sigma) {
    GaussianModel model;
    model.prior_cov = delta * Matrix::Identity(n, n);
    model.noise_cov = sigma * sigma * Matrix::Identity(m, m);
    return model;
}

enum class ReconstructionKind { bmne, standardized, skf };

inline std::vector<int> argmax_set_of(const Vector& values,
                                      double tie_tol = kTieTolerance) {
    double peak = values.cwiseAbs().maxCoeff();
    std::vector<int> set;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (std::abs(values[i]) >= peak * (1.0 - tie_tol)) set.push_back(static_cast<int>(i));
    return set;
}

inline int argmax_abs(const Vector& values) {
    Eigen::Index idx = 0;
    values.cwiseAbs().maxCoeff(&idx);
    return static_cast<int>(idx);
}

// A length-n source-space vector together with the indices attaining its
// maximum magnitude (within the relative tie tolerance).
struct Reconstruction {
    Vector values;
    ReconstructionKind kind = ReconstructionKind::bmne;
    std::vector<int> argmax_set;

    static Reconstruction make(Vector v, ReconstructionKind k) {
        Reconstruction r;
        r.values = std::move(v);
        r.kind = k;
        r.argmax_set = argmax_set_of(r.values);
        return r;
    }
};

// Posterior-mean (minimum-norm) estimate
//   xhat = prior L^T (L prior L^T + noise)^{-1} y.
inline Reconstruction bmne_map(const SystemMatrix& L, const GaussianModel& model,
                               const Vector& y) {
    if (y.size() != L.rows())
        throw validation_error("bmne_map: measurement length mismatch");
    if (model.prior_cov.rows() != L.cols() || model.noise_cov.rows() != L.rows())
        throw validation_error("bmne_map: model dimension mismatch");
    Matrix sigma = symmetrize(L.entries * model.prior_cov * L.entries.transpose() +
                              model.noise_cov);
    SpdSolver solver(sigma, "bmne_map");
    Vector xhat = model.prior_cov * (L.entries.transpose() * solver.solve(y));
    return Reconstruction::make(std::move(xhat), ReconstructionKind::bmne);
}

// Resolution matrix R = prior L^T (L prior L^T + noise)^{-1} L; column k is the
// point-spread response of a unit source at node k.
inline Matrix resolution_matrix(const SystemMatrix& L, const GaussianModel& model) {
    Matrix sigma = symmetrize(L.entries * model.prior_cov * L.entries.transpose() +
                              model.noise_cov);
    SpdSolver solver(sigma, "resolution_matrix");
    return model.prior_cov * (L.entries.transpose() * solver.solve(L.entries));
}

inline Reconstruction standardize_diagonal(const Reconstruction& xhat,
                                           const Matrix& R) {
    if (R.rows() != xhat.values.size())
        throw validation_error("standardize_diagonal: dimension mismatch");
    Vector z(xhat.values.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        double rkk = R(k, k);
        if (rkk <= kEpsFloor)
            throw numeric_error(
                "standardize_diagonal: degenerate resolution at node " +
                std::to_string(k));
        z[k] = xhat.values[k] / std::sqrt(rkk);
    }
    return Reconstruction::make(std::move(z), ReconstructionKind::standardized);
}

// Standardization weights for a general (possibly non-diagonal) prior:
//   T = prior^{1/2} Diag( prior^{1/2} L^T Sigma^{-1} L prior^{1/2} )^{1/2} prior^{-1/2}.
// For a diagonal prior this reduces to Diag(R)^{1/2}.
inline Matrix generalized_weights(const SystemMatrix& L, const GaussianModel& model) {
    SqrtPair gs = matrix_sqrt_spd_pair(model.prior_cov);
    Matrix B = L.entries * gs.sqrt;
    Matrix sigma = symmetrize(B * B.transpose() + model.noise_cov);
    SpdSolver solver(sigma, "generalized_weights");
    Matrix inner = B.transpose() * solver.solve(B);
    Vector d = inner.diagonal();
    for (Eigen::Index k = 0; k < d.size(); ++k)
        if (d[k] <= kEpsFloor)
            throw numeric_error("generalized_weights: degenerate resolution at node " +
                                std::to_string(k));
    return gs.sqrt * d.cwiseSqrt().asDiagonal() * gs.inv_sqrt;
}

// Standardized estimate z = T^{-1} xhat, evaluated without forming T:
//   z = prior^{1/2} Diag(d)^{-1/2} prior^{-1/2} xhat,  d = diag(B^T Sigma^{-1} B).
inline Reconstruction standardized_estimate(const SystemMatrix& L,
                                            const GaussianModel& model,
                                            const Vector& y) {
    if (y.size() != L.rows())
        throw validation_error("standardized_estimate: measurement length mismatch");
    SqrtPair gs = matrix_sqrt_spd_pair(model.prior_cov);
    Matrix B = L.entries * gs.sqrt;
    Matrix sigma = symmetrize(B * B.transpose() + model.noise_cov);
    SpdSolver solver(sigma, "standardized_estimate");
    Matrix X = solver.solve(B);                       // Sigma^{-1} B
    Vector d = (B.transpose() * X).diagonal();
    for (Eigen::Index k = 0; k < d.size(); ++k)
        if (d[k] <= kEpsFloor)
            throw numeric_error("standardized_estimate: degenerate resolution at node " +
                                std::to_string(k));
    Vector xhat = model.prior_cov * (L.entries.transpose() * solver.solve(y));
    Vector z = gs.sqrt * (d.cwiseSqrt().cwiseInverse().asDiagonal() *
                          (gs.inv_sqrt * xhat));
    return Reconstruction::make(std::move(z), ReconstructionKind::standardized);
}

// Precomputed linear map y -> standardized values for a diagonal prior;
// amortizes the factorization across many measurement draws.
struct StandardizedOperator {
    Matrix map;  // n x m, z = map * y

    static StandardizedOperator build(const SystemMatrix& L, const Vector& prior_diag,
                                      const Matrix& noise_cov) {
        Matrix sigma = symmetrize(L.entries * prior_diag.asDiagonal() *
                                      L.entries.transpose() + noise_cov);
        SpdSolver solver(sigma, "StandardizedOperator");
        Matrix X = solver.solve(L.entries);           // Sigma^{-1} L
        Vector d = (L.entries.transpose() * X).diagonal().cwiseProduct(prior_diag);
        StandardizedOperator op;
        op.map.resize(L.cols(), L.rows());
        for (Eigen::Index k = 0; k < L.cols(); ++k) {
            if (d[k] <= kEpsFloor)
                throw numeric_error("StandardizedOperator: degenerate resolution at node " +
                                    std::to_string(k));
            op.map.row(k) = (prior_diag[k] / std::sqrt(d[k])) * X.col(k).transpose();
        }
        return op;
    }

    Vector apply(const Vector& y) const { return map * y; }
};

// Noise-metric cosine similarity y^T C^{-1} v / sqrt((y^T C^{-1} y)(v^T C^{-1} v)).
inline double nsp(const Vector& y, const Vector& v, const Matrix& noise_cov) {
    if (y.norm() == 0.0 || v.norm() == 0.0)
        throw validation_error("nsp: undefined projection for a zero vector");
    SpdSolver solver(noise_cov, "nsp");
    Vector ciy = solver.solve(y);
    Vector civ = solver.solve(v);
    return y.dot(civ) / std::sqrt(y.dot(ciy) * v.dot(civ));
}

inline double scalar_rejection(const Vector& y, const Vector& v,
                               const Matrix& noise_cov) {
    return 1.0 - nsp(y, v, noise_cov);
}

inline double mahalanobis(const Vector& u, const Vector& v, const Matrix& sigma) {
    if (u.size() != v.size())
        throw validation_error("mahalanobis: dimension mismatch");
    if (eigen_extremes(sigma).first <= 0.0)
        throw validation_error("mahalanobis: covariance must be positive definite");
    SpdSolver solver(sigma, "mahalanobis");
    Vector d = u - v;
    return std::sqrt(d.dot(solver.solve(d)));
}

inline constexpr double kFeasibleTolDefault = 1e-8;

struct FeasibleSet {
    std::vector<int> indices;
    double tolerance = kFeasibleTolDefault;
};

// Columns of `B` whose |noise-metric projection| onto y is 1 within `tol`.
// Anti-parallel columns count as members: the source amplitude carries the sign.
inline FeasibleSet feasible_set(const Matrix& B, const Vector& y,
                                const Matrix& noise_cov,
                                double tol = kFeasibleTolDefault) {
    if (!(tol >= 0.0 && tol < 1.0))
        throw validation_error("feasible_set: tol must lie in [0, 1)");
    if (y.norm() == 0.0)
        throw validation_error("feasible_set: undefined projection for a zero vector");
    SpdSolver solver(noise_cov, "feasible_set");
    Vector ciy = solver.solve(y);
    double ynorm2 = y.dot(ciy);
    FeasibleSet out;
    out.tolerance = tol;
    for (Eigen::Index k = 0; k < B.cols(); ++k) {
        Vector col = B.col(k);
        if (col.norm() == 0.0)
            throw validation_error("feasible_set: undefined projection for a zero column");
        double p = col.dot(ciy) / std::sqrt(ynorm2 * col.dot(solver.solve(col)));
        if (1.0 - std::abs(p) <= tol) out.indices.push_back(static_cast<int>(k));
    }
    return out;
}

} // namespace stdloc
