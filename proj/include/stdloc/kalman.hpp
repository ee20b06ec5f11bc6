#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stdloc/errors.hpp"
#include "stdloc/forward.hpp"
#include "stdloc/inverse.hpp"
#include "stdloc/linalg.hpp"

namespace stdloc {

// Linear state evolution x_t = A x_{t-1} + q_t, q_t ~ N(0, Q).
struct EvolutionModel {
    Matrix transition;   // A, n x n
    Matrix process_cov;  // Q, n x n symmetric PSD

    void validate() const {
        require_square(transition, "EvolutionModel.transition");
        require_symmetric(process_cov, "EvolutionModel.process_cov", 1e-12);
        if (transition.rows() != process_cov.rows())
            throw validation_error("EvolutionModel: transition/process_cov size mismatch");
        if (eigen_extremes(process_cov).first < -1e-12)
            throw validation_error("EvolutionModel: process_cov must be positive semidefinite");
    }
};

inline EvolutionModel random_walk_model(int n, double q_w) {
    EvolutionModel evo;
    evo.transition = Matrix::Identity(n, n);
    evo.process_cov = q_w * Matrix::Identity(n, n);
    return evo;
}

struct KalmanState {
    Vector mean;            // x_{t|t}
    Matrix cov;             // P_{t|t}
    Vector predicted_mean;  // x_{t|t-1}
    Matrix predicted_cov;   // P_{t|t-1}
    Matrix gain;            // K_t, n x m
    Matrix innovation_cov;  // S_t, m x m
    std::optional<Vector> standardized;  // z_{t|t}
    std::optional<Matrix> weights;       // W_t
};

inline KalmanState kf_init(Vector x0, Matrix p0) {
    if (p0.rows() != x0.size())
        throw validation_error("kf_init: state/covariance size mismatch");
    KalmanState s;
    s.mean = std::move(x0);
    s.cov = std::move(p0);
    return s;
}

inline KalmanState kf_predict(const KalmanState& prev, const EvolutionModel& evo) {
    if (evo.transition.cols() != prev.mean.size())
        throw validation_error("kf_predict: dimension mismatch");
    KalmanState s;
    // Identity transitions (random walks) are the common case; 1·x and +0·x are
    // exact in IEEE arithmetic, so skipping the dense products is bit-identical.
    if (evo.transition.isIdentity(0.0)) {
        s.predicted_mean = prev.mean;
        // With zero process noise the prediction is a true no-op; adding and
        // re-symmetrizing would perturb an unsymmetrized P0 at the last bit.
        s.predicted_cov = evo.process_cov.isZero(0.0)
                              ? prev.cov
                              : symmetrize(prev.cov + evo.process_cov);
    } else {
        s.predicted_mean = evo.transition * prev.mean;
        s.predicted_cov = symmetrize(
            evo.transition * prev.cov * evo.transition.transpose() + evo.process_cov);
    }
    return s;
}

inline KalmanState kf_update(const KalmanState& pred, const SystemMatrix& L,
                             const Matrix& measurement_cov, const Vector& y) {
    if (L.cols() != pred.predicted_mean.size() || y.size() != L.rows() ||
        measurement_cov.rows() != L.rows())
        throw validation_error("kf_update: dimension mismatch");
    KalmanState s = pred;
    s.innovation_cov = symmetrize(L.entries * pred.predicted_cov * L.entries.transpose() +
                                  measurement_cov);
    double cond = spd_condition(s.innovation_cov);
    if (!(cond <= kMaxCondition))
        throw numeric_error("kf_update: filter divergence, innovation covariance "
                            "ill-conditioned (cond > 1e12)");
    SpdSolver solver(s.innovation_cov, "kf_update");
    s.gain = pred.predicted_cov * L.entries.transpose() * solver.inverse();
    s.mean = pred.predicted_mean + s.gain * (y - L.entries * pred.predicted_mean);
    s.cov = symmetrize(pred.predicted_cov -
                       s.gain * s.innovation_cov * s.gain.transpose());
    return s;
}

// Post-hoc standardization weights
//   W_t = P⁻^{1/2} Diag(P⁻^{-1/2} K S Kᵀ P⁻^{-1/2})^{-1/2} P⁻^{-1/2},
// applied as z = W_t x_{t|t}. The diagonal being scaled is the per-node
// variance reduction achieved by the update, expressed in the metric of the
// predicted covariance.
inline KalmanState skf_standardize(const KalmanState& state) {
    if (state.predicted_cov.size() == 0 || state.gain.size() == 0)
        throw validation_error("skf_standardize: state lacks prediction/update fields");
    SqrtPair ps = matrix_sqrt_spd_pair(state.predicted_cov);
    Matrix ksk = state.gain * state.innovation_cov * state.gain.transpose();
    Matrix inner = ps.inv_sqrt * ksk * ps.inv_sqrt;
    Vector d = inner.diagonal();
    for (Eigen::Index k = 0; k < d.size(); ++k)
        if (d[k] <= kEpsFloor)
            throw numeric_error(
                "skf_standardize: degenerate resolution at node " + std::to_string(k) +
                " (node unobservable this step)");
    KalmanState s = state;
    s.weights = ps.sqrt * d.cwiseSqrt().cwiseInverse().asDiagonal() * ps.inv_sqrt;
    s.standardized = *s.weights * state.mean;
    return s;
}

inline std::vector<KalmanState> run_filter(const std::vector<Vector>& y_series,
                                           const SystemMatrix& L,
                                           const EvolutionModel& evo,
                                           const Matrix& measurement_cov,
                                           const Vector& x0, const Matrix& p0,
                                           bool standardize) {
    if (y_series.empty())
        throw validation_error("run_filter: empty measurement series");
    std::vector<KalmanState> out;
    out.reserve(y_series.size());
    KalmanState prev = kf_init(x0, p0);
    for (std::size_t t = 0; t < y_series.size(); ++t) {
        try {
            KalmanState s = kf_predict(prev, evo);
            s = kf_update(s, L, measurement_cov, y_series[t]);
            if (standardize) s = skf_standardize(s);
            out.push_back(std::move(s));
            prev = out.back();
        } catch (const error& e) {
            throw numeric_error("run_filter: step " + std::to_string(t) + ": " +
                                e.what());
        }
    }
    return out;
}

} // namespace stdloc
