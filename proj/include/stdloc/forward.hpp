#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "stdloc/errors.hpp"
#include "stdloc/geometry.hpp"
#include "stdloc/linalg.hpp"
#include "stdloc/rng.hpp"

namespace stdloc {

// Boundary potential of a unit-strength point dipole inside the unit disk
// with zero Neumann flux, u_p(x) = -p . grad_y N(x, y), where
//   N(x, y) = -(1/2pi) ( ln|x - y|  +  ln( |y| |x - y/|y|^2| ) )
// is the Neumann function of the disk. The image term is evaluated through
// w = |y| x - y/|y|, which stays finite as the source approaches the center;
// its y-gradient is
//   grad_y ln( |y| |x - y*| ) = [ yhat (x . w) - (x - yhat (yhat . x)) ] / |w|^2 .
// The result carries the usual additive-constant ambiguity of a Neumann
// problem; callers remove it by referencing.
inline double dipole_boundary_potential(const Vector2& source,
                                        const Vector2& moment,
                                        const Vector2& boundary_point) {
    if (!(source.norm() < 1.0 - kBoundaryMargin))
        throw validation_error(
            "dipole_boundary_potential: source must lie strictly inside the disk "
            "(image-source singularity at the boundary)");
    if (std::abs(boundary_point.norm() - 1.0) > 1e-12)
        throw validation_error(
            "dipole_boundary_potential: evaluation point must lie on the unit circle");
    if (!moment.allFinite())
        throw validation_error("dipole_boundary_potential: moment must be finite");

    const Vector2& x = boundary_point;
    const Vector2& y = source;
    const double r = y.norm();

    Vector2 d = y - x;
    Vector2 g_free = d / d.squaredNorm();  // grad_y ln|x - y|

    Vector2 yhat = r > 1e-300 ? Vector2(y / r) : Vector2(1.0, 0.0);
    Vector2 w = r * x - yhat;
    double w2 = w.squaredNorm();
    double xw = x.dot(w);
    Vector2 x_perp = x - yhat * yhat.dot(x);
    Vector2 g_image = (yhat * xw - x_perp) / w2;

    Vector2 grad_n = -(0.5 / kPi) * (g_free + g_image);
    return -moment.dot(grad_n);
}

// Forward operator: row per sensor, column per node. Each column holds the
// common-average-referenced boundary potentials of that node's unit dipole.
struct SystemMatrix {
    Matrix entries;  // m x n

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }

    void validate() const {
        for (Eigen::Index k = 0; k < entries.cols(); ++k) {
            double colsum = entries.col(k).sum();
            double scale = std::max(1.0, entries.col(k).cwiseAbs().maxCoeff());
            if (std::abs(colsum) > 1e-10 * scale)
                throw validation_error("SystemMatrix: column does not sum to zero");
            if (entries.col(k).norm() == 0.0)
                throw validation_error("SystemMatrix: zero column");
        }
    }
};

inline Vector common_average_reference(const Vector& v) {
    return v.array() - v.mean();
}

inline SystemMatrix assemble_system_matrix(const DiskGeometry& g) {
    g.validate();
    const int m = g.sensor_count();
    const int n = g.node_count();
    SystemMatrix L;
    L.entries.resize(m, n);
    for (int k = 0; k < n; ++k) {
        Vector col(m);
        for (int i = 0; i < m; ++i)
            col[i] = dipole_boundary_potential(g.nodes[k], g.orientations[k],
                                               g.sensors[i]);
        L.entries.col(k) = common_average_reference(col);
    }
    L.validate();
    return L;
}

// Referenced boundary data of a dipole at an arbitrary interior point (not
// necessarily a grid node).
inline Vector measurement_of_dipole(const DiskGeometry& g, const Vector2& source,
                                    const Vector2& moment) {
    Vector y(g.sensor_count());
    for (int i = 0; i < g.sensor_count(); ++i)
        y[i] = dipole_boundary_potential(source, moment, g.sensors[i]);
    return common_average_reference(y);
}

struct Measurements {
    Vector values;
    double noise_percent = 0.0;
    std::uint64_t seed = 0;
};

// Noise scale convention used throughout: sigma is `percent` percent of the
// root-mean-square of the clean signal vector.
inline double noise_sigma(const Vector& clean, double noise_percent) {
    if (noise_percent < 0.0)
        throw validation_error("noise_sigma: noise_percent must be >= 0");
    return noise_percent / 100.0 * rms(clean);
}

inline Measurements simulate_measurements(const SystemMatrix& L, const Vector& x,
                                          double noise_percent,
                                          std::uint64_t seed) {
    if (x.size() != L.cols())
        throw validation_error("simulate_measurements: dimension mismatch");
    if (noise_percent < 0.0)
        throw validation_error("simulate_measurements: noise_percent must be >= 0");
    Vector clean = L.entries * x;
    Measurements out{clean, noise_percent, seed};
    if (noise_percent > 0.0) {
        double sigma = noise_sigma(clean, noise_percent);
        if (sigma == 0.0)
            throw validation_error(
                "simulate_measurements: degenerate signal, L*x is zero so the "
                "noise scale is undefined");
        NormalSampler normal(mix_seed(seed));
        for (Eigen::Index i = 0; i < out.values.size(); ++i)
            out.values[i] += sigma * normal();
    }
    return out;
}

// Signal-to-noise ratio ||L_k||^2 / sigma^2 for a unit source at node k under
// the RMS noise convention.
inline double snr_of(const SystemMatrix& L, int k, double noise_percent) {
    if (k < 0 || k >= L.cols()) throw validation_error("snr_of: node index out of range");
    if (noise_percent == 0.0)
        throw validation_error("snr_of: infinite SNR at zero noise");
    if (noise_percent < 0.0)
        throw validation_error("snr_of: noise_percent must be positive");
    Vector col = L.entries.col(k);
    double sigma = noise_sigma(col, noise_percent);
    return col.squaredNorm() / (sigma * sigma);
}

inline double snr_db(double snr) { return 10.0 * std::log10(snr); }

} // namespace stdloc
