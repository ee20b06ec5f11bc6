#pragma once

// Shared fixtures for the test suite: seeded random matrices/vectors and a
// small disk geometry that keeps per-test runtimes low.

#include <random>

#include "stdloc/experiments.hpp"
#include "stdloc/linalg.hpp"

namespace testutil {

using stdloc::Matrix;
using stdloc::Vector;

inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

inline Matrix random_matrix(int m, int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Matrix a(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = d(rng);
    return a;
}

inline Matrix random_orthogonal(int n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
    Matrix q = qr.householderQ();
    return q;
}

// SPD matrix with a known spectrum: Q diag(eigs) Q^T.
inline Matrix spd_with_eigenvalues(const Vector& eigs, std::mt19937_64& rng) {
    Matrix q = random_orthogonal(static_cast<int>(eigs.size()), rng);
    return q * eigs.asDiagonal() * q.transpose();
}

inline Matrix random_spd(int n, std::mt19937_64& rng, double lo = 0.5,
                         double hi = 3.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = u(rng);
    return spd_with_eigenvalues(eigs, rng);
}

// Small geometry pair (fast to assemble, still avoids shared nodes).
inline stdloc::GeometryPair small_pair() {
    return stdloc::make_geometry_pair(80, 56, 8, 0.0, stdloc::kPi,
                                      stdloc::OrientationMode::radial, 0.0);
}

// Default paper-scale pair, built once per binary.
inline const stdloc::GeometryPair& default_pair() {
    static stdloc::GeometryPair g = stdloc::make_geometry_pair(
        650, 455, 16, 0.0, stdloc::kPi, stdloc::OrientationMode::radial, 0.0);
    return g;
}

} // namespace testutil
