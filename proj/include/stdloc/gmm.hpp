#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "stdloc/errors.hpp"
#include "stdloc/linalg.hpp"
#include "stdloc/rng.hpp"

namespace stdloc {

struct GmmComponent {
    Vector2 mean = Vector2::Zero();
    Matrix2 cov = Matrix2::Identity();
    double weight = 0.5;
};

struct GmmSummary {
    std::array<GmmComponent, 2> components;
    double ellipse_level = 0.75;
    double log_likelihood = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline double gauss2_density(const Vector2& x, const Vector2& mu, const Matrix2& cov) {
    double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    if (det <= 0.0) return 0.0;
    Matrix2 inv;
    inv << cov(1, 1), -cov(0, 1), -cov(1, 0), cov(0, 0);
    inv /= det;
    Vector2 d = x - mu;
    double q = d.dot(inv * d);
    return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(det));
}

} // namespace detail

// Two-component full-covariance Gaussian mixture fitted by EM. Restarts are
// initialized at two distinct sample points with the pooled covariance; the
// best of 8 restarts (by final log-likelihood) wins. A 1e-6 * I floor keeps
// component covariances SPD throughout.
inline GmmSummary gmm_fit_2(const std::vector<Vector2>& points, std::uint64_t seed) {
    const std::size_t n = points.size();
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j)
            if (points[j] == points[i]) { seen = true; break; }
        if (!seen) ++distinct;
    }
    if (distinct < 4)
        throw validation_error("gmm_fit_2: degenerate cluster input, need at least "
                               "4 distinct points");

    Vector2 pooled_mean = Vector2::Zero();
    for (const auto& p : points) pooled_mean += p;
    pooled_mean /= double(n);
    Matrix2 pooled_cov = Matrix2::Zero();
    for (const auto& p : points) {
        Vector2 d = p - pooled_mean;
        pooled_cov += d * d.transpose();
    }
    pooled_cov /= double(n);
    pooled_cov += 1e-6 * Matrix2::Identity();

    NormalSampler rng(mix_seed(seed, 0, 0, 0));
    GmmSummary best;

    for (int restart = 0; restart < 8; ++restart) {
        std::size_t i0 = rng.uniform_index(n);
        std::size_t i1 = rng.uniform_index(n);
        while (points[i1] == points[i0]) i1 = rng.uniform_index(n);

        std::array<Vector2, 2> mu = {points[i0], points[i1]};
        std::array<Matrix2, 2> cov = {pooled_cov, pooled_cov};
        std::array<double, 2> w = {0.5, 0.5};
        double ll = -std::numeric_limits<double>::infinity();
        double prev = std::numeric_limits<double>::quiet_NaN();
        bool failed = false;

        std::vector<std::array<double, 2>> resp(n);
        for (int iter = 0; iter < 500; ++iter) {
            ll = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double r0 = w[0] * detail::gauss2_density(points[i], mu[0], cov[0]);
                double r1 = w[1] * detail::gauss2_density(points[i], mu[1], cov[1]);
                double tot = std::max(r0 + r1, 1e-300);
                ll += std::log(tot);
                resp[i] = {r0 / tot, r1 / tot};
            }
            for (int c = 0; c < 2; ++c) {
                double nk = 0.0;
                for (std::size_t i = 0; i < n; ++i) nk += resp[i][c];
                if (nk < 1e-12) { failed = true; break; }
                Vector2 m = Vector2::Zero();
                for (std::size_t i = 0; i < n; ++i) m += resp[i][c] * points[i];
                m /= nk;
                Matrix2 s = Matrix2::Zero();
                for (std::size_t i = 0; i < n; ++i) {
                    Vector2 d = points[i] - m;
                    s += resp[i][c] * (d * d.transpose());
                }
                s /= nk;
                mu[c] = m;
                cov[c] = s + 1e-6 * Matrix2::Identity();
                w[c] = nk / double(n);
            }
            if (failed) break;
            if (std::isfinite(prev) && std::abs(ll - prev) < 1e-8 * std::abs(prev))
                break;
            prev = ll;
        }
        if (failed) continue;
        if (ll > best.log_likelihood) {
            best.log_likelihood = ll;
            for (int c = 0; c < 2; ++c) {
                best.components[c].mean = mu[c];
                best.components[c].cov = cov[c];
                best.components[c].weight = w[c];
            }
        }
    }
    if (!std::isfinite(best.log_likelihood))
        throw numeric_error("gmm_fit_2: EM failed to produce a valid fit");
    return best;
}

} // namespace stdloc
