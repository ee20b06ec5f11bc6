#pragma once

#include <cmath>
#include <limits>

#include "stdloc/errors.hpp"

namespace stdloc {

// Regularized lower incomplete gamma function P(a,x) = γ(a,x)/Γ(a).
// Series expansion for x < a+1, continued fraction for the complement
// otherwise; both iterated to machine-precision relative convergence.
inline double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0)) throw validation_error("reg_lower_gamma: a must be > 0");
    if (x < 0.0) throw validation_error("reg_lower_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;

    const double lgam = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) = x^a e^-x / Γ(a) * Σ_{k>=0} x^k / (a(a+1)...(a+k))
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int k = 0; k < 500; ++k) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        double lg = a * std::log(x) - x - lgam;
        return std::min(1.0, sum * std::exp(lg));
    }
    // Q(a,x) via Lentz continued fraction, P = 1 - Q.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    double lg = a * std::log(x) - x - lgam;
    double q = std::exp(lg) * h;
    double p = 1.0 - q;
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

// Half-width of the Wilson score interval at 99% confidence for a binomial
// proportion with `hits` successes out of `samples`.
inline double wilson_half_width_99(long long hits, long long samples) {
    if (samples <= 0) throw validation_error("wilson_half_width_99: samples must be > 0");
    const double z = 2.5758293035489004;  // 99.5th percentile of N(0,1)
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    return (z / (1.0 + z2 / n)) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

} // namespace stdloc
