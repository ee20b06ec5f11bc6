#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Sparse>

#include <cmath>
#include <utility>
#include <vector>

#include "stdloc/forward.hpp"
#include "helpers.hpp"

using namespace stdloc;
using Catch::Approx;

namespace {

// Oracle 1: circular-harmonics series. On the unit circle the disk Neumann
// function reduces to N = (1/pi) sum_k rho^k/k cos(k(theta-alpha)) with the
// source at polar (rho, alpha). Differentiating along the moment gives the
// boundary potential as a series in rho^{k-1} -- a derivation that never
// touches the image-source form under test.
double series_dipole_potential(const Vector2& source, const Vector2& moment,
                               double theta) {
    Vector2 x(std::cos(theta), std::sin(theta));
    double rho = source.norm();
    if (rho < 1e-12) return -moment.dot(x) / kPi;
    Vector2 yhat = source / rho;
    Vector2 ahat(-yhat.y(), yhat.x());
    double p_r = moment.dot(yhat);
    double p_a = moment.dot(ahat);
    double alpha = std::atan2(source.y(), source.x());
    double sum = 0.0;
    double rpow = 1.0;  // rho^{k-1}
    for (int k = 1; k <= 2000; ++k) {
        double ang = static_cast<double>(k) * (theta - alpha);
        double term = rpow * (p_r * std::cos(ang) + p_a * std::sin(ang));
        sum += term;
        rpow *= rho;
        if (rpow * moment.norm() < 1e-17) break;
    }
    return -sum / kPi;
}

// Oracle 2: finite-volume solver for the Neumann problem on the disk in polar
// coordinates. Cell centers r_i = (i+1/2) dr, theta_j = j dtheta; the dipole
// is modelled as a +/- monopole pair and charges are spread bilinearly onto
// the four surrounding cell centers so the pair's first moment is preserved.
struct PolarNeumannSolver {
    int nr, nt;
    double dr, dt;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    PolarNeumannSolver(int nr_, int nt_) : nr(nr_), nt(nt_) {
        dr = 1.0 / nr;
        dt = 2.0 * kPi / nt;
        const int n = nr * nt;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(5) * n);
        auto idx = [&](int i, int j) { return i * nt + ((j % nt + nt) % nt); };
        auto couple = [&](int a, int b, double c) {
            if (a != 0) {
                trip.emplace_back(a, a, -c);
                trip.emplace_back(a, b, c);
            }
            if (b != 0) {
                trip.emplace_back(b, b, -c);
                trip.emplace_back(b, a, c);
            }
        };
        for (int i = 0; i < nr; ++i) {
            double ri = (i + 0.5) * dr;
            for (int j = 0; j < nt; ++j) {
                // radial face at r = (i+1) dr; the outer boundary face (i =
                // nr-1) carries zero Neumann flux and is simply omitted
                if (i + 1 < nr)
                    couple(idx(i, j), idx(i + 1, j), (i + 1) * dr * dt / dr);
                // angular face towards j+1
                couple(idx(i, j), idx(i, j + 1), dr / (ri * dt));
            }
        }
        trip.emplace_back(0, 0, 1.0);  // pin one DoF of the singular system
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        lu.compute(A);
        REQUIRE(lu.info() == Eigen::Success);
    }

    Vector solve(const std::vector<std::pair<Vector2, double>>& charges) const {
        Vector rhs = Vector::Zero(nr * nt);
        for (const auto& [pos, q] : charges) {
            double rho = pos.norm();
            double phi = std::atan2(pos.y(), pos.x());
            if (phi < 0.0) phi += 2.0 * kPi;
            double fr = rho / dr - 0.5;
            double ft = phi / dt;
            int i0 = static_cast<int>(std::floor(fr));
            int j0 = static_cast<int>(std::floor(ft));
            double wr = fr - i0, wt = ft - j0;
            REQUIRE(i0 >= 0);
            REQUIRE(i0 + 1 < nr);
            auto dep = [&](int i, int j, double w) {
                rhs[i * nt + ((j % nt + nt) % nt)] -= q * w;  // rhs = -Q
            };
            dep(i0, j0, (1 - wr) * (1 - wt));
            dep(i0, j0 + 1, (1 - wr) * wt);
            dep(i0 + 1, j0, wr * (1 - wt));
            dep(i0 + 1, j0 + 1, wr * wt);
        }
        rhs[0] = 0.0;
        Vector u = lu.solve(rhs);
        return u;
    }

    // linear interpolation along the outermost cell-center ring; zero Neumann
    // flux makes that ring agree with the boundary trace to O(dr^2)
    double boundary_value(const Vector& u, double theta) const {
        if (theta < 0.0) theta += 2.0 * kPi;
        double ft = theta / dt;
        int j0 = static_cast<int>(std::floor(ft));
        double w = ft - j0;
        int a = (nr - 1) * nt + (j0 % nt + nt) % nt;
        int b = (nr - 1) * nt + ((j0 + 1) % nt + nt) % nt;
        return (1.0 - w) * u[a] + w * u[b];
    }
};

} // namespace

TEST_CASE("boundary potential matches the circular-harmonics series") {
    auto rng = testutil::rng_for(901);
    std::uniform_real_distribution<double> upos(-0.6, 0.6);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * kPi);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector2 y(upos(rng), upos(rng));
        if (y.norm() > 0.85) y *= 0.85 / y.norm();
        Vector2 p(nd(rng), nd(rng));
        double theta = uang(rng);
        Vector2 x(std::cos(theta), std::sin(theta));
        double closed = dipole_boundary_potential(y, p, x);
        double series = series_dipole_potential(y, p, theta);
        INFO("y=(" << y.x() << "," << y.y() << ") p=(" << p.x() << "," << p.y()
                   << ") theta=" << theta);
        REQUIRE(closed == Approx(series).margin(1e-10));
    }
    // dipole exactly at the center
    Vector2 p(0.7, -0.4);
    double th = 1.1;
    REQUIRE(dipole_boundary_potential(Vector2(0, 0), p, Vector2(std::cos(th), std::sin(th))) ==
            Approx(-p.dot(Vector2(std::cos(th), std::sin(th))) / kPi).margin(1e-14));
}

TEST_CASE("boundary potential matches a finite-volume Neumann solver") {
    PolarNeumannSolver solver(160, 192);
    const double eps = 0.04;

    auto sensors = sensors_on_arc(16, 0.0, kPi);
    std::vector<double> angles;
    for (const auto& s : sensors) angles.push_back(std::atan2(s.y(), s.x()));

    struct Case {
        Vector2 source, moment;
    };
    std::vector<Case> cases = {
        {Vector2(0.2, 0.6), Vector2(0.2, 0.6).normalized()},
        {Vector2(-0.1, -0.3), Vector2(0.8, 0.6)},
        {Vector2(0.55, 0.1), Vector2(-0.3, 1.1)},
    };
    for (const auto& c : cases) {
        // The dipole convention here is the charge-pair limit with the
        // positive monopole displaced along -p (center dipole -> -p.x/pi), so
        // the finite-volume stand-in puts +q on the -p side.
        Vector2 phat = c.moment.normalized();
        double q = c.moment.norm() / eps;
        Vector u = solver.solve({{c.source - 0.5 * eps * phat, q},
                                 {c.source + 0.5 * eps * phat, -q}});
        Vector fd(16), an(16);
        for (int i = 0; i < 16; ++i) {
            fd[i] = solver.boundary_value(u, angles[i]);
            an[i] = dipole_boundary_potential(c.source, c.moment, sensors[i]);
        }
        Vector fd_ref = common_average_reference(fd);
        Vector an_ref = common_average_reference(an);
        double rel = (fd_ref - an_ref).norm() / an_ref.norm();
        INFO("source=(" << c.source.x() << "," << c.source.y() << ") rel=" << rel);
        REQUIRE(rel < 1.5e-3);
    }
}

TEST_CASE("boundary potential input validation") {
    REQUIRE_THROWS_AS(
        dipole_boundary_potential(Vector2(0.9995, 0.0), Vector2(1, 0), Vector2(1, 0)),
        validation_error);
    REQUIRE_THROWS_AS(
        dipole_boundary_potential(Vector2(0.2, 0.2), Vector2(1, 0), Vector2(0.5, 0)),
        validation_error);
    double nan = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(
        dipole_boundary_potential(Vector2(0.2, 0.2), Vector2(nan, 0), Vector2(1, 0)),
        validation_error);
}

TEST_CASE("boundary potential is exactly linear in the moment") {
    Vector2 y(0.3, -0.2), x(std::cos(2.2), std::sin(2.2));
    Vector2 p1(0.4, 1.1), p2(-0.9, 0.3);
    double a = dipole_boundary_potential(y, p1, x);
    double b = dipole_boundary_potential(y, p2, x);
    double ab = dipole_boundary_potential(y, Vector2(p1 + p2), x);
    REQUIRE(ab == Approx(a + b).margin(1e-15));
    double sa = dipole_boundary_potential(y, Vector2(2.5 * p1), x);
    REQUIRE(sa == Approx(2.5 * a).margin(1e-15));
}

TEST_CASE("common average referencing") {
    Vector v(4);
    v << 1.0, 2.0, 3.0, 10.0;
    Vector r = common_average_reference(v);
    REQUIRE(r.sum() == Approx(0.0).margin(1e-14));
    REQUIRE(r[0] == Approx(1.0 - 4.0).margin(1e-14));
    // idempotent and invariant to constant shifts
    Vector rr = common_average_reference(r);
    REQUIRE((rr - r).norm() == Approx(0.0).margin(1e-14));
    Vector shifted = v.array() + 123.0;
    REQUIRE((common_average_reference(shifted) - r).norm() == Approx(0.0).margin(1e-11));
}

TEST_CASE("system matrix assembly") {
    const auto& pair = testutil::default_pair();
    const SystemMatrix& L = pair.forward_matrix;
    REQUIRE(L.rows() == 16);
    REQUIRE(L.cols() == 657);
    REQUIRE_NOTHROW(L.validate());
    for (Eigen::Index k = 0; k < L.entries.cols(); ++k)
        REQUIRE(std::abs(L.entries.col(k).sum()) < 1e-10);

    // every node produces a distinct sensor signature
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < L.cols(); ++i)
        for (int j = i + 1; j < L.cols(); ++j)
            min_gap = std::min(min_gap, (L.entries.col(i) - L.entries.col(j)).norm());
    REQUIRE(min_gap > 1e-6);

    // matrix columns agree with single-dipole measurements at the nodes
    const DiskGeometry& g = pair.forward;
    for (int k : {0, 100, 333}) {
        Vector m = measurement_of_dipole(g, g.nodes[k], g.orientations[k]);
        REQUIRE((m - L.entries.col(k)).norm() == Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("mirror-symmetric sources produce mirrored sensor data") {
    DiskGeometry g;
    g.nodes = {Vector2(0.4, 0.0), Vector2(-0.4, 0.0)};
    g.orientations = {Vector2(1.0, 0.0), Vector2(-1.0, 0.0)};
    g.sensors = sensors_on_arc(8, 0.0, kPi);
    g.mesh_spacing = 0.8;
    SystemMatrix L = assemble_system_matrix(g);
    // reflecting x -> -x maps sensor i to sensor 7-i and the first dipole to
    // the second, so the two columns must be reverses of each other
    for (int i = 0; i < 8; ++i)
        REQUIRE(L.entries(i, 0) == Approx(L.entries(7 - i, 1)).margin(1e-13));
}

TEST_CASE("measurement noise model") {
    const auto& pair = testutil::default_pair();
    const SystemMatrix& L = pair.forward_matrix;
    Vector x = Vector::Zero(L.cols());
    x[123] = 1.0;
    Vector clean = L.entries * x;

    SECTION("sigma is percent of the signal RMS") {
        double sigma = noise_sigma(clean, 5.0);
        REQUIRE(sigma == Approx(0.05 * clean.norm() / std::sqrt(16.0)).margin(1e-15));
        REQUIRE_THROWS_AS(noise_sigma(clean, -1.0), validation_error);
    }

    SECTION("zero noise reproduces the clean signal") {
        Measurements m = simulate_measurements(L, x, 0.0, 7);
        REQUIRE((m.values - clean).norm() == 0.0);
    }

    SECTION("fixed seed is deterministic, different seeds differ") {
        Measurements a = simulate_measurements(L, x, 5.0, 42);
        Measurements b = simulate_measurements(L, x, 5.0, 42);
        Measurements c = simulate_measurements(L, x, 5.0, 43);
        REQUIRE((a.values - b.values).norm() == 0.0);
        REQUIRE((a.values - c.values).norm() > 0.0);
    }

    SECTION("empirical noise scale over many replicates") {
        const int reps = 10000;
        double target = noise_sigma(clean, 3.0);
        double ss = 0.0;
        for (int r = 0; r < reps; ++r) {
            Measurements m = simulate_measurements(L, x, 3.0, 1000 + r);
            ss += (m.values - clean).squaredNorm();
        }
        double pooled = std::sqrt(ss / (reps * 16.0));
        REQUIRE(pooled == Approx(target).epsilon(0.01));
    }

    SECTION("degenerate inputs are rejected") {
        Vector zero = Vector::Zero(L.cols());
        REQUIRE_THROWS_AS(simulate_measurements(L, zero, 5.0, 1), validation_error);
        Vector wrong = Vector::Zero(L.cols() + 1);
        REQUIRE_THROWS_AS(simulate_measurements(L, wrong, 5.0, 1), validation_error);
        REQUIRE_THROWS_AS(simulate_measurements(L, x, -2.0, 1), validation_error);
    }
}

TEST_CASE("snr under the RMS noise convention depends only on sensor count") {
    const auto& pair = testutil::default_pair();
    // ||L_k||^2 / (pct/100 * ||L_k||/sqrt(m))^2 = m (100/pct)^2 for every node
    for (int k : {0, 50, 321, 656}) {
        REQUIRE(snr_of(pair.forward_matrix, k, 2.0) == Approx(40000.0).epsilon(1e-12));
        REQUIRE(snr_of(pair.forward_matrix, k, 5.0) == Approx(6400.0).epsilon(1e-12));
    }
    REQUIRE(snr_db(snr_of(pair.forward_matrix, 10, 2.0)) ==
            Approx(46.020599913279624).margin(1e-9));
    REQUIRE(snr_db(100.0) == Approx(20.0).margin(1e-13));
    REQUIRE_THROWS_AS(snr_of(pair.forward_matrix, 0, 0.0), validation_error);
    REQUIRE_THROWS_AS(snr_of(pair.forward_matrix, 0, -1.0), validation_error);
    REQUIRE_THROWS_AS(snr_of(pair.forward_matrix, -1, 2.0), validation_error);
    REQUIRE_THROWS_AS(snr_of(pair.forward_matrix, 100000, 2.0), validation_error);
}
