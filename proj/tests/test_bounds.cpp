#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "stdloc/bounds.hpp"
#include "stdloc/commands.hpp"

using namespace stdloc;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

SystemMatrix wrap(const Matrix& entries) {
    SystemMatrix L;
    L.entries = entries;
    return L;
}

} // namespace

TEST_CASE("mean_free_basis spans the zero-sum subspace orthonormally") {
    for (int m : {2, 5, 16}) {
        Matrix q = mean_free_basis(m);
        REQUIRE(q.rows() == m);
        REQUIRE(q.cols() == m - 1);
        REQUIRE((q.transpose() * q - Matrix::Identity(m - 1, m - 1))
                    .cwiseAbs()
                    .maxCoeff() < 1e-13);
        REQUIRE((Vector::Ones(m).transpose() * q).cwiseAbs().maxCoeff() < 1e-13);
    }
    REQUIRE_THROWS_AS(mean_free_basis(1), validation_error);
}

TEST_CASE("separation margin is 1 when all other columns are orthogonal") {
    Matrix lhat = Matrix::Identity(4, 4);
    Matrix sigma = Matrix::Identity(4, 4);
    FeasibleSet sk = feasible_set(lhat, Vector(lhat.col(0)), sigma);
    REQUIRE(sk.indices == std::vector<int>{0});
    REQUIRE(theta_for(0, lhat, sigma, sk) == Approx(1.0));
}

TEST_CASE("separation margin picks the tightest non-feasible column") {
    // Columns: target e1, a scaled copy (feasible, must be ignored), a column
    // at normalized projection 0.9, and an orthogonal one.
    Matrix lhat(3, 4);
    lhat.col(0) = Eigen::Vector3d(1.0, 0.0, 0.0);
    lhat.col(1) = Eigen::Vector3d(-2.0, 0.0, 0.0);
    lhat.col(2) = Eigen::Vector3d(0.9, std::sqrt(1.0 - 0.81), 0.0);
    lhat.col(3) = Eigen::Vector3d(0.0, 0.0, 1.0);
    Matrix sigma = Matrix::Identity(3, 3);
    FeasibleSet sk = feasible_set(lhat, Vector(lhat.col(0)), sigma);
    REQUIRE(sk.indices == std::vector<int>{0, 1});
    double theta = theta_for(0, lhat, sigma, sk);
    REQUIRE(theta == Approx(0.1).epsilon(1e-12));
    // Without the parallel copy in the feasible set the margin would be 0.
    REQUIRE(theta > 0.0);
}

TEST_CASE("separation margin rejects trivial and invalid problems") {
    Matrix lhat(3, 3);
    lhat.col(0) = Eigen::Vector3d(1.0, 0.0, 0.0);
    lhat.col(1) = Eigen::Vector3d(2.0, 0.0, 0.0);
    lhat.col(2) = Eigen::Vector3d(-3.0, 0.0, 0.0);
    Matrix sigma = Matrix::Identity(3, 3);
    FeasibleSet sk = feasible_set(lhat, Vector(lhat.col(0)), sigma);
    REQUIRE(sk.indices.size() == 3);
    REQUIRE_THROWS_WITH(theta_for(0, lhat, sigma, sk),
                        ContainsSubstring("trivial problem"));
    REQUIRE_THROWS_AS(theta_for(-1, lhat, sigma, sk), validation_error);
    REQUIRE_THROWS_AS(theta_for(3, lhat, sigma, sk), validation_error);
}

TEST_CASE("near-parallel competitor columns drive the bound to zero") {
    Matrix entries(3, 3);
    entries.col(0) = Eigen::Vector3d(1.0, 0.0, 0.0);
    entries.col(1) = Eigen::Vector3d(1.0, 1e-4, 0.0).normalized();
    entries.col(2) = Eigen::Vector3d(0.0, 0.0, 1.0);
    Matrix noise = 0.01 * Matrix::Identity(3, 3);
    BoundReport rep = localization_bound(0, wrap(entries), noise);
    REQUIRE(rep.theta > 0.0);
    REQUIRE(rep.theta < 1e-3);
    REQUIRE(rep.probability >= 0.0);
    REQUIRE(rep.probability < 1e-4);
    REQUIRE(rep.effective_m == 3);
    REQUIRE_THAT(rep.caveat, !ContainsSubstring("zero-sum"));
}

TEST_CASE("vanishing noise pushes the bound probability to one") {
    Matrix entries = Matrix::Identity(3, 3);
    Matrix noise = 1e-14 * Matrix::Identity(3, 3);
    BoundReport rep = localization_bound(1, wrap(entries), noise);
    REQUIRE(rep.theta == Approx(1.0));
    REQUIRE(rep.probability == Approx(1.0).margin(1e-12));
    REQUIRE(rep.variant == BoundVariant::eigen);
    REQUIRE(to_string(rep.variant) == std::string("eigen"));
}

TEST_CASE("localization bound validates its inputs") {
    Matrix entries = Matrix::Identity(4, 4);
    Matrix noise = Matrix::Identity(4, 4);
    REQUIRE_THROWS_AS(localization_bound(-1, wrap(entries), noise), validation_error);
    REQUIRE_THROWS_AS(localization_bound(4, wrap(entries), noise), validation_error);
    REQUIRE_THROWS_AS(localization_bound(0, wrap(entries), Matrix::Identity(3, 3)),
                      validation_error);
    REQUIRE_THROWS_AS(
        localization_bound(0, wrap(entries), noise, Matrix::Identity(3, 3)),
        validation_error);
}

TEST_CASE("prior covariance whitens the system matrix before bounding") {
    auto rng = testutil::rng_for(71u);
    Matrix entries = testutil::random_matrix(5, 7, rng);
    Matrix noise = 0.05 * Matrix::Identity(5, 5);
    Matrix prior = testutil::random_spd(7, rng, 0.5, 2.0);
    BoundReport with_prior = localization_bound(2, wrap(entries), noise, prior);
    BoundReport manual =
        localization_bound(2, wrap(Matrix(entries * matrix_sqrt_psd(prior))), noise);
    REQUIRE(with_prior.theta == Approx(manual.theta).epsilon(1e-12));
    REQUIRE(with_prior.quadratic_form ==
            Approx(manual.quadratic_form).epsilon(1e-12));
    REQUIRE(with_prior.probability == Approx(manual.probability).margin(1e-12));
    REQUIRE(with_prior.effective_m == 5);
}

TEST_CASE("referenced systems are bounded on the zero-sum subspace") {
    GeometryPair g = testutil::small_pair();
    const SystemMatrix& L = g.inverse_matrix;
    int m = L.rows();
    int k = g.inverse.nearest_node(Vector2(0.0, 0.7));
    double sigma_n = noise_sigma(Vector(L.entries.col(k)), 5.0);
    Matrix noise = sigma_n * sigma_n * Matrix::Identity(m, m);

    BoundReport rep = localization_bound(k, L, noise);
    REQUIRE(rep.effective_m == m - 1);
    REQUIRE_THAT(rep.caveat, ContainsSubstring("zero-sum"));
    REQUIRE(rep.theta > 0.0);
    REQUIRE(rep.theta <= 1.0);
    REQUIRE(rep.probability >= 0.0);
    REQUIRE(rep.probability <= 1.0);

    // Oracle: the deflated bound must not depend on which orthonormal basis of
    // the zero-sum subspace is used. Recompute it with a difference basis
    // (e_j - e_{j+1}, orthonormalized) and compare every reported quantity.
    Matrix diffs = Matrix::Zero(m, m - 1);
    for (int j = 0; j < m - 1; ++j) {
        diffs(j, j) = 1.0;
        diffs(j + 1, j) = -1.0;
    }
    Eigen::HouseholderQR<Matrix> qr(diffs);
    Matrix q2 = Matrix(qr.householderQ()).leftCols(m - 1);
    REQUIRE((Vector::Ones(m).transpose() * q2).cwiseAbs().maxCoeff() < 1e-12);

    Matrix lhat2 = q2.transpose() * L.entries;
    Matrix noise2 = symmetrize(q2.transpose() * noise * q2);
    Matrix sigma2 = symmetrize(lhat2 * lhat2.transpose() + noise2);
    FeasibleSet sk = feasible_set(lhat2, Vector(lhat2.col(k)), sigma2);
    double theta2 = theta_for(k, lhat2, sigma2, sk);
    SpdSolver solver(sigma2, "test");
    double qf2 = lhat2.col(k).dot(solver.solve(Vector(lhat2.col(k))));
    auto [smin2, smax2] = eigen_extremes(sigma2);
    double arg = theta2 * theta2 * smin2 * qf2 /
                 (2.0 * eigen_extremes(noise2).second);
    double prob2 = reg_lower_gamma(0.5 * (m - 1), arg);

    REQUIRE(rep.theta == Approx(theta2).epsilon(1e-9));
    REQUIRE(rep.quadratic_form == Approx(qf2).epsilon(1e-9));
    REQUIRE(rep.lambda_min_sigma == Approx(smin2).epsilon(1e-9));
    REQUIRE(rep.lambda_max_sigma == Approx(smax2).epsilon(1e-9));
    REQUIRE(rep.probability == Approx(prob2).margin(1e-9));
}

TEST_CASE("localization bound matches pinned default-geometry values") {
    const GeometryPair& g = testutil::default_pair();
    const SystemMatrix& L = g.inverse_matrix;
    int k = g.inverse.nearest_node(Vector2(0.0, 0.9));
    REQUIRE(k == 228);
    double sigma_n = noise_sigma(Vector(L.entries.col(k)), 5.0);
    Matrix noise = sigma_n * sigma_n * Matrix::Identity(16, 16);
    BoundReport rep = localization_bound(k, L, noise);
    REQUIRE(rep.node == 228);
    REQUIRE(rep.effective_m == 15);
    REQUIRE(rep.variant == BoundVariant::eigen);
    REQUIRE(rep.theta == Approx(0.05062742466789516).epsilon(1e-9));
    REQUIRE(rep.quadratic_form == Approx(0.063183529236113561).epsilon(1e-9));
    REQUIRE(rep.lambda_min_sigma == Approx(18.459710047122655).epsilon(1e-9));
    REQUIRE(rep.lambda_max_c == Approx(0.00085561769580570508).epsilon(1e-10));
    REQUIRE(rep.probability == Approx(0.0010196185021242356).epsilon(1e-6));
    REQUIRE(rep.theta > 0.0);
    REQUIRE(rep.theta <= 1.0);
}

TEST_CASE("bound probability decreases as noise grows") {
    const GeometryPair& g = testutil::default_pair();
    const SystemMatrix& L = g.inverse_matrix;
    int k = g.inverse.nearest_node(Vector2(0.0, 0.9));
    Vector col = L.entries.col(k);
    std::vector<double> probs;
    for (double pct : {2.0, 5.0, 8.0, 12.0}) {
        double s = noise_sigma(col, pct);
        Matrix noise = s * s * Matrix::Identity(16, 16);
        probs.push_back(localization_bound(k, L, noise).probability);
    }
    for (std::size_t i = 1; i < probs.size(); ++i)
        REQUIRE(probs[i] <= probs[i - 1] + 1e-15);
    REQUIRE(probs.front() > probs.back());
}

TEST_CASE("snr variant validates inputs and handles zero snr") {
    const GeometryPair& g = testutil::default_pair();
    const SystemMatrix& L = g.inverse_matrix;
    Vector col = L.entries.col(6);
    double s = noise_sigma(col, 2.0);
    Matrix noise = s * s * Matrix::Identity(16, 16);

    BoundReport rep = snr_bound(6, L, noise, 0.0);
    REQUIRE(rep.probability == 0.0);
    REQUIRE(rep.variant == BoundVariant::snr);
    REQUIRE(to_string(rep.variant) == std::string("snr"));

    REQUIRE_THROWS_AS(snr_bound(-1, L, noise, 1.0), validation_error);
    REQUIRE_THROWS_AS(snr_bound(L.cols(), L, noise, 1.0), validation_error);
    REQUIRE_THROWS_AS(snr_bound(6, L, noise, -1.0), validation_error);
    REQUIRE_THROWS_AS(snr_bound(6, L, Matrix::Identity(4, 4), 1.0),
                      validation_error);

    Matrix unequal = noise;
    unequal(0, 0) *= 2.0;
    REQUIRE_THROWS_WITH(snr_bound(6, L, unequal, 1.0),
                        ContainsSubstring("scalar noise covariance"));
    Matrix dense = noise;
    dense(0, 1) = dense(1, 0) = 1e-6;
    REQUIRE_THROWS_WITH(snr_bound(6, L, dense, 1.0),
                        ContainsSubstring("scalar noise covariance"));
}

TEST_CASE("snr variant is monotone in the signal-to-noise ratio") {
    const GeometryPair& g = testutil::default_pair();
    const SystemMatrix& L = g.inverse_matrix;
    Vector col = L.entries.col(6);
    double s = noise_sigma(col, 4.0);
    Matrix noise = s * s * Matrix::Identity(16, 16);
    double p1 = snr_bound(6, L, noise, 1.0e4).probability;
    double p2 = snr_bound(6, L, noise, 4.0e4).probability;
    double p3 = snr_bound(6, L, noise, 1.0e5).probability;
    REQUIRE(p1 <= p2 + 1e-15);
    REQUIRE(p2 <= p3 + 1e-15);
    REQUIRE(p1 < p3);
}

TEST_CASE("snr bound matches pinned values at the best sensor-adjacent node") {
    const GeometryPair& g = testutil::default_pair();
    const SystemMatrix& L = g.inverse_matrix;
    Vector col = L.entries.col(6);

    auto bound_at = [&](double pct) {
        double s = noise_sigma(col, pct);
        Matrix noise = s * s * Matrix::Identity(16, 16);
        return snr_bound(6, L, noise, snr_of(L, 6, pct));
    };

    BoundReport at1 = bound_at(1.0);
    REQUIRE(at1.probability >= 1.0 - 1e-9);
    REQUIRE(at1.effective_m == 15);

    BoundReport at2 = bound_at(2.0);
    REQUIRE(at2.theta == Approx(0.10512166058055306).epsilon(1e-9));
    REQUIRE(at2.probability == Approx(0.95299210242541921).epsilon(1e-6));

    BoundReport at4 = bound_at(4.0);
    REQUIRE(at4.probability == Approx(0.025921434933685577).epsilon(1e-4));
}

TEST_CASE("best-node snr bound crosses 0.95 near two percent noise") {
    // Sweep every candidate node at 2% and 4% i.i.d. noise. Reliable
    // localization (bound >= 0.95 somewhere) must survive 2% noise and be lost
    // by 4%, bracketing the operating point within a factor of two.
    const GeometryPair& g = testutil::default_pair();
    const SystemMatrix& L = g.inverse_matrix;
    auto best_of = [&](double pct) {
        double best = 0.0;
        int best_k = -1;
        for (int j = 0; j < L.cols(); ++j) {
            double s = noise_sigma(Vector(L.entries.col(j)), pct);
            Matrix noise = s * s * Matrix::Identity(16, 16);
            BoundReport r = snr_bound(j, L, noise, snr_of(L, j, pct));
            REQUIRE(r.probability >= 0.0);
            REQUIRE(r.probability <= 1.0);
            if (r.probability > best) {
                best = r.probability;
                best_k = j;
            }
        }
        return std::pair<double, int>(best, best_k);
    };
    auto [best2, k2] = best_of(2.0);
    REQUIRE(best2 >= 0.95);
    REQUIRE(k2 == 6);
    auto [best4, k4] = best_of(4.0);
    REQUIRE(best4 < 0.95);
}
