#include <cmath>
#include <random>

#include "doctest.h"
#include "rqif/numerics.hpp"

using namespace rqif;

TEST_CASE("pseudo_inverse of the identity") {
    const PinvResult r = pseudo_inverse(Eigen::MatrixXd::Identity(4, 4));
    CHECK(r.rank == 4);
    CHECK((r.pinv - Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-14);
}

TEST_CASE("pseudo_inverse of a rank-one outer product") {
    Eigen::VectorXd g(2);
    g << 5, 4;
    const Eigen::MatrixXd A = g * g.transpose();
    const PinvResult r = pseudo_inverse(A);
    CHECK(r.rank == 1);
    const double n4 = std::pow(g.squaredNorm(), 2);
    CHECK((r.pinv - A / n4).norm() <= 1e-14);
}

TEST_CASE("pseudo_inverse of the zero matrix") {
    const PinvResult r = pseudo_inverse(Eigen::MatrixXd::Zero(3, 3));
    CHECK(r.rank == 0);
    CHECK(r.pinv.isZero(0.0));
}

TEST_CASE("pseudo_inverse rejects non-finite input") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    A(0, 1) = A(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(pseudo_inverse(A));
}

TEST_CASE("Moore-Penrose conditions on random PSD matrices") {
    std::mt19937 rng(2024);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> dim_dist(1, 20);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = dim_dist(rng);
        // occasional rank deficiency via a thin factor
        const int k = 1 + (trial % n == 0 ? n / 2 : n - 1);
        Eigen::MatrixXd B(n, std::min(n, k));
        for (int i = 0; i < B.size(); ++i) B.data()[i] = nd(rng);
        const Eigen::MatrixXd A = B * B.transpose();
        const Eigen::MatrixXd P = pseudo_inverse(A).pinv;
        CHECK((A * P * A - A).norm() <= 1e-8 * std::max(1.0, A.norm()));
        CHECK((P * A * P - P).norm() <= 1e-8 * std::max(1.0, P.norm()));
        CHECK((A * P - (A * P).transpose()).norm() <= 1e-8);
        CHECK((P * A - (P * A).transpose()).norm() <= 1e-8);
    }
}

TEST_CASE("pseudo_inverse rank equals dim for well-conditioned PD input") {
    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd B(6, 6);
    for (int i = 0; i < B.size(); ++i) B.data()[i] = nd(rng);
    const Eigen::MatrixXd A = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(6, 6);
    CHECK(pseudo_inverse(A).rank == 6);
}

TEST_CASE("chi2_cdf frozen values") {
    CHECK(chi2_cdf(0.0, 1) == 0.0);
    CHECK(chi2_cdf(0.0, 15) == 0.0);
    CHECK(chi2_cdf(3.841459, 1) == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(chi2_cdf(24.9958, 15) == doctest::Approx(0.95).epsilon(1e-6));
    CHECK_THROWS(chi2_cdf(-1.0, 1));
}

TEST_CASE("chi2_cdf is monotone and maps into [0,1]") {
    for (double df : {1.0, 4.0, 15.0}) {
        double prev = 0.0;
        for (double x = 0.0; x <= 60.0; x += 0.5) {
            const double c = chi2_cdf(x, df);
            CHECK(c >= prev);
            CHECK(c <= 1.0);
            prev = c;
        }
    }
}

TEST_CASE("chi2_quantile frozen values and roundtrips") {
    CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.841458820694124).epsilon(1e-5));
    CHECK(chi2_quantile(0.95, 15) == doctest::Approx(24.995790139728616).epsilon(1e-3));
    for (double p : {0.005, 0.5, 0.995})
        for (double df : {1.0, 15.0, 30.0})
            CHECK(std::fabs(chi2_cdf(chi2_quantile(p, df), df) - p) <= 1e-10);
    CHECK_THROWS(chi2_quantile(0.0, 1));
    CHECK_THROWS(chi2_quantile(1.0, 1));
}

TEST_CASE("cholesky examples") {
    CHECK(cholesky(Eigen::MatrixXd::Identity(3, 3)) == Eigen::MatrixXd::Identity(3, 3));

    Eigen::MatrixXd A(2, 2);
    A << 4, 2, 2, 5;
    Eigen::MatrixXd L(2, 2);
    L << 2, 0, 1, 2;
    CHECK((cholesky(A) - L).norm() <= 1e-14);

    Eigen::MatrixXd R = Eigen::MatrixXd::Constant(5, 5, 0.7);
    R.diagonal().setOnes();
    const Eigen::MatrixXd F = cholesky(R);
    CHECK((F * F.transpose() - R).norm() <= 1e-12 * R.norm());
    CHECK(F.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0));
}

TEST_CASE("cholesky names the failing leading minor") {
    Eigen::MatrixXd A(2, 2);
    A << 1, 2, 2, 1;  // second leading minor is negative
    try {
        cholesky(A);
        FAIL("expected an exception");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("leading minor") != std::string::npos);
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("normal_cdf reference points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-10));
}

TEST_CASE("two-sided p-values in log space") {
    // p(z = 1.959964) = 0.05
    const double p = 2.0 * (1.0 - normal_cdf(1.959964));
    CHECK(p == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(std::pow(10.0, -neg_log10_two_sided_p(1.959964)) == doctest::Approx(0.05).epsilon(1e-6));
    // deep in the tail the naive p underflows; the log-space path does not
    CHECK(neg_log10_two_sided_p(50.0) == doctest::Approx(544.6653058662076).epsilon(1e-9));
    CHECK(neg_log10_two_sided_p(0.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(neg_log10_two_sided_p(5000.0)));
}

TEST_CASE("log_normal_sf agrees with the direct tail where it is representable") {
    for (double z : {0.5, 1.0, 3.0, 6.0, 9.0}) {
        // the complementary error function evaluates the upper tail without
        // the cancellation that log(1 - cdf) suffers
        const double direct = std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
        CHECK(log_normal_sf(z) == doctest::Approx(direct).epsilon(1e-9));
    }
    // continuity across the asymptotic switchover
    CHECK(log_normal_sf(10.0 + 1e-9) == doctest::Approx(log_normal_sf(10.0 - 1e-9)).epsilon(1e-6));
}
