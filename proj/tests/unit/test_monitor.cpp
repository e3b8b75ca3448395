#include <cmath>
#include <random>

#include "doctest.h"
#include "rqif/driver.hpp"
#include "rqif/monitor.hpp"
#include "rqif/numerics.hpp"
#include "rqif/simulate.hpp"

using namespace rqif;

namespace {

SimConfig base_config(Family family, int n_b, int B, std::uint64_t seed) {
    SimConfig c;
    c.family = family;
    c.beta0 = Eigen::VectorXd(5);
    c.beta0 << 0.2, -0.2, 0.2, -0.2, 0.2;
    c.n_b = n_b;
    c.B = B;
    c.seed = seed;
    return c;
}

const ModelSpec kGaussCs{Family::GaussianIdentity, 5, Corr::CompoundSymmetry};

}  // namespace

TEST_CASE("zero-noise batches from the same truth are accepted with lambda 0") {
    SimConfig config = base_config(Family::GaussianIdentity, 40, 2, 41);
    ClusterBatch ref = gen_gaussian_batch(config, 1);
    ClusterBatch cand = gen_gaussian_batch(config, 2);
    for (Cluster& c : ref.clusters) c.y = c.X * config.beta0;
    for (Cluster& c : cand.clusters) c.y = c.X * config.beta0;
    const MonitorDecision d = screen_batch(kGaussCs, ref, cand, 0.05, config.beta0);
    CHECK(d.lambda <= 1e-10);
    CHECK_FALSE(d.reject);
    CHECK((d.beta_check - config.beta0).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("degrees of freedom are rank(C_ref) + rank(C_cand) - p") {
    SimConfig config = base_config(Family::GaussianIdentity, 50, 2, 42);

    SUBCASE("constant cluster size has a structural rank drop") {
        // with every cluster of the same size m, the intercept's second-basis
        // score is exactly (m-1) times its first-basis score, so each block
        // loses one rank: df = 9 + 9 - 5
        const ClusterBatch ref = gen_gaussian_batch(config, 1);
        const ClusterBatch cand = gen_gaussian_batch(config, 2);
        const MonitorDecision d = screen_batch(kGaussCs, ref, cand, 0.05, config.beta0);
        CHECK(d.df == 13);
        CHECK(d.lambda >= 0.0);
    }

    SUBCASE("varying cluster sizes give full-rank blocks: 2pS - p") {
        auto varied = [&](unsigned seed) {
            std::mt19937 rng(seed);
            std::normal_distribution<double> nd;
            ClusterBatch batch;
            for (int i = 0; i < 60; ++i) {
                const int m = 4 + static_cast<int>(rng() % 3);
                Cluster c;
                c.X = Eigen::MatrixXd(m, 5);
                c.X.col(0).setOnes();
                c.y = Eigen::VectorXd(m);
                for (int j = 0; j < m; ++j) {
                    for (int k = 1; k < 5; ++k) c.X(j, k) = nd(rng);
                    c.y[j] = c.X.row(j).dot(config.beta0) + nd(rng);
                }
                batch.clusters.push_back(std::move(c));
            }
            return batch;
        };
        const MonitorDecision d =
            screen_batch(kGaussCs, varied(1), varied(2), 0.05, config.beta0);
        CHECK(d.df == 15);
    }
}

TEST_CASE("reject flag matches the chi-square threshold across alphas") {
    SimConfig config = base_config(Family::GaussianIdentity, 60, 2, 43);
    const ClusterBatch ref = gen_gaussian_batch(config, 1);
    const ClusterBatch cand = gen_gaussian_batch(config, 2);
    bool rejected_at_smaller = false;
    double lambda_at_005 = -1.0;
    for (double alpha : {0.001, 0.01, 0.05, 0.2, 0.5, 0.9}) {
        const MonitorDecision d = screen_batch(kGaussCs, ref, cand, alpha, config.beta0);
        CHECK(d.reject == (d.lambda >= chi2_quantile(1.0 - alpha, d.df)));
        CHECK(d.p_value == doctest::Approx(1.0 - chi2_cdf(d.lambda, d.df)).epsilon(1e-10));
        // monotone in alpha: once rejected at a smaller alpha, larger alphas reject too
        if (rejected_at_smaller) CHECK(d.reject);
        rejected_at_smaller = d.reject;
        if (alpha == 0.05) lambda_at_005 = d.lambda;
    }
    CHECK(lambda_at_005 >= 0.0);
}

TEST_CASE("a heavily contaminated batch is rejected") {
    SimConfig clean = base_config(Family::GaussianIdentity, 100, 2, 44);
    SimConfig bad = clean;
    bad.contamination = Contamination{{2}, 2.0};
    const ClusterBatch ref = gen_gaussian_batch(clean, 1);
    const ClusterBatch cand = gen_batch(bad, 2);
    const MonitorDecision d = screen_batch(kGaussCs, ref, cand, 0.05, clean.beta0);
    CHECK(d.reject);
    CHECK(d.p_value < 0.01);
}

TEST_CASE("a rejected batch leaves the estimation state untouched") {
    SimConfig config = base_config(Family::GaussianIdentity, 100, 2, 45);
    RenewConfig rc;
    rc.monitor = true;
    RenewState state = init_state(kGaussCs, gen_gaussian_batch(config, 1), rc);
    const RenewState before = state;

    SimConfig bad = config;
    bad.contamination = Contamination{{2}, 2.0};
    const StreamReport rep = process_batch(state, gen_batch(bad, 2));
    REQUIRE(rep.decision.has_value());
    REQUIRE(rep.decision->reject);
    CHECK_FALSE(rep.accepted);
    CHECK(state.beta == before.beta);
    CHECK(state.g == before.g);
    CHECK(state.G == before.G);
    CHECK(state.C == before.C);
    CHECK(state.N == before.N);
    CHECK(state.b == before.b + 1);
    CHECK(state.batches_rejected == before.batches_rejected + 1);
}

TEST_CASE("empirical power grows with the candidate batch size") {
    // small departure d = 0.1 on the second coefficient, alpha = 0.05
    int rejects_small = 0, rejects_large = 0;
    const int reps = 120;
    for (int rep = 0; rep < reps; ++rep) {
        for (int which = 0; which < 2; ++which) {
            const int n_b = which == 0 ? 50 : 200;
            SimConfig config = base_config(Family::GaussianIdentity, n_b, 2, 5000 + rep);
            config.contamination = Contamination{{2}, 0.1};
            const ClusterBatch ref = gen_gaussian_batch(config, 1);
            const ClusterBatch cand = gen_batch(config, 2);
            const MonitorDecision d = screen_batch(kGaussCs, ref, cand, 0.05, config.beta0);
            if (d.reject) (which == 0 ? rejects_small : rejects_large) += 1;
        }
    }
    CHECK(rejects_large > rejects_small);
}

TEST_CASE("degenerate reference raises an error") {
    // single one-member clusters with duplicated covariate columns: each
    // block has rank 1, df = 0, and the conflicting outcomes keep the
    // minimized statistic strictly positive
    ModelSpec model{Family::GaussianIdentity, 2, Corr::CompoundSymmetry};
    auto one_cluster = [](double y) {
        ClusterBatch batch;
        Cluster c;
        c.X = Eigen::MatrixXd::Ones(1, 2);
        c.y = Eigen::VectorXd::Constant(1, y);
        batch.clusters.push_back(c);
        return batch;
    };
    CHECK_THROWS(screen_batch(model, one_cluster(1.0), one_cluster(-1.0), 0.05,
                              Eigen::VectorXd::Zero(2)));

    // the same degenerate shape with perfectly consistent data is accepted
    const MonitorDecision d = screen_batch(model, one_cluster(0.0), one_cluster(0.0), 0.05,
                                           Eigen::VectorXd::Zero(2));
    CHECK_FALSE(d.reject);
    CHECK(d.lambda <= 1e-10);
}
