#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "rqif/numerics.hpp"
#include "rqif/renew.hpp"
#include "rqif/simulate.hpp"

using namespace rqif;

namespace {

SimConfig gaussian_config(int n_b, int B, std::uint64_t seed) {
    SimConfig c;
    c.family = Family::GaussianIdentity;
    c.beta0 = Eigen::VectorXd(5);
    c.beta0 << 0.2, -0.2, 0.2, -0.2, 0.2;
    c.n_b = n_b;
    c.B = B;
    c.seed = seed;
    return c;
}

ClusterBatch concat(const std::vector<ClusterBatch>& batches, long upto) {
    ClusterBatch all;
    for (long j = 0; j < upto; ++j)
        all.clusters.insert(all.clusters.end(), batches[j].clusters.begin(),
                            batches[j].clusters.end());
    return all;
}

const ModelSpec kGaussCs{Family::GaussianIdentity, 5, Corr::CompoundSymmetry};

}  // namespace

TEST_CASE("init on zero-noise data recovers the truth with a vanishing score") {
    SimConfig config = gaussian_config(50, 1, 3);
    ClusterBatch batch = gen_gaussian_batch(config, 1);
    for (Cluster& c : batch.clusters) c.y = c.X * config.beta0;
    const RenewState state = init_state(kGaussCs, batch);
    CHECK((state.beta - config.beta0).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(state.g.lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(state.N == 50);
    CHECK(state.b == 1);
}

TEST_CASE("init equals the offline fit of the first batch, field for field") {
    SimConfig config = gaussian_config(80, 1, 4);
    const ClusterBatch batch = gen_gaussian_batch(config, 1);
    const RenewState state = init_state(kGaussCs, batch);
    const QifFit fit =
        fit_offline_qif(kGaussCs, batch, irls_glm_fit(kGaussCs, batch));
    CHECK(state.beta == fit.beta_hat);
    CHECK(state.g == fit.summary.g);
    CHECK(state.G == fit.summary.G);
    CHECK(state.C == fit.summary.C);
}

TEST_CASE("init variance equals the offline variance on one logistic batch") {
    ModelSpec model{Family::BinomialLogit, 5, Corr::CompoundSymmetry};
    SimConfig config = gaussian_config(100, 1, 5);
    config.family = Family::BinomialLogit;
    const ClusterBatch batch = gen_binary_batch(config, 1);
    const RenewState state = init_state(model, batch);
    const QifFit fit = fit_offline_qif(model, batch, irls_glm_fit(model, batch));
    const PinvResult ci = pseudo_inverse(fit.summary.C);
    const Eigen::MatrixXd offline =
        pseudo_inverse(fit.summary.G.transpose() * ci.pinv * fit.summary.G).pinv;
    CHECK((variance_of(state) - offline).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("empty batch only advances the batch counter") {
    SimConfig config = gaussian_config(40, 1, 6);
    RenewState state = init_state(kGaussCs, gen_gaussian_batch(config, 1));
    const RenewState before = state;
    renew_update(state, ClusterBatch{});
    CHECK(state.b == before.b + 1);
    CHECK(state.beta == before.beta);
    CHECK(state.g == before.g);
    CHECK(state.G == before.G);
    CHECK(state.C == before.C);
    CHECK(state.N == before.N);
}

TEST_CASE("gaussian adjusted score equals the pooled score at random probes") {
    SimConfig config = gaussian_config(60, 4, 7);
    const std::vector<ClusterBatch> stream = make_stream(config);
    RenewState state = init_state(kGaussCs, stream[0]);
    for (int j = 1; j < 4; ++j) renew_update(state, stream[j]);

    const ClusterBatch pooled = concat(stream, 4);
    std::mt19937 rng(8);
    std::normal_distribution<double> nd(0.0, 0.5);
    for (int probe = 0; probe < 20; ++probe) {
        Eigen::VectorXd beta = config.beta0;
        for (int k = 0; k < 5; ++k) beta[k] += nd(rng);
        // adjusted score function at beta, from summary statistics only
        const Eigen::VectorXd adj = state.g + state.G * (state.beta - beta);
        const Eigen::VectorXd full = batch_summary(kGaussCs, pooled, beta).g;
        CHECK((adj - full).norm() <= 1e-10 * std::max(1.0, full.norm()));
    }
}

TEST_CASE("incremental estimating-equation residual stays small along a stream") {
    SimConfig config = gaussian_config(50, 6, 9);
    config.family = Family::BinomialLogit;
    ModelSpec model{Family::BinomialLogit, 5, Corr::CompoundSymmetry};
    const std::vector<ClusterBatch> stream = make_stream(config);
    RenewState state = init_state(model, stream[0]);
    for (int j = 1; j < 6; ++j) {
        renew_update(state, stream[j]);
        CHECK(state.last_converged);
        // the committed triple satisfies the incremental equation in the
        // scale-invariant decrement sense used by the stopping rule
        const PinvResult ci = pseudo_inverse(state.C);
        const Eigen::VectorXd f = state.G.transpose() * (ci.pinv * state.g);
        const Eigen::MatrixXd J = state.G.transpose() * ci.pinv * state.G;
        CHECK(f.dot(pseudo_inverse(J).pinv * f) <= 1e-6);
    }
}

TEST_CASE("one-step recursion identity holds at convergence") {
    // beta_b - beta_{b-1} = (G_b^T C_b^+ G_{b-1})^{-1} G_b^T C_b^+ (g_{b-1} + s_b.g(beta_b))
    SimConfig config = gaussian_config(70, 2, 10);
    config.family = Family::BinomialLogit;
    ModelSpec model{Family::BinomialLogit, 5, Corr::CompoundSymmetry};
    const std::vector<ClusterBatch> stream = make_stream(config);
    RenewConfig rc;
    rc.tol = 1e-12;  // the identity holds at the exact solution
    RenewState state = init_state(model, stream[0], rc);
    const Eigen::VectorXd beta_prev = state.beta;
    const Eigen::VectorXd g_prev = state.g;
    const Eigen::MatrixXd G_prev = state.G;
    renew_update(state, stream[1]);

    const BatchSummary s = batch_summary(model, stream[1], state.beta);
    const PinvResult ci = pseudo_inverse(state.C);
    // H is not symmetric, so solve directly rather than pseudo-inverting
    const Eigen::MatrixXd H = state.G.transpose() * ci.pinv * G_prev;
    const Eigen::VectorXd U = state.G.transpose() * (ci.pinv * (g_prev + s.g));
    const Eigen::VectorXd predicted = H.partialPivLu().solve(U);
    const Eigen::VectorXd actual = state.beta - beta_prev;
    CHECK((predicted - actual).norm() <= 1e-6 * std::max(1.0, actual.norm()));
}

TEST_CASE("non-finite iterate throws and leaves the state unchanged") {
    SimConfig config = gaussian_config(30, 1, 11);
    RenewState state = init_state(kGaussCs, gen_gaussian_batch(config, 1));
    const RenewState before = state;
    ClusterBatch bad = gen_gaussian_batch(config, 1);
    bad.clusters[0].y[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS(renew_update(state, bad));
    CHECK(state.beta == before.beta);
    CHECK(state.g == before.g);
    CHECK(state.b == before.b);
    CHECK(state.N == before.N);
}

TEST_CASE("non-convergence commits with the flag down") {
    ModelSpec model{Family::BinomialLogit, 5, Corr::CompoundSymmetry};
    SimConfig config = gaussian_config(60, 2, 12);
    config.family = Family::BinomialLogit;
    RenewConfig rc;
    rc.tol = 1e-14;  // unreachably tight
    rc.maxit = 1;
    const std::vector<ClusterBatch> stream = make_stream(config);
    RenewState state = init_state(model, stream[0], rc);
    const Eigen::VectorXd before = state.beta;
    renew_update(state, stream[1]);
    CHECK_FALSE(state.last_converged);
    CHECK(state.b == 2);            // committed anyway
    CHECK(state.beta != before);
}

TEST_CASE("variance is symmetric and matches a direct sandwich on one batch") {
    ModelSpec model{Family::GaussianIdentity, 3, Corr::Independence};
    SimConfig config = gaussian_config(100, 1, 13);
    config.beta0 = Eigen::VectorXd(3);
    config.beta0 << 0.2, -0.2, 0.2;
    const ClusterBatch batch = gen_gaussian_batch(config, 1);
    const RenewState state = init_state(model, batch);
    const Eigen::MatrixXd V = variance_of(state);
    CHECK((V - V.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12);

    // direct sandwich from raw data at the same estimate
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3, 3);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, 3);
    for (const Cluster& c : batch.clusters) {
        const Eigen::VectorXd gi = c.X.transpose() * (c.y - c.X * state.beta);
        G += c.X.transpose() * c.X;
        C += gi * gi.transpose();
    }
    const Eigen::MatrixXd direct =
        pseudo_inverse(G.transpose() * pseudo_inverse(C).pinv * G).pinv;
    CHECK((V - direct).lpNorm<Eigen::Infinity>() <= 1e-8 * std::max(1.0, direct.norm()));
}

TEST_CASE("standard errors shrink like 1/sqrt(N)") {
    double se_small = 0.0, se_big = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        SimConfig small = gaussian_config(1000, 1, 100 + rep);
        SimConfig big = gaussian_config(4000, 1, 100 + rep);
        const RenewState s1 = init_state(kGaussCs, gen_gaussian_batch(small, 1));
        const RenewState s2 = init_state(kGaussCs, gen_gaussian_batch(big, 1));
        se_small += std::sqrt(variance_of(s1)(1, 1));
        se_big += std::sqrt(variance_of(s2)(1, 1));
    }
    const double ratio = se_big / se_small;
    CHECK(ratio >= 0.45);
    CHECK(ratio <= 0.55);
}

TEST_CASE("inference report basics") {
    SimConfig config = gaussian_config(60, 1, 14);
    RenewState state = init_state(kGaussCs, gen_gaussian_batch(config, 1));

    SUBCASE("zero estimate gives z = 0 and p = 1") {
        state.beta.setZero();
        const InferenceReport rep = inference_report(state);
        for (const CoefInference& c : rep.coef) {
            CHECK(c.z == 0.0);
            CHECK(c.p_value == 1.0);
            CHECK(c.neg_log10_p == doctest::Approx(0.0));
        }
    }

    SUBCASE("z near 1.96 gives p near 0.05") {
        const Eigen::MatrixXd V = variance_of(state);
        state.beta.setZero();
        state.beta[0] = 1.959964 * std::sqrt(V(0, 0));
        const InferenceReport rep = inference_report(state);
        CHECK(rep.coef[0].z == doctest::Approx(1.959964).epsilon(1e-12));
        CHECK(rep.coef[0].p_value == doctest::Approx(0.05).epsilon(1e-6));
    }

    SUBCASE("huge z survives p underflow in log space") {
        const Eigen::MatrixXd V = variance_of(state);
        state.beta.setZero();
        state.beta[0] = 50.0 * std::sqrt(V(0, 0));
        const InferenceReport rep = inference_report(state);
        CHECK(rep.coef[0].neg_log10_p == doctest::Approx(544.6653058662076).epsilon(1e-6));
        CHECK(rep.coef[0].p_value == 0.0);  // the direct tail underflows; the log form does not
    }
}
