#include "rqif/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rqif/numerics.hpp"
#include "rqif/rng.hpp"

namespace rqif {

void SimConfig::validate() const {
    if (beta0.size() < 1) throw std::invalid_argument("SimConfig: beta0 is empty");
    if (m < 1 || n_b < 1 || B < 1) throw std::invalid_argument("SimConfig: m, n_b, B must be >= 1");
    const double lo_m = m > 1 ? -1.0 / (m - 1) : -1.0;
    if (!(alpha_y > lo_m && alpha_y < 1.0))
        throw std::invalid_argument("SimConfig: alpha_y outside the exchangeable range");
    const int q = p() - 1;
    if (q > 0) {
        const double lo_q = q > 1 ? -1.0 / (q - 1) : -1.0;
        if (!(alpha_x > lo_q && alpha_x < 1.0))
            throw std::invalid_argument("SimConfig: alpha_x outside the exchangeable range");
    }
    if (phi <= 0) throw std::invalid_argument("SimConfig: phi must be positive");
    if (contamination) {
        for (long pos : contamination->positions)
            if (pos < 2 || pos > B)
                throw std::invalid_argument("SimConfig: contamination positions must lie in {2,...,B}");
    }
}

Eigen::VectorXd SimConfig::batch_beta(long batch_index) const {
    Eigen::VectorXd beta = beta0;
    if (contamination && beta.size() >= 2) {
        const auto& pos = contamination->positions;
        if (std::find(pos.begin(), pos.end(), batch_index) != pos.end())
            beta[1] -= contamination->d;
    }
    return beta;
}

namespace {

Eigen::MatrixXd exch_corr(int n, double a) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n, n, a);
    r.diagonal().setOnes();
    return r;
}

// Covariate matrix: intercept column plus p-1 exchangeable-correlated
// normal covariates redrawn per cluster member. z/w are caller-owned
// workspace so the per-cluster loop stays allocation-free.
Eigen::MatrixXd draw_covariates(const SimConfig& cfg, const Eigen::MatrixXd& chol_x,
                                CounterRng& rng, Eigen::VectorXd& z, Eigen::VectorXd& w) {
    const int p = cfg.p();
    Eigen::MatrixXd X(cfg.m, p);
    X.col(0).setOnes();
    const int q = p - 1;
    if (q == 0) return X;
    for (int j = 0; j < cfg.m; ++j) {
        for (int k = 0; k < q; ++k) z[k] = rng.next_normal();
        w.noalias() = chol_x * z;
        X.row(j).tail(q) = w.transpose();
    }
    return X;
}

}  // namespace

ClusterBatch gen_gaussian_batch(const SimConfig& config, long batch_index) {
    config.validate();
    if (config.family != Family::GaussianIdentity)
        throw std::invalid_argument("gen_gaussian_batch: config family is not gaussian-identity");
    const Eigen::VectorXd beta = config.batch_beta(batch_index);
    const int q = config.p() - 1;
    const Eigen::MatrixXd chol_x =
        q > 0 ? cholesky(exch_corr(q, config.alpha_x)) : Eigen::MatrixXd();
    const Eigen::MatrixXd chol_y =
        std::sqrt(config.phi) * cholesky(exch_corr(config.m, config.alpha_y));

    ClusterBatch batch;
    batch.batch_id = batch_index;
    batch.clusters.reserve(config.n_b);
    Eigen::VectorXd e(config.m), z(q), w(q);
    for (int i = 0; i < config.n_b; ++i) {
        CounterRng rng(config.seed, static_cast<std::uint64_t>(batch_index),
                       static_cast<std::uint64_t>(i));
        Cluster c;
        c.X = draw_covariates(config, chol_x, rng, z, w);
        for (int j = 0; j < config.m; ++j) e[j] = rng.next_normal();
        c.y.resize(config.m);
        c.y.noalias() = c.X * beta;
        c.y.noalias() += chol_y * e;
        batch.clusters.push_back(std::move(c));
    }
    return batch;
}

ClusterBatch gen_binary_batch(const SimConfig& config, long batch_index) {
    config.validate();
    if (config.family != Family::BinomialLogit)
        throw std::invalid_argument("gen_binary_batch: config family is not binomial-logit");
    const Eigen::VectorXd beta = config.batch_beta(batch_index);
    const int q = config.p() - 1;
    const Eigen::MatrixXd chol_x =
        q > 0 ? cholesky(exch_corr(q, config.alpha_x)) : Eigen::MatrixXd();
    const Eigen::MatrixXd chol_y = cholesky(exch_corr(config.m, config.alpha_y));

    ClusterBatch batch;
    batch.batch_id = batch_index;
    batch.clusters.reserve(config.n_b);
    Eigen::VectorXd e(config.m), z(q), w(q), latent(config.m), eta(config.m);
    for (int i = 0; i < config.n_b; ++i) {
        CounterRng rng(config.seed, static_cast<std::uint64_t>(batch_index),
                       static_cast<std::uint64_t>(i));
        Cluster c;
        c.X = draw_covariates(config, chol_x, rng, z, w);
        for (int j = 0; j < config.m; ++j) e[j] = rng.next_normal();
        // Gaussian-copula thresholding: marginal means are exact, the
        // latent correlation induces attenuated binary dependence.
        latent.noalias() = chol_y * e;
        eta.noalias() = c.X * beta;
        c.y.resize(config.m);
        for (int j = 0; j < config.m; ++j) {
            const double mu = family_functions(Family::BinomialLogit, eta[j]).mu;
            c.y[j] = normal_cdf(latent[j]) <= mu ? 1.0 : 0.0;
        }
        batch.clusters.push_back(std::move(c));
    }
    return batch;
}

ClusterBatch gen_batch(const SimConfig& config, long batch_index) {
    return config.family == Family::GaussianIdentity ? gen_gaussian_batch(config, batch_index)
                                                     : gen_binary_batch(config, batch_index);
}

std::vector<ClusterBatch> make_stream(const SimConfig& config) {
    config.validate();
    std::vector<ClusterBatch> stream;
    stream.reserve(config.B);
    for (long b = 1; b <= config.B; ++b) stream.push_back(gen_batch(config, b));
    return stream;
}

}  // namespace rqif
