#include "rqif/gee.hpp"

#include <cmath>
#include <stdexcept>

#include "rqif/numerics.hpp"
#include "rqif/qif.hpp"

namespace rqif {

double alpha_lower_bound(int m_max) {
    return m_max > 1 ? -1.0 / (m_max - 1) : -1.0;
}

namespace {

// Closed-form inverse of the exchangeable correlation matrix:
// R^{-1} = 1/(1-a) [I - a/(1+(m-1)a) J].
Eigen::MatrixXd exch_corr_inverse(int m, double a) {
    const double denom = 1.0 + (m - 1) * a;
    if (a >= 1.0 || denom <= 0.0)
        throw std::runtime_error("gee: working correlation R(alpha) is not positive definite");
    Eigen::MatrixXd inv = Eigen::MatrixXd::Constant(m, m, -a / ((1.0 - a) * denom));
    inv.diagonal().array() += 1.0 / (1.0 - a);
    return inv;
}

double clamp_alpha(double a, int m_max, bool& clamped) {
    const double lo = alpha_lower_bound(m_max) + 1e-6;
    const double hi = 1.0 - 1e-6;
    if (a < lo) { clamped = true; return lo; }
    if (a > hi) { clamped = true; return hi; }
    return a;
}

}  // namespace

GeeBatchStats gee_batch_stats(const ModelSpec& model, const ClusterBatch& batch,
                              const Eigen::VectorXd& beta, const GeeNuisance& nuisance) {
    model.validate();
    if (model.corr == Corr::Ar1)
        throw std::invalid_argument("gee: AR(1) working structure is not supported");
    if (beta.size() != model.p) throw std::invalid_argument("gee_batch_stats: beta length mismatch");
    if (nuisance.phi <= 0) throw std::invalid_argument("gee_batch_stats: phi must be positive");

    const int p = model.p;
    const double alpha = model.corr == Corr::Independence ? 0.0 : nuisance.alpha;

    GeeBatchStats out;
    out.psi = Eigen::VectorXd::Zero(p);
    out.S = Eigen::MatrixXd::Zero(p, p);
    out.V = Eigen::MatrixXd::Zero(p, p);

    for (const Cluster& c : batch.clusters) {
        if (c.X.cols() != p) throw std::invalid_argument("gee_batch_stats: cluster column mismatch");
        const int m = static_cast<int>(c.y.size());
        const ClusterMoments mom = cluster_moments(model, c.X, beta);
        const Eigen::MatrixXd B = mom.a_inv_sqrt.asDiagonal() * mom.D;
        const Eigen::VectorXd u = mom.a_inv_sqrt.cwiseProduct(c.y - mom.mu);  // Pearson residuals

        Eigen::VectorXd rinv_u;
        Eigen::MatrixXd rinv_B;
        if (alpha == 0.0 || m == 1) {
            rinv_u = u;
            rinv_B = B;
        } else {
            const Eigen::MatrixXd rinv = exch_corr_inverse(m, alpha);
            rinv_u = rinv * u;
            rinv_B = rinv * B;
        }
        const Eigen::VectorXd psi_i = B.transpose() * rinv_u / nuisance.phi;
        out.psi += psi_i;
        out.S.noalias() += B.transpose() * rinv_B / nuisance.phi;
        out.V.noalias() += psi_i * psi_i.transpose();

        out.resid_sq_sum += u.squaredNorm();
        const double us = u.sum();
        out.resid_pair_sum += 0.5 * (us * us - u.squaredNorm());
        out.obs_count += m;
        out.pair_count += static_cast<long>(m) * (m - 1) / 2;
    }
    return out;
}

namespace {

GeeNuisance moment_nuisance(const ModelSpec& model, const GeeBatchStats& stats, int m_max) {
    GeeNuisance nu;
    const long dof = stats.obs_count - model.p;
    nu.phi = dof > 0 ? stats.resid_sq_sum / dof : 1.0;
    if (nu.phi <= 0) nu.phi = 1.0;
    if (model.corr == Corr::CompoundSymmetry) {
        const double pair_dof = static_cast<double>(stats.pair_count) - model.p;
        if (pair_dof > 0)
            nu.alpha = clamp_alpha(stats.resid_pair_sum / (nu.phi * pair_dof), m_max, nu.alpha_clamped);
    }
    return nu;
}

int max_cluster_size(const ClusterBatch& data) {
    int m = 1;
    for (const Cluster& c : data.clusters) m = std::max<int>(m, static_cast<int>(c.y.size()));
    return m;
}

}  // namespace

GeeFit fit_offline_gee(const ModelSpec& model, const ClusterBatch& data, double tol, int maxit) {
    if (data.empty()) throw std::invalid_argument("fit_offline_gee: empty data");
    check_batch(model, data);
    const int m_max = max_cluster_size(data);

    GeeFit fit;
    Eigen::VectorXd beta = irls_glm_fit(model, data);
    GeeNuisance nu;
    GeeBatchStats stats = gee_batch_stats(model, data, beta, nu);
    for (int it = 1; it <= maxit; ++it) {
        nu = moment_nuisance(model, stats, m_max);
        stats = gee_batch_stats(model, data, beta, nu);
        const Eigen::VectorXd step = pseudo_inverse(stats.S).pinv * stats.psi;
        beta += step;
        if (!beta.allFinite()) throw std::runtime_error("fit_offline_gee: diverged");
        stats = gee_batch_stats(model, data, beta, nu);
        fit.iterations = it;
        if (step.lpNorm<Eigen::Infinity>() < tol) {
            fit.converged = true;
            break;
        }
    }
    fit.beta_hat = beta;
    fit.nuisance = nu;
    const Eigen::MatrixXd vi = pseudo_inverse(stats.V).pinv;
    fit.sandwich = pseudo_inverse(stats.S.transpose() * vi * stats.S).pinv;
    return fit;
}

GeeState init_gee_state(const ModelSpec& model, const ClusterBatch& first_batch, double tol,
                        int maxit) {
    GeeFit fit = fit_offline_gee(model, first_batch, tol, maxit);
    GeeState state;
    state.model = model;
    state.tol = tol;
    state.maxit = maxit;
    state.beta = fit.beta_hat;
    state.nuisance = fit.nuisance;
    const GeeBatchStats stats = gee_batch_stats(model, first_batch, state.beta, state.nuisance);
    state.S = stats.S;
    state.V = stats.V;
    state.N = first_batch.size();
    state.b = 1;
    state.m_avg = static_cast<double>(stats.obs_count) / static_cast<double>(first_batch.size());
    state.last_converged = fit.converged;
    state.last_iterations = fit.iterations;
    return state;
}

void renew_gee_update(GeeState& state, const ClusterBatch& batch) {
    if (state.b < 1) throw std::logic_error("renew_gee_update: state not initialized");
    if (batch.empty()) return;
    check_batch(state.model, batch);
    const int m_max = max_cluster_size(batch);

    const Eigen::VectorXd beta_prev = state.beta;
    Eigen::VectorXd beta = beta_prev;
    bool converged = false;
    int iterations = 0;

    GeeBatchStats stats = gee_batch_stats(state.model, batch, beta, state.nuisance);
    for (int it = 1; it <= state.maxit; ++it) {
        const Eigen::VectorXd psi_adj = state.S * (beta_prev - beta) + stats.psi;
        const Eigen::VectorXd step = pseudo_inverse(state.S + stats.S).pinv * psi_adj;
        beta += step;
        if (!beta.allFinite())
            throw std::runtime_error("renew_gee_update: non-finite iterate; state unchanged");
        stats = gee_batch_stats(state.model, batch, beta, state.nuisance);
        iterations = it;
        if (step.lpNorm<Eigen::Infinity>() < state.tol) {
            converged = true;
            break;
        }
    }

    const long n_b = batch.size();
    const long obs_prev = std::lround(state.m_avg * static_cast<double>(state.N));
    const double m_stream =
        static_cast<double>(obs_prev + stats.obs_count) / static_cast<double>(state.N + n_b);

    state.S += stats.S;
    state.V += stats.V;
    state.beta = beta;

    // Recursive nuisance renewal as a convex combination; the batch-level
    // moment estimates are computed at the committed beta.
    const GeeNuisance batch_nu = moment_nuisance(state.model, stats, m_max);
    const double w_prev = (m_stream * state.N - state.model.p) /
                          (m_stream * (state.N + n_b) - state.model.p);
    const double w_b = 1.0 - w_prev;
    state.nuisance.alpha = w_prev * state.nuisance.alpha + w_b * batch_nu.alpha;
    state.nuisance.phi = w_prev * state.nuisance.phi + w_b * batch_nu.phi;
    state.nuisance.alpha_clamped = batch_nu.alpha_clamped;

    state.N += n_b;
    state.b += 1;
    state.m_avg = m_stream;
    state.last_converged = converged;
    state.last_iterations = iterations;
}

Eigen::MatrixXd gee_variance(const GeeState& state) {
    const Eigen::MatrixXd vi = pseudo_inverse(state.V).pinv;
    return pseudo_inverse(state.S.transpose() * vi * state.S).pinv;
}

}  // namespace rqif
