#include "rqif/renew.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rqif/numerics.hpp"

namespace rqif {

RenewState init_state(const ModelSpec& model, const ClusterBatch& first_batch,
                      const RenewConfig& config) {
    model.validate();
    if (first_batch.empty()) throw std::invalid_argument("init_state: first batch is empty");
    check_batch(model, first_batch);
    if (first_batch.size() < model.p)
        std::fprintf(stderr, "warning: first batch has fewer clusters than coefficients\n");

    const Eigen::VectorXd start = irls_glm_fit(model, first_batch);
    QifFit fit = fit_offline_qif(model, first_batch, start, config.tol, config.maxit);

    RenewState state;
    state.model = model;
    state.config = config;
    state.beta = fit.beta_hat;
    state.g = fit.summary.g;
    state.G = fit.summary.G;
    state.C = fit.summary.C;
    state.N = first_batch.size();
    state.b = 1;
    state.reference = first_batch;
    state.last_converged = fit.converged;
    state.last_iterations = fit.iterations;
    return state;
}

void renew_update(RenewState& state, const ClusterBatch& batch) {
    if (state.b < 1) throw std::logic_error("renew_update: state not initialized");
    check_batch(state.model, batch);
    if (batch.empty()) {
        state.b += 1;
        return;
    }

    const Eigen::VectorXd beta_prev = state.beta;
    Eigen::VectorXd beta = beta_prev;
    bool converged = false;
    int iterations = 0;

    BatchSummary s = batch_summary(state.model, batch, beta);
    for (int it = 0; it <= state.config.maxit; ++it) {
        const Eigen::VectorXd g_adj = state.g + state.G * (beta_prev - beta) + s.g;
        const Eigen::MatrixXd G_agg = state.G + s.G;
        const Eigen::MatrixXd C_agg = state.C + s.C;
        const PinvResult ci = pseudo_inverse(C_agg);
        const Eigen::VectorXd f = G_agg.transpose() * (ci.pinv * g_adj);
        const Eigen::MatrixXd J = G_agg.transpose() * ci.pinv * G_agg;
        const PinvResult ji = pseudo_inverse(J);
        const double decrement = f.dot(ji.pinv * f);
        if (decrement < state.config.tol) {
            converged = true;
            break;
        }
        if (it == state.config.maxit) break;
        const Eigen::VectorXd next = beta + ji.pinv * f;
        if (!next.allFinite())
            throw std::runtime_error("renew_update: non-finite iterate; state unchanged");
        beta = next;
        s = batch_summary(state.model, batch, beta);
        iterations = it + 1;
    }
    if (!converged)
        std::fprintf(stderr, "algorithm reached 'maxit' but did not reach the convergence criteria\n");

    // Commit; the stored adjusted score is evaluated at the committed beta
    // so the triple satisfies the incremental equation there.
    state.g += state.G * (beta_prev - beta) + s.g;
    state.G += s.G;
    state.C += s.C;
    state.beta = beta;
    state.N += batch.size();
    state.b += 1;
    state.last_converged = converged;
    state.last_iterations = iterations;
}

Eigen::MatrixXd variance_of(const RenewState& state) {
    const PinvResult ci = pseudo_inverse(state.C);
    const Eigen::MatrixXd J = state.G.transpose() * ci.pinv * state.G;
    return pseudo_inverse(J).pinv;
}

InferenceReport inference_report(const RenewState& state) {
    const Eigen::MatrixXd V = variance_of(state);
    InferenceReport rep;
    rep.N = state.N;
    rep.b = state.b;
    rep.batches_rejected = state.batches_rejected;
    rep.coef.reserve(state.model.p);
    for (int k = 0; k < state.model.p; ++k) {
        CoefInference ci;
        ci.estimate = state.beta[k];
        const double var = V(k, k);
        ci.std_error = var > 0 ? std::sqrt(var) : 0.0;
        if (ci.std_error == 0.0) {
            ci.degenerate = true;
            ci.z = 0.0;
            ci.p_value = 0.0;
            ci.neg_log10_p = std::numeric_limits<double>::infinity();
        } else {
            ci.z = ci.estimate / ci.std_error;
            ci.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(ci.z)));
            if (ci.p_value > 1.0) ci.p_value = 1.0;
            ci.neg_log10_p = neg_log10_two_sided_p(ci.z);
        }
        rep.coef.push_back(ci);
    }
    return rep;
}

}  // namespace rqif
