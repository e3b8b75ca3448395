#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rqif/model.hpp"
#include "rqif/qif.hpp"

namespace rqif {

struct RenewConfig {
    double tol = 1e-6;
    int maxit = 50;
    double monitor_alpha = 0.05;
    bool monitor = true;
};

/// Everything carried between batches: the current estimate, the
/// aggregated summary triple, cumulative counts and the retained raw
/// reference batch used by the monitoring test. No other raw data is kept.
struct RenewState {
    ModelSpec model;
    RenewConfig config;
    Eigen::VectorXd beta;  // beta_tilde
    Eigen::VectorXd g;     // adjusted extended score at beta
    Eigen::MatrixXd G;     // aggregated negative gradient
    Eigen::MatrixXd C;     // aggregated sample variance
    long N = 0;            // accepted clusters
    long b = 0;            // batches seen, rejected included
    long batches_rejected = 0;
    ClusterBatch reference;
    bool last_converged = true;
    int last_iterations = 0;
};

/// Fits the first batch offline (IRLS start, then QIF) and retains it as
/// the monitoring reference.
RenewState init_state(const ModelSpec& model, const ClusterBatch& first_batch,
                      const RenewConfig& config = {});

/// Renews the state with one accepted batch via the incremental Newton
/// scheme. Non-convergence commits anyway with last_converged = false; a
/// non-finite iterate throws and leaves the state unchanged.
void renew_update(RenewState& state, const ClusterBatch& batch);

/// Godambe-information variance (G^T C^+ G)^+.
Eigen::MatrixXd variance_of(const RenewState& state);

struct CoefInference {
    double estimate;
    double std_error;
    double z;
    double p_value;
    double neg_log10_p;
    bool degenerate = false;  // zero standard error
};

struct InferenceReport {
    std::vector<CoefInference> coef;
    long N = 0;
    long b = 0;
    long batches_rejected = 0;
};

InferenceReport inference_report(const RenewState& state);

}  // namespace rqif
