#pragma once

#include <Eigen/Dense>

#include "rqif/model.hpp"

namespace rqif {

struct MonitorDecision {
    double lambda = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool reject = false;
    Eigen::VectorXd beta_check;
    double alpha_used = 0.05;
    bool diverged = false;  // Newton failure; rejected conservatively
};

/// Goodness-of-fit screen of a candidate batch against the retained
/// reference: minimizes the stacked objective with block-diagonal
/// covariance and compares Lambda to the chi-square threshold at
/// rank(C_ref) + rank(C_cand) - p degrees of freedom.
MonitorDecision screen_batch(const ModelSpec& model, const ClusterBatch& reference,
                             const ClusterBatch& candidate, double alpha,
                             const Eigen::VectorXd& beta_init, double tol = 1e-6,
                             int maxit = 50);

}  // namespace rqif
