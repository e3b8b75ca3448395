#pragma once

#include <Eigen/Dense>

#include "rqif/model.hpp"

namespace rqif {

/// Per-batch extended-score summary: score g (pS), negative gradient G
/// (pS x p), sample variance C (pS x pS) and cluster count, all evaluated
/// at beta_at. Summaries at the same beta add component-wise.
struct BatchSummary {
    Eigen::VectorXd g;
    Eigen::MatrixXd G;
    Eigen::MatrixXd C;
    long n = 0;
    Eigen::VectorXd beta_at;
};

BatchSummary batch_summary(const ModelSpec& model, const ClusterBatch& batch,
                           const Eigen::VectorXd& beta);

/// GMM objective Q = g^T C^+ g.
double qif_objective(const BatchSummary& summary);

struct QifFit {
    Eigen::VectorXd beta_hat;
    BatchSummary summary;  // at beta_hat
    double Q = 0.0;
    int iterations = 0;
    bool converged = false;
};

QifFit fit_offline_qif(const ModelSpec& model, const ClusterBatch& data,
                       const Eigen::VectorXd& beta_init, double tol = 1e-6, int maxit = 50);

/// Independence-working IRLS GLM fit, used as the starting value for QIF
/// and GEE solves.
Eigen::VectorXd irls_glm_fit(const ModelSpec& model, const ClusterBatch& data,
                             double tol = 1e-8, int maxit = 50);

}  // namespace rqif
