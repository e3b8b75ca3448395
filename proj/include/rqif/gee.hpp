#pragma once

#include <Eigen/Dense>

#include "rqif/model.hpp"

namespace rqif {

struct GeeNuisance {
    double alpha = 0.0;  // working-correlation parameter
    double phi = 1.0;    // dispersion
    bool alpha_clamped = false;
};

/// Per-batch GEE statistics at a fixed (beta, nuisance): estimating
/// function psi, negative gradient S, sample variance V, plus the Pearson
/// residual moments needed for the nuisance updates.
struct GeeBatchStats {
    Eigen::VectorXd psi;
    Eigen::MatrixXd S;
    Eigen::MatrixXd V;
    double resid_sq_sum = 0.0;    // sum r_ij^2
    double resid_pair_sum = 0.0;  // sum_{i} sum_{j<k} r_ij r_ik
    long obs_count = 0;           // sum m_i
    long pair_count = 0;          // sum m_i (m_i - 1) / 2
};

GeeBatchStats gee_batch_stats(const ModelSpec& model, const ClusterBatch& batch,
                              const Eigen::VectorXd& beta, const GeeNuisance& nuisance);

struct GeeFit {
    Eigen::VectorXd beta_hat;
    Eigen::MatrixXd sandwich;
    GeeNuisance nuisance;
    int iterations = 0;
    bool converged = false;
};

GeeFit fit_offline_gee(const ModelSpec& model, const ClusterBatch& data, double tol = 1e-6,
                       int maxit = 50);

struct GeeState {
    ModelSpec model;
    Eigen::VectorXd beta;
    Eigen::MatrixXd S;  // aggregated negative gradient
    Eigen::MatrixXd V;  // aggregated sample variance
    GeeNuisance nuisance;
    long N = 0;
    long b = 0;
    double m_avg = 0.0;  // running average cluster size, used in the weights
    double tol = 1e-6;
    int maxit = 50;
    bool last_converged = true;
    int last_iterations = 0;
};

GeeState init_gee_state(const ModelSpec& model, const ClusterBatch& first_batch,
                        double tol = 1e-6, int maxit = 50);

void renew_gee_update(GeeState& state, const ClusterBatch& batch);

/// Sandwich variance {S^T V^+ S}^+ of the current state.
Eigen::MatrixXd gee_variance(const GeeState& state);

/// Valid exchangeable-correlation interval for the largest cluster size.
double alpha_lower_bound(int m_max);

}  // namespace rqif
