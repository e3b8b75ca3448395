#pragma once

#include <Eigen/Dense>

namespace rqif {

struct PinvResult {
    Eigen::MatrixXd pinv;
    int rank = 0;
    double tolerance_used = 0.0;
};

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via spectral
/// decomposition. Eigenvalues <= rtol * lambda_max are treated as zero.
/// rtol < 0 selects the default 1e-10 * dim. The input is symmetrized as
/// (A + A^T)/2 before decomposition.
PinvResult pseudo_inverse(const Eigen::MatrixXd& A, double rtol = -1.0);

/// Regularized lower incomplete gamma P(df/2, x/2).
double chi2_cdf(double x, double df);

/// Inverse of chi2_cdf in x, |chi2_cdf(x, df) - prob| <= 1e-10.
double chi2_quantile(double prob, double df);

/// Lower-triangular factor L with L L^T = A. Throws on a non-PD pivot,
/// naming the failing leading minor.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& A);

double normal_cdf(double z);

/// log of the upper tail P(Z > z), stable for large z where the tail
/// underflows.
double log_normal_sf(double z);

/// -log10 of the two-sided normal p-value 2 P(Z > |z|), computed in
/// log-space.
double neg_log10_two_sided_p(double z);

}  // namespace rqif
