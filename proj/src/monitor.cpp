#include "rqif/monitor.hpp"

#include <stdexcept>

#include "rqif/numerics.hpp"
#include "rqif/qif.hpp"

namespace rqif {

MonitorDecision screen_batch(const ModelSpec& model, const ClusterBatch& reference,
                             const ClusterBatch& candidate, double alpha,
                             const Eigen::VectorXd& beta_init, double tol, int maxit) {
    if (reference.empty() || candidate.empty())
        throw std::invalid_argument("screen_batch: both batches must be nonempty");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("screen_batch: alpha must be in (0,1)");

    MonitorDecision out;
    out.alpha_used = alpha;

    Eigen::VectorXd beta = beta_init;
    BatchSummary s1 = batch_summary(model, reference, beta);
    BatchSummary s2 = batch_summary(model, candidate, beta);
    PinvResult c1 = pseudo_inverse(s1.C);
    PinvResult c2 = pseudo_inverse(s2.C);

    bool converged = false;
    for (int it = 0; it <= maxit; ++it) {
        const Eigen::VectorXd f =
            s1.G.transpose() * (c1.pinv * s1.g) + s2.G.transpose() * (c2.pinv * s2.g);
        const Eigen::MatrixXd J =
            s1.G.transpose() * c1.pinv * s1.G + s2.G.transpose() * c2.pinv * s2.G;
        const PinvResult ji = pseudo_inverse(J);
        const double decrement = f.dot(ji.pinv * f);
        if (decrement < tol) {
            converged = true;
            break;
        }
        if (it == maxit) break;
        beta += ji.pinv * f;
        if (!beta.allFinite()) {
            // Conservative reject on divergence.
            out.diverged = true;
            out.reject = true;
            out.lambda = std::numeric_limits<double>::infinity();
            out.df = 1;
            out.p_value = 0.0;
            out.beta_check = beta_init;
            return out;
        }
        s1 = batch_summary(model, reference, beta);
        s2 = batch_summary(model, candidate, beta);
        c1 = pseudo_inverse(s1.C);
        c2 = pseudo_inverse(s2.C);
    }
    out.diverged = !converged;

    out.beta_check = beta;
    out.lambda = s1.g.dot(c1.pinv * s1.g) + s2.g.dot(c2.pinv * s2.g);
    if (out.lambda < 0.0) out.lambda = 0.0;
    out.df = c1.rank + c2.rank - model.p;
    if (out.df <= 0) {
        // Zero-residual data collapses both covariance blocks; the fit is
        // perfectly consistent, so accept. Anything else is a degenerate
        // reference that cannot support the test.
        if (out.lambda <= 1e-8) {
            out.df = 1;
            out.p_value = 1.0;
            out.reject = false;
            return out;
        }
        throw std::runtime_error("screen_batch: degenerate reference (df <= 0)");
    }
    out.p_value = 1.0 - chi2_cdf(out.lambda, out.df);
    out.reject = out.lambda >= chi2_quantile(1.0 - alpha, out.df);
    return out;
}

}  // namespace rqif
