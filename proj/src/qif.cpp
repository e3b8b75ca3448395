#include "rqif/qif.hpp"

#include <cmath>
#include <stdexcept>

#include "rqif/corrbasis.hpp"
#include "rqif/numerics.hpp"

namespace rqif {

BatchSummary batch_summary(const ModelSpec& model, const ClusterBatch& batch,
                           const Eigen::VectorXd& beta) {
    model.validate();
    if (beta.size() != model.p) throw std::invalid_argument("batch_summary: beta length mismatch");
    const int p = model.p;
    const int S = model.basis_count();
    const int pS = p * S;

    BatchSummary out;
    out.g = Eigen::VectorXd::Zero(pS);
    out.G = Eigen::MatrixXd::Zero(pS, p);
    out.C = Eigen::MatrixXd::Zero(pS, pS);
    out.n = batch.size();
    out.beta_at = beta;

    // Workspace reused across clusters; resized only when a larger cluster
    // arrives. This loop dominates every fit, so it must not allocate.
    Eigen::VectorXd gi(pS);
    Eigen::MatrixXd B, MB;
    Eigen::VectorXd u, t;
    Eigen::Index cap = 0;
    const BasisSet* basis = nullptr;  // lookup is mutex-guarded; hoist it per cluster size
    Eigen::Index basis_m = -1;
    for (const Cluster& c : batch.clusters) {
        if (c.X.cols() != p) throw std::invalid_argument("batch_summary: cluster has wrong column count");
        const Eigen::Index m = c.y.size();
        if (m > cap) {
            cap = m;
            B.resize(cap, p);
            MB.resize(cap, p);
            u.resize(cap);
            t.resize(cap);
        }
        if (m != basis_m) {
            basis = &basis_set(model.corr, static_cast<int>(m));
            basis_m = m;
        }
        auto Bm = B.topRows(m);
        auto um = u.head(m);
        // B = A^{-1/2} D and u = A^{-1/2} (y - mu), built row by row from
        // eta (staged in um, then overwritten by the scaled residual)
        um.noalias() = c.X * beta;
        for (Eigen::Index j = 0; j < m; ++j) {
            const FamilyValues fv = family_functions(model.family, um[j]);
            const double ainv = 1.0 / std::sqrt(fv.variance);
            Bm.row(j) = ainv * (fv.dmu_deta * c.X.row(j));
            um[j] = ainv * (c.y[j] - fv.mu);
        }
        gi.setZero();
        // matrices[0] is always the identity; skip the products
        gi.head(p).noalias() = Bm.transpose() * um;
        out.G.topLeftCorner(p, p).noalias() += Bm.transpose() * Bm;
        for (int s = 1; s < S; ++s) {
            // Singleton clusters have no off-diagonal basis; their upper
            // blocks stay zero.
            if (s >= static_cast<int>(basis->matrices.size())) continue;
            const Eigen::MatrixXd& M = basis->matrices[s];
            t.head(m).noalias() = M * um;
            gi.segment(s * p, p).noalias() = Bm.transpose() * t.head(m);
            MB.topRows(m).noalias() = M * Bm;
            out.G.block(s * p, 0, p, p).noalias() += Bm.transpose() * MB.topRows(m);
        }
        out.g += gi;
        out.C.noalias() += gi * gi.transpose();
    }
    return out;
}

double qif_objective(const BatchSummary& summary) {
    if (!summary.g.allFinite() || !summary.C.allFinite())
        throw std::invalid_argument("qif_objective: non-finite summary");
    if (summary.g.isZero(0.0)) return 0.0;
    const PinvResult ci = pseudo_inverse(summary.C);
    const double q = summary.g.dot(ci.pinv * summary.g);
    return q < 0.0 ? 0.0 : q;
}

QifFit fit_offline_qif(const ModelSpec& model, const ClusterBatch& data,
                       const Eigen::VectorXd& beta_init, double tol, int maxit) {
    if (!beta_init.allFinite()) throw std::invalid_argument("fit_offline_qif: non-finite start");
    QifFit fit;
    Eigen::VectorXd beta = beta_init;
    BatchSummary s = batch_summary(model, data, beta);
    for (int it = 0; it <= maxit; ++it) {
        const PinvResult ci = pseudo_inverse(s.C);
        const Eigen::VectorXd f = s.G.transpose() * (ci.pinv * s.g);
        const Eigen::MatrixXd J = s.G.transpose() * ci.pinv * s.G;
        const PinvResult ji = pseudo_inverse(J);
        const double decrement = f.dot(ji.pinv * f);
        if (decrement < tol) {
            fit.converged = true;
            break;
        }
        if (it == maxit) break;
        beta += ji.pinv * f;
        if (!beta.allFinite())
            throw std::runtime_error("fit_offline_qif: iterates diverged; try a better starting value");
        s = batch_summary(model, data, beta);
        fit.iterations = it + 1;
    }
    fit.beta_hat = beta;
    fit.summary = std::move(s);
    fit.Q = qif_objective(fit.summary);
    return fit;
}

Eigen::VectorXd irls_glm_fit(const ModelSpec& model, const ClusterBatch& data, double tol, int maxit) {
    model.validate();
    check_batch(model, data);
    const int p = model.p;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

    if (model.family == Family::GaussianIdentity) {
        Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
        Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
        for (const Cluster& c : data.clusters) {
            xtx.noalias() += c.X.transpose() * c.X;
            xty.noalias() += c.X.transpose() * c.y;
        }
        const PinvResult xi = pseudo_inverse(xtx);
        if (xi.rank < p) throw std::runtime_error("irls_glm_fit: design is rank deficient");
        return xi.pinv * xty;
    }

    for (int it = 0; it < maxit; ++it) {
        Eigen::MatrixXd xwx = Eigen::MatrixXd::Zero(p, p);
        Eigen::VectorXd xws = Eigen::VectorXd::Zero(p);
        for (const Cluster& c : data.clusters) {
            const Eigen::VectorXd eta = c.X * beta;
            for (Eigen::Index j = 0; j < eta.size(); ++j) {
                const FamilyValues fv = family_functions(model.family, eta[j]);
                xwx.noalias() += fv.dmu_deta * c.X.row(j).transpose() * c.X.row(j);
                xws.noalias() += (c.y[j] - fv.mu) * c.X.row(j).transpose();
            }
        }
        const PinvResult xi = pseudo_inverse(xwx);
        if (xi.rank < p) throw std::runtime_error("irls_glm_fit: design is rank deficient");
        const Eigen::VectorXd step = xi.pinv * xws;
        beta += step;
        if (!beta.allFinite()) throw std::runtime_error("irls_glm_fit: diverged");
        if (step.lpNorm<Eigen::Infinity>() < tol) return beta;
    }
    return beta;
}

}  // namespace rqif
