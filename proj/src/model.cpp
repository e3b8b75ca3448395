#include "rqif/model.hpp"

#include <cmath>
#include <stdexcept>

namespace rqif {

std::string to_string(Family f) {
    return f == Family::GaussianIdentity ? "gaussian-identity" : "binomial-logit";
}

std::string to_string(Corr c) {
    switch (c) {
        case Corr::Independence: return "independence";
        case Corr::CompoundSymmetry: return "compound-symmetry";
        default: return "ar1";
    }
}

Family family_from_string(const std::string& s) {
    if (s == "gaussian-identity" || s == "gaussian") return Family::GaussianIdentity;
    if (s == "binomial-logit" || s == "logistic" || s == "binomial") return Family::BinomialLogit;
    throw std::invalid_argument("unknown family: " + s);
}

Corr corr_from_string(const std::string& s) {
    if (s == "independence") return Corr::Independence;
    if (s == "compound-symmetry" || s == "exchangeable" || s == "cs") return Corr::CompoundSymmetry;
    if (s == "ar1") return Corr::Ar1;
    throw std::invalid_argument("unknown correlation structure: " + s);
}

void ModelSpec::validate() const {
    if (p < 1) throw std::invalid_argument("ModelSpec: p must be >= 1");
}

FamilyValues family_functions(Family family, double eta) {
    if (family == Family::GaussianIdentity) return {eta, 1.0, 1.0};
    // Saturating logistic: exp() of a large negative argument underflows to 0
    // rather than overflowing, so branch on the sign of eta.
    double mu;
    if (eta >= 0) {
        mu = 1.0 / (1.0 + std::exp(-eta));
    } else {
        const double e = std::exp(eta);
        mu = e / (1.0 + e);
    }
    if (mu < kMuEps) mu = kMuEps;
    if (mu > 1.0 - kMuEps) mu = 1.0 - kMuEps;
    const double v = mu * (1.0 - mu);
    return {mu, v, v};
}

ClusterMoments cluster_moments(const ModelSpec& model, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& beta) {
    if (X.cols() != model.p || beta.size() != model.p)
        throw std::invalid_argument("cluster_moments: dimension mismatch");
    const Eigen::Index m = X.rows();
    ClusterMoments out;
    out.mu.resize(m);
    out.D.resize(m, model.p);
    out.a_inv_sqrt.resize(m);
    const Eigen::VectorXd eta = X * beta;
    for (Eigen::Index j = 0; j < m; ++j) {
        const FamilyValues fv = family_functions(model.family, eta[j]);
        out.mu[j] = fv.mu;
        out.D.row(j) = fv.dmu_deta * X.row(j);
        out.a_inv_sqrt[j] = 1.0 / std::sqrt(fv.variance);
    }
    return out;
}

void check_batch(const ModelSpec& model, const ClusterBatch& batch) {
    for (const Cluster& c : batch.clusters) {
        if (c.X.cols() != model.p)
            throw std::invalid_argument("batch: cluster covariate matrix must have p columns");
        if (c.y.size() != c.X.rows())
            throw std::invalid_argument("batch: outcome length must match covariate rows");
        if (c.y.size() < 1) throw std::invalid_argument("batch: empty cluster");
        if (model.family == Family::BinomialLogit) {
            for (Eigen::Index j = 0; j < c.y.size(); ++j)
                if (c.y[j] != 0.0 && c.y[j] != 1.0)
                    throw std::invalid_argument("batch: binary outcome must be 0 or 1");
        }
    }
}

}  // namespace rqif
