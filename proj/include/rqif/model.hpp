#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rqif {

enum class Family { GaussianIdentity, BinomialLogit };
enum class Corr { Independence, CompoundSymmetry, Ar1 };

std::string to_string(Family f);
std::string to_string(Corr c);
Family family_from_string(const std::string& s);
Corr corr_from_string(const std::string& s);

/// Marginal model: mean link, variance function, coefficient count and
/// working-correlation structure. The basis count S follows from the
/// structure (1 for independence, 2 otherwise).
struct ModelSpec {
    Family family = Family::GaussianIdentity;
    int p = 1;
    Corr corr = Corr::Independence;

    int basis_count() const { return corr == Corr::Independence ? 1 : 2; }
    void validate() const;
};

struct Cluster {
    Eigen::VectorXd y;  // length m_i
    Eigen::MatrixXd X;  // m_i x p
};

struct ClusterBatch {
    std::vector<Cluster> clusters;
    long batch_id = 0;

    long size() const { return static_cast<long>(clusters.size()); }
    bool empty() const { return clusters.empty(); }
};

struct ClusterMoments {
    Eigen::VectorXd mu;
    Eigen::MatrixXd D;           // d mu / d beta^T, m_i x p
    Eigen::VectorXd a_inv_sqrt;  // diagonal of A^{-1/2}
};

struct FamilyValues {
    double mu;
    double dmu_deta;
    double variance;
};

// Logistic probabilities are clamped into [kMuEps, 1 - kMuEps] so that
// A^{-1/2} stays finite under separation.
inline constexpr double kMuEps = 1e-12;

FamilyValues family_functions(Family family, double eta);

ClusterMoments cluster_moments(const ModelSpec& model, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& beta);

void check_batch(const ModelSpec& model, const ClusterBatch& batch);

}  // namespace rqif
