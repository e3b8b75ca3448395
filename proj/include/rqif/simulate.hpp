#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rqif/model.hpp"

namespace rqif {

struct Contamination {
    std::vector<long> positions;  // 1-based batch indices, within {2,...,B}
    double d = 0.0;               // departure added to -beta0[1]
};

struct SimConfig {
    Family family = Family::GaussianIdentity;
    Eigen::VectorXd beta0;
    int m = 5;
    int n_b = 100;
    int B = 10;
    double alpha_x = 0.5;  // exchangeable covariate correlation
    double alpha_y = 0.7;  // exchangeable outcome correlation
    double phi = 1.0;
    std::uint64_t seed = 0;
    std::optional<Contamination> contamination;

    int p() const { return static_cast<int>(beta0.size()); }
    void validate() const;
    /// The coefficient vector a given batch is generated under.
    Eigen::VectorXd batch_beta(long batch_index) const;
};

/// One batch of n_b clusters, deterministic in (seed, batch_index,
/// cluster index). batch_index is 1-based.
ClusterBatch gen_gaussian_batch(const SimConfig& config, long batch_index);
ClusterBatch gen_binary_batch(const SimConfig& config, long batch_index);
ClusterBatch gen_batch(const SimConfig& config, long batch_index);

std::vector<ClusterBatch> make_stream(const SimConfig& config);

}  // namespace rqif
