#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rqif/model.hpp"

namespace rqif {

/// 0/1 basis matrices expanding the inverse working correlation.
/// matrices[0] is always the identity; compound symmetry adds J - I,
/// AR(1) adds the first super/sub-diagonal indicator. For m = 1 every
/// structure collapses to the identity alone.
struct BasisSet {
    Corr structure;
    int m;
    std::vector<Eigen::MatrixXd> matrices;
};

/// Cached per (structure, m); the returned reference stays valid for the
/// lifetime of the process.
const BasisSet& basis_set(Corr structure, int m);

}  // namespace rqif
