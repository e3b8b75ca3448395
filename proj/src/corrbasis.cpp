#include "rqif/corrbasis.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace rqif {

namespace {

BasisSet build(Corr structure, int m) {
    if (m < 1) throw std::invalid_argument("basis_set: cluster size must be >= 1");
    BasisSet out;
    out.structure = structure;
    out.m = m;
    out.matrices.push_back(Eigen::MatrixXd::Identity(m, m));
    if (m == 1) return out;  // off-diagonal bases are empty for singletons
    switch (structure) {
        case Corr::Independence:
            break;
        case Corr::CompoundSymmetry: {
            Eigen::MatrixXd off = Eigen::MatrixXd::Ones(m, m);
            off.diagonal().setZero();
            out.matrices.push_back(std::move(off));
            break;
        }
        case Corr::Ar1: {
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
            tri.diagonal(1).setOnes();
            tri.diagonal(-1).setOnes();
            out.matrices.push_back(std::move(tri));
            break;
        }
    }
    return out;
}

}  // namespace

const BasisSet& basis_set(Corr structure, int m) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, BasisSet> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_pair(static_cast<int>(structure), m);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build(structure, m)).first;
    return it->second;
}

}  // namespace rqif
