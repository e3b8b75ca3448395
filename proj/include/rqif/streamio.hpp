#pragma once

#include <optional>
#include <string>

#include "rqif/gee.hpp"
#include "rqif/model.hpp"
#include "rqif/renew.hpp"

namespace rqif {

/// Thrown when a batch file fails to parse; carries the 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, long line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

/// Thrown on a state-file format_version mismatch.
struct StateVersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Batch files are delimiter-separated text with header
/// `cluster_id,y,x1,...,xp`; rows grouped contiguously by cluster_id.
ClusterBatch read_batch_file(const std::string& path, long batch_id = 0);
void write_batch_file(const ClusterBatch& batch, int p, const std::string& path);

/// Binary state persistence: magic "RNQF", versioned header, row-major
/// little-endian f64 arrays, FNV-1a checksum over the payload. Written
/// atomically via temp + rename. Roundtrips are bit-exact.
void save_state(const RenewState& state, const std::string& path,
                const GeeState* gee = nullptr);

struct LoadedState {
    RenewState renew;
    std::optional<GeeState> gee;
};

LoadedState load_state(const std::string& path);

}  // namespace rqif
