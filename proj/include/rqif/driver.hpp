#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rqif/monitor.hpp"
#include "rqif/renew.hpp"

namespace rqif {

struct StreamReport {
    long batch_id = 0;
    long n_clusters = 0;
    bool accepted = true;
    std::optional<MonitorDecision> decision;
    InferenceReport inference;
    double load_seconds = 0.0;
    double compute_seconds = 0.0;
};

/// One pass of the monitoring -> speed -> inference pipeline for a single
/// batch. Screens against the retained reference when monitoring is on; a
/// rejected batch advances the counters and leaves the estimation state
/// untouched.
StreamReport process_batch(RenewState& state, const ClusterBatch& batch);

/// Drives a sequence of batch files against a state file. The first file
/// initializes the state when none exists at state_path; the state file is
/// rewritten after every batch. Batches are loaded one at a time and
/// released afterwards.
std::vector<StreamReport> run_stream(const ModelSpec& model, const RenewConfig& config,
                                     const std::vector<std::string>& batch_files,
                                     const std::string& state_path);

std::string report_header(int p);
std::string report_line(const StreamReport& rep);

}  // namespace rqif
