#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rqif/simulate.hpp"

namespace rqif {

enum class BenchTable { LinearFixedN, LinearGrowingB, LogisticGrowingB, MonitoringGrid };

BenchTable bench_table_from_string(const std::string& s);

/// One replication's estimate: coefficients, standard errors, timing split
/// into data loading vs computation, and per-batch Newton iteration counts
/// for the renewable methods.
struct EstimateRun {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    double c_time = 0.0;  // loading + computation
    double r_time = 0.0;  // computation only
    double used_fraction = 1.0;
    std::vector<int> iter_counts;
    std::vector<double> neg_log10_p_final;
    bool all_converged = true;
};

/// Shared simulation default: beta0 = (0.2,-0.2,0.2,-0.2,0.2), m = 5,
/// exchangeable covariate and outcome correlations 0.5 / 0.7.
SimConfig default_sim(Family family, int n_b, int B, std::uint64_t seed);

EstimateRun run_renewqif(const SimConfig& config, bool monitor = false, double alpha = 0.05);
EstimateRun run_renewgee(const SimConfig& config);
EstimateRun run_offline_qif(const SimConfig& config);
EstimateRun run_offline_gee(const SimConfig& config);

struct MethodMetrics {
    std::string method;
    double a_bias = 0.0;
    double ase = 0.0;
    double ese = 0.0;
    double cp = 0.0;
    double c_time = 0.0;
    double r_time = 0.0;
    double used_fraction = 1.0;
};

/// A.bias / ASE / ESE / CP over replications. coef < 0 averages over all
/// coefficients; coef >= 0 restricts to that coefficient (the monitoring
/// table reports the contaminated one).
MethodMetrics summarize_runs(const std::string& method, const Eigen::VectorXd& beta0,
                             const std::vector<EstimateRun>& runs, int coef = -1);

struct BenchGroup {
    std::string label;
    std::vector<MethodMetrics> rows;
};

struct BenchResult {
    std::string title;
    std::vector<BenchGroup> groups;
};

/// Desk-scale benchmark tables. scale multiplies the default total sample
/// size (capped so N stays <= 1e5). trace_dir, if nonempty, receives
/// per-batch -log10(p) traces from the first replication.
BenchResult run_benchmark(BenchTable table, int reps, double scale, std::uint64_t seed,
                          const std::string& trace_dir = "");

std::string format_text(const BenchResult& result);
std::string format_csv(const BenchResult& result);

}  // namespace rqif
