#include "rqif/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "rqif/driver.hpp"
#include "rqif/gee.hpp"
#include "rqif/monitor.hpp"
#include "rqif/numerics.hpp"
#include "rqif/renew.hpp"

namespace rqif {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kZ95 = 1.959963984540054;

Eigen::VectorXd se_from_cov(const Eigen::MatrixXd& cov) {
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

std::vector<double> final_neg_log10_p(const InferenceReport& rep) {
    std::vector<double> out;
    out.reserve(rep.coef.size());
    for (const CoefInference& c : rep.coef) out.push_back(c.neg_log10_p);
    return out;
}

}  // namespace

BenchTable bench_table_from_string(const std::string& s) {
    if (s == "linear-fixed-N") return BenchTable::LinearFixedN;
    if (s == "linear-growing-B") return BenchTable::LinearGrowingB;
    if (s == "logistic-growing-B") return BenchTable::LogisticGrowingB;
    if (s == "monitoring-grid") return BenchTable::MonitoringGrid;
    throw std::invalid_argument("unknown benchmark table: " + s);
}

SimConfig default_sim(Family family, int n_b, int B, std::uint64_t seed) {
    SimConfig cfg;
    cfg.family = family;
    cfg.beta0.resize(5);
    cfg.beta0 << 0.2, -0.2, 0.2, -0.2, 0.2;
    cfg.m = 5;
    cfg.n_b = n_b;
    cfg.B = B;
    cfg.alpha_x = 0.5;
    cfg.alpha_y = 0.7;
    cfg.phi = 1.0;
    cfg.seed = seed;
    return cfg;
}

EstimateRun run_renewqif(const SimConfig& config, bool monitor, double alpha) {
    ModelSpec model{config.family, config.p(), Corr::CompoundSymmetry};
    RenewConfig rc;
    rc.monitor = monitor;
    rc.monitor_alpha = alpha;

    EstimateRun run;
    double load = 0.0;
    auto t0 = Clock::now();
    ClusterBatch first = gen_batch(config, 1);
    load += since(t0);

    t0 = Clock::now();
    RenewState state = init_state(model, first, rc);
    run.iter_counts.push_back(state.last_iterations);
    double compute = since(t0);

    for (long b = 2; b <= config.B; ++b) {
        t0 = Clock::now();
        ClusterBatch batch = gen_batch(config, b);
        load += since(t0);
        t0 = Clock::now();
        StreamReport rep = process_batch(state, batch);
        compute += since(t0);
        if (rep.accepted) {
            run.iter_counts.push_back(state.last_iterations);
            run.all_converged = run.all_converged && state.last_converged;
        }
    }

    run.beta = state.beta;
    run.se = se_from_cov(variance_of(state));
    run.used_fraction = static_cast<double>(state.N) / (static_cast<double>(config.n_b) * config.B);
    run.neg_log10_p_final = final_neg_log10_p(inference_report(state));
    run.r_time = compute;
    run.c_time = compute + load;
    return run;
}

EstimateRun run_renewgee(const SimConfig& config) {
    ModelSpec model{config.family, config.p(), Corr::CompoundSymmetry};
    EstimateRun run;
    double load = 0.0;
    auto t0 = Clock::now();
    ClusterBatch first = gen_batch(config, 1);
    load += since(t0);

    t0 = Clock::now();
    GeeState state = init_gee_state(model, first);
    run.iter_counts.push_back(state.last_iterations);
    double compute = since(t0);

    for (long b = 2; b <= config.B; ++b) {
        t0 = Clock::now();
        ClusterBatch batch = gen_batch(config, b);
        load += since(t0);
        t0 = Clock::now();
        renew_gee_update(state, batch);
        compute += since(t0);
        run.iter_counts.push_back(state.last_iterations);
        run.all_converged = run.all_converged && state.last_converged;
    }

    run.beta = state.beta;
    run.se = se_from_cov(gee_variance(state));
    run.r_time = compute;
    run.c_time = compute + load;
    return run;
}

namespace {

ClusterBatch pooled_data(const SimConfig& config) {
    ClusterBatch all;
    all.batch_id = 0;
    all.clusters.reserve(static_cast<std::size_t>(config.n_b) * config.B);
    for (long b = 1; b <= config.B; ++b) {
        ClusterBatch batch = gen_batch(config, b);
        for (Cluster& c : batch.clusters) all.clusters.push_back(std::move(c));
    }
    return all;
}

}  // namespace

EstimateRun run_offline_qif(const SimConfig& config) {
    ModelSpec model{config.family, config.p(), Corr::CompoundSymmetry};
    EstimateRun run;
    auto t0 = Clock::now();
    ClusterBatch all = pooled_data(config);
    const double load = since(t0);

    t0 = Clock::now();
    const Eigen::VectorXd start = irls_glm_fit(model, all);
    QifFit fit = fit_offline_qif(model, all, start);
    run.iter_counts.push_back(fit.iterations);
    run.all_converged = fit.converged;
    run.beta = fit.beta_hat;
    const PinvResult ci = pseudo_inverse(fit.summary.C);
    const Eigen::MatrixXd J = fit.summary.G.transpose() * ci.pinv * fit.summary.G;
    run.se = se_from_cov(pseudo_inverse(J).pinv);
    run.r_time = since(t0);
    run.c_time = run.r_time + load;
    return run;
}

EstimateRun run_offline_gee(const SimConfig& config) {
    ModelSpec model{config.family, config.p(), Corr::CompoundSymmetry};
    EstimateRun run;
    auto t0 = Clock::now();
    ClusterBatch all = pooled_data(config);
    const double load = since(t0);

    t0 = Clock::now();
    GeeFit fit = fit_offline_gee(model, all);
    run.iter_counts.push_back(fit.iterations);
    run.all_converged = fit.converged;
    run.beta = fit.beta_hat;
    run.se = se_from_cov(fit.sandwich);
    run.r_time = since(t0);
    run.c_time = run.r_time + load;
    return run;
}

MethodMetrics summarize_runs(const std::string& method, const Eigen::VectorXd& beta0,
                             const std::vector<EstimateRun>& runs, int coef) {
    MethodMetrics out;
    out.method = method;
    if (runs.empty()) return out;
    const int p = static_cast<int>(beta0.size());
    const int k_lo = coef < 0 ? 0 : coef;
    const int k_hi = coef < 0 ? p : coef + 1;
    const double n_runs = static_cast<double>(runs.size());

    long cells = 0;
    out.used_fraction = 0.0;
    for (const EstimateRun& r : runs) {
        for (int k = k_lo; k < k_hi; ++k) {
            out.a_bias += std::fabs(r.beta[k] - beta0[k]);
            out.ase += r.se[k];
            out.cp += (std::fabs(r.beta[k] - beta0[k]) <= kZ95 * r.se[k]) ? 1.0 : 0.0;
            ++cells;
        }
        out.c_time += r.c_time;
        out.r_time += r.r_time;
        out.used_fraction += r.used_fraction;
    }
    out.a_bias /= cells;
    out.ase /= cells;
    out.cp /= cells;
    out.c_time /= n_runs;
    out.r_time /= n_runs;
    out.used_fraction /= n_runs;

    // ESE: per-coefficient sd over replications, averaged over coefficients.
    for (int k = k_lo; k < k_hi; ++k) {
        double mean = 0.0;
        for (const EstimateRun& r : runs) mean += r.beta[k];
        mean /= n_runs;
        double ss = 0.0;
        for (const EstimateRun& r : runs) ss += (r.beta[k] - mean) * (r.beta[k] - mean);
        out.ese += runs.size() > 1 ? std::sqrt(ss / (n_runs - 1.0)) : 0.0;
    }
    out.ese /= (k_hi - k_lo);
    return out;
}

namespace {

void write_trace(const std::string& trace_dir, const std::string& name, const SimConfig& config) {
    if (trace_dir.empty()) return;
    ModelSpec model{config.family, config.p(), Corr::CompoundSymmetry};
    RenewConfig rc;
    rc.monitor = false;
    RenewState state = init_state(model, gen_batch(config, 1), rc);
    std::ofstream out(trace_dir + "/" + name);
    out << "batch";
    for (int k = 0; k < config.p(); ++k) out << "\tneglog10p" << k;
    out << "\n";
    auto line = [&](long b) {
        const InferenceReport rep = inference_report(state);
        out << b;
        for (const CoefInference& c : rep.coef) out << '\t' << c.neg_log10_p;
        out << "\n";
    };
    line(1);
    for (long b = 2; b <= config.B; ++b) {
        renew_update(state, gen_batch(config, b));
        line(b);
    }
}

BenchGroup estimation_group(const std::string& label, Family family, int n_b, int B, int reps,
                            std::uint64_t seed) {
    std::vector<EstimateRun> ogee, rgee, oqif, rqif_runs;
    Eigen::VectorXd beta0;
    for (int rep = 0; rep < reps; ++rep) {
        SimConfig cfg = default_sim(family, n_b, B, seed + 1000003ULL * rep);
        beta0 = cfg.beta0;
        ogee.push_back(run_offline_gee(cfg));
        rgee.push_back(run_renewgee(cfg));
        oqif.push_back(run_offline_qif(cfg));
        rqif_runs.push_back(run_renewqif(cfg));
    }
    BenchGroup g;
    g.label = label;
    g.rows.push_back(summarize_runs("offline GEE", beta0, ogee));
    g.rows.push_back(summarize_runs("RenewGEE", beta0, rgee));
    g.rows.push_back(summarize_runs("offline QIF", beta0, oqif));
    g.rows.push_back(summarize_runs("RenewQIF", beta0, rqif_runs));
    return g;
}

}  // namespace

BenchResult run_benchmark(BenchTable table, int reps, double scale, std::uint64_t seed,
                          const std::string& trace_dir) {
    if (reps < 1) throw std::invalid_argument("run_benchmark: reps must be >= 1");
    if (scale <= 0) scale = 1.0;
    BenchResult result;

    switch (table) {
        case BenchTable::LinearFixedN:
        case BenchTable::LinearGrowingB:
        case BenchTable::LogisticGrowingB: {
            const Family family =
                table == BenchTable::LogisticGrowingB ? Family::BinomialLogit : Family::GaussianIdentity;
            const bool fixed_n = table == BenchTable::LinearFixedN;
            result.title = fixed_n ? "fixed total N, varying batch size (linear)"
                                   : (family == Family::GaussianIdentity
                                          ? "growing number of batches (linear)"
                                          : "growing number of batches (logistic)");
            long N = static_cast<long>((fixed_n ? 1e4 : 1e3) * scale);
            if (N > 100000) N = 100000;
            if (fixed_n) {
                for (int n_b : {100, 1000}) {
                    const int B = static_cast<int>(N / n_b);
                    result.groups.push_back(estimation_group(
                        "N=" + std::to_string(N) + " n_b=" + std::to_string(n_b), family, n_b, B,
                        reps, seed));
                }
            } else {
                for (int B : {10, 100}) {
                    const long total = static_cast<long>(B) * 100;
                    if (total > N && B > 10) continue;
                    result.groups.push_back(estimation_group(
                        "B=" + std::to_string(B) + " n_b=100", family, 100, B, reps, seed));
                }
                write_trace(trace_dir, "trace_growing_B.tsv",
                            default_sim(family, 100, static_cast<int>(N / 100), seed));
            }
            break;
        }
        case BenchTable::MonitoringGrid: {
            result.title = "contaminated stream, with and without monitoring (linear)";
            long N = static_cast<long>(1e4 * scale);
            if (N > 100000) N = 100000;
            const double d = 0.7;
            for (int n_b : {50, 100, 200, 400}) {
                const int B = static_cast<int>(N / n_b);
                if (B < 8) continue;  // contamination at B/4 needs B >= 8
                std::vector<EstimateRun> off, on;
                Eigen::VectorXd beta0;
                for (int rep = 0; rep < reps; ++rep) {
                    SimConfig cfg = default_sim(Family::GaussianIdentity, n_b, B,
                                                seed + 1000003ULL * rep);
                    cfg.contamination = Contamination{{B / 4, 3 * B / 4}, d};
                    beta0 = cfg.beta0;
                    off.push_back(run_renewqif(cfg, false));
                    on.push_back(run_renewqif(cfg, true, 0.05));
                }
                BenchGroup g;
                g.label = "n_b=" + std::to_string(n_b) + " d=0.7 (coef 2 metrics)";
                g.rows.push_back(summarize_runs("RenewQIF no-monitor", beta0, off, 1));
                g.rows.push_back(summarize_runs("RenewQIF monitor a=0.05", beta0, on, 1));
                result.groups.push_back(std::move(g));
            }
            break;
        }
    }
    return result;
}

std::string format_text(const BenchResult& result) {
    std::ostringstream out;
    out << result.title << "\n";
    for (const BenchGroup& g : result.groups) {
        out << "\n[" << g.label << "]\n";
        out << std::left << std::setw(26) << "method" << std::right << std::setw(12) << "A.bias"
            << std::setw(12) << "ASE" << std::setw(12) << "ESE" << std::setw(9) << "CP"
            << std::setw(10) << "N0/NB" << std::setw(11) << "C.Time(s)" << std::setw(11)
            << "R.Time(s)" << "\n";
        for (const MethodMetrics& r : g.rows) {
            out << std::left << std::setw(26) << r.method << std::right << std::fixed
                << std::setprecision(5) << std::setw(12) << r.a_bias << std::setw(12) << r.ase
                << std::setw(12) << r.ese << std::setprecision(3) << std::setw(9) << r.cp
                << std::setw(10) << r.used_fraction << std::setw(11) << r.c_time << std::setw(11)
                << r.r_time << "\n";
            out.unsetf(std::ios::fixed);
        }
    }
    return out.str();
}

std::string format_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "group,method,a_bias,ase,ese,cp,used_fraction,c_time,r_time\n";
    out.precision(10);
    for (const BenchGroup& g : result.groups)
        for (const MethodMetrics& r : g.rows)
            out << g.label << ',' << r.method << ',' << r.a_bias << ',' << r.ase << ',' << r.ese
                << ',' << r.cp << ',' << r.used_fraction << ',' << r.c_time << ',' << r.r_time
                << "\n";
    return out.str();
}

}  // namespace rqif
