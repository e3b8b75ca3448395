// Command-line front end: simulate batch files, fit offline models, drive a
// monitored stream against a state file, and run the benchmark tables.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rqif/bench.hpp"
#include "rqif/driver.hpp"
#include "rqif/gee.hpp"
#include "rqif/numerics.hpp"
#include "rqif/qif.hpp"
#include "rqif/simulate.hpp"
#include "rqif/streamio.hpp"

using namespace rqif;

namespace {

// exit codes: 0 ok, 2 parse error, 3 numerical failure, 4 state-version error
constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitStateVersion = 4;

Eigen::VectorXd parse_beta(const std::vector<double>& values) {
    Eigen::VectorXd beta(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) beta[i] = values[i];
    return beta;
}

std::string batch_filename(const std::string& dir, long b) {
    std::ostringstream name;
    name << dir << "/batch_" << std::setw(4) << std::setfill('0') << b << ".csv";
    return name.str();
}

void print_estimates(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov) {
    std::printf("coef\testimate\tstd_error\tz\tneglog10p\n");
    for (int k = 0; k < beta.size(); ++k) {
        const double se = cov(k, k) > 0 ? std::sqrt(cov(k, k)) : 0.0;
        const double z = se > 0 ? beta[k] / se : 0.0;
        std::printf("beta%d\t%.10g\t%.10g\t%.6g\t%.6g\n", k, beta[k], se, z,
                    se > 0 ? neg_log10_two_sided_p(z) : 0.0);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming renewable estimation for cluster-correlated regression"};
    app.require_subcommand(1);

    std::string family_str = "gaussian-identity";
    std::string corr_str = "compound-symmetry";
    std::string state_path = "state.bin";
    double alpha = 0.05;
    bool no_monitor = false;
    std::uint64_t seed = 0;

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate batch files");
    std::string out_dir = ".";
    std::vector<double> beta_values{0.2, -0.2, 0.2, -0.2, 0.2};
    int sim_m = 5, sim_nb = 100, sim_B = 10;
    double alpha_x = 0.5, alpha_y = 0.7, phi = 1.0, depart = 0.0;
    std::vector<long> contaminate;
    sim->add_option("--family", family_str, "gaussian-identity | binomial-logit");
    sim->add_option("--out-dir", out_dir, "directory for batch files");
    sim->add_option("--beta", beta_values, "true coefficients (first is the intercept)");
    sim->add_option("--m", sim_m, "cluster size");
    sim->add_option("--n-b", sim_nb, "clusters per batch");
    sim->add_option("--batches", sim_B, "number of batches");
    sim->add_option("--alpha-x", alpha_x, "exchangeable covariate correlation");
    sim->add_option("--alpha-y", alpha_y, "exchangeable outcome correlation");
    sim->add_option("--phi", phi, "dispersion");
    sim->add_option("--seed", seed, "rng seed");
    sim->add_option("--contaminate", contaminate, "1-based batch indices to contaminate");
    sim->add_option("--d", depart, "departure subtracted from the second coefficient");

    // fit
    auto* fit = app.add_subcommand("fit", "offline fit of pooled batch files");
    std::string method = "qif";
    std::vector<std::string> fit_files;
    fit->add_option("--method", method, "qif | gee");
    fit->add_option("--family", family_str, "gaussian-identity | binomial-logit");
    fit->add_option("--corr", corr_str, "independence | compound-symmetry | ar1");
    fit->add_option("files", fit_files, "batch files")->required();

    // stream init|update|report
    auto* stream = app.add_subcommand("stream", "drive a monitored stream");
    stream->require_subcommand(1);
    auto* st_init = stream->add_subcommand("init", "initialize the state from a first batch");
    auto* st_update = stream->add_subcommand("update", "screen and absorb batches");
    auto* st_report = stream->add_subcommand("report", "print inference from the state file");
    std::vector<std::string> stream_files;
    for (CLI::App* sub : {st_init, st_update}) {
        sub->add_option("--family", family_str, "gaussian-identity | binomial-logit");
        sub->add_option("--corr", corr_str, "independence | compound-symmetry | ar1");
        sub->add_option("--state", state_path, "state file path");
        sub->add_option("--alpha", alpha, "screening significance level");
        sub->add_flag("--no-monitor", no_monitor, "disable batch screening");
    }
    st_init->add_option("file", stream_files, "first batch file")->required();
    st_update->add_option("files", stream_files, "batch files in arrival order")->required();
    st_report->add_option("--state", state_path, "state file path");

    // bench
    auto* bench = app.add_subcommand("bench", "benchmark tables");
    std::string table_str = "linear-growing-B";
    std::string trace_dir, csv_path;
    int reps = 10;
    double scale = 1.0;
    bench->add_option("--table", table_str,
                      "linear-fixed-N | linear-growing-B | logistic-growing-B | monitoring-grid");
    bench->add_option("--reps", reps, "replications");
    bench->add_option("--scale", scale, "total-sample-size multiplier (capped at 100k)");
    bench->add_option("--seed", seed, "rng seed");
    bench->add_option("--trace-dir", trace_dir, "directory for per-batch trace files");
    bench->add_option("--csv", csv_path, "also write machine-readable csv here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            SimConfig cfg;
            cfg.family = family_from_string(family_str);
            cfg.beta0 = parse_beta(beta_values);
            cfg.m = sim_m;
            cfg.n_b = sim_nb;
            cfg.B = sim_B;
            cfg.alpha_x = alpha_x;
            cfg.alpha_y = alpha_y;
            cfg.phi = phi;
            cfg.seed = seed;
            if (!contaminate.empty()) cfg.contamination = Contamination{contaminate, depart};
            cfg.validate();
            std::filesystem::create_directories(out_dir);
            for (long b = 1; b <= cfg.B; ++b)
                write_batch_file(gen_batch(cfg, b), cfg.p(), batch_filename(out_dir, b));
            std::printf("wrote %d batch files to %s\n", cfg.B, out_dir.c_str());
        } else if (fit->parsed()) {
            ClusterBatch all;
            int p = -1;
            for (const std::string& f : fit_files) {
                ClusterBatch batch = read_batch_file(f);
                if (!batch.empty()) {
                    const int cols = static_cast<int>(batch.clusters.front().X.cols());
                    if (p < 0) p = cols;
                    if (cols != p) throw ParseError("inconsistent column count across files", 1);
                }
                for (Cluster& c : batch.clusters) all.clusters.push_back(std::move(c));
            }
            if (p <= 0) throw std::runtime_error("fit: no data");
            ModelSpec model{family_from_string(family_str), p, corr_from_string(corr_str)};
            if (method == "qif") {
                const QifFit res = fit_offline_qif(model, all, irls_glm_fit(model, all));
                if (!res.converged) std::fprintf(stderr, "warning: fit did not converge\n");
                const PinvResult ci = pseudo_inverse(res.summary.C);
                const Eigen::MatrixXd cov =
                    pseudo_inverse(res.summary.G.transpose() * ci.pinv * res.summary.G).pinv;
                std::printf("method=qif n=%ld Q=%.10g iterations=%d\n", all.size(), res.Q,
                            res.iterations);
                print_estimates(res.beta_hat, cov);
            } else if (method == "gee") {
                const GeeFit res = fit_offline_gee(model, all);
                if (!res.converged) std::fprintf(stderr, "warning: fit did not converge\n");
                std::printf("method=gee n=%ld alpha=%.6g phi=%.6g iterations=%d\n", all.size(),
                            res.nuisance.alpha, res.nuisance.phi, res.iterations);
                print_estimates(res.beta_hat, res.sandwich);
            } else {
                throw CLI::ValidationError("--method must be qif or gee");
            }
        } else if (st_init->parsed() || st_update->parsed()) {
            if (st_init->parsed() && std::filesystem::exists(state_path))
                throw std::runtime_error("stream init: state file already exists: " + state_path);
            if (st_update->parsed() && !std::filesystem::exists(state_path))
                throw std::runtime_error("stream update: no state file at " + state_path +
                                         " (run stream init first)");
            // p is read from the first file's header
            ClusterBatch probe = read_batch_file(stream_files.front());
            if (probe.empty()) throw std::runtime_error("stream: first batch file is empty");
            const int p = static_cast<int>(probe.clusters.front().X.cols());
            ModelSpec model{family_from_string(family_str), p, corr_from_string(corr_str)};
            RenewConfig rc;
            rc.monitor = !no_monitor;
            rc.monitor_alpha = alpha;
            const std::vector<StreamReport> reports =
                run_stream(model, rc, stream_files, state_path);
            std::printf("%s\n", report_header(p).c_str());
            for (const StreamReport& rep : reports)
                std::printf("%s\n", report_line(rep).c_str());
        } else if (st_report->parsed()) {
            const LoadedState loaded = load_state(state_path);
            const InferenceReport rep = inference_report(loaded.renew);
            std::printf("batches=%ld accepted_clusters=%ld rejected_batches=%ld\n", rep.b, rep.N,
                        rep.batches_rejected);
            std::printf("coef\testimate\tstd_error\tz\tneglog10p\n");
            for (std::size_t k = 0; k < rep.coef.size(); ++k)
                std::printf("beta%zu\t%.10g\t%.10g\t%.6g\t%.6g\n", k, rep.coef[k].estimate,
                            rep.coef[k].std_error, rep.coef[k].z, rep.coef[k].neg_log10_p);
        } else if (bench->parsed()) {
            if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);
            const BenchResult result =
                run_benchmark(bench_table_from_string(table_str), reps, scale, seed, trace_dir);
            std::printf("%s", format_text(result).c_str());
            if (!csv_path.empty()) {
                std::ofstream out(csv_path);
                out << format_csv(result);
            }
        }
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitParse;
    } catch (const StateVersionError& e) {
        std::fprintf(stderr, "state error: %s\n", e.what());
        return kExitStateVersion;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
