#include "rqif/driver.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "rqif/streamio.hpp"

namespace rqif {

namespace {
double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

StreamReport process_batch(RenewState& state, const ClusterBatch& batch) {
    StreamReport rep;
    rep.batch_id = batch.batch_id;
    rep.n_clusters = batch.size();
    const auto t0 = std::chrono::steady_clock::now();

    if (state.config.monitor && !batch.empty()) {
        rep.decision =
            screen_batch(state.model, state.reference, batch, state.config.monitor_alpha, state.beta,
                         state.config.tol, state.config.maxit);
        if (rep.decision->reject) {
            rep.accepted = false;
            state.b += 1;
            state.batches_rejected += 1;
            rep.inference = inference_report(state);
            rep.compute_seconds = seconds_since(t0);
            return rep;
        }
    }
    renew_update(state, batch);
    rep.inference = inference_report(state);
    rep.compute_seconds = seconds_since(t0);
    return rep;
}

std::vector<StreamReport> run_stream(const ModelSpec& model, const RenewConfig& config,
                                     const std::vector<std::string>& batch_files,
                                     const std::string& state_path) {
    std::vector<StreamReport> reports;
    std::optional<RenewState> state;
    if (std::filesystem::exists(state_path)) state = load_state(state_path).renew;

    long next_id = state ? state->b + 1 : 1;
    for (const std::string& file : batch_files) {
        const auto t0 = std::chrono::steady_clock::now();
        ClusterBatch batch = read_batch_file(file, next_id);
        const double load = seconds_since(t0);

        StreamReport rep;
        if (!state) {
            const auto t1 = std::chrono::steady_clock::now();
            state = init_state(model, batch, config);
            rep.batch_id = batch.batch_id;
            rep.n_clusters = batch.size();
            rep.inference = inference_report(*state);
            rep.compute_seconds = seconds_since(t1);
        } else {
            rep = process_batch(*state, batch);
        }
        rep.load_seconds = load;
        save_state(*state, state_path);
        reports.push_back(std::move(rep));
        ++next_id;
        // batch goes out of scope here; nothing beyond the state is retained
    }
    return reports;
}

std::string report_header(int p) {
    std::ostringstream out;
    out << "batch\tn\taccepted\tlambda\tdf\tmonitor_p\tN\trejected";
    for (int k = 0; k < p; ++k)
        out << "\tbeta" << k << "\tse" << k << "\tz" << k << "\tneglog10p" << k;
    return out.str();
}

std::string report_line(const StreamReport& rep) {
    std::ostringstream out;
    out.precision(10);
    out << rep.batch_id << '\t' << rep.n_clusters << '\t' << (rep.accepted ? 1 : 0) << '\t';
    if (rep.decision)
        out << rep.decision->lambda << '\t' << rep.decision->df << '\t' << rep.decision->p_value;
    else
        out << "-\t-\t-";
    out << '\t' << rep.inference.N << '\t' << rep.inference.batches_rejected;
    for (const CoefInference& c : rep.inference.coef)
        out << '\t' << c.estimate << '\t' << c.std_error << '\t' << c.z << '\t' << c.neg_log10_p;
    return out.str();
}

}  // namespace rqif
