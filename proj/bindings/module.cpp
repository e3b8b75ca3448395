// Python bindings for the streaming estimation core.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rqif/bench.hpp"
#include "rqif/driver.hpp"
#include "rqif/gee.hpp"
#include "rqif/monitor.hpp"
#include "rqif/numerics.hpp"
#include "rqif/qif.hpp"
#include "rqif/renew.hpp"
#include "rqif/simulate.hpp"
#include "rqif/streamio.hpp"

namespace py = pybind11;
using namespace rqif;

PYBIND11_MODULE(_rqif, mod) {
    mod.doc() = "streaming renewable estimation for cluster-correlated regression";

    py::register_exception<ParseError>(mod, "ParseError", PyExc_ValueError);
    py::register_exception<StateVersionError>(mod, "StateVersionError", PyExc_RuntimeError);

    py::enum_<Family>(mod, "Family")
        .value("GAUSSIAN_IDENTITY", Family::GaussianIdentity)
        .value("BINOMIAL_LOGIT", Family::BinomialLogit);
    py::enum_<Corr>(mod, "Corr")
        .value("INDEPENDENCE", Corr::Independence)
        .value("COMPOUND_SYMMETRY", Corr::CompoundSymmetry)
        .value("AR1", Corr::Ar1);
    mod.def("family_from_string", &family_from_string);
    mod.def("corr_from_string", &corr_from_string);

    py::class_<ModelSpec>(mod, "ModelSpec")
        .def(py::init([](Family family, int p, Corr corr) {
                 ModelSpec m{family, p, corr};
                 m.validate();
                 return m;
             }),
             py::arg("family"), py::arg("p"), py::arg("corr") = Corr::CompoundSymmetry)
        .def_readwrite("family", &ModelSpec::family)
        .def_readwrite("p", &ModelSpec::p)
        .def_readwrite("corr", &ModelSpec::corr)
        .def_property_readonly("basis_count", &ModelSpec::basis_count);

    py::class_<Cluster>(mod, "Cluster")
        .def(py::init([](Eigen::MatrixXd X, Eigen::VectorXd y) {
                 Cluster c;
                 c.X = std::move(X);
                 c.y = std::move(y);
                 return c;
             }),
             py::arg("X"), py::arg("y"))
        .def_readwrite("X", &Cluster::X)
        .def_readwrite("y", &Cluster::y);

    py::class_<ClusterBatch>(mod, "ClusterBatch")
        .def(py::init<>())
        .def_readwrite("clusters", &ClusterBatch::clusters)
        .def_readwrite("batch_id", &ClusterBatch::batch_id)
        .def("append", [](ClusterBatch& b, const Cluster& c) { b.clusters.push_back(c); })
        .def("__len__", &ClusterBatch::size);

    py::class_<Contamination>(mod, "Contamination")
        .def(py::init([](std::vector<long> positions, double d) {
                 return Contamination{std::move(positions), d};
             }),
             py::arg("positions"), py::arg("d"))
        .def_readwrite("positions", &Contamination::positions)
        .def_readwrite("d", &Contamination::d);

    py::class_<SimConfig>(mod, "SimConfig")
        .def(py::init<>())
        .def_readwrite("family", &SimConfig::family)
        .def_readwrite("beta0", &SimConfig::beta0)
        .def_readwrite("m", &SimConfig::m)
        .def_readwrite("n_b", &SimConfig::n_b)
        .def_readwrite("B", &SimConfig::B)
        .def_readwrite("alpha_x", &SimConfig::alpha_x)
        .def_readwrite("alpha_y", &SimConfig::alpha_y)
        .def_readwrite("phi", &SimConfig::phi)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("contamination", &SimConfig::contamination)
        .def("validate", &SimConfig::validate)
        .def("batch_beta", &SimConfig::batch_beta);
    mod.def("gen_batch", &gen_batch, py::arg("config"), py::arg("batch_index"));
    mod.def("make_stream", &make_stream);

    py::class_<BatchSummary>(mod, "BatchSummary")
        .def_readonly("g", &BatchSummary::g)
        .def_readonly("G", &BatchSummary::G)
        .def_readonly("C", &BatchSummary::C)
        .def_readonly("n", &BatchSummary::n)
        .def_readonly("beta_at", &BatchSummary::beta_at);
    mod.def("batch_summary", &batch_summary);
    mod.def("qif_objective", &qif_objective);
    mod.def("irls_glm_fit", &irls_glm_fit, py::arg("model"), py::arg("data"),
            py::arg("tol") = 1e-8, py::arg("maxit") = 50);

    py::class_<QifFit>(mod, "QifFit")
        .def_readonly("beta_hat", &QifFit::beta_hat)
        .def_readonly("summary", &QifFit::summary)
        .def_readonly("Q", &QifFit::Q)
        .def_readonly("iterations", &QifFit::iterations)
        .def_readonly("converged", &QifFit::converged);
    mod.def(
        "fit_offline_qif",
        [](const ModelSpec& model, const ClusterBatch& data, py::object beta_init, double tol,
           int maxit) {
            const Eigen::VectorXd start = beta_init.is_none()
                                              ? irls_glm_fit(model, data)
                                              : beta_init.cast<Eigen::VectorXd>();
            return fit_offline_qif(model, data, start, tol, maxit);
        },
        py::arg("model"), py::arg("data"), py::arg("beta_init") = py::none(),
        py::arg("tol") = 1e-6, py::arg("maxit") = 50);

    py::class_<GeeNuisance>(mod, "GeeNuisance")
        .def_readonly("alpha", &GeeNuisance::alpha)
        .def_readonly("phi", &GeeNuisance::phi)
        .def_readonly("alpha_clamped", &GeeNuisance::alpha_clamped);
    py::class_<GeeFit>(mod, "GeeFit")
        .def_readonly("beta_hat", &GeeFit::beta_hat)
        .def_readonly("sandwich", &GeeFit::sandwich)
        .def_readonly("nuisance", &GeeFit::nuisance)
        .def_readonly("iterations", &GeeFit::iterations)
        .def_readonly("converged", &GeeFit::converged);
    mod.def("fit_offline_gee", &fit_offline_gee, py::arg("model"), py::arg("data"),
            py::arg("tol") = 1e-6, py::arg("maxit") = 50);

    py::class_<GeeState>(mod, "GeeState")
        .def_readonly("beta", &GeeState::beta)
        .def_readonly("S", &GeeState::S)
        .def_readonly("V", &GeeState::V)
        .def_readonly("nuisance", &GeeState::nuisance)
        .def_readonly("N", &GeeState::N)
        .def_readonly("b", &GeeState::b)
        .def_readonly("last_converged", &GeeState::last_converged)
        .def_readonly("last_iterations", &GeeState::last_iterations);
    mod.def("init_gee_state", &init_gee_state, py::arg("model"), py::arg("first_batch"),
            py::arg("tol") = 1e-6, py::arg("maxit") = 50);
    mod.def("renew_gee_update", &renew_gee_update);
    mod.def("gee_variance", &gee_variance);

    py::class_<RenewConfig>(mod, "RenewConfig")
        .def(py::init<>())
        .def_readwrite("tol", &RenewConfig::tol)
        .def_readwrite("maxit", &RenewConfig::maxit)
        .def_readwrite("monitor_alpha", &RenewConfig::monitor_alpha)
        .def_readwrite("monitor", &RenewConfig::monitor);

    py::class_<RenewState>(mod, "RenewState")
        .def_readonly("model", &RenewState::model)
        .def_readonly("config", &RenewState::config)
        .def_readonly("beta", &RenewState::beta)
        .def_readonly("g", &RenewState::g)
        .def_readonly("G", &RenewState::G)
        .def_readonly("C", &RenewState::C)
        .def_readonly("N", &RenewState::N)
        .def_readonly("b", &RenewState::b)
        .def_readonly("batches_rejected", &RenewState::batches_rejected)
        .def_readonly("last_converged", &RenewState::last_converged)
        .def_readonly("last_iterations", &RenewState::last_iterations);
    mod.def("init_state", &init_state, py::arg("model"), py::arg("first_batch"),
            py::arg("config") = RenewConfig{});
    mod.def("renew_update", &renew_update);
    mod.def("variance_of", &variance_of);

    py::class_<CoefInference>(mod, "CoefInference")
        .def_readonly("estimate", &CoefInference::estimate)
        .def_readonly("std_error", &CoefInference::std_error)
        .def_readonly("z", &CoefInference::z)
        .def_readonly("p_value", &CoefInference::p_value)
        .def_readonly("neg_log10_p", &CoefInference::neg_log10_p)
        .def_readonly("degenerate", &CoefInference::degenerate);
    py::class_<InferenceReport>(mod, "InferenceReport")
        .def_readonly("coef", &InferenceReport::coef)
        .def_readonly("N", &InferenceReport::N)
        .def_readonly("b", &InferenceReport::b)
        .def_readonly("batches_rejected", &InferenceReport::batches_rejected);
    mod.def("inference_report", &inference_report);

    py::class_<MonitorDecision>(mod, "MonitorDecision")
        .def_readonly("lambda_", &MonitorDecision::lambda)
        .def_readonly("df", &MonitorDecision::df)
        .def_readonly("p_value", &MonitorDecision::p_value)
        .def_readonly("reject", &MonitorDecision::reject)
        .def_readonly("beta_check", &MonitorDecision::beta_check)
        .def_readonly("alpha_used", &MonitorDecision::alpha_used)
        .def_readonly("diverged", &MonitorDecision::diverged);
    mod.def("screen_batch", &screen_batch, py::arg("model"), py::arg("reference"),
            py::arg("candidate"), py::arg("alpha"), py::arg("beta_init"), py::arg("tol") = 1e-6,
            py::arg("maxit") = 50);

    py::class_<StreamReport>(mod, "StreamReport")
        .def_readonly("batch_id", &StreamReport::batch_id)
        .def_readonly("n_clusters", &StreamReport::n_clusters)
        .def_readonly("accepted", &StreamReport::accepted)
        .def_readonly("decision", &StreamReport::decision)
        .def_readonly("inference", &StreamReport::inference)
        .def_readonly("load_seconds", &StreamReport::load_seconds)
        .def_readonly("compute_seconds", &StreamReport::compute_seconds);
    mod.def("process_batch", &process_batch);
    mod.def("run_stream", &run_stream, py::arg("model"), py::arg("config"),
            py::arg("batch_files"), py::arg("state_path"));

    mod.def("read_batch_file", &read_batch_file, py::arg("path"), py::arg("batch_id") = 0);
    mod.def("write_batch_file", &write_batch_file, py::arg("batch"), py::arg("p"),
            py::arg("path"));
    mod.def(
        "save_state",
        [](const RenewState& state, const std::string& path, const GeeState* gee) {
            save_state(state, path, gee);
        },
        py::arg("state"), py::arg("path"), py::arg("gee") = nullptr);
    py::class_<LoadedState>(mod, "LoadedState")
        .def_readonly("renew", &LoadedState::renew)
        .def_readonly("gee", &LoadedState::gee);
    mod.def("load_state", &load_state);

    mod.def("chi2_cdf", &chi2_cdf);
    mod.def("chi2_quantile", &chi2_quantile);
    mod.def("normal_cdf", &normal_cdf);
    mod.def("neg_log10_two_sided_p", &neg_log10_two_sided_p);
    mod.def("pseudo_inverse",
            [](const Eigen::MatrixXd& A, double rtol) { return pseudo_inverse(A, rtol).pinv; },
            py::arg("A"), py::arg("rtol") = -1.0);
}
