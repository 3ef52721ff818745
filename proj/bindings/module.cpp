// Python bindings for the core operations: topology loading, trace
// simulation, filtering/prediction, covariance estimation, measurement
// design, and the experiment harness.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "delaymap/baseline.hpp"
#include "delaymap/estimation.hpp"
#include "delaymap/harness.hpp"
#include "delaymap/kkf.hpp"
#include "delaymap/linalg.hpp"
#include "delaymap/model.hpp"
#include "delaymap/selection.hpp"
#include "delaymap/topology.hpp"

namespace py = pybind11;
using namespace delaymap;

namespace {

DelayTrace simulate_py(const ModelParams& params, int horizon, std::uint64_t seed,
                       std::optional<int> measured_per_slot,
                       std::optional<std::vector<int>> fixed,
                       std::optional<Eigen::VectorXd> mu0, std::optional<Eigen::MatrixXd> m0,
                       const std::string& noise, double dof) {
    SimConfig cfg;
    cfg.horizon = horizon;
    cfg.seed = seed;
    if (mu0) cfg.mu0 = *mu0;
    if (m0) cfg.m0 = *m0;
    if (noise == "student-t") cfg.noise = NoiseKind::StudentT;
    else if (noise != "gaussian") throw std::invalid_argument("noise must be gaussian|student-t");
    cfg.student_dof = dof;

    const int p = params.path_dim();
    SelectionRule rule = select_all(p);
    if (fixed) rule = select_fixed(*fixed);
    else if (measured_per_slot) rule = select_random(p, *measured_per_slot);
    return simulate_trace(params, cfg, rule);
}

ModelParams params_from_json_str(const std::string& text,
                                 std::optional<Eigen::MatrixXd> gramian) {
    return params_from_json(nlohmann::json::parse(text),
                            gramian ? std::optional<Eigen::MatrixXd>(*gramian) : std::nullopt);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "network path-delay tracking, prediction, and measurement design";

    py::register_exception<TopologyError>(m, "TopologyError");
    py::register_exception<FactorizationError>(m, "FactorizationError");

    // ---- topology -----------------------------------------------------
    py::class_<Path>(m, "Path")
        .def_readonly("id", &Path::id)
        .def_readonly("origin", &Path::origin)
        .def_readonly("links", &Path::links);

    py::class_<Network>(m, "Network")
        .def_property_readonly("path_count", &Network::path_count)
        .def_property_readonly("link_count", &Network::link_count)
        .def_property_readonly("node_count", &Network::node_count)
        .def_property_readonly("nodes", &Network::nodes)
        .def_property_readonly("end_nodes", &Network::end_nodes)
        .def("path", &Network::path, py::return_value_policy::reference_internal)
        .def("paths_by_origin", &Network::paths_by_origin)
        .def("origin_groups", &Network::origin_groups);

    m.def("load_network", &load_network_file, py::arg("path"),
          "Load and validate a JSON topology file.");
    m.def(
        "load_network_json",
        [](const std::string& text) { return load_network(nlohmann::json::parse(text)); },
        py::arg("text"), "Parse and validate a topology document given as a JSON string.");
    m.def("routing_matrix", &routing_matrix, py::arg("network"),
          "P x |E| binary path-link incidence matrix.");
    m.def("gramian", &gramian, py::arg("routing"), "G = R R^T.");

    // ---- model --------------------------------------------------------
    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("c_nu", &ModelParams::c_nu)
        .def_readwrite("c_eta", &ModelParams::c_eta)
        .def_readwrite("sigma2", &ModelParams::sigma2)
        .def_readwrite("damping_b", &ModelParams::damping_b)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def("validate", &ModelParams::validate);

    m.def("build_c_nu", &build_c_nu, py::arg("gamma"), py::arg("gramian"));

    py::class_<DelayTrace>(m, "DelayTrace")
        .def(py::init<>())
        .def_readwrite("true_delays", &DelayTrace::true_delays)
        .def_readwrite("selection", &DelayTrace::selection)
        .def_property_readonly("horizon", &DelayTrace::horizon)
        .def_property_readonly("path_dim", &DelayTrace::path_dim)
        .def("measured", &DelayTrace::measured, py::arg("t"))
        .def("validate", &DelayTrace::validate);

    m.def("simulate_trace", &simulate_py, py::arg("params"), py::arg("horizon"),
          py::arg("seed") = 0, py::arg("measured_per_slot") = std::nullopt,
          py::arg("fixed_selection") = std::nullopt, py::arg("mu0") = std::nullopt,
          py::arg("m0") = std::nullopt, py::arg("noise") = "gaussian", py::arg("dof") = 4.0,
          "Draw a delay trace from the state-space model. Deterministic per seed.");
    m.def("save_trace_csv", &save_trace_csv, py::arg("trace"), py::arg("path"));
    m.def("load_trace_csv", &load_trace_csv, py::arg("path"));
    m.def("save_params_file", &save_params_file, py::arg("params"), py::arg("path"));
    m.def("load_params_file", &load_params_file, py::arg("path"),
          py::arg("gramian") = std::nullopt);
    m.def("params_from_json", &params_from_json_str, py::arg("text"),
          py::arg("gramian") = std::nullopt);

    // ---- filter -------------------------------------------------------
    py::class_<FilterState>(m, "FilterState")
        .def(py::init<>())
        .def_readwrite("chi_hat", &FilterState::chi_hat)
        .def_readwrite("m", &FilterState::m)
        .def_readwrite("slot", &FilterState::slot);

    py::class_<PredictionResult>(m, "PredictionResult")
        .def_readonly("unmeasured", &PredictionResult::unmeasured)
        .def_readonly("predicted", &PredictionResult::predicted)
        .def_readonly("error_cov", &PredictionResult::error_cov)
        .def_readonly("kalman_gain", &PredictionResult::kalman_gain);

    py::class_<SlotResult>(m, "SlotResult")
        .def_readonly("slot", &SlotResult::slot)
        .def_readonly("selection", &SlotResult::selection)
        .def_readonly("prediction", &SlotResult::prediction);

    py::class_<FilterRun>(m, "FilterRun")
        .def_readonly("slots", &FilterRun::slots)
        .def_readonly("final_state", &FilterRun::final_state);

    m.def("kf_step", &kf_step, py::arg("state"), py::arg("params"), py::arg("selection"),
          py::arg("y_s"));
    m.def("predict_only", &predict_only, py::arg("state"), py::arg("params"));
    m.def("kalman_gain", &kalman_gain, py::arg("m_prev"), py::arg("params"),
          py::arg("selection"));
    m.def("error_covariance", &error_covariance, py::arg("m_prev"), py::arg("params"),
          py::arg("selection"),
          "Closed-form prediction error covariance over the unmeasured paths.");
    m.def("kkf_predict", &kkf_predict, py::arg("post_state"), py::arg("m_prev"),
          py::arg("params"), py::arg("selection"), py::arg("y_s"));
    m.def(
        "run_filter",
        [](const ModelParams& params, const DelayTrace& trace, const Eigen::VectorXd& chi0,
           const Eigen::MatrixXd& m0) { return run_filter(params, trace, chi0, m0); },
        py::arg("params"), py::arg("trace"), py::arg("chi0"), py::arg("m0"));
    m.def("default_initial_state", &default_initial_state, py::arg("trace"), py::arg("params"));

    // ---- estimation ---------------------------------------------------
    py::class_<QStatistics>(m, "QStatistics")
        .def_readonly("mean", &QStatistics::mean)
        .def_readonly("covariance", &QStatistics::covariance);

    py::class_<EstimatedParams>(m, "EstimatedParams")
        .def_readonly("c_eta_hat", &EstimatedParams::c_eta_hat)
        .def_readonly("c_nu_hat", &EstimatedParams::c_nu_hat)
        .def_readonly("gamma_hat", &EstimatedParams::gamma_hat)
        .def_readonly("mean_delay", &EstimatedParams::mean_delay);

    m.def("q_statistics", &q_statistics, py::arg("q_samples"));
    m.def("estimate_c_eta", &estimate_c_eta, py::arg("c_q"), py::arg("m_history"));
    m.def("fit_gamma", &fit_gamma, py::arg("c_nu_hat"), py::arg("gramian"));
    m.def(
        "training_phase",
        [](const Eigen::MatrixXd& gramian, const DelayTrace& trace, int t_l, int burn_in,
           double gamma0, std::optional<Eigen::MatrixXd> c_eta_init, double sigma2,
           double damping_b, int refresh_every) {
            TrainingConfig cfg;
            cfg.t_l = t_l;
            cfg.burn_in = burn_in;
            cfg.gamma0 = gamma0;
            if (c_eta_init) cfg.c_eta_init = *c_eta_init;
            cfg.sigma2 = sigma2;
            cfg.damping_b = damping_b;
            cfg.refresh_every = refresh_every;
            return training_phase(gramian, trace, cfg);
        },
        py::arg("gramian"), py::arg("trace"), py::arg("t_l") = 1000, py::arg("burn_in") = 500,
        py::arg("gamma0") = 1.0, py::arg("c_eta_init") = std::nullopt,
        py::arg("sigma2") = 1e-3, py::arg("damping_b") = 1.0, py::arg("refresh_every") = 500,
        "Estimate the model covariances from a trace prefix.");
    m.def("to_model_params", &to_model_params, py::arg("estimated"), py::arg("gramian"),
          py::arg("sigma2"), py::arg("damping_b") = 1.0);

    // ---- selection ----------------------------------------------------
    py::class_<SelectionResult>(m, "SelectionResult")
        .def_readonly("chosen", &SelectionResult::chosen)
        .def_readonly("v_matrix", &SelectionResult::v_matrix)
        .def_readonly("objective_trace", &SelectionResult::objective_trace)
        .def_readonly("chosen_groups", &SelectionResult::chosen_groups);

    m.def("objective_f", &objective_f, py::arg("phi"), py::arg("sigma2"), py::arg("selection"),
          "Reference log-det objective over the unmeasured paths.");
    m.def("increment_delta", &increment_delta, py::arg("phi"), py::arg("v"),
          py::arg("selection"), py::arg("candidate"));
    m.def(
        "greedy_cardinality",
        [](const Eigen::MatrixXd& phi, int count, bool lazy) {
            return greedy_select({phi, Cardinality{count}, lazy});
        },
        py::arg("phi"), py::arg("count"), py::arg("lazy") = false,
        "Greedy D-optimal selection of `count` paths.");
    m.def(
        "greedy_node_budget",
        [](const Eigen::MatrixXd& phi, int count, const std::vector<std::vector<int>>& groups) {
            return greedy_select({phi, NodeBudget{count, groups}, false});
        },
        py::arg("phi"), py::arg("count"), py::arg("groups"));
    m.def(
        "greedy_matroid",
        [](const Eigen::MatrixXd& phi, const std::vector<std::vector<int>>& groups,
           const std::vector<int>& caps, bool lazy) {
            return greedy_select({phi, PartitionMatroid{groups, caps}, lazy});
        },
        py::arg("phi"), py::arg("groups"), py::arg("caps"), py::arg("lazy") = false);
    m.def("select_single_node", &select_single_node, py::arg("phi"), py::arg("groups"));
    m.def(
        "verify_supermodularity",
        [](const Eigen::MatrixXd& phi, double slack) {
            auto r = verify_supermodularity(phi, slack);
            py::dict d;
            d["increment_checks"] = r.increment_checks;
            d["monotonicity_checks"] = r.monotonicity_checks;
            d["violations"] = r.violations;
            d["worst_violation"] = r.worst_violation;
            d["ok"] = r.ok();
            return d;
        },
        py::arg("phi"), py::arg("slack") = 1e-10);

    // ---- baseline -----------------------------------------------------
    py::class_<KrigingPrediction>(m, "KrigingPrediction")
        .def_readonly("unmeasured", &KrigingPrediction::unmeasured)
        .def_readonly("predicted", &KrigingPrediction::predicted)
        .def_readonly("trend", &KrigingPrediction::trend);

    m.def(
        "network_kriging_predict",
        [](const Eigen::MatrixXd& c_nu, double sigma2, const std::vector<int>& sel,
           const Eigen::VectorXd& y_s, std::optional<Eigen::MatrixXd> basis) {
            KrigingConfig cfg = KrigingConfig::with_default_basis(c_nu, sigma2);
            if (basis) cfg.trend_basis = *basis;
            return network_kriging_predict(cfg, sel, y_s);
        },
        py::arg("c_nu"), py::arg("sigma2"), py::arg("selection"), py::arg("y_s"),
        py::arg("trend_basis") = std::nullopt);

    // ---- harness ------------------------------------------------------
    py::class_<PolicySpec>(m, "PolicySpec")
        .def_static("random", &PolicySpec::random, py::arg("s"))
        .def_static("greedy", &PolicySpec::greedy, py::arg("s"))
        .def_static("node_budget", &PolicySpec::node_budget, py::arg("n"))
        .def_static("matroid", &PolicySpec::matroid, py::arg("cap"))
        .def_static("fixed_list", &PolicySpec::fixed_list, py::arg("ids"))
        .def_static("from_trace", &PolicySpec::from_trace);

    py::enum_<Predictor>(m, "Predictor")
        .value("KKF", Predictor::Kkf)
        .value("NETWORK_KRIGING", Predictor::NetworkKriging);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("t_l", &ExperimentConfig::t_l)
        .def_readwrite("t_p", &ExperimentConfig::t_p)
        .def_readwrite("burn_in", &ExperimentConfig::burn_in)
        .def_readwrite("predictor", &ExperimentConfig::predictor)
        .def_readwrite("policy", &ExperimentConfig::policy)
        .def_readwrite("sigma2", &ExperimentConfig::sigma2)
        .def_readwrite("damping_b", &ExperimentConfig::damping_b)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("gamma0", &ExperimentConfig::gamma0)
        .def_readwrite("refresh_every", &ExperimentConfig::refresh_every)
        .def_readwrite("retrain_every", &ExperimentConfig::retrain_every)
        .def_readwrite("known_params", &ExperimentConfig::known_params)
        .def_readwrite("keep_rows", &ExperimentConfig::keep_rows)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir);

    py::class_<PredRow>(m, "PredRow")
        .def_readonly("t", &PredRow::t)
        .def_readonly("path", &PredRow::path)
        .def_readonly("predicted", &PredRow::predicted)
        .def_readonly("true_value", &PredRow::true_value)
        .def_readonly("measured", &PredRow::measured);

    py::class_<EvaluationReport>(m, "EvaluationReport")
        .def_readonly("nmspe", &EvaluationReport::nmspe)
        .def_readonly("total_sq_err", &EvaluationReport::total_sq_err)
        .def_readonly("n_predicted", &EvaluationReport::n_predicted)
        .def_readonly("t_l", &EvaluationReport::t_l)
        .def_readonly("t_p", &EvaluationReport::t_p)
        .def_readonly("p", &EvaluationReport::p)
        .def_readonly("s", &EvaluationReport::s)
        .def_readonly("gamma_hat", &EvaluationReport::gamma_hat)
        .def_readonly("per_slot_sq_err", &EvaluationReport::per_slot_sq_err)
        .def_readonly("rows", &EvaluationReport::rows)
        .def("to_json", [](const EvaluationReport& r) { return r.to_json().dump(); });

    m.def("nmspe", &nmspe, py::arg("total_sq_err"), py::arg("t_p"), py::arg("t_l"), py::arg("p"),
          py::arg("s"));
    m.def("run_experiment", &run_experiment, py::arg("network"), py::arg("trace"),
          py::arg("config"),
          "Training (unless params are supplied), tracking, and NMSPE scoring.");
    m.def(
        "sweep_s",
        [](const Network& net, const DelayTrace& trace, const ExperimentConfig& cfg,
           const std::vector<int>& s_values) {
            auto table = sweep_s(net, trace, cfg, s_values);
            py::list out;
            for (const auto& e : table.entries) {
                py::dict d;
                d["s"] = e.s;
                if (e.error.empty()) d["nmspe"] = e.nmspe;
                else d["error"] = e.error;
                out.append(d);
            }
            return out;
        },
        py::arg("network"), py::arg("trace"), py::arg("config"), py::arg("s_values"));

    m.attr("__version__") = "0.1.0";
}
