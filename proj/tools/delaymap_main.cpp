// delaymap command line: simulate traces, estimate model covariances, track
// and predict path delays, pick measurement paths, and export reports.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "delaymap/baseline.hpp"
#include "delaymap/estimation.hpp"
#include "delaymap/harness.hpp"
#include "delaymap/kkf.hpp"
#include "delaymap/linalg.hpp"
#include "delaymap/model.hpp"
#include "delaymap/selection.hpp"
#include "delaymap/topology.hpp"

namespace {

using namespace delaymap;

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && rows.front().size() != row.size())
            throw std::runtime_error("matrix file '" + path + "': ragged rows");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

PolicySpec parse_policy(const std::string& name, int s, int n, int cap,
                        const std::string& fixed) {
    if (name == "random") return PolicySpec::random(s);
    if (name == "greedy") return PolicySpec::greedy(s);
    if (name == "node-budget") return PolicySpec::node_budget(n);
    if (name == "matroid") return PolicySpec::matroid(cap);
    if (name == "fixed-list") return PolicySpec::fixed_list(parse_int_list(fixed));
    if (name == "from-trace") return PolicySpec::from_trace();
    throw std::invalid_argument("unknown policy '" + name + "'");
}

Constraint parse_constraint(const std::string& spec, const Network* net) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("constraint must look like kind:value");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "cardinality") return Cardinality{std::stoi(arg)};
    if (!net)
        throw std::invalid_argument("constraint '" + kind + "' needs --topology");
    if (kind == "node-budget") return NodeBudget{std::stoi(arg), net->origin_groups()};
    if (kind == "matroid") {
        auto groups = net->origin_groups();
        std::vector<int> caps(groups.size(), 1);
        if (arg.find('=') == std::string::npos) {
            std::fill(caps.begin(), caps.end(), std::stoi(arg));
        } else {
            std::stringstream ss(arg);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto eq = item.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("matroid caps must look like node=cap");
                const std::string node = item.substr(0, eq);
                const auto it = std::find(net->end_nodes().begin(), net->end_nodes().end(), node);
                if (it == net->end_nodes().end())
                    throw std::invalid_argument("unknown end node '" + node + "'");
                caps[it - net->end_nodes().begin()] = std::stoi(item.substr(eq + 1));
            }
        }
        return PartitionMatroid{std::move(groups), std::move(caps)};
    }
    throw std::invalid_argument("unknown constraint kind '" + kind + "'");
}

void write_or_print(const nlohmann::json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(1) << '\n';
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write '" + out + "'");
        f << j.dump(1) << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"network path-delay tracking, prediction, and measurement design"};
    app.require_subcommand(1);

    std::string topology, trace_path, params_path, out, policy_name = "random";
    std::string noise = "gaussian", fixed_list, constraint_spec, phi_path, m_path;
    std::string predictor_name = "kkf", s_values_str, value_kind = "predicted", dump_cov_dir;
    int horizon = 1000, s = 0, t_l = 1000, t_p = 0, burn_in = 500, n_nodes = 1, cap = 1;
    int retrain_every = 0, refresh_every = 500, t_start = 1, t_end = 0;
    bool only_unmeasured = false;
    double sigma2 = 1e-3, b = 1.0, gamma0 = 1.0, gamma = 1.0, dof = 4.0, mu0 = 0.0, m0 = 1.0;
    std::uint64_t seed = 0;

    auto add_policy_opts = [&](CLI::App* cmd) {
        cmd->add_option("--policy", policy_name,
                        "random|greedy|node-budget|matroid|fixed-list|from-trace");
        cmd->add_option("--s", s, "paths measured per slot (random/greedy)");
        cmd->add_option("--n", n_nodes, "measuring nodes per slot (node-budget)");
        cmd->add_option("--cap", cap, "uniform per-node cap (matroid)");
        cmd->add_option("--fixed", fixed_list, "comma-separated path ids (fixed-list)");
    };

    auto* sim = app.add_subcommand("simulate", "draw a synthetic delay trace from the model");
    sim->add_option("--topology", topology)->required();
    sim->add_option("--params", params_path, "model params JSON")->required();
    sim->add_option("--horizon", horizon);
    sim->add_option("--s", s, "randomly measured paths per slot (default min(50, P))");
    sim->add_option("--seed", seed);
    sim->add_option("--noise", noise, "gaussian|student-t");
    sim->add_option("--dof", dof, "student-t degrees of freedom");
    sim->add_option("--mu0", mu0, "initial trend mean (replicated)");
    sim->add_option("--m0", m0, "initial trend variance (times identity)");
    sim->add_option("--out", out, "trace CSV path")->required();

    auto* train = app.add_subcommand("train", "estimate model covariances from a trace prefix");
    train->add_option("--topology", topology)->required();
    train->add_option("--trace", trace_path)->required();
    train->add_option("--t-l", t_l);
    train->add_option("--burn-in", burn_in);
    train->add_option("--gamma0", gamma0);
    train->add_option("--sigma2", sigma2);
    train->add_option("--b", b);
    train->add_option("--refresh-every", refresh_every);
    train->add_option("--out", out, "estimated params JSON path")->required();

    auto* track = app.add_subcommand("track", "run a predictor over a trace with known params");
    track->add_option("--topology", topology)->required();
    track->add_option("--trace", trace_path)->required();
    track->add_option("--params", params_path)->required();
    track->add_option("--predictor", predictor_name, "kkf|network-kriging");
    add_policy_opts(track);
    track->add_option("--t-l", t_l, "warmup prefix; predictions start at t-l + 1");
    track->add_option("--t-p", t_p);
    track->add_option("--seed", seed);
    track->add_option("--retrain-every", retrain_every);
    track->add_option("--dump-error-cov", dump_cov_dir,
                      "directory for per-slot error covariance matrices");
    track->add_option("--out", out, "predictions CSV path")->required();

    auto* evaluate = app.add_subcommand("evaluate", "train (unless --params), track, and score");
    evaluate->add_option("--topology", topology)->required();
    evaluate->add_option("--trace", trace_path)->required();
    evaluate->add_option("--params", params_path, "skip training and use these params");
    evaluate->add_option("--predictor", predictor_name, "kkf|network-kriging");
    add_policy_opts(evaluate);
    evaluate->add_option("--t-l", t_l);
    evaluate->add_option("--t-p", t_p);
    evaluate->add_option("--burn-in", burn_in);
    evaluate->add_option("--gamma0", gamma0);
    evaluate->add_option("--sigma2", sigma2);
    evaluate->add_option("--b", b);
    evaluate->add_option("--seed", seed);
    evaluate->add_option("--refresh-every", refresh_every);
    evaluate->add_option("--retrain-every", retrain_every);
    evaluate->add_option("--dump-error-cov", dump_cov_dir,
                         "directory for per-slot error covariance matrices");
    evaluate->add_option("--out", out, "output directory (predictions.csv, report.json)");

    auto* select = app.add_subcommand("select", "one-shot greedy measurement design");
    select->add_option("--phi", phi_path, "dense Phi matrix CSV");
    select->add_option("--topology", topology, "needed for node constraints or --params");
    select->add_option("--params", params_path, "build Phi from params (and --m) instead of --phi");
    select->add_option("--m", m_path, "filter covariance M(t-1), dense CSV");
    select->add_option("--constraint", constraint_spec,
                       "cardinality:K | node-budget:N | matroid:CAP | matroid:node=cap,...")
        ->required();
    select->add_option("--out", out, "JSON output path (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "evaluate over several S values");
    sweep->add_option("--topology", topology)->required();
    sweep->add_option("--trace", trace_path)->required();
    sweep->add_option("--params", params_path);
    sweep->add_option("--predictor", predictor_name);
    add_policy_opts(sweep);
    sweep->add_option("--s-values", s_values_str, "comma-separated S list")->required();
    sweep->add_option("--t-l", t_l);
    sweep->add_option("--t-p", t_p);
    sweep->add_option("--burn-in", burn_in);
    sweep->add_option("--gamma0", gamma0);
    sweep->add_option("--sigma2", sigma2);
    sweep->add_option("--b", b);
    sweep->add_option("--seed", seed);
    sweep->add_option("--out", out, "JSON output path (default stdout)");

    auto* exportmap = app.add_subcommand("export-map", "paths-by-slots delay map CSV");
    exportmap->add_option("--predictions", trace_path, "predictions CSV")->required();
    exportmap->add_option("--t-start", t_start);
    exportmap->add_option("--t-end", t_end);
    exportmap->add_option("--value", value_kind, "predicted|true");
    exportmap->add_flag("--only-unmeasured", only_unmeasured,
                        "drop paths measured anywhere in the window");
    exportmap->add_option("--out", out, "map CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        Network net = load_network_file(topology);
        Eigen::MatrixXd g = gramian(routing_matrix(net));
        ModelParams params = load_params_file(params_path, g);
        SimConfig cfg;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.mu0 = Eigen::VectorXd::Constant(net.path_count(), mu0);
        cfg.m0 = m0 * Eigen::MatrixXd::Identity(net.path_count(), net.path_count());
        cfg.noise = noise == "student-t" ? NoiseKind::StudentT : NoiseKind::Gaussian;
        cfg.student_dof = dof;
        const int train_s = sim->count("--s") ? s : std::min(50, net.path_count());
        DelayTrace trace = simulate_trace(params, cfg, select_random(net.path_count(), train_s));
        save_trace_csv(trace, out);
        std::cout << nlohmann::json{{"horizon", trace.horizon()},
                                    {"p", trace.path_dim()},
                                    {"out", out}}
                         .dump(1)
                  << '\n';
        return 0;
    }

    if (train->parsed()) {
        Network net = load_network_file(topology);
        Eigen::MatrixXd g = gramian(routing_matrix(net));
        DelayTrace trace = load_trace_csv(trace_path);
        TrainingConfig cfg;
        cfg.t_l = t_l;
        cfg.burn_in = burn_in;
        cfg.gamma0 = gamma0;
        cfg.sigma2 = sigma2;
        cfg.damping_b = b;
        cfg.refresh_every = refresh_every;
        EstimatedParams est = training_phase(g, trace, cfg);
        save_params_file(to_model_params(est, g, sigma2, b), out);
        std::cout << nlohmann::json{{"gamma_hat", est.gamma_hat}, {"t_l", t_l}, {"out", out}}.dump(1)
                  << '\n';
        return 0;
    }

    if (track->parsed() || evaluate->parsed() || sweep->parsed()) {
        Network net = load_network_file(topology);
        Eigen::MatrixXd g = gramian(routing_matrix(net));
        DelayTrace trace = load_trace_csv(trace_path);
        ExperimentConfig cfg;
        cfg.t_l = t_l;
        cfg.t_p = t_p;
        cfg.burn_in = burn_in;
        cfg.predictor = predictor_from_string(predictor_name);
        cfg.policy = parse_policy(policy_name, s, n_nodes, cap, fixed_list);
        cfg.sigma2 = sigma2;
        cfg.damping_b = b;
        cfg.seed = seed;
        cfg.gamma0 = gamma0;
        cfg.refresh_every = refresh_every;
        cfg.retrain_every = retrain_every;
        cfg.error_cov_dir = dump_cov_dir;
        if (!params_path.empty()) {
            ModelParams params = load_params_file(params_path, g);
            cfg.sigma2 = params.sigma2;
            cfg.damping_b = params.damping_b;
            cfg.known_params = std::move(params);
        }
        if (track->parsed() && !cfg.known_params)
            throw std::invalid_argument("track requires --params; use evaluate to train first");

        if (sweep->parsed()) {
            SweepTable table = sweep_s(net, trace, cfg, parse_int_list(s_values_str));
            write_or_print(table.to_json(), out);
            return 0;
        }
        if (track->parsed()) {
            EvaluationReport report = run_experiment(net, trace, cfg);
            save_pred_rows_csv(report.rows, out);
            std::cout << report.to_json().dump(1) << '\n';
            return 0;
        }
        cfg.out_dir = out;
        EvaluationReport report = run_experiment(net, trace, cfg);
        std::cout << report.to_json().dump(1) << '\n';
        return 0;
    }

    if (select->parsed()) {
        std::optional<Network> net;
        if (!topology.empty()) net = load_network_file(topology);
        Eigen::MatrixXd phi;
        if (!phi_path.empty()) {
            phi = load_matrix_csv(phi_path);
        } else {
            if (!net || params_path.empty())
                throw std::invalid_argument("select needs --phi, or --topology with --params");
            Eigen::MatrixXd g = gramian(routing_matrix(*net));
            ModelParams params = load_params_file(params_path, g);
            Eigen::MatrixXd a = params.c_eta + params.c_nu;
            if (!m_path.empty())
                a += params.damping_b * params.damping_b * load_matrix_csv(m_path);
            if (params.sigma2 <= 0.0) throw std::invalid_argument("params sigma2 must be > 0");
            phi = symmetrize(a / params.sigma2);
        }
        SelectionProblem problem{phi, parse_constraint(constraint_spec, net ? &*net : nullptr),
                                 false};
        SelectionResult res = greedy_select(problem);
        nlohmann::json j;
        j["chosen"] = res.chosen;
        j["objective_trace"] = res.objective_trace;
        if (!res.chosen_groups.empty() && net) {
            std::vector<std::string> names;
            for (int gidx : res.chosen_groups) names.push_back(net->end_nodes().at(gidx));
            j["chosen_nodes"] = names;
        }
        write_or_print(j, out);
        return 0;
    }

    if (exportmap->parsed()) {
        DelayMapOptions opt;
        opt.t_start = t_start;
        opt.t_end = t_end;
        opt.use_true_values = value_kind == "true";
        opt.only_unmeasured = only_unmeasured;
        export_delay_map(load_pred_rows_csv(trace_path), opt, out);
        std::cout << nlohmann::json{{"out", out}}.dump(1) << '\n';
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }
}
