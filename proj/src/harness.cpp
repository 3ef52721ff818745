#include "delaymap/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "delaymap/baseline.hpp"
#include "delaymap/kkf.hpp"
#include "delaymap/linalg.hpp"
#include "delaymap/selection.hpp"
#include "num_format.hpp"

namespace delaymap {

namespace {

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file '" + path + "'");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << (j ? "," : "") << detail::fmt_double(m(i, j));
        out << '\n';
    }
}

}  // namespace

}  // namespace delaymap

namespace delaymap {

std::string to_string(Predictor p) {
    return p == Predictor::Kkf ? "kkf" : "network-kriging";
}

Predictor predictor_from_string(const std::string& s) {
    if (s == "kkf") return Predictor::Kkf;
    if (s == "network-kriging" || s == "kriging") return Predictor::NetworkKriging;
    throw std::invalid_argument("unknown predictor '" + s + "'");
}

std::string to_string(PolicySpec::Kind k) {
    switch (k) {
        case PolicySpec::Kind::Random: return "random";
        case PolicySpec::Kind::Greedy: return "greedy";
        case PolicySpec::Kind::NodeBudget: return "node-budget";
        case PolicySpec::Kind::Matroid: return "matroid";
        case PolicySpec::Kind::FixedList: return "fixed-list";
        case PolicySpec::Kind::FromTrace: return "from-trace";
    }
    return "?";
}

PolicySpec PolicySpec::random(int s) {
    PolicySpec p;
    p.kind = Kind::Random;
    p.s = s;
    return p;
}
PolicySpec PolicySpec::greedy(int s) {
    PolicySpec p;
    p.kind = Kind::Greedy;
    p.s = s;
    return p;
}
PolicySpec PolicySpec::node_budget(int n) {
    PolicySpec p;
    p.kind = Kind::NodeBudget;
    p.node_count = n;
    return p;
}
PolicySpec PolicySpec::matroid(int uniform_cap) {
    PolicySpec p;
    p.kind = Kind::Matroid;
    p.matroid_cap = uniform_cap;
    return p;
}
PolicySpec PolicySpec::fixed_list(std::vector<int> ids) {
    PolicySpec p;
    p.kind = Kind::FixedList;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    p.fixed = std::move(ids);
    return p;
}
PolicySpec PolicySpec::from_trace() {
    PolicySpec p;
    p.kind = Kind::FromTrace;
    return p;
}

double nmspe(double total_sq_err, int t_p, int t_l, int p, int s) {
    const long denom = static_cast<long>(t_p - t_l) * static_cast<long>(p - s);
    if (denom <= 0)
        throw std::invalid_argument("NMSPE denominator (t_p - t_l)(P - S) must be positive");
    return total_sq_err / static_cast<double>(denom);
}

namespace {

// Evaluation-phase selection. Greedy variants read the live filter covariance.
class PolicyDriver {
public:
    PolicyDriver(const Network& net, const PolicySpec& spec, std::uint64_t seed)
        : spec_(spec), rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
        const int p = net.path_count();
        switch (spec_.kind) {
            case PolicySpec::Kind::Random:
                if (spec_.s < 1 || spec_.s > p)
                    throw std::invalid_argument("policy: S must be in 1..P");
                rule_ = select_random(p, spec_.s);
                break;
            case PolicySpec::Kind::Greedy:
                if (spec_.s < 1 || spec_.s > p)
                    throw std::invalid_argument("policy: S must be in 1..P");
                break;
            case PolicySpec::Kind::FixedList:
                if (spec_.fixed.empty()) throw std::invalid_argument("policy: empty fixed list");
                if (spec_.fixed.front() < 0 || spec_.fixed.back() >= p)
                    throw std::invalid_argument("policy: fixed list references unknown path");
                break;
            case PolicySpec::Kind::NodeBudget: {
                groups_ = net.origin_groups();
                for (const auto& g : groups_)
                    if (g.empty())
                        throw std::invalid_argument("policy: every end node needs >= 1 path");
                if (spec_.node_count < 1 ||
                    spec_.node_count > static_cast<int>(groups_.size()))
                    throw std::invalid_argument("policy: node budget out of range");
                break;
            }
            case PolicySpec::Kind::Matroid: {
                groups_ = net.origin_groups();
                caps_.assign(groups_.size(), spec_.matroid_cap);
                for (std::size_t g = 0; g < groups_.size(); ++g) {
                    auto it = spec_.caps.find(net.end_nodes()[g]);
                    if (it != spec_.caps.end()) caps_[g] = it->second;
                    if (caps_[g] < 1) throw std::invalid_argument("policy: matroid caps must be >= 1");
                }
                break;
            }
            case PolicySpec::Kind::FromTrace:
                break;
        }
    }

    std::vector<int> select(int t, const DelayTrace& trace, const ModelParams& params,
                            const Eigen::MatrixXd* m_state) {
        switch (spec_.kind) {
            case PolicySpec::Kind::Random:
                return rule_(t, rng_);
            case PolicySpec::Kind::FixedList:
                return spec_.fixed;
            case PolicySpec::Kind::FromTrace:
                return trace.selection.at(t - 1);
            case PolicySpec::Kind::Greedy: {
                SelectionProblem prob{make_phi(params, m_state), Cardinality{spec_.s}, false};
                return sorted(greedy_select(prob).chosen);
            }
            case PolicySpec::Kind::NodeBudget: {
                SelectionProblem prob{make_phi(params, m_state), NodeBudget{spec_.node_count, groups_},
                                      false};
                return sorted(greedy_select(prob).chosen);
            }
            case PolicySpec::Kind::Matroid: {
                SelectionProblem prob{make_phi(params, m_state), PartitionMatroid{groups_, caps_},
                                      false};
                return sorted(greedy_select(prob).chosen);
            }
        }
        return {};
    }

private:
    static std::vector<int> sorted(std::vector<int> v) {
        std::sort(v.begin(), v.end());
        return v;
    }

    // Phi = (b^2 M(t-1) + c_eta + c_nu) / sigma2; without filter state the
    // prior covariance alone drives the design.
    Eigen::MatrixXd make_phi(const ModelParams& params, const Eigen::MatrixXd* m_state) const {
        if (params.sigma2 <= 0.0)
            throw std::invalid_argument("greedy selection requires sigma2 > 0");
        const double b2 = params.damping_b * params.damping_b;
        Eigen::MatrixXd a = params.c_eta + params.c_nu;
        if (m_state) a += b2 * (*m_state);
        return symmetrize(a / params.sigma2);
    }

    PolicySpec spec_;
    std::mt19937_64 rng_;
    SelectionRule rule_;
    std::vector<std::vector<int>> groups_;
    std::vector<int> caps_;
};

Eigen::VectorXd values_at(const DelayTrace& trace, int t, const std::vector<int>& sel) {
    Eigen::VectorXd y(sel.size());
    for (std::size_t i = 0; i < sel.size(); ++i) y(i) = trace.true_delays(t - 1, sel[i]);
    return y;
}

Eigen::VectorXd prefix_measured_mean(const DelayTrace& trace, int t_l) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(trace.path_dim());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(trace.path_dim());
    for (int t = 1; t <= t_l; ++t)
        for (int p : trace.selection[t - 1]) {
            sum(p) += trace.true_delays(t - 1, p);
            count(p) += 1.0;
        }
    for (int i = 0; i < trace.path_dim(); ++i) sum(i) = count(i) > 0 ? sum(i) / count(i) : 0.0;
    return sum;
}

}  // namespace

EvaluationReport run_experiment(const Network& net, const DelayTrace& trace,
                                const ExperimentConfig& cfg) {
    const int p = net.path_count();
    if (trace.path_dim() != p)
        throw std::invalid_argument("trace path dimension does not match topology");
    const int t_p = cfg.t_p > 0 ? cfg.t_p : trace.horizon();
    if (t_p > trace.horizon()) throw std::invalid_argument("t_p exceeds trace horizon");
    if (cfg.t_l < 0 || cfg.t_l >= t_p)
        throw std::invalid_argument("need t_l < t_p to leave evaluation slots");

    const Eigen::MatrixXd g = gramian(routing_matrix(net));

    // model parameters: supplied, or estimated from the trace prefix
    ModelParams params;
    double gamma_hat = 0.0;
    Eigen::VectorXd mean_delay = Eigen::VectorXd::Zero(p);
    if (cfg.known_params) {
        params = *cfg.known_params;
        params.validate();
        if (params.path_dim() != p)
            throw std::invalid_argument("known params dimension does not match topology");
        if (params.damping_b < 1.0) mean_delay = prefix_measured_mean(trace, cfg.t_l);
    } else {
        TrainingConfig tc;
        tc.t_l = cfg.t_l;
        tc.burn_in = cfg.burn_in;
        tc.gamma0 = cfg.gamma0;
        tc.sigma2 = cfg.sigma2;
        tc.damping_b = cfg.damping_b;
        tc.refresh_every = cfg.refresh_every;
        EstimatedParams est = training_phase(g, trace, tc);
        params = to_model_params(est, g, cfg.sigma2, cfg.damping_b);
        gamma_hat = est.gamma_hat;
        mean_delay = est.mean_delay;
    }

    // Remark-1 centering: the damped model tracks a zero-mean trend, so the
    // a-priori path means are removed from measurements and restored on output
    const bool demean = params.damping_b < 1.0;
    const Eigen::VectorXd offset = demean ? mean_delay : Eigen::VectorXd::Zero(p);

    // warm up the filter over the training prefix using the trace's own masks
    FilterState state;
    if (cfg.predictor == Predictor::Kkf) {
        state = default_initial_state(trace, params);
        if (demean && !trace.selection.empty() && !trace.selection[0].empty()) {
            Eigen::VectorXd y1 = values_at(trace, 1, trace.selection[0]) -
                                 select_entries(offset, trace.selection[0]);
            state.chi_hat.setConstant(y1.mean());
        }
        for (int t = 1; t <= cfg.t_l; ++t) {
            const auto& sel = trace.selection[t - 1];
            if (sel.empty()) {
                state = predict_only(state, params);
            } else {
                Eigen::VectorXd y_s = values_at(trace, t, sel) - select_entries(offset, sel);
                state = kf_step(state, params, sel, y_s);
            }
        }
    }

    PolicyDriver policy(net, cfg.policy, cfg.seed);
    TrainingAccumulator retrain_acc(p);
    KrigingConfig kriging = KrigingConfig::with_default_basis(params.c_nu, params.sigma2);

    EvaluationReport report;
    report.t_l = cfg.t_l;
    report.t_p = t_p;
    report.p = p;
    report.predictor = cfg.predictor;
    report.policy = cfg.policy.kind;
    report.seed = cfg.seed;
    report.gamma_hat = gamma_hat;

    int constant_s = -1;
    bool s_varies = false;
    long denom = 0;

    for (int t = cfg.t_l + 1; t <= t_p; ++t) {
        const Eigen::MatrixXd* m_ptr =
            cfg.predictor == Predictor::Kkf ? &state.m : nullptr;
        std::vector<int> sel = policy.select(t, trace, params, m_ptr);
        if (static_cast<int>(sel.size()) >= p)
            throw std::invalid_argument("slot " + std::to_string(t) +
                                        ": selection measures every path, nothing to predict");
        if (constant_s < 0) constant_s = static_cast<int>(sel.size());
        else if (constant_s != static_cast<int>(sel.size())) s_varies = true;

        Eigen::VectorXd y_s = values_at(trace, t, sel) - select_entries(offset, sel);

        std::vector<int> unmeasured;
        Eigen::VectorXd predicted;
        try {
        if (cfg.predictor == Predictor::Kkf) {
            const FilterState prev = state;
            state = sel.empty() ? predict_only(state, params) : kf_step(state, params, sel, y_s);
            PredictionResult pr = kkf_predict(state, prev.m, params, sel, y_s);
            unmeasured = std::move(pr.unmeasured);
            predicted = std::move(pr.predicted);
            if (!cfg.error_cov_dir.empty()) {
                std::filesystem::create_directories(cfg.error_cov_dir);
                write_matrix_csv(pr.error_cov, cfg.error_cov_dir + "/error_cov_t" +
                                                   std::to_string(t) + ".csv");
            }
            if (cfg.retrain_every > 0) {
                retrain_acc.add_slot(prev, state, params.damping_b, sel, y_s);
                if ((t - cfg.t_l) % cfg.retrain_every == 0 && retrain_acc.q_count() >= 8) {
                    Eigen::MatrixXd c_eta = psd_project(retrain_acc.c_eta_hat());
                    const double gh = fit_gamma(
                        retrain_acc.finalize_c_nu(c_eta, params.sigma2, params.c_nu), g);
                    params.c_eta = c_eta;
                    params.gamma = gh;
                    params.c_nu = build_c_nu(gh, g);
                    gamma_hat = gh;
                    retrain_acc.reset();
                }
            }
        } else {
            KrigingPrediction kp = network_kriging_predict(kriging, sel, y_s);
            unmeasured = std::move(kp.unmeasured);
            predicted = std::move(kp.predicted);
        }
        } catch (const std::exception& e) {
            throw std::runtime_error("slot " + std::to_string(t) + ": " + e.what());
        }

        double slot_sq = 0.0;
        for (std::size_t i = 0; i < unmeasured.size(); ++i) {
            const int path = unmeasured[i];
            const double pred_abs = predicted(i) + offset(path);
            const double err = pred_abs - trace.true_delays(t - 1, path);
            slot_sq += err * err;
            if (cfg.keep_rows)
                report.rows.push_back({t, path, pred_abs, trace.true_delays(t - 1, path), false});
        }
        if (cfg.keep_rows)
            for (std::size_t i = 0; i < sel.size(); ++i)
                report.rows.push_back(
                    {t, sel[i], trace.true_delays(t - 1, sel[i]), trace.true_delays(t - 1, sel[i]), true});

        report.per_slot_sq_err.push_back(slot_sq);
        report.total_sq_err += slot_sq;
        report.n_predicted += static_cast<long>(unmeasured.size());
        denom += static_cast<long>(unmeasured.size());
    }

    if (cfg.keep_rows)
        std::sort(report.rows.begin(), report.rows.end(), [](const PredRow& a, const PredRow& b) {
            return a.t != b.t ? a.t < b.t : a.path < b.path;
        });

    report.s = constant_s;
    report.nmspe = s_varies ? report.total_sq_err / static_cast<double>(denom)
                            : nmspe(report.total_sq_err, t_p, cfg.t_l, p, constant_s);
    report.gamma_hat = gamma_hat;

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        save_pred_rows_csv(report.rows, cfg.out_dir + "/predictions.csv");
        std::ofstream out(cfg.out_dir + "/report.json");
        if (!out) throw std::runtime_error("cannot write report in '" + cfg.out_dir + "'");
        out << report.to_json().dump(1) << '\n';
    }
    return report;
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json j;
    j["nmspe"] = nmspe;
    j["total_sq_err"] = total_sq_err;
    j["n_predicted"] = n_predicted;
    j["t_l"] = t_l;
    j["t_p"] = t_p;
    j["p"] = p;
    j["s"] = s;
    j["predictor"] = to_string(predictor);
    j["policy"] = to_string(policy);
    j["seed"] = seed;
    j["gamma_hat"] = gamma_hat;
    return j;
}

SweepTable sweep_s(const Network& net, const DelayTrace& trace, const ExperimentConfig& cfg,
                   const std::vector<int>& s_values) {
    SweepTable table;
    for (int s : s_values) {
        SweepEntry entry;
        entry.s = s;
        try {
            ExperimentConfig run_cfg = cfg;
            run_cfg.keep_rows = false;
            run_cfg.out_dir.clear();
            if (run_cfg.policy.kind == PolicySpec::Kind::Random ||
                run_cfg.policy.kind == PolicySpec::Kind::Greedy)
                run_cfg.policy.s = s;
            else
                throw std::invalid_argument("sweep requires a random or greedy policy");
            entry.nmspe = run_experiment(net, trace, run_cfg).nmspe;
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        table.entries.push_back(std::move(entry));
    }
    return table;
}

nlohmann::json SweepTable::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json r;
        r["s"] = e.s;
        if (e.error.empty()) r["nmspe"] = e.nmspe;
        else r["error"] = e.error;
        rows.push_back(std::move(r));
    }
    return nlohmann::json{{"sweep", rows}};
}

void export_delay_map(const std::vector<PredRow>& rows, const DelayMapOptions& opt,
                      const std::string& out_path) {
    if (rows.empty()) throw std::invalid_argument("no prediction rows to export");
    int t_end = opt.t_end;
    if (t_end == 0)
        for (const auto& r : rows) t_end = std::max(t_end, r.t);
    if (opt.t_start < 1 || opt.t_start > t_end)
        throw std::invalid_argument("bad export window");

    std::map<int, std::map<int, const PredRow*>> by_path;  // path -> t -> row
    std::set<int> measured_in_window;
    for (const auto& r : rows) {
        if (r.t < opt.t_start || r.t > t_end) continue;
        by_path[r.path][r.t] = &r;
        if (r.measured) measured_in_window.insert(r.path);
    }
    if (by_path.empty()) throw std::invalid_argument("export window contains no rows");

    std::vector<int> paths;
    for (const auto& [path, slots] : by_path) {
        if (opt.only_unmeasured && measured_in_window.count(path)) continue;
        for (int t = opt.t_start; t <= t_end; ++t)
            if (!slots.count(t))
                throw std::invalid_argument("path " + std::to_string(path) +
                                            " has no row at slot " + std::to_string(t));
        paths.push_back(path);
    }
    if (paths.empty()) throw std::invalid_argument("no paths left to export");

    // rows ordered by the true delay at the window start, ties by path id
    std::stable_sort(paths.begin(), paths.end(), [&](int a, int b) {
        const double ta = by_path[a][opt.t_start]->true_value;
        const double tb = by_path[b][opt.t_start]->true_value;
        return ta != tb ? ta < tb : a < b;
    });

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write map file '" + out_path + "'");
    out << "path_id";
    for (int t = opt.t_start; t <= t_end; ++t) out << ",t" << t;
    out << '\n';
    for (int path : paths) {
        out << path;
        for (int t = opt.t_start; t <= t_end; ++t) {
            const PredRow* r = by_path[path][t];
            out << ',' << detail::fmt_double(opt.use_true_values ? r->true_value : r->predicted);
        }
        out << '\n';
    }
}

void save_pred_rows_csv(const std::vector<PredRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write predictions file '" + path + "'");
    out << "t,path_id,predicted,true,measured_flag\n";
    for (const auto& r : rows)
        out << r.t << ',' << r.path << ',' << detail::fmt_double(r.predicted) << ','
            << detail::fmt_double(r.true_value) << ',' << (r.measured ? 1 : 0) << '\n';
}

std::vector<PredRow> load_pred_rows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open predictions file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "t,path_id,predicted,true,measured_flag")
        throw std::runtime_error("predictions file '" + path + "': bad header");
    std::vector<PredRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        PredRow r;
        char c1, c2, c3, c4;
        int m = 0;
        std::istringstream ss(line);
        if (!(ss >> r.t >> c1 >> r.path >> c2 >> r.predicted >> c3 >> r.true_value >> c4 >> m))
            throw std::runtime_error("predictions file '" + path + "' line " +
                                     std::to_string(lineno) + ": cannot parse row");
        r.measured = m != 0;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace delaymap
