// Acceptance suite: exercises every formula, bound, and pipeline contract at
// its stated tolerance and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "delaymap/baseline.hpp"
#include "delaymap/estimation.hpp"
#include "delaymap/harness.hpp"
#include "delaymap/kkf.hpp"
#include "delaymap/linalg.hpp"
#include "delaymap/model.hpp"
#include "delaymap/selection.hpp"
#include "delaymap/topology.hpp"
#include "test_util.hpp"

using namespace delaymap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

int g_failures = 0;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

struct Criterion {
    std::string name;
    double limit_s;
    std::vector<std::string> notes;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
};

void run_criterion(const std::string& name, double limit_s,
                   const std::function<void(Criterion&)>& body) {
    Criterion c{name, limit_s, {}, true};
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && secs > limit_s) {
        c.ok = false;
        c.notes.push_back("runtime limit exceeded");
    }
    std::printf("[%s] %s (%.1fs%s)\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs,
                limit_s > 0 ? (", limit " + std::to_string((int)limit_s) + "s").c_str() : "");
    for (const auto& n : c.notes) std::printf("       - %s\n", n.c_str());
    if (!c.ok) ++g_failures;
}

ModelParams random_params(int p, std::mt19937_64& rng, double sigma2, double b = 1.0) {
    ModelParams params;
    params.c_nu = dmtest::random_spd(p, rng, 0.2, 1.5);
    params.c_eta = dmtest::random_spd(p, rng, 0.1, 0.8);
    params.sigma2 = sigma2;
    params.damping_b = b;
    return params;
}

double h_of(const MatrixXd& phi, const std::vector<int>& sel) {
    return objective_f(phi, 1.0, sel) - objective_f(phi, 1.0, {});
}

void subsets_rec(int n, int k, int start, std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& fn) {
    if (static_cast<int>(cur.size()) == k) {
        fn(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        subsets_rec(n, k, i + 1, cur, fn);
        cur.pop_back();
    }
}

// --------------------------------------------------------------------------

void criterion_batch_lmmse(Criterion& c) {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const int p = 3 + inst % 4;        // up to 6
        const int horizon = 4 + inst % 7;  // up to 10
        ModelParams params = random_params(p, rng, 0.01 + 0.002 * (inst % 5), 1.0);

        SimConfig sim;
        sim.horizon = horizon;
        sim.seed = 9000 + inst;
        sim.mu0 = VectorXd::NullaryExpr(p, [&](int) { return std::normal_distribution<>()(rng); });
        sim.m0 = dmtest::random_spd(p, rng, 0.3, 1.2);
        auto rule = [&](int slot, std::mt19937_64& r) -> std::vector<int> {
            if (inst % 7 == 0 && slot == 2) return {};
            std::uniform_int_distribution<int> size(1, p - 1);
            return dmtest::random_subset(p, size(r), r);
        };
        DelayTrace trace = simulate_trace(params, sim, rule);

        FilterRun run = run_filter(params, trace, sim.mu0, sim.m0);
        for (int t = 1; t <= horizon; ++t) {
            const auto& pred = run.slots[t - 1].prediction;
            VectorXd oracle =
                dmtest::batch_lmmse_prediction(params, sim.mu0, sim.m0, trace, t, pred.unmeasured);
            const double rel = (pred.predicted - oracle).norm() / (1.0 + oracle.norm());
            worst = std::max(worst, rel);
        }
    }
    c.expect(worst <= 1e-8, "worst relative error " + sci(worst));
    c.notes.push_back("50 instances, every slot checked; worst rel err " + sci(worst));
}

void criterion_error_covariance(Criterion& c) {
    std::mt19937_64 rng(102);

    // (a) closed form vs the long-form expression on 100 random instances
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const int p = 3 + inst % 5;
        ModelParams params = random_params(p, rng, 0.01 + 0.01 * (inst % 4), inst % 3 ? 1.0 : 0.9);
        MatrixXd m_prev = dmtest::random_spd(p, rng, 0.1, 1.5);
        auto sel = dmtest::random_subset(p, inst % p, rng);
        MatrixXd direct = error_covariance(m_prev, params, sel);
        MatrixXd oracle = dmtest::long_form_error_cov(m_prev, params, sel);
        worst = std::max(worst, (direct - oracle).norm() / std::max(1.0, oracle.norm()));
    }
    c.expect(worst <= 1e-10, "long-form mismatch " + sci(worst));

    // (b) Monte-Carlo empirical covariance at P = 5 over 1e4 runs
    const int p = 5, horizon = 4, reps = 10000;
    ModelParams params = random_params(p, rng, 0.05, 1.0);
    const VectorXd mu0 = VectorXd::Zero(p);
    const MatrixXd m0 = dmtest::random_spd(p, rng, 0.3, 1.0);
    const std::vector<std::vector<int>> sel_seq = {{0, 2}, {1, 3, 4}, {0, 1, 2}, {1, 4}};

    // matched filter pass for the believed covariance entering the last slot
    MatrixXd m_before_last;
    {
        FilterState st{mu0, m0, 0};
        for (int t = 1; t <= horizon; ++t) {
            if (t == horizon) m_before_last = st.m;
            st = kf_step(st, params, sel_seq[t - 1], VectorXd::Zero(sel_seq[t - 1].size()));
        }
    }
    MatrixXd formula = error_covariance(m_before_last, params, sel_seq.back());

    const std::vector<int> unmeasured = complement_ids(p, sel_seq.back());
    MatrixXd moment = MatrixXd::Zero(unmeasured.size(), unmeasured.size());
    VectorXd mean_err = VectorXd::Zero(unmeasured.size());
    for (int rep = 0; rep < reps; ++rep) {
        SimConfig sim;
        sim.horizon = horizon;
        sim.seed = 20000 + rep;
        sim.mu0 = mu0;
        sim.m0 = m0;
        DelayTrace trace = simulate_trace(
            params, sim, [&](int t, std::mt19937_64&) { return sel_seq[t - 1]; });
        FilterRun run = run_filter(params, trace, mu0, m0);
        const auto& pred = run.slots[horizon - 1].prediction;
        VectorXd err(unmeasured.size());
        for (std::size_t i = 0; i < unmeasured.size(); ++i)
            err(i) = trace.true_delays(horizon - 1, unmeasured[i]) - pred.predicted(i);
        moment += err * err.transpose();
        mean_err += err;
    }
    moment /= reps;
    mean_err /= reps;

    double worst_diag = 0.0;
    for (std::size_t i = 0; i < unmeasured.size(); ++i)
        worst_diag = std::max(worst_diag,
                              std::abs(moment(i, i) - formula(i, i)) / formula(i, i));
    c.expect(worst_diag <= 0.05, "Monte-Carlo diagonal deviation " + sci(worst_diag));
    c.notes.push_back("MC diagonal deviation " + std::to_string(worst_diag) + " over " +
                      std::to_string(reps) + " runs");

    // unbiasedness: mean error within 3 standard errors of zero per path
    for (std::size_t i = 0; i < unmeasured.size(); ++i) {
        const double se = std::sqrt(formula(i, i) / reps);
        c.expect(std::abs(mean_err(i)) <= 3.0 * se,
                 "prediction bias on path " + std::to_string(unmeasured[i]));
    }
}

void criterion_supermodularity(Criterion& c) {
    std::mt19937_64 rng(103);
    long total_checks = 0;
    for (int inst = 0; inst < 100; ++inst) {
        MatrixXd phi;
        if (inst % 5 == 4) phi = dmtest::random_psd_rank(6, 1 + inst % 5, rng);
        else if (inst % 5 == 3) phi = 1e3 * dmtest::random_spd(6, rng, 0.1, 2.0);
        else phi = dmtest::random_spd(6, rng, 0.05, 3.0);
        auto report = verify_supermodularity(phi, 1e-10);
        total_checks += report.increment_checks + report.monotonicity_checks;
        if (!report.ok()) {
            c.expect(false, "instance " + std::to_string(inst) + ": " +
                                std::to_string(report.violations) + " violations, worst " +
                                std::to_string(report.worst_violation));
            return;
        }
    }
    c.notes.push_back(std::to_string(total_checks) + " increment/monotonicity checks, 0 violations");
}

void criterion_greedy_bound(Criterion& c) {
    std::mt19937_64 rng(104);
    const double ratio = 1.0 - 1.0 / std::exp(1.0);
    double worst_margin = -1e300;
    for (int inst = 0; inst < 100; ++inst) {
        const int p = 6 + inst % 5;  // up to 10
        const int budget = 1 + inst % 3;
        MatrixXd phi = dmtest::random_spd(p, rng, 0.05, 3.0);

        SelectionResult res = greedy_select({phi, Cardinality{budget}, false});
        std::vector<int> chosen = res.chosen;
        std::sort(chosen.begin(), chosen.end());
        const double h_greedy = h_of(phi, chosen);

        double h_opt = 0.0;
        std::vector<int> cur;
        subsets_rec(p, budget, 0, cur,
                    [&](const std::vector<int>& s) { h_opt = std::min(h_opt, h_of(phi, s)); });

        worst_margin = std::max(worst_margin, h_greedy - ratio * h_opt);
        if (h_greedy > ratio * h_opt + 1e-9) {
            c.expect(false, "bound violated on instance " + std::to_string(inst));
            return;
        }
    }
    c.notes.push_back("100 instances against the exhaustive optimum");

    // exact optimality on diagonal phi
    for (int inst = 0; inst < 20; ++inst) {
        const int p = 8;
        const int budget = 3;
        MatrixXd phi = MatrixXd::Zero(p, p);
        std::uniform_real_distribution<double> u(0.01, 5.0);
        for (int i = 0; i < p; ++i) phi(i, i) = u(rng);
        SelectionResult res = greedy_select({phi, Cardinality{budget}, false});
        std::vector<int> chosen = res.chosen;
        std::sort(chosen.begin(), chosen.end());
        double best = 1e300;
        std::vector<int> best_set;
        std::vector<int> cur;
        subsets_rec(p, budget, 0, cur, [&](const std::vector<int>& s) {
            const double f = h_of(phi, s);
            if (f < best) {
                best = f;
                best_set = s;
            }
        });
        if (chosen != best_set) {
            c.expect(false, "diagonal instance not solved exactly");
            return;
        }
    }
    c.notes.push_back("diagonal instances solved exactly");
}

void criterion_algorithm1_consistency(Criterion& c) {
    std::mt19937_64 rng(105);
    double worst_delta = 0.0, worst_v = 0.0, worst_gain = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const int p = 6 + inst % 7;  // up to 12
        ModelParams params = random_params(p, rng, 0.02 + 0.01 * (inst % 3));
        MatrixXd m_prev = dmtest::random_spd(p, rng, 0.1, 1.0);
        MatrixXd phi = (m_prev + params.c_eta + params.c_nu) / params.sigma2;
        const int budget = std::min(5, p - 1);

        SelectionResult res = greedy_select({phi, Cardinality{budget}, false});
        for (int k = 1; k <= budget; ++k) {
            std::vector<int> prefix(res.chosen.begin(), res.chosen.begin() + k);
            std::vector<int> prev(res.chosen.begin(), res.chosen.begin() + k - 1);
            std::sort(prefix.begin(), prefix.end());
            std::sort(prev.begin(), prev.end());
            const double direct = objective_f(phi, 1.0, prefix) - objective_f(phi, 1.0, prev);
            worst_delta = std::max(worst_delta, std::abs(res.objective_trace[k - 1] - direct) /
                                                    std::max(1.0, std::abs(direct)));

            MatrixXd m(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    m(i, j) = phi(res.chosen[i], res.chosen[j]) + (i == j ? 1.0 : 0.0);
            MatrixXd v_direct = m.inverse();
            // greedy picks a stable prefix, so budget k reproduces step k's V
            SelectionResult step = greedy_select({phi, Cardinality{k}, false});
            worst_v = std::max(worst_v, (step.v_matrix - v_direct).cwiseAbs().maxCoeff());
        }

        // the final V is the inverse needed by the Kalman gain
        std::vector<int> sorted_sel = res.chosen;
        std::sort(sorted_sel.begin(), sorted_sel.end());
        const int k = budget;
        MatrixXd perm = MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            const auto it = std::find(res.chosen.begin(), res.chosen.end(), sorted_sel[i]);
            perm(i, it - res.chosen.begin()) = 1.0;
        }
        MatrixXd v_sorted = perm * res.v_matrix * perm.transpose();
        MatrixXd m_prior_cols(p, k);
        for (int j = 0; j < k; ++j)
            m_prior_cols.col(j) = (m_prev + params.c_eta).col(sorted_sel[j]);
        MatrixXd gain_from_v = m_prior_cols * (v_sorted / params.sigma2);
        MatrixXd gain = kalman_gain(m_prev, params, sorted_sel);
        worst_gain = std::max(worst_gain, (gain_from_v - gain).cwiseAbs().maxCoeff());
    }
    c.expect(worst_delta <= 1e-9, "delta mismatch " + sci(worst_delta));
    c.expect(worst_v <= 1e-9, "V mismatch " + sci(worst_v));
    c.expect(worst_gain <= 1e-10, "Kalman-gain mismatch " + sci(worst_gain));
    c.notes.push_back("worst delta/V/gain deviations: " + sci(worst_delta) + " / " +
                      sci(worst_v) + " / " + sci(worst_gain));
}

void criterion_estimator_recovery(Criterion& c) {
    std::mt19937_64 topo_rng(106);
    const int p = 10;
    Network net = dmtest::line_network(7, p, topo_rng);
    MatrixXd g = gramian(routing_matrix(net));

    ModelParams truth;
    truth.gamma = 2.0;
    truth.c_nu = build_c_nu(truth.gamma, g);
    truth.c_eta = 0.5 * MatrixXd::Identity(p, p);
    truth.sigma2 = 1e-3;

    std::vector<double> gamma_errs, diag_errs;
    for (int seed = 0; seed < 20; ++seed) {
        SimConfig sim;
        sim.horizon = 5000;
        sim.seed = 3000 + seed;
        DelayTrace trace = simulate_trace(truth, sim, select_random(p, 6));

        // estimator recovery given the known generating parameters: the
        // filter runs matched, the accumulators produce the estimates
        TrainingConfig cfg;
        cfg.t_l = 5000;
        cfg.burn_in = 500;
        cfg.gamma0 = truth.gamma;
        cfg.c_eta_init = truth.c_eta;
        cfg.sigma2 = truth.sigma2;
        cfg.refresh_every = 0;
        EstimatedParams est = training_phase(g, trace, cfg);

        gamma_errs.push_back(std::abs(est.gamma_hat - 2.0) / 2.0);
        double diag = 0.0;
        for (int i = 0; i < p; ++i) diag += std::abs(est.c_eta_hat(i, i) - 0.5) / 0.5;
        diag_errs.push_back(diag / p);
    }
    const double med_gamma = dmtest::median(gamma_errs);
    const double med_diag = dmtest::median(diag_errs);
    c.expect(med_gamma <= 0.15, "median gamma error " + std::to_string(med_gamma));
    c.expect(med_diag <= 0.20, "median c_eta diagonal error " + std::to_string(med_diag));
    c.notes.push_back("median gamma err " + std::to_string(med_gamma) +
                      ", median c_eta diag err " + std::to_string(med_diag) + " (20 seeds)");
}

void criterion_qualitative(Criterion& c) {
    std::mt19937_64 topo_rng(107);
    const int p = 40;
    Network net = dmtest::line_network(15, p, topo_rng);
    MatrixXd g = gramian(routing_matrix(net));

    ModelParams truth;
    truth.gamma = 1.0;
    truth.c_nu = build_c_nu(truth.gamma, g);
    truth.c_eta = 0.3 * MatrixXd::Identity(p, p);
    truth.sigma2 = 1e-3;

    const std::vector<int> s_values = {5, 10, 20};
    std::map<int, std::vector<double>> kkf_rand, krig_rand, kkf_greedy;
    int kkf_wins = 0, comparisons = 0;

    for (int seed = 0; seed < 20; ++seed) {
        SimConfig sim;
        sim.horizon = 400;
        sim.seed = 4000 + seed;
        DelayTrace trace = simulate_trace(truth, sim, select_random(p, 20));

        for (int s : s_values) {
            ExperimentConfig cfg;
            cfg.t_l = 100;
            cfg.t_p = 400;
            cfg.burn_in = 0;
            cfg.known_params = truth;
            cfg.seed = seed;
            cfg.keep_rows = false;

            cfg.predictor = Predictor::Kkf;
            cfg.policy = PolicySpec::random(s);
            const double e_kkf = run_experiment(net, trace, cfg).nmspe;
            kkf_rand[s].push_back(e_kkf);

            cfg.predictor = Predictor::NetworkKriging;
            const double e_krig = run_experiment(net, trace, cfg).nmspe;
            krig_rand[s].push_back(e_krig);

            cfg.predictor = Predictor::Kkf;
            cfg.policy = PolicySpec::greedy(s);
            kkf_greedy[s].push_back(run_experiment(net, trace, cfg).nmspe);

            ++comparisons;
            if (e_kkf < e_krig) ++kkf_wins;
        }
    }

    // (a) median NMSPE non-increasing in S
    const double m5 = dmtest::median(kkf_rand[5]);
    const double m10 = dmtest::median(kkf_rand[10]);
    const double m20 = dmtest::median(kkf_rand[20]);
    c.expect(m10 <= m5 && m20 <= m10,
             "median NMSPE not monotone: " + std::to_string(m5) + ", " + std::to_string(m10) +
                 ", " + std::to_string(m20));

    // (b) filter beats the memoryless baseline in at least 90% of runs
    const double win_rate = double(kkf_wins) / comparisons;
    c.expect(win_rate >= 0.9, "win rate " + std::to_string(win_rate));

    // (c) greedy selection no worse than random (median per S)
    for (int s : s_values)
        c.expect(dmtest::median(kkf_greedy[s]) <= dmtest::median(kkf_rand[s]),
                 "greedy worse than random at S=" + std::to_string(s));

    std::ostringstream note;
    note << "medians S=5/10/20: " << m5 << "/" << m10 << "/" << m20 << "; win rate " << win_rate
         << "; greedy medians " << dmtest::median(kkf_greedy[5]) << "/"
         << dmtest::median(kkf_greedy[10]) << "/" << dmtest::median(kkf_greedy[20]);
    c.notes.push_back(note.str());
}

void criterion_damped_stability(Criterion& c) {
    std::mt19937_64 rng(108);
    const int p = 6;
    ModelParams params = random_params(p, rng, 0.01, 0.9);
    const std::vector<int> sel = {0, 2, 4};

    FilterState state{VectorXd::Zero(p), MatrixXd::Identity(p, p), 0};
    int settled_at = -1;
    for (int t = 1; t <= 500; ++t) {
        FilterState next = kf_step(state, params, sel, VectorXd::Zero(sel.size()));
        if ((next.m - state.m).norm() < 1e-10 && settled_at < 0) settled_at = t;
        state = next;
    }
    c.expect(settled_at > 0 && settled_at < 500,
             "covariance did not settle before t = 500");
    if (settled_at > 0)
        c.notes.push_back("||M(t) - M(t-1)||_F < 1e-10 from t = " + std::to_string(settled_at));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_cli_determinism(Criterion& c) {
    namespace fs = std::filesystem;
    const std::string cli = DELAYMAP_CLI_PATH;
    const std::string data = DELAYMAP_DATA_DIR;
    const fs::path base = fs::temp_directory_path() / "delaymap_accept";
    fs::remove_all(base);

    auto pipeline = [&](const fs::path& dir) {
        fs::create_directories(dir);
        const std::string topo = data + "/internet2.json";
        auto sh = [&](const std::string& cmd) {
            const std::string full = cmd + " >" + (dir / "log.txt").string() + " 2>&1";
            if (std::system(full.c_str()) != 0)
                throw std::runtime_error("command failed: " + cmd);
        };
        sh(cli + " simulate --topology " + topo + " --params " + data +
           "/example_params.json --horizon 300 --s 20 --seed 7 --out " +
           (dir / "trace.csv").string());
        sh(cli + " train --topology " + topo + " --trace " + (dir / "trace.csv").string() +
           " --t-l 150 --burn-in 60 --sigma2 0.001 --out " + (dir / "params.json").string());
        sh(cli + " evaluate --topology " + topo + " --trace " + (dir / "trace.csv").string() +
           " --params " + (dir / "params.json").string() +
           " --policy random --s 20 --t-l 150 --seed 7 --out " + (dir / "run").string());
        sh(cli + " sweep --topology " + topo + " --trace " + (dir / "trace.csv").string() +
           " --params " + (dir / "params.json").string() +
           " --policy random --s-values 10,20 --t-l 150 --seed 7 --out " +
           (dir / "sweep.json").string());
        sh(cli + " select --topology " + topo + " --params " + (dir / "params.json").string() +
           " --constraint cardinality:10 --out " + (dir / "sel.json").string());
        sh(cli + " export-map --predictions " + (dir / "run" / "predictions.csv").string() +
           " --t-start 151 --t-end 250 --out " + (dir / "map.csv").string());
    };

    pipeline(base / "a");
    pipeline(base / "b");

    const std::vector<std::string> files = {"trace.csv", "params.json", "run/predictions.csv",
                                            "run/report.json", "sweep.json", "sel.json",
                                            "map.csv"};
    for (const auto& f : files) {
        const std::string a = slurp((base / "a" / f).string());
        const std::string b = slurp((base / "b" / f).string());
        c.expect(!a.empty(), f + " is empty");
        c.expect(a == b, f + " differs between reruns");
    }
    c.notes.push_back(std::to_string(files.size()) + " artifacts byte-identical across reruns");

    // failure path: nonzero exit and a JSON error object on stderr
    const fs::path errlog = base / "err.txt";
    const int rc = std::system(
        (cli + " evaluate --topology /nonexistent.json --trace x --s 1 2>" + errlog.string() +
         " >/dev/null")
            .c_str());
    c.expect(rc != 0, "bad invocation should exit nonzero");
    const std::string err = slurp(errlog.string());
    c.expect(err.find("{\"error\":") != std::string::npos, "stderr should carry an error JSON");
    fs::remove_all(base);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n----------------\n");
    run_criterion("1. predictions match the batch joint-covariance oracle", 10,
                  criterion_batch_lmmse);
    run_criterion("2. closed-form error covariance: long form + Monte-Carlo + unbiasedness", 60,
                  criterion_error_covariance);
    run_criterion("3. objective is monotone and supermodular (exhaustive)", 30,
                  criterion_supermodularity);
    run_criterion("4. greedy meets the (1-1/e) bound; exact on diagonal inputs", 60,
                  criterion_greedy_bound);
    run_criterion("5. incremental updates match direct recomputation", 0,
                  criterion_algorithm1_consistency);
    run_criterion("6. training recovers gamma and c_eta", 120, criterion_estimator_recovery);
    run_criterion("7. qualitative orderings: NMSPE vs S, filter vs baseline, greedy vs random",
                  300, criterion_qualitative);
    run_criterion("8. damped filter covariance converges", 0, criterion_damped_stability);
    run_criterion("9. CLI pipelines are byte-reproducible", 0, criterion_cli_determinism);

    std::printf("----------------\n%s (%d failure%s)\n",
                g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT", g_failures,
                g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
