#ifndef DELAYMAP_HARNESS_HPP
#define DELAYMAP_HARNESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "delaymap/estimation.hpp"
#include "delaymap/model.hpp"
#include "delaymap/topology.hpp"

namespace delaymap {

enum class Predictor { Kkf, NetworkKriging };

std::string to_string(Predictor p);
Predictor predictor_from_string(const std::string& s);

// How the evaluation phase picks the measured paths each slot. Random draws
// come from a dedicated stream derived from the experiment seed, so two runs
// with the same seed measure the same paths regardless of the predictor.
struct PolicySpec {
    enum class Kind { Random, Greedy, NodeBudget, Matroid, FixedList, FromTrace };
    Kind kind = Kind::Random;
    int s = 0;                        // Random / Greedy budget
    int node_count = 1;               // NodeBudget
    int matroid_cap = 1;              // Matroid: uniform per-node cap...
    std::map<std::string, int> caps;  // ...or per-node overrides
    std::vector<int> fixed;           // FixedList

    static PolicySpec random(int s);
    static PolicySpec greedy(int s);
    static PolicySpec node_budget(int n);
    static PolicySpec matroid(int uniform_cap);
    static PolicySpec fixed_list(std::vector<int> ids);
    static PolicySpec from_trace();
};

std::string to_string(PolicySpec::Kind k);

struct ExperimentConfig {
    int t_l = 1000;  // training horizon; evaluation covers t_l+1 .. t_p
    int t_p = 0;     // 0: full trace horizon
    int burn_in = 500;
    Predictor predictor = Predictor::Kkf;
    PolicySpec policy;
    double sigma2 = 1e-3;
    double damping_b = 1.0;
    std::uint64_t seed = 0;
    double gamma0 = 1.0;
    int refresh_every = 500;               // within the training phase
    int retrain_every = 0;                 // re-estimate during evaluation (0: off)
    std::optional<ModelParams> known_params;  // skip estimation entirely
    bool keep_rows = true;                 // retain per-row predictions in the report
    std::string out_dir;                   // when set, write predictions.csv + report.json
    std::string error_cov_dir;             // when set, dump per-slot error covariances (kkf)
};

struct PredRow {
    int t = 0;
    int path = 0;
    double predicted = 0.0;
    double true_value = 0.0;
    bool measured = false;
};

struct EvaluationReport {
    double nmspe = 0.0;
    double total_sq_err = 0.0;
    long n_predicted = 0;
    int t_l = 0, t_p = 0, p = 0, s = 0;
    Predictor predictor = Predictor::Kkf;
    PolicySpec::Kind policy = PolicySpec::Kind::Random;
    std::uint64_t seed = 0;
    double gamma_hat = 0.0;  // 0 when training was skipped
    std::vector<double> per_slot_sq_err;  // evaluation slots, in order
    std::vector<PredRow> rows;            // empty when keep_rows is off

    nlohmann::json to_json() const;
};

// NMSPE = total squared error / ((t_p - t_l)(P - S)). Throws on a zero
// denominator (nothing was predicted).
double nmspe(double total_sq_err, int t_p, int t_l, int p, int s);

// Full pipeline: training (unless params are supplied) on slots 1..t_l, then
// per-slot select / observe / predict / score on t_l+1..t_p.
EvaluationReport run_experiment(const Network& net, const DelayTrace& trace,
                                const ExperimentConfig& cfg);

struct SweepEntry {
    int s = 0;
    double nmspe = 0.0;
    std::string error;  // nonempty when this run failed
};

struct SweepTable {
    std::vector<SweepEntry> entries;
    nlohmann::json to_json() const;
};

// One run per S value (same seed); failures are recorded and the sweep
// continues.
SweepTable sweep_s(const Network& net, const DelayTrace& trace, const ExperimentConfig& cfg,
                   const std::vector<int>& s_values);

struct DelayMapOptions {
    int t_start = 1;
    int t_end = 0;               // 0: last slot present
    bool use_true_values = false;
    bool only_unmeasured = false;  // keep only paths never measured in the window
};

// (paths x slots) matrix with rows ordered by the true delay at the first
// slot of the window (ties by path id), written as CSV.
void export_delay_map(const std::vector<PredRow>& rows, const DelayMapOptions& opt,
                      const std::string& out_path);

void save_pred_rows_csv(const std::vector<PredRow>& rows, const std::string& path);
std::vector<PredRow> load_pred_rows_csv(const std::string& path);

}  // namespace delaymap

#endif
