#ifndef DELAYMAP_MODEL_HPP
#define DELAYMAP_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace delaymap {

// State-space covariances for the delay model
//
//   chi(t) = b * chi(t-1) + eta(t)          eta ~ (0, c_eta)
//   y(t)   = chi(t) + nu(t) + eps(t)        nu ~ (0, c_nu), eps ~ (0, sigma2 I)
//
// b = 1 is the pure random walk; c_nu = gamma * G ties the spatial component
// to the topology Gramian.
struct ModelParams {
    Eigen::MatrixXd c_nu;
    Eigen::MatrixXd c_eta;
    double sigma2 = 1e-3;
    double damping_b = 1.0;
    double gamma = 0.0;  // scale of the Gramian model, when c_nu = gamma * G

    int path_dim() const { return static_cast<int>(c_nu.rows()); }
    void validate() const;  // symmetry/PSD/range checks, throws std::invalid_argument
};

// gamma * G
Eigen::MatrixXd build_c_nu(double gamma, const Eigen::MatrixXd& gramian);

// Time-indexed delays for all paths plus the per-slot measured subset.
// Slots are 1-based in files and reports; row t-1 of true_delays holds y(t).
struct DelayTrace {
    Eigen::MatrixXd true_delays;              // T x P
    std::vector<std::vector<int>> selection;  // per slot, sorted path ids

    int horizon() const { return static_cast<int>(true_delays.rows()); }
    int path_dim() const { return static_cast<int>(true_delays.cols()); }

    // Measured values at slot t (1-based), in selection order.
    Eigen::VectorXd measured(int t) const;
    void validate() const;
};

// Per-slot rule deciding which paths get measured. Receives the 1-based slot
// index and the trace RNG; must return sorted unique ids.
using SelectionRule = std::function<std::vector<int>(int slot, std::mt19937_64& rng)>;

SelectionRule select_all(int path_count);
SelectionRule select_none();
SelectionRule select_fixed(std::vector<int> ids);
SelectionRule select_random(int path_count, int subset_size);

enum class NoiseKind { Gaussian, StudentT };

struct SimConfig {
    int horizon = 100;
    std::uint64_t seed = 0;
    Eigen::VectorXd mu0;      // empty -> zero vector
    Eigen::MatrixXd m0;       // empty -> identity (1 ms^2)
    NoiseKind noise = NoiseKind::Gaussian;
    double student_dof = 4.0; // only for NoiseKind::StudentT
};

// Draws a trace from the generating model. Same seed, same trace, bit for bit.
DelayTrace simulate_trace(const ModelParams& params, const SimConfig& cfg,
                          const SelectionRule& rule);

// CSV schema: header "t,path_id,value,measured", one row per (slot, path).
void save_trace_csv(const DelayTrace& trace, const std::string& path);
DelayTrace load_trace_csv(const std::string& path);

// Model-params JSON: gamma, sigma2, b, and c_eta/c_nu either as a dense
// matrix or as {"scalar_identity": x}. When c_nu is absent it is built as
// gamma * G from the supplied Gramian.
nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& doc,
                             const std::optional<Eigen::MatrixXd>& gramian);
void save_params_file(const ModelParams& params, const std::string& path);
ModelParams load_params_file(const std::string& path,
                             const std::optional<Eigen::MatrixXd>& gramian);

}  // namespace delaymap

#endif
