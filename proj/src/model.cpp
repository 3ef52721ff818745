#include "delaymap/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "delaymap/linalg.hpp"
#include "num_format.hpp"

namespace delaymap {

namespace {

void check_psd(const Eigen::MatrixXd& m, const std::string& name) {
    if (m.rows() != m.cols())
        throw std::invalid_argument(name + " must be square");
    if (!is_symmetric(m, 1e-12))
        throw std::invalid_argument(name + " must be symmetric");
    if (m.rows() == 0) return;
    const double tol = 1e-10 * std::max(1e-300, m.trace());
    if (min_eigenvalue(m) < -tol)
        throw std::invalid_argument(name + " is not positive semidefinite");
}

// Cholesky-style transform for sampling; zero matrices map to the zero
// transform, anything else gets the one-shot diagonal shift policy.
Eigen::MatrixXd sampling_transform(const Eigen::MatrixXd& cov, const std::string& role) {
    if (cov.cwiseAbs().maxCoeff() == 0.0)
        return Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    return SymmetricPsd(cov, role).llt().matrixL();
}

}  // namespace

void ModelParams::validate() const {
    check_psd(c_nu, "c_nu");
    check_psd(c_eta, "c_eta");
    if (c_eta.rows() != c_nu.rows())
        throw std::invalid_argument("c_nu and c_eta dimensions differ");
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be >= 0");
    if (!(damping_b > 0.0 && damping_b <= 1.0))
        throw std::invalid_argument("damping_b must be in (0, 1]");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
}

Eigen::MatrixXd build_c_nu(double gamma, const Eigen::MatrixXd& gramian) {
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    return gamma * gramian;
}

Eigen::VectorXd DelayTrace::measured(int t) const {
    const auto& sel = selection.at(t - 1);
    Eigen::VectorXd y(sel.size());
    for (std::size_t i = 0; i < sel.size(); ++i) y(i) = true_delays(t - 1, sel[i]);
    return y;
}

void DelayTrace::validate() const {
    if (static_cast<int>(selection.size()) != horizon())
        throw std::invalid_argument("trace selection list does not match horizon");
    for (int t = 0; t < horizon(); ++t) {
        const auto& sel = selection[t];
        if (!std::is_sorted(sel.begin(), sel.end()) ||
            std::adjacent_find(sel.begin(), sel.end()) != sel.end())
            throw std::invalid_argument("slot " + std::to_string(t + 1) +
                                        ": selection must be sorted and unique");
        if (!sel.empty() && (sel.front() < 0 || sel.back() >= path_dim()))
            throw std::invalid_argument("slot " + std::to_string(t + 1) +
                                        ": selection references unknown path");
    }
}

SelectionRule select_all(int path_count) {
    std::vector<int> all(path_count);
    std::iota(all.begin(), all.end(), 0);
    return [all](int, std::mt19937_64&) { return all; };
}

SelectionRule select_none() {
    return [](int, std::mt19937_64&) { return std::vector<int>{}; };
}

SelectionRule select_fixed(std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return [ids](int, std::mt19937_64&) { return ids; };
}

SelectionRule select_random(int path_count, int subset_size) {
    if (subset_size < 0 || subset_size > path_count)
        throw std::invalid_argument("random selection size out of range");
    return [path_count, subset_size](int, std::mt19937_64& rng) {
        // partial Fisher-Yates over 0..P-1
        std::vector<int> pool(path_count);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < subset_size; ++i) {
            std::uniform_int_distribution<int> pick(i, path_count - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        std::vector<int> out(pool.begin(), pool.begin() + subset_size);
        std::sort(out.begin(), out.end());
        return out;
    };
}

DelayTrace simulate_trace(const ModelParams& params, const SimConfig& cfg,
                          const SelectionRule& rule) {
    params.validate();
    if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const int p = params.path_dim();

    Eigen::VectorXd mu0 = cfg.mu0.size() ? cfg.mu0 : Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd m0 = cfg.m0.size() ? cfg.m0 : Eigen::MatrixXd::Identity(p, p);
    if (mu0.size() != p || m0.rows() != p || m0.cols() != p)
        throw std::invalid_argument("mu0/m0 dimension mismatch");
    check_psd(m0, "m0");

    Eigen::MatrixXd l_eta = sampling_transform(params.c_eta, "c_eta");
    Eigen::MatrixXd l_nu = sampling_transform(params.c_nu, "c_nu");
    Eigen::MatrixXd l_m0 = sampling_transform(m0, "m0");
    const double eps_scale = std::sqrt(params.sigma2);

    if (cfg.noise == NoiseKind::StudentT && cfg.student_dof <= 2.0)
        throw std::invalid_argument("student_dof must exceed 2 to keep covariances finite");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(cfg.student_dof);
    auto draw_std = [&](int n) {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = gauss(rng);
        return z;
    };
    // zero-mean vector with the given transform; Student-t draws are scaled
    // so the covariance still equals L L^T
    auto draw_noise = [&](const Eigen::MatrixXd& l) {
        Eigen::VectorXd x = l * draw_std(p);
        if (cfg.noise == NoiseKind::StudentT) {
            const double w = chi2(rng);
            x *= std::sqrt((cfg.student_dof - 2.0) / std::max(w, 1e-300));
        }
        return x;
    };

    DelayTrace trace;
    trace.true_delays.resize(cfg.horizon, p);
    trace.selection.resize(cfg.horizon);

    Eigen::VectorXd chi = mu0 + l_m0 * draw_std(p);
    for (int t = 1; t <= cfg.horizon; ++t) {
        chi = params.damping_b * chi + draw_noise(l_eta);
        Eigen::VectorXd nu = draw_noise(l_nu);
        Eigen::VectorXd eps = eps_scale * draw_std(p);
        if (cfg.noise == NoiseKind::StudentT && params.sigma2 > 0.0) {
            const double w = chi2(rng);
            eps *= std::sqrt((cfg.student_dof - 2.0) / std::max(w, 1e-300));
        }
        trace.true_delays.row(t - 1) = (chi + nu + eps).transpose();
        trace.selection[t - 1] = rule(t, rng);
    }
    trace.validate();
    return trace;
}

void save_trace_csv(const DelayTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
    out << "t,path_id,value,measured\n";
    for (int t = 1; t <= trace.horizon(); ++t) {
        const auto& sel = trace.selection[t - 1];
        std::size_t si = 0;
        for (int p = 0; p < trace.path_dim(); ++p) {
            while (si < sel.size() && sel[si] < p) ++si;
            const bool measured = si < sel.size() && sel[si] == p;
            out << t << ',' << p << ',' << detail::fmt_double(trace.true_delays(t - 1, p))
                << ',' << (measured ? 1 : 0) << '\n';
        }
    }
}

DelayTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "t,path_id,value,measured")
        throw std::runtime_error("trace file '" + path + "': bad header");

    struct Row { int t, p, m; double v; };
    std::vector<Row> rows;
    int max_t = 0, max_p = -1;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Row r{};
        char c1, c2, c3;
        std::istringstream ss(line);
        if (!(ss >> r.t >> c1 >> r.p >> c2 >> r.v >> c3 >> r.m) || c1 != ',' || c2 != ',' || c3 != ',')
            throw std::runtime_error("trace file '" + path + "' line " + std::to_string(lineno) +
                                     ": cannot parse row");
        if (r.t < 1 || r.p < 0 || (r.m != 0 && r.m != 1))
            throw std::runtime_error("trace file '" + path + "' line " + std::to_string(lineno) +
                                     ": values out of range");
        max_t = std::max(max_t, r.t);
        max_p = std::max(max_p, r.p);
        rows.push_back(r);
    }
    if (rows.empty()) throw std::runtime_error("trace file '" + path + "' has no data rows");
    const int horizon = max_t, p_dim = max_p + 1;
    if (static_cast<long>(rows.size()) != static_cast<long>(horizon) * p_dim)
        throw std::runtime_error("trace file '" + path + "': expected one row per (slot, path)");

    DelayTrace trace;
    trace.true_delays.setConstant(horizon, p_dim, std::nan(""));
    trace.selection.resize(horizon);
    for (const Row& r : rows) {
        if (!std::isnan(trace.true_delays(r.t - 1, r.p)))
            throw std::runtime_error("trace file '" + path + "': duplicate row for t=" +
                                     std::to_string(r.t) + " path=" + std::to_string(r.p));
        trace.true_delays(r.t - 1, r.p) = r.v;
        if (r.m) trace.selection[r.t - 1].push_back(r.p);
    }
    for (auto& sel : trace.selection) std::sort(sel.begin(), sel.end());
    trace.validate();
    return trace;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    if (rows == 0) return Eigen::MatrixXd();
    const auto cols = j.at(0).size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw std::invalid_argument("ragged matrix in params file");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
    }
    return m;
}

Eigen::MatrixXd cov_from_json(const nlohmann::json& j, int dim,
                              const std::optional<Eigen::MatrixXd>& gramian,
                              const std::string& name) {
    if (j.contains("scalar_identity")) {
        if (dim <= 0)
            throw std::invalid_argument(name + ": cannot infer dimension for scalar_identity");
        return j.at("scalar_identity").get<double>() *
               Eigen::MatrixXd::Identity(dim, dim);
    }
    if (j.contains("gramian_scale")) {
        if (!gramian)
            throw std::invalid_argument(name + ": 'gramian_scale' needs a topology Gramian");
        return j.at("gramian_scale").get<double>() * (*gramian);
    }
    if (j.contains("dense")) return matrix_from_json(j.at("dense"));
    throw std::invalid_argument(name + ": expected 'scalar_identity', 'gramian_scale', or 'dense'");
}

}  // namespace

nlohmann::json params_to_json(const ModelParams& params) {
    nlohmann::json j;
    j["gamma"] = params.gamma;
    j["sigma2"] = params.sigma2;
    j["b"] = params.damping_b;
    j["c_eta"] = {{"dense", matrix_to_json(params.c_eta)}};
    j["c_nu"] = {{"dense", matrix_to_json(params.c_nu)}};
    return j;
}

ModelParams params_from_json(const nlohmann::json& doc,
                             const std::optional<Eigen::MatrixXd>& gramian) {
    ModelParams p;
    try {
        p.gamma = doc.value("gamma", 0.0);
        p.sigma2 = doc.value("sigma2", 1e-3);
        p.damping_b = doc.value("b", 1.0);
        if (doc.contains("c_nu")) {
            const int dim = gramian ? static_cast<int>(gramian->rows()) : -1;
            p.c_nu = cov_from_json(doc.at("c_nu"), dim, gramian, "c_nu");
        } else if (gramian) {
            p.c_nu = build_c_nu(p.gamma, *gramian);
        } else {
            throw std::invalid_argument("params file has no c_nu and no Gramian was supplied");
        }
        p.c_eta = cov_from_json(doc.at("c_eta"), p.path_dim(), gramian, "c_eta");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed params document: ") + e.what());
    }
    p.validate();
    return p;
}

void save_params_file(const ModelParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write params file '" + path + "'");
    out << params_to_json(params).dump(1) << '\n';
}

ModelParams load_params_file(const std::string& path,
                             const std::optional<Eigen::MatrixXd>& gramian) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open params file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("cannot parse '" + path + "': " + e.what());
    }
    return params_from_json(doc, gramian);
}

}  // namespace delaymap
