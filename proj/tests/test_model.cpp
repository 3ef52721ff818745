#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "delaymap/linalg.hpp"
#include "delaymap/model.hpp"
#include "test_util.hpp"

using namespace delaymap;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ModelParams zero_noise_params(int p) {
    ModelParams params;
    params.c_nu = MatrixXd::Zero(p, p);
    params.c_eta = MatrixXd::Zero(p, p);
    params.sigma2 = 0.0;
    return params;
}

std::string temp_path(const char* name) {
    return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("build_c_nu: zero gamma, exact scaling, PSD") {
    MatrixXd g(2, 2);
    g << 1, 1, 1, 2;
    CHECK(build_c_nu(0.0, g).isZero(0.0));
    MatrixXd expect(2, 2);
    expect << 2, 2, 2, 4;
    CHECK(build_c_nu(2.0, g) == expect);
    CHECK(min_eigenvalue(build_c_nu(3.5, g)) >= -1e-12);
    CHECK_THROWS_AS(static_cast<void>(build_c_nu(-1.0, g)), std::invalid_argument);
}

TEST_CASE("degenerate zero-noise run produces a constant trace") {
    const int p = 3;
    ModelParams params = zero_noise_params(p);
    SimConfig cfg;
    cfg.horizon = 25;
    cfg.mu0 = VectorXd::Constant(p, 4.5);
    cfg.m0 = MatrixXd::Zero(p, p);
    DelayTrace trace = simulate_trace(params, cfg, select_all(p));
    CHECK((trace.true_delays.array() == 4.5).all());
}

TEST_CASE("random-walk increments have unit variance when c_eta = I") {
    const int p = 2;
    ModelParams params = zero_noise_params(p);
    params.c_eta = MatrixXd::Identity(p, p);
    SimConfig cfg;
    cfg.horizon = 10000;
    cfg.seed = 42;
    cfg.m0 = MatrixXd::Zero(p, p);
    DelayTrace trace = simulate_trace(params, cfg, select_none());
    for (int path = 0; path < p; ++path) {
        VectorXd diffs(trace.horizon() - 1);
        for (int t = 1; t < trace.horizon(); ++t)
            diffs(t - 1) = trace.true_delays(t, path) - trace.true_delays(t - 1, path);
        const double var = (diffs.array() - diffs.mean()).square().sum() / (diffs.size() - 1);
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("same seed twice gives bit-identical traces") {
    std::mt19937_64 rng(3);
    ModelParams params;
    params.c_nu = dmtest::random_spd(4, rng);
    params.c_eta = dmtest::random_spd(4, rng);
    params.sigma2 = 0.01;
    SimConfig cfg;
    cfg.horizon = 50;
    cfg.seed = 77;
    DelayTrace a = simulate_trace(params, cfg, select_random(4, 2));
    DelayTrace b = simulate_trace(params, cfg, select_random(4, 2));
    CHECK(a.true_delays == b.true_delays);
    CHECK(a.selection == b.selection);
}

TEST_CASE("innovations of the generated trace match the model covariance") {
    // with full measurement, y(t) - b y(t-1) has covariance
    // c_eta + (1 + b^2)(c_nu + sigma2 I)
    std::mt19937_64 rng(4);
    const int p = 3;
    ModelParams params;
    params.c_nu = dmtest::random_spd(p, rng, 0.2, 1.0);
    params.c_eta = dmtest::random_spd(p, rng, 0.2, 1.0);
    params.sigma2 = 0.05;
    params.damping_b = 1.0;

    SimConfig cfg;
    cfg.horizon = 10000;
    cfg.seed = 5;
    cfg.m0 = MatrixXd::Zero(p, p);
    DelayTrace trace = simulate_trace(params, cfg, select_all(p));

    MatrixXd sum = MatrixXd::Zero(p, p);
    for (int t = 1; t < trace.horizon(); ++t) {
        VectorXd d = trace.true_delays.row(t) - params.damping_b * trace.true_delays.row(t - 1);
        sum += d * d.transpose();
    }
    MatrixXd empirical = sum / (trace.horizon() - 1);
    MatrixXd expected = params.c_eta + (1 + params.damping_b * params.damping_b) *
                                           (params.c_nu + params.sigma2 * MatrixXd::Identity(p, p));
    CHECK((empirical - expected).norm() <= 0.05 * expected.norm());
}

TEST_CASE("student-t noise keeps the second moments") {
    const int p = 2;
    ModelParams params = zero_noise_params(p);
    params.c_eta = MatrixXd::Identity(p, p) * 2.0;
    SimConfig cfg;
    cfg.horizon = 20000;
    cfg.seed = 6;
    cfg.m0 = MatrixXd::Zero(p, p);
    cfg.noise = NoiseKind::StudentT;
    cfg.student_dof = 8.0;
    DelayTrace trace = simulate_trace(params, cfg, select_none());
    VectorXd diffs(trace.horizon() - 1);
    for (int t = 1; t < trace.horizon(); ++t)
        diffs(t - 1) = trace.true_delays(t, 0) - trace.true_delays(t - 1, 0);
    const double var = (diffs.array() - diffs.mean()).square().sum() / (diffs.size() - 1);
    CHECK(var == doctest::Approx(2.0).epsilon(0.15));
    CHECK_THROWS_AS(
        static_cast<void>(simulate_trace(params, [&] { auto c = cfg; c.student_dof = 2.0; return c; }(),
                                         select_none())),
        std::invalid_argument);
}

TEST_CASE("rank-deficient c_nu is accepted via the one-shot shift") {
    std::mt19937_64 rng(7);
    const int p = 5;
    ModelParams params = zero_noise_params(p);
    params.c_nu = dmtest::random_psd_rank(p, 2, rng);
    SimConfig cfg;
    cfg.horizon = 10;
    DelayTrace trace = simulate_trace(params, cfg, select_all(p));
    CHECK(trace.horizon() == 10);
}

TEST_CASE("non-PSD covariance is rejected") {
    ModelParams params;
    params.c_nu = MatrixXd::Identity(2, 2);
    params.c_eta = MatrixXd::Identity(2, 2);
    params.c_eta(0, 0) = -1.0;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("trace CSV round trip") {
    std::mt19937_64 rng(8);
    ModelParams params;
    params.c_nu = dmtest::random_spd(3, rng);
    params.c_eta = dmtest::random_spd(3, rng);
    params.sigma2 = 0.01;
    SimConfig cfg;
    cfg.horizon = 40;
    cfg.seed = 9;
    DelayTrace trace = simulate_trace(params, cfg, select_random(3, 1));

    const std::string path = temp_path("delaymap_trace_roundtrip.csv");
    save_trace_csv(trace, path);
    DelayTrace loaded = load_trace_csv(path);
    CHECK(loaded.true_delays == trace.true_delays);
    CHECK(loaded.selection == trace.selection);
    std::remove(path.c_str());
}

TEST_CASE("params JSON round trip and gamma-model construction") {
    std::mt19937_64 rng(10);
    ModelParams params;
    params.c_nu = dmtest::random_spd(3, rng);
    params.c_eta = dmtest::random_spd(3, rng);
    params.sigma2 = 0.002;
    params.damping_b = 0.95;
    params.gamma = 1.5;

    const std::string path = temp_path("delaymap_params_roundtrip.json");
    save_params_file(params, path);
    ModelParams loaded = load_params_file(path, std::nullopt);
    CHECK(loaded.c_nu == params.c_nu);
    CHECK(loaded.c_eta == params.c_eta);
    CHECK(loaded.sigma2 == params.sigma2);
    CHECK(loaded.damping_b == params.damping_b);
    CHECK(loaded.gamma == params.gamma);
    std::remove(path.c_str());

    // gamma + Gramian form with scalar-identity c_eta
    MatrixXd g(2, 2);
    g << 1, 1, 1, 2;
    auto doc = nlohmann::json::parse(R"({"gamma": 2.0, "sigma2": 0.01, "b": 1.0,
                                         "c_eta": {"scalar_identity": 0.5}})");
    ModelParams built = params_from_json(doc, g);
    CHECK(built.c_nu == build_c_nu(2.0, g));
    CHECK(built.c_eta == MatrixXd::Identity(2, 2) * 0.5);

    // Gramian-proportional covariance form
    doc["c_eta"] = {{"gramian_scale", 0.25}};
    CHECK(params_from_json(doc, g).c_eta == MatrixXd(0.25 * g));
    CHECK_THROWS_AS(static_cast<void>(params_from_json(doc, std::nullopt)),
                    std::invalid_argument);
}

TEST_CASE("trace loader rejects malformed files") {
    const std::string path = temp_path("delaymap_trace_bad.csv");
    {
        std::ofstream out(path);
        out << "wrong,header\n1,0,1.0,1\n";
    }
    CHECK_THROWS_AS(static_cast<void>(load_trace_csv(path)), std::runtime_error);
    std::remove(path.c_str());
}

TEST_SUITE_END();
