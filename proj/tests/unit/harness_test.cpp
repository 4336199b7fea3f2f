#include "doctest.h"

#include "agopfit/harness.hpp"
#include "agopfit/hermite.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"
#include "agopfit/rfm.hpp"
#include "agopfit/rng.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace agopfit;
using harness::ConfigError;
using harness::ExperimentConfig;

namespace {

ExperimentConfig tiny() {
    ExperimentConfig cfg;
    cfg.d = 10;
    cfg.alphas = {1.0};
    cfg.trials = 2;
    cfg.iterations = 1;
    cfg.n_test = 100;
    return cfg;
}

#ifdef AGOPFIT_CLI
int run_cli(const std::string& args, std::string* out = nullptr) {
    const std::string log = (std::filesystem::temp_directory_path() / "agopfit_cli_test.log").string();
    const std::string cmd = std::string(AGOPFIT_CLI) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(log);
        std::stringstream buf;
        buf << in.rdbuf();
        *out = buf.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("sample_size and seeds") {
    CHECK(harness::sample_size(100, 1.5) == 1000);
    CHECK(harness::sample_size(100, 1.0) == 100);
    CHECK(harness::sample_size(100, 1.7) == 2511);
    CHECK(harness::sample_size(10, 2.0) == 100);
    CHECK(harness::trial_seed(5, 1, 2) == mix64(5, 1, 2));
    CHECK(harness::trial_seed(5, 1, 2) != harness::trial_seed(5, 2, 1));
}

TEST_CASE("flat config parsing") {
    const auto cfg = harness::parse_config(
        "# comment\n"
        "d = 20\n"
        "link = \"L2\"\n"
        "alphas = [1.0, 1.25]  # trailing\n"
        "trials = 3\n"
        "allow_large_n = true\n"
        "bandwidth = sqrt_d\n");
    CHECK(cfg.d == 20);
    CHECK(cfg.link == "L2");
    CHECK(cfg.alphas == std::vector<double>{1.0, 1.25});
    CHECK(cfg.trials == 3);
    CHECK(cfg.allow_large_n);
    CHECK(cfg.iterations == 5);
    CHECK(cfg.eta_scale == 0.01);
    CHECK(cfg.n_test == 5000);
}

TEST_CASE("JSON config parsing") {
    const auto cfg = harness::parse_config(R"({"d": 30, "kernel": "laplace", "alphas": [1.1], "base_seed": 7})");
    CHECK(cfg.d == 30);
    CHECK(cfg.kernel == "laplace");
    CHECK(cfg.alphas == std::vector<double>{1.1});
    CHECK(cfg.base_seed == 7);
}

TEST_CASE("config errors carry line numbers") {
    try {
        harness::parse_config("d = 20\nwidth = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    try {
        harness::parse_config("d = 20\n\ntrials = many\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(harness::parse_config("d 20\n"), ConfigError);
    CHECK_THROWS_AS(harness::parse_config("trials = 0\n"), ConfigError);
    CHECK_THROWS_AS(harness::parse_config("alphas = [2.0]\n"), ConfigError);
    CHECK_NOTHROW(harness::parse_config("alphas = [2.0]\nallow_large_n = true\n"));
    CHECK_THROWS_AS(harness::parse_config("kernel = cosine\n"), Error);
    CHECK_THROWS_AS(harness::parse_config("{\"d\": }"), ConfigError);
    CHECK_THROWS_AS(harness::load_config("/nonexistent/missing.toml"), ConfigError);
}

TEST_CASE("row count, order and determinism") {
    auto cfg = tiny();
    const auto rows = harness::run_experiment(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].trial == 0);
    CHECK(rows[0].iteration == 0);
    CHECK(rows[1].iteration == 1);
    CHECK(rows[2].trial == 1);
    CHECK(rows[0].n == 10);
    for (const auto& r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.runtime_s == 0.0);
    }
    CHECK(harness::to_csv(rows) == harness::to_csv(harness::run_experiment(cfg)));

    cfg.jobs = 2;
    cfg.alphas = {1.0, 1.2};
    cfg.trials = 3;
    const auto threaded = harness::run_experiment(cfg);
    cfg.jobs = 1;
    CHECK(harness::to_csv(threaded) == harness::to_csv(harness::run_experiment(cfg)));

    cfg.base_seed = 99;
    CHECK(harness::to_csv(threaded) != harness::to_csv(harness::run_experiment(cfg)));
}

TEST_CASE("CSV round trip and schema") {
    const auto rows = harness::run_experiment(tiny());
    const std::string text = harness::to_csv(rows);
    CHECK(text.substr(0, text.find('\n')) == harness::kCsvHeader);
    const auto back = harness::parse_csv(text);
    REQUIRE(back.size() == rows.size());
    CHECK(harness::to_csv(back) == text);
    CHECK_THROWS_AS(harness::parse_csv("link,input\nL1,hypercube\n"), Error);
}

TEST_CASE("aggregate examples") {
    harness::ResultRow base;
    base.link = "L1";
    base.input = "hypercube";
    base.subspace = "haar";
    base.kernel = "gaussian";
    base.alpha = 1.0;
    base.n = 100;

    auto one = base;
    one.test_mse = 0.7;
    const auto a1 = harness::aggregate({one});
    REQUIRE(a1.size() == 1);
    CHECK(a1[0].test_mse.mean == 0.7);
    CHECK_FALSE(a1[0].test_mse.se.has_value());

    auto x = base, y = base;
    x.trial = 0;
    y.trial = 1;
    x.test_mse = y.test_mse = 0.3;
    x.sin_theta = 0.0;
    y.sin_theta = 1.0;
    const auto a2 = harness::aggregate({x, y});
    REQUIRE(a2.size() == 1);
    CHECK(*a2[0].test_mse.se == 0.0);
    CHECK(a2[0].sin_theta.mean == 0.5);
    CHECK(*a2[0].sin_theta.se == doctest::Approx(0.5));
    CHECK(a2[0].trials == 2);

    auto failed = base;
    failed.status = "failed";
    failed.test_mse = 100.0;
    CHECK(harness::aggregate({x, failed})[0].test_mse.mean == 0.3);

    auto other = x;
    other.iteration = 1;
    CHECK(harness::aggregate({x, y, other}).size() == 2);
    CHECK_THROWS_AS(harness::aggregate({}), InvalidArgument);

    const std::string csv = harness::aggregate_csv(a1);
    CHECK(csv.find("test_mse_se") != std::string::npos);
}

TEST_CASE("failed trials are recorded, not fatal") {
    const auto u = model::haar_subspace(6, 1, 1);
    const auto data = model::sample_dataset(model::InputDist::hypercube, u, hermite::link_l1(), 20, 0.01, 2);
    rfm::RfmOptions opts;
    opts.iterations = 2;
    const auto h = rfm::run_rfm(data, kernel::KernelSpec::from_name("gaussian", 5), opts, data, u);
    CHECK_FALSE(h.ok());
    CHECK(h.records.empty());
}

#ifdef AGOPFIT_CLI
TEST_CASE("CLI behaviour") {
    std::string out;
    CHECK(run_cli("run --config missing.toml", &out) == 2);
    CHECK(out.find("missing.toml") != std::string::npos);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run --config x --bogus") == 2);
    CHECK(run_cli("--help", &out) == 0);
    CHECK(out.find("verify") != std::string::npos);

    const std::string bad = temp_path("agopfit_bad.conf");
    std::ofstream(bad) << "d = 10\nshape = round\n";
    CHECK(run_cli("run --config " + bad, &out) == 2);
    CHECK(out.find("line 2") != std::string::npos);

    const std::string conf = temp_path("agopfit_tiny.conf");
    const std::string csv = temp_path("agopfit_tiny.csv");
    const std::string agg = temp_path("agopfit_tiny_agg.csv");
    std::ofstream(conf) << "d = 10\nalphas = [1.0, 1.1]\ntrials = 2\niterations = 1\nn_test = 50\n";
    REQUIRE(run_cli("run --quiet --config " + conf + " --out " + csv + " --seed 3") == 0);
    REQUIRE(run_cli("aggregate --in " + csv + " --out " + agg) == 0);
    std::ifstream in(agg);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 2 * 2);

    const std::string broken = temp_path("agopfit_broken.csv");
    std::ofstream(broken) << "link,input\nL1,hypercube\n";
    CHECK(run_cli("aggregate --in " + broken + " --out " + agg, &out) == 2);

    CHECK(run_cli("oracle gaussian-norm --link L2", &out) == 0);
    CHECK(out.find("\"closed_form\":2.0") != std::string::npos);
    CHECK(run_cli("oracle nope") == 2);
}
#endif
