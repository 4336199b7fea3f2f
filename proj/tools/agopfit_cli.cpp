// agopfit command-line driver: run, verify, oracle, aggregate.

#include "agopfit/harness.hpp"
#include "agopfit/hermite.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"
#include "agopfit/rng.hpp"
#include "agopfit/verify.hpp"
#include "agopfit/walsh.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace agopfit;
using nlohmann::json;

namespace {

constexpr int kUsageError = 2;

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

model::Subspace make_subspace(const std::string& kind, int d, int r, std::uint64_t seed) {
    if (kind == "haar") return model::haar_subspace(d, r, seed);
    if (kind == "sparse") return model::sparse_subspace(d, r, model::default_support_size(d), seed);
    if (kind == "axis") return model::axis_aligned_subspace(d, r);
    throw InvalidArgument("subspace must be haar, sparse or axis");
}

struct OracleArgs {
    std::string link = "L1";
    std::string subspace = "haar";
    std::string profile = "exp";
    std::string kernel = "gaussian";
    int d = 8;
    int p = 1;
    int n = 0;
    int nodes = 64;
    int samples = 100000;
    double alpha = 1.2;
    double eta_scale = 0.01;
    std::uint64_t seed = 0;
};

int run_oracle(const std::string& name, const OracleArgs& a) {
    json out;
    out["oracle"] = name;
    if (name == "latent-sigma") {
        const auto h = hermite::link_by_name(a.link);
        const Matrix closed = hermite::latent_sigma(h, a.p);
        const auto mc = verify::oracle::mc_latent_sigma(h, a.p, a.samples, a.seed);
        out["closed_form"] = matrix_json(closed);
        out["monte_carlo"] = matrix_json(mc.mean);
        out["std_error"] = matrix_json(mc.std_error);
    } else if (name == "gaussian-norm") {
        const auto h = hermite::link_by_name(a.link);
        out["closed_form"] = hermite::gaussian_l2_norm_sq(h);
        out["quadrature"] = verify::oracle::quadrature_norm_sq(h, a.nodes);
    } else if (name == "population-agop") {
        const auto h = hermite::link_by_name(a.link);
        const auto u = make_subspace(a.subspace, a.d, h.r(), a.seed);
        const auto f = model::target_walsh(h, u, std::min(a.d, h.max_degree()));
        out["exact"] = matrix_json(walsh::population_agop_exact(f, a.p));
        out["brute_force"] = matrix_json(verify::oracle::brute_force_agop(f, a.p));
    } else if (name == "lemma32-gap") {
        const auto h = hermite::link_by_name(a.link);
        const auto rep = verify::lemma32_gap(h, make_subspace(a.subspace, a.d, h.r(), a.seed), a.p);
        out["d"] = rep.d;
        out["p"] = rep.p;
        out["mu"] = rep.mu;
        out["fstar_norm_sq"] = rep.fstar_norm_sq;
        out["gap"] = rep.gap;
        out["normalized_gap"] = rep.normalized_gap;
        out["theta_u"] = rep.theta_u;
    } else if (name == "kernel-fourier") {
        const int n = a.n > 0 ? a.n : static_cast<int>(std::ceil(std::pow(a.d, 1.2)));
        const Matrix x = model::sample_inputs(model::InputDist::hypercube, n, a.d, a.seed);
        out["n"] = n;
        out["residual"] = verify::kernel_fourier_residual(kernel::profile_by_name(a.profile), x, a.p);
    } else if (name == "dk-chain") {
        const auto h = hermite::link_by_name(a.link);
        const int n = a.n > 0 ? a.n : 2000;
        const auto u = make_subspace(a.subspace, a.d, h.r(), mix64(a.seed, 1));
        const auto rep = verify::dk_chain_check(h, u, a.p, kernel::KernelSpec::from_name(a.kernel, a.d), n,
                                                mix64(a.seed, 2));
        out["sin_theta"] = rep.sin_theta;
        out["eps_agop"] = rep.eps_agop;
        out["s"] = rep.s;
        out["rho"] = rep.rho;
        out["bound"] = rep.bound;
        out["applicable"] = rep.applicable;
        out["violated"] = rep.violated;
    } else if (name == "prop42") {
        const auto rep = verify::prop42_pipeline(hermite::link_by_name(a.link), a.d, a.alpha, a.eta_scale, a.seed);
        out["d"] = rep.d;
        out["n"] = rep.n;
        out["eta"] = rep.eta;
        out["c_eta"] = rep.c_eta;
        out["residual"] = rep.residual;
        out["implied_zeta"] = rep.implied_zeta;
    } else {
        std::cerr << "error: unknown oracle '" << name
                  << "' (expected latent-sigma, gaussian-norm, population-agop, lemma32-gap, kernel-fourier, "
                     "dk-chain, prop42)\n";
        return kUsageError;
    }
    std::cout << out.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subspace recovery from kernel AGOP: experiments, checks and oracles"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_override;
    int jobs = 0;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run an experiment grid and write the result CSV");
    run->add_option("--config", config_path, "Config file (key = value lines, or JSON)")->required();
    run->add_option("--seed", seed_override, "Override base_seed");
    run->add_option("--out", out_override, "Override out_path");
    run->add_option("--jobs", jobs, "Concurrent trials (overrides config jobs)")->check(CLI::PositiveNumber);
    run->add_flag("--quiet", quiet, "Suppress per-trial progress on stderr");

    bool fast = false;
    std::string report_path = "verify_report.jsonl";
    std::uint64_t verify_seed = 20240601;
    auto* ver = app.add_subcommand("verify", "Run the small-dimension verification suite");
    ver->add_flag("--fast", fast, "Fewer seeds and samples");
    ver->add_option("--report", report_path, "Machine-readable report (one JSON record per check)");
    ver->add_option("--seed", verify_seed, "Suite seed");

    std::string oracle_name;
    OracleArgs oa;
    auto* orc = app.add_subcommand("oracle", "Evaluate one oracle and print a JSON record");
    orc->add_option("name", oracle_name,
                    "latent-sigma | gaussian-norm | population-agop | lemma32-gap | kernel-fourier | dk-chain | prop42")
        ->required();
    orc->add_option("--link", oa.link, "Link function: L1 or L2");
    orc->add_option("--subspace", oa.subspace, "haar, sparse or axis");
    orc->add_option("--profile", oa.profile, "Inner-product profile: exp, linear, square");
    orc->add_option("--kernel", oa.kernel, "gaussian, laplace or exp_inner");
    orc->add_option("--d", oa.d, "Ambient dimension");
    orc->add_option("--p", oa.p, "Degree cap");
    orc->add_option("--n", oa.n, "Sample count (0 = oracle default)");
    orc->add_option("--nodes", oa.nodes, "Quadrature nodes per axis");
    orc->add_option("--samples", oa.samples, "Monte Carlo samples");
    orc->add_option("--alpha", oa.alpha, "Sample-size exponent");
    orc->add_option("--eta-scale", oa.eta_scale, "eta = eta_scale * d");
    orc->add_option("--seed", oa.seed, "Seed");

    std::string agg_in, agg_out;
    auto* agg = app.add_subcommand("aggregate", "Mean and standard error per (alpha, iteration)");
    agg->add_option("--in", agg_in, "Result CSV")->required();
    agg->add_option("--out", agg_out, "Aggregated CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*run) {
            harness::ExperimentConfig cfg;
            try {
                cfg = harness::load_config(config_path);
                if (seed_override) cfg.base_seed = *seed_override;
                if (!out_override.empty()) cfg.out_path = out_override;
                if (jobs > 0) cfg.jobs = jobs;
                cfg.validate();
            } catch (const harness::ConfigError& e) {
                std::cerr << "error: " << config_path << ": " << e.what() << '\n';
                return kUsageError;
            }
            auto progress = [&](const std::string& msg) {
                if (!quiet) std::cerr << msg << '\n';
            };
            const auto rows = harness::run_experiment(cfg, progress);
            harness::write_csv(rows, cfg.out_path);
            std::cerr << "wrote " << rows.size() << " rows to " << cfg.out_path << '\n';
            return 0;
        }
        if (*ver) {
            const auto results = verify::run_suite(fast, verify_seed);
            bool all = true;
            std::printf("%-32s %s\n", "check", "status");
            for (const auto& r : results) {
                std::printf("%-32s %s%s%s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                            r.detail.empty() ? "" : "  ", r.detail.c_str());
                all = all && r.passed;
            }
            std::ofstream rep(report_path);
            if (!rep) {
                std::cerr << "error: cannot write report '" << report_path << "'\n";
                return 1;
            }
            rep << verify::report_jsonl(results);
            return all ? 0 : 1;
        }
        if (*orc) return run_oracle(oracle_name, oa);
        if (*agg) {
            std::vector<harness::ResultRow> rows;
            try {
                rows = harness::read_csv(agg_in);
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kUsageError;
            }
            const std::string text = harness::aggregate_csv(harness::aggregate(rows));
            std::ofstream out(agg_out, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write '" << agg_out << "'\n";
                return 1;
            }
            out << text;
            return 0;
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
