#pragma once

// Experiment grid driver: configuration, seeding, CSV persistence, aggregation.

#include "agopfit/common.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace agopfit::harness {

/// Raised for malformed configuration; carries the 1-based line when known.
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line = 0);
    int line() const { return line_; }

private:
    int line_ = 0;
};

struct ExperimentConfig {
    int d = 100;
    std::string link = "L1";
    std::string input = "hypercube";
    std::string subspace = "haar";
    std::string kernel = "gaussian";
    /// "d", "sqrt_d", a number, or empty for the kernel's default.
    std::string bandwidth;
    std::vector<double> alphas{1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7};
    int trials = 10;
    int iterations = 5;
    double ridge = 1e-6;
    double eta_scale = 0.01;
    double noise_var = 0.01;
    int n_test = 5000;
    std::uint64_t base_seed = 0;
    int max_n = 5000;
    bool allow_large_n = false;
    /// 0 means round(d^{0.3}).
    int support_size = 0;
    /// Write wall-clock seconds into runtime_s; off by default so reruns are byte-identical.
    bool record_runtime = false;
    int jobs = 1;
    std::string out_path = "results.csv";

    /// Throws ConfigError on any invalid field combination.
    void validate() const;
};

/// Flat `key = value` text (comments with '#', lists as [a, b]); JSON when
/// the text starts with '{'. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// floor(d^alpha), with a small guard against pow round-off at exact powers.
int sample_size(int d, double alpha);

/// Trial seed = mix64(base_seed, trial_index, alpha_index).
std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index, int alpha_index);

struct ResultRow {
    std::string link, input, subspace, kernel;
    double alpha = 0.0;
    int trial = 0;
    int iteration = 0;
    int n = 0;
    double test_mse = 0.0;
    double sin_theta = 0.0;
    double eig1 = 0.0, eig2 = 0.0, eig3 = 0.0;
    std::uint64_t seed = 0;
    double runtime_s = 0.0;
    std::string status = "ok";
};

inline constexpr const char* kCsvHeader =
    "link,input,subspace,kernel,alpha,trial,iteration,n,test_mse,sin_theta,eig1,eig2,eig3,seed,runtime_s,status";

/// Rows ordered by (alpha index, trial, iteration); count = |alphas| * trials * (iterations + 1).
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const std::function<void(const std::string&)>& progress = {});

std::string to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> parse_csv(const std::string& text);
std::vector<ResultRow> read_csv(const std::string& path);

struct Stat {
    double mean = 0.0;
    /// Absent for a single trial.
    std::optional<double> se;
};

struct AggregateRow {
    std::string link, input, subspace, kernel;
    double alpha = 0.0;
    int iteration = 0;
    int n = 0;
    int trials = 0;
    Stat test_mse, sin_theta, eig1, eig2, eig3;
};

/// Mean and s.e. (sample std / sqrt(trials)) per (configuration, alpha, iteration) over ok rows.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

}  // namespace agopfit::harness
