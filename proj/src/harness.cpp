#include "agopfit/harness.hpp"

#include "agopfit/hermite.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"
#include "agopfit/rfm.hpp"
#include "agopfit/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

namespace agopfit::harness {

namespace {

constexpr std::uint64_t kSubspaceStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kTestStream = 3;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return v.substr(1, v.size() - 2);
    return v;
}

double to_double(const std::string& v, const std::string& key, int line) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("key '" + key + "' expects a number, got '" + v + "'", line);
    return out;
}

long long to_int(const std::string& v, const std::string& key, int line) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'", line);
    return out;
}

bool to_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("key '" + key + "' expects true or false, got '" + v + "'", line);
}

std::vector<double> to_list(const std::string& v, const std::string& key, int line) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ConfigError("key '" + key + "' expects a list like [1.0, 1.5]", line);
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(item, key, line));
    }
    return out;
}

// Apply one textual key/value pair.
void assign(ExperimentConfig& cfg, const std::string& key, const std::string& raw, int line) {
    const std::string v = unquote(raw);
    if (key == "d") cfg.d = static_cast<int>(to_int(v, key, line));
    else if (key == "link") cfg.link = v;
    else if (key == "input") cfg.input = v;
    else if (key == "subspace") cfg.subspace = v;
    else if (key == "kernel") cfg.kernel = v;
    else if (key == "bandwidth") cfg.bandwidth = v;
    else if (key == "alphas") cfg.alphas = to_list(v, key, line);
    else if (key == "trials") cfg.trials = static_cast<int>(to_int(v, key, line));
    else if (key == "iterations") cfg.iterations = static_cast<int>(to_int(v, key, line));
    else if (key == "ridge") cfg.ridge = to_double(v, key, line);
    else if (key == "eta_scale") cfg.eta_scale = to_double(v, key, line);
    else if (key == "noise_var") cfg.noise_var = to_double(v, key, line);
    else if (key == "n_test") cfg.n_test = static_cast<int>(to_int(v, key, line));
    else if (key == "base_seed") cfg.base_seed = static_cast<std::uint64_t>(to_int(v, key, line));
    else if (key == "max_n") cfg.max_n = static_cast<int>(to_int(v, key, line));
    else if (key == "allow_large_n") cfg.allow_large_n = to_bool(v, key, line);
    else if (key == "support_size") cfg.support_size = static_cast<int>(to_int(v, key, line));
    else if (key == "record_runtime") cfg.record_runtime = to_bool(v, key, line);
    else if (key == "jobs") cfg.jobs = static_cast<int>(to_int(v, key, line));
    else if (key == "out_path") cfg.out_path = v;
    else throw ConfigError("unknown key '" + key + "'", line);
}

std::string fmt_double(double v, int precision = 12) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Stat stat_of(const std::vector<double>& xs) {
    Stat s;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return s;
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, int line)
    : Error(line > 0 ? "config line " + std::to_string(line) + ": " + msg : "config: " + msg), line_(line) {}

void ExperimentConfig::validate() const {
    if (d < 1) throw ConfigError("d must be positive");
    hermite::link_by_name(link);
    model::parse_input_dist(input);
    if (subspace != "haar" && subspace != "sparse") throw ConfigError("subspace must be haar or sparse");
    if (kernel != "gaussian" && kernel != "laplace" && kernel != "exp_inner")
        throw ConfigError("kernel must be gaussian, laplace or exp_inner");
    if (!bandwidth.empty()) kernel::parse_bandwidth(bandwidth, d);
    if (alphas.empty()) throw ConfigError("alphas must be nonempty");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (ridge < 0.0) throw ConfigError("ridge must be >= 0");
    if (!(eta_scale > 0.0)) throw ConfigError("eta_scale must be positive");
    if (noise_var < 0.0) throw ConfigError("noise_var must be >= 0");
    if (n_test < 1) throw ConfigError("n_test must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    const int r = hermite::link_by_name(link).r();
    if (r > d) throw ConfigError("link dimension exceeds d");
    for (double a : alphas) {
        const int n = sample_size(d, a);
        if (n < 1) throw ConfigError("alpha " + fmt_double(a) + " gives an empty training set");
        if (n > max_n && !allow_large_n)
            throw ConfigError("alpha " + fmt_double(a) + " gives n=" + std::to_string(n) + " > max_n=" +
                              std::to_string(max_n) + " (set allow_large_n = true to override)");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    const std::string stripped = trim(text);
    if (!stripped.empty() && stripped.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(stripped);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
        for (const auto& [key, value] : j.items()) {
            std::string raw;
            if (value.is_array()) {
                raw = "[";
                for (std::size_t k = 0; k < value.size(); ++k) raw += (k ? "," : "") + value[k].dump();
                raw += "]";
            } else if (value.is_string()) {
                raw = value.get<std::string>();
            } else {
                raw = value.dump();
            }
            assign(cfg, key, raw, 0);
        }
        cfg.validate();
        return cfg;
    }
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'", lineno);
        assign(cfg, key, value, lineno);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

int sample_size(int d, double alpha) {
    return static_cast<int>(std::floor(std::pow(static_cast<double>(d), alpha) * (1.0 + 1e-12)));
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index, int alpha_index) {
    return mix64(base_seed, static_cast<std::uint64_t>(trial_index), static_cast<std::uint64_t>(alpha_index));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const std::function<void(const std::string&)>& progress) {
    cfg.validate();
    const hermite::HermitePoly link = hermite::link_by_name(cfg.link);
    const model::InputDist dist = model::parse_input_dist(cfg.input);
    const double bandwidth = cfg.bandwidth.empty() ? 0.0 : kernel::parse_bandwidth(cfg.bandwidth, cfg.d);
    const kernel::KernelSpec spec = kernel::KernelSpec::from_name(cfg.kernel, cfg.d, bandwidth);
    const int per_trial = cfg.iterations + 1;
    const int ntasks = static_cast<int>(cfg.alphas.size()) * cfg.trials;
    std::vector<ResultRow> rows(static_cast<std::size_t>(ntasks) * per_trial);

    auto run_task = [&](int task) {
        const int ai = task / cfg.trials;
        const int trial = task % cfg.trials;
        const double alpha = cfg.alphas[ai];
        const int n = sample_size(cfg.d, alpha);
        const std::uint64_t seed = trial_seed(cfg.base_seed, trial, ai);
        ResultRow base;
        base.link = cfg.link;
        base.input = cfg.input;
        base.subspace = cfg.subspace;
        base.kernel = cfg.kernel;
        base.alpha = alpha;
        base.trial = trial;
        base.n = n;
        base.seed = seed;
        rfm::RfmHistory history;
        try {
            const model::Subspace u =
                cfg.subspace == "haar"
                    ? model::haar_subspace(cfg.d, link.r(), mix64(seed, kSubspaceStream))
                    : model::sparse_subspace(cfg.d, link.r(),
                                             cfg.support_size > 0 ? cfg.support_size
                                                                  : model::default_support_size(cfg.d),
                                             mix64(seed, kSubspaceStream));
            const model::Dataset train = model::sample_dataset(dist, u, link, n, cfg.noise_var, mix64(seed, kTrainStream));
            const model::Dataset test =
                model::sample_dataset(dist, u, link, cfg.n_test, cfg.noise_var, mix64(seed, kTestStream));
            rfm::RfmOptions opts;
            opts.ridge = cfg.ridge;
            opts.eta = cfg.eta_scale * cfg.d;
            opts.iterations = cfg.iterations;
            history = rfm::run_rfm(train, spec, opts, test, u);
        } catch (const std::exception& e) {
            history.failure = e.what();
        }
        for (int it = 0; it < per_trial; ++it) {
            ResultRow row = base;
            row.iteration = it;
            if (it < static_cast<int>(history.records.size())) {
                const auto& rec = history.records[it];
                row.test_mse = rec.test_mse;
                row.sin_theta = rec.sin_theta;
                row.eig1 = rec.top_eigenvalues[0];
                row.eig2 = rec.top_eigenvalues[1];
                row.eig3 = rec.top_eigenvalues[2];
                row.runtime_s = cfg.record_runtime ? rec.wall_time_s : 0.0;
            } else {
                const double nan = std::nan("");
                row.test_mse = row.sin_theta = row.eig1 = row.eig2 = row.eig3 = nan;
                row.status = "failed";
            }
            rows[static_cast<std::size_t>(task) * per_trial + it] = std::move(row);
        }
        if (progress) {
            std::string msg = "alpha=" + fmt_double(alpha, 6) + " trial=" + std::to_string(trial) + " n=" +
                              std::to_string(n) + (history.ok() ? " ok" : " failed: " + history.failure);
            progress(msg);
        }
    };

    if (cfg.jobs <= 1) {
        for (int t = 0; t < ntasks; ++t) run_task(t);
    } else {
        std::atomic<int> next{0};
        std::mutex progress_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min(cfg.jobs, ntasks); ++w) {
            pool.emplace_back([&] {
                for (int t = next++; t < ntasks; t = next++) run_task(t);
            });
        }
        for (auto& th : pool) th.join();
    }
    return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.link << ',' << r.input << ',' << r.subspace << ',' << r.kernel << ',' << fmt_double(r.alpha, 6) << ','
           << r.trial << ',' << r.iteration << ',' << r.n << ',' << fmt_double(r.test_mse) << ','
           << fmt_double(r.sin_theta) << ',' << fmt_double(r.eig1) << ',' << fmt_double(r.eig2) << ','
           << fmt_double(r.eig3) << ',' << r.seed << ',' << fmt_double(r.runtime_s, 6) << ',' << r.status << '\n';
    }
    return os.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << to_csv(rows);
}

std::vector<ResultRow> parse_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || trim(line) != kCsvHeader)
        throw Error("CSV header does not match the result schema: expected '" + std::string(kCsvHeader) + "'");
    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 16) throw Error("CSV line " + std::to_string(lineno) + ": expected 16 fields");
        try {
            ResultRow r;
            r.link = cells[0];
            r.input = cells[1];
            r.subspace = cells[2];
            r.kernel = cells[3];
            r.alpha = std::stod(cells[4]);
            r.trial = std::stoi(cells[5]);
            r.iteration = std::stoi(cells[6]);
            r.n = std::stoi(cells[7]);
            r.test_mse = std::stod(cells[8]);
            r.sin_theta = std::stod(cells[9]);
            r.eig1 = std::stod(cells[10]);
            r.eig2 = std::stod(cells[11]);
            r.eig3 = std::stod(cells[12]);
            r.seed = std::stoull(cells[13]);
            r.runtime_s = std::stod(cells[14]);
            r.status = cells[15];
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw Error("CSV line " + std::to_string(lineno) + ": malformed field");
        }
    }
    return rows;
}

std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw InvalidArgument("aggregate: no rows");
    using Key = std::tuple<std::string, std::string, std::string, std::string, double, int>;
    struct Bucket {
        int n = 0;
        std::vector<double> mse, sin, e1, e2, e3;
    };
    std::map<Key, Bucket> groups;
    for (const auto& r : rows) {
        if (r.status != "ok") continue;
        auto& b = groups[Key{r.link, r.input, r.subspace, r.kernel, r.alpha, r.iteration}];
        b.n = r.n;
        b.mse.push_back(r.test_mse);
        b.sin.push_back(r.sin_theta);
        b.e1.push_back(r.eig1);
        b.e2.push_back(r.eig2);
        b.e3.push_back(r.eig3);
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, b] : groups) {
        AggregateRow a;
        std::tie(a.link, a.input, a.subspace, a.kernel, a.alpha, a.iteration) = key;
        a.n = b.n;
        a.trials = static_cast<int>(b.mse.size());
        a.test_mse = stat_of(b.mse);
        a.sin_theta = stat_of(b.sin);
        a.eig1 = stat_of(b.e1);
        a.eig2 = stat_of(b.e2);
        a.eig3 = stat_of(b.e3);
        out.push_back(std::move(a));
    }
    return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream os;
    os << "link,input,subspace,kernel,alpha,iteration,n,trials,test_mse_mean,test_mse_se,sin_theta_mean,"
          "sin_theta_se,eig1_mean,eig1_se,eig2_mean,eig2_se,eig3_mean,eig3_se\n";
    auto put = [&](const Stat& s) { os << ',' << fmt_double(s.mean) << ',' << (s.se ? fmt_double(*s.se) : ""); };
    for (const auto& a : rows) {
        os << a.link << ',' << a.input << ',' << a.subspace << ',' << a.kernel << ',' << fmt_double(a.alpha, 6) << ','
           << a.iteration << ',' << a.n << ',' << a.trials;
        put(a.test_mse);
        put(a.sin_theta);
        put(a.eig1);
        put(a.eig2);
        put(a.eig3);
        os << '\n';
    }
    return os.str();
}

}  // namespace agopfit::harness
