#include "agopfit/verify.hpp"

#include "agopfit/agop.hpp"
#include "agopfit/krr.hpp"
#include "agopfit/rfm.hpp"
#include "agopfit/rng.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace agopfit::verify {

namespace oracle {

Matrix brute_force_agop(const walsh::WalshPoly& p, int degree_cap) {
    const int d = p.dim();
    if (d > walsh::kExactEnumerationCap) throw DimensionTooLarge("brute_force_agop: d above enumeration cap");
    const walsh::WalshPoly low = walsh::truncate(p, degree_cap);
    std::vector<walsh::WalshPoly> partials;
    for (int i = 0; i < d; ++i) partials.push_back(walsh::partial_derivative(low, i));
    Matrix m = Matrix::Zero(d, d);
    const std::uint64_t npts = std::uint64_t{1} << d;
    Vector g(d);
    for (std::uint64_t b = 0; b < npts; ++b) {
        const Vector x = walsh::hypercube_point(b, d);
        for (int i = 0; i < d; ++i) g(i) = partials[i].eval(x);
        m.noalias() += g * g.transpose();
    }
    return m / static_cast<double>(npts);
}

double brute_force_norm_sq(const walsh::WalshPoly& p) {
    const int d = p.dim();
    if (d > walsh::kExactEnumerationCap) throw DimensionTooLarge("brute_force_norm_sq: d above enumeration cap");
    const std::uint64_t npts = std::uint64_t{1} << d;
    double total = 0.0;
    for (std::uint64_t b = 0; b < npts; ++b) {
        const double v = p.eval(walsh::hypercube_point(b, d));
        total += v * v;
    }
    return total / static_cast<double>(npts);
}

std::pair<Vector, Vector> gauss_hermite(int nodes) {
    if (nodes < 1) throw InvalidArgument("gauss_hermite: need at least one node");
    // Jacobi matrix of the monic recurrence He_{k+1} = t He_k - k He_{k-1}.
    Matrix j = Matrix::Zero(nodes, nodes);
    for (int k = 1; k < nodes; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Matrix> es(j);
    Vector w = es.eigenvectors().row(0).transpose().array().square();
    return {es.eigenvalues(), w / w.sum()};
}

double quadrature_norm_sq(const hermite::HermitePoly& h, int nodes) {
    const auto [t, w] = gauss_hermite(nodes);
    const int r = h.r();
    if (r < 1 || r > 3) throw InvalidArgument("quadrature_norm_sq: tensor rule supports 1 <= r <= 3");
    std::vector<int> idx(r, 0);
    double total = 0.0;
    Vector z(r);
    while (true) {
        double weight = 1.0;
        for (int j = 0; j < r; ++j) {
            z(j) = t(idx[j]);
            weight *= w(idx[j]);
        }
        const double v = hermite::hermite_eval_multi(h, z);
        total += weight * v * v;
        int j = 0;
        while (j < r && ++idx[j] == nodes) idx[j++] = 0;
        if (j == r) break;
    }
    return total;
}

McCovariance mc_latent_sigma(const hermite::HermitePoly& h, int p, int samples, std::uint64_t seed) {
    const hermite::HermitePoly low = h.truncated(p);
    const int r = h.r();
    CounterRng rng(seed);
    Matrix sum = Matrix::Zero(r, r);
    Matrix sum_sq = Matrix::Zero(r, r);
    Vector z(r);
    for (int k = 0; k < samples; ++k) {
        for (int j = 0; j < r; ++j) z(j) = rng.normal();
        const Vector g = hermite::hermite_gradient(low, z);
        const Matrix outer = g * g.transpose();
        sum += outer;
        sum_sq += outer.cwiseProduct(outer);
    }
    const double n = static_cast<double>(samples);
    McCovariance out;
    out.mean = sum / n;
    const Matrix var = (sum_sq / n - out.mean.cwiseProduct(out.mean)) * (n / (n - 1.0));
    out.std_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
    return out;
}

}  // namespace oracle

GapReport lemma32_gap(const hermite::HermitePoly& link, const model::Subspace& u, int p) {
    const int d = u.d();
    if (link.r() != u.r()) throw InvalidArgument("lemma32_gap: link and subspace disagree on r");
    const int ell = std::min(d, link.max_degree());
    const walsh::WalshPoly fstar = model::target_walsh(link, u, ell);
    const Matrix m = walsh::population_agop_exact(fstar, p);
    const Matrix sigma = hermite::latent_sigma(link, p);
    const Matrix lifted = u.basis().transpose() * sigma * u.basis();
    GapReport rep;
    rep.d = d;
    rep.r = u.r();
    rep.p = p;
    rep.mu = model::coherence(u);
    rep.fstar_norm_sq = walsh::l2_norm_sq(fstar);
    rep.gap = sym_op_norm(m - lifted);
    rep.normalized_gap = rep.fstar_norm_sq > 0.0 ? rep.gap * d / (rep.mu * rep.fstar_norm_sq) : 0.0;
    rep.theta_u = static_cast<double>(u.r() * u.r()) * rep.mu / d;
    return rep;
}

Matrix build_walsh_design(const Matrix& x, int p, std::uint64_t max_entries) {
    const int d = static_cast<int>(x.cols());
    if ((x.array().abs() != 1.0).any()) throw InvalidArgument("build_walsh_design: entries must be +-1");
    const std::uint64_t ncols = walsh::count_subsets(d, std::min(p, d));
    if (ncols * static_cast<std::uint64_t>(x.rows()) > max_entries)
        throw BudgetExceeded("build_walsh_design: " + std::to_string(ncols) + " columns x " +
                             std::to_string(x.rows()) + " rows exceeds the memory budget");
    const auto subsets = walsh::enumerate_subsets(d, std::min(p, d));
    Matrix phi(x.rows(), static_cast<Eigen::Index>(subsets.size()));
    for (std::size_t c = 0; c < subsets.size(); ++c) {
        Vector col = Vector::Ones(x.rows());
        for (int i : subsets[c].members()) col.array() *= x.col(i).array();
        phi.col(static_cast<Eigen::Index>(c)) = col;
    }
    return phi;
}

double kernel_fourier_residual(const kernel::Profile& g, const Matrix& x, int p) {
    const int d = static_cast<int>(x.cols());
    const kernel::KernelSpec spec = kernel::KernelSpec::inner_product(g, d);
    const Matrix k = kernel::kernel_matrix(spec, x);
    const auto subsets = walsh::enumerate_subsets(d, std::min(p, d));
    const Matrix phi = build_walsh_design(x, p);
    Vector diag(phi.cols());
    for (std::size_t c = 0; c < subsets.size(); ++c) {
        const int deg = subsets[c].degree();
        if (static_cast<std::size_t>(deg) >= g.derivatives_at_zero.size())
            throw InvalidArgument("kernel_fourier_residual: derivative table too short");
        diag(static_cast<Eigen::Index>(c)) = g.derivatives_at_zero[deg] * std::pow(static_cast<double>(d), -deg);
    }
    const double remainder = g.value(1.0) - kernel::taylor_truncation(g, p, 1.0);
    Matrix resid = k - phi * diag.asDiagonal() * phi.transpose();
    resid.diagonal().array() -= remainder;
    return sym_op_norm(0.5 * (resid + resid.transpose()));
}

DkReport dk_check(const Matrix& m_hat, const Matrix& m_pop, const model::Subspace& u, double slack) {
    DkReport rep;
    const agop::AgopResult res = agop::decompose(0.5 * (m_hat + m_hat.transpose()));
    rep.sin_theta = agop::sin_theta_op(agop::top_subspace(res, u.r()), u);
    rep.eps_agop = sym_op_norm(m_hat - m_pop);
    const agop::SRho sr = agop::s_rho(m_pop, u);
    rep.s = sr.s;
    rep.rho = sr.rho;
    rep.applicable = sr.s > 0.0;
    if (rep.applicable) {
        rep.bound = agop::davis_kahan_bound(rep.eps_agop, rep.rho, rep.s);
        rep.violated = rep.sin_theta > rep.bound + slack;
    }
    return rep;
}

DkReport dk_chain_check(const hermite::HermitePoly& link, const model::Subspace& u, int p,
                        const kernel::KernelSpec& spec, int n, std::uint64_t seed, double ridge, double noise_var) {
    const walsh::WalshPoly fstar = model::target_walsh(link, u, std::min(u.d(), link.max_degree()));
    const Matrix m_pop = walsh::population_agop_exact(fstar, p);
    const model::Dataset data = model::sample_dataset(model::InputDist::hypercube, u, link, n, noise_var, seed);
    const krr::KrrModel fit = krr::KrrModel::fit(data, spec, ridge);
    const agop::AgopResult res = agop::empirical_agop(fit.training_gradients());
    return dk_check(res.matrix, m_pop, u);
}

Prop42Report prop42_pipeline(const hermite::HermitePoly& link, int d, double alpha, double eta_scale,
                             std::uint64_t seed, int eval_samples, double ridge, double noise_var) {
    Prop42Report rep;
    rep.d = d;
    rep.n = static_cast<int>(std::floor(std::pow(static_cast<double>(d), alpha) * (1.0 + 1e-12)));
    rep.eta = eta_scale * d;
    const model::Subspace u = model::haar_subspace(d, link.r(), mix64(seed, 1));
    const model::Dataset data =
        model::sample_dataset(model::InputDist::hypercube, u, link, rep.n, noise_var, mix64(seed, 2));
    const krr::KrrModel fit = krr::KrrModel::fit(data, kernel::KernelSpec::from_name("gaussian", d), ridge);
    const Matrix m1 = agop::empirical_agop(fit.training_gradients()).matrix;
    rep.c_eta = m1.trace() + rep.eta * d;
    const Matrix m2 = rfm::metric_update(m1, rep.eta, d);
    const Matrix sigma = hermite::latent_sigma(link, 1);
    const Matrix x = model::sample_inputs(model::InputDist::hypercube, eval_samples, d, mix64(seed, 3));
    rep.residual = rfm::prop42_residual(m2, u, sigma, rep.eta, rep.c_eta, x);
    const double delta = alpha - 1.0;
    const double logd = std::log(static_cast<double>(d));
    rep.implied_zeta = (std::log(rep.eta) - logd * std::max(-delta / 2.0, -(1.0 - delta) / 2.0)) / logd;
    return rep;
}

namespace {

walsh::WalshPoly random_walsh(CounterRng& rng, int d, int max_deg, int terms) {
    walsh::WalshPoly p(d);
    for (int t = 0; t < terms; ++t) {
        const int deg = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(std::min(d, max_deg) + 1));
        std::vector<int> pool(d);
        for (int i = 0; i < d; ++i) pool[i] = i;
        std::vector<int> members;
        for (int k = 0; k < deg; ++k) {
            const auto pick = static_cast<std::size_t>(rng.next_u64() % pool.size());
            members.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        std::sort(members.begin(), members.end());
        p.add(walsh::SubsetIndex(members), rng.normal());
    }
    return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CheckResult check_walsh_agop(int polys, std::uint64_t seed) {
    CheckResult out{"walsh_agop_oracle", true, {}, ""};
    CounterRng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < polys; ++k) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 9);
        const walsh::WalshPoly p = random_walsh(rng, d, 4, 12);
        const int cap = static_cast<int>(rng.next_u64() % 5);
        worst = std::max(worst, (walsh::population_agop_exact(p, cap) - oracle::brute_force_agop(p, cap))
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    out.scalars["max_abs_diff"] = worst;
    out.passed = worst <= 1e-10;
    return out;
}

CheckResult check_latent_sigma(int samples, std::uint64_t seed) {
    CheckResult out{"hermite_sigma_mc", true, {}, ""};
    const std::vector<std::pair<std::string, int>> cases{{"L1", 1}, {"L1", 4}, {"L2", 2}, {"L2", 4}};
    double worst_z = 0.0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& [name, p] = cases[c];
        const hermite::HermitePoly h = hermite::link_by_name(name);
        const Matrix closed = hermite::latent_sigma(h, p);
        const auto mc = oracle::mc_latent_sigma(h, p, samples, mix64(seed, c));
        for (Eigen::Index i = 0; i < closed.size(); ++i) {
            const double se = mc.std_error(i);
            const double diff = std::abs(closed(i) - mc.mean(i));
            const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
            worst_z = std::max(worst_z, z);
        }
        out.scalars[name + "_p" + std::to_string(p) + "_trace"] = closed.trace();
    }
    out.scalars["max_z"] = worst_z;
    out.passed = worst_z <= 4.0;
    return out;
}

CheckResult check_gaussian_norms() {
    CheckResult out{"gaussian_norms", true, {}, ""};
    for (const std::string name : {"L1", "L2"}) {
        const hermite::HermitePoly h = hermite::link_by_name(name);
        const double closed = hermite::gaussian_l2_norm_sq(h);
        const double quad = oracle::quadrature_norm_sq(h, 64);
        out.scalars[name + "_closed"] = closed;
        out.scalars[name + "_quadrature"] = quad;
        out.passed = out.passed && rel_err(closed, quad) <= 1e-10 && rel_err(closed, 2.0) <= 1e-10;
    }
    return out;
}

CheckResult check_gradients(int cases, std::uint64_t seed) {
    CheckResult out{"kernel_gradient_fd", true, {}, ""};
    CounterRng rng(seed);
    const int d = 6;
    double worst = 0.0;
    for (const std::string name : {"gaussian", "laplace", "exp_inner"}) {
        const kernel::KernelSpec spec = kernel::KernelSpec::from_name(name, d);
        for (int c = 0; c < cases; ++c) {
            Vector x(d), xp(d);
            for (int i = 0; i < d; ++i) {
                x(i) = rng.normal();
                xp(i) = rng.normal();
            }
            const Vector g = kernel::kernel_gradient_x(spec, x, xp);
            const Vector fd = oracle::fd_gradient([&](const Vector& z) { return kernel::kernel_value(spec, z, xp); }, x);
            worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
        }
    }
    out.scalars["max_rel_err"] = worst;
    out.passed = worst <= 1e-4;
    return out;
}

CheckResult check_lemma32_counterexample() {
    CheckResult out{"lemma32_counterexample", true, {}, ""};
    const hermite::HermitePoly zsq = hermite::monomial_to_hermite({{hermite::MultiIndex{2}, 1.0}});
    const GapReport rep = lemma32_gap(zsq, model::axis_aligned_subspace(8, 1), 2);
    out.scalars["gap"] = rep.gap;
    out.passed = std::abs(rep.gap - 4.0) <= 1e-12;
    return out;
}

CheckResult check_lemma32_scaling(const std::vector<int>& dims, int seeds, std::uint64_t seed) {
    CheckResult out{"lemma32_scaling", true, {}, ""};
    const hermite::HermitePoly link = hermite::link_l1();
    std::vector<double> means;
    for (int d : dims) {
        double total = 0.0;
        for (int s = 0; s < seeds; ++s)
            total += lemma32_gap(link, model::haar_subspace(d, 1, mix64(seed, d, s)), 4).normalized_gap;
        means.push_back(total / seeds);
        out.scalars["mean_normalized_gap_d" + std::to_string(d)] = means.back();
    }
    const double ratio = *std::max_element(means.begin(), means.end()) / *std::min_element(means.begin(), means.end());
    out.scalars["max_over_min"] = ratio;
    out.passed = ratio <= 3.0;
    return out;
}

CheckResult check_davis_kahan(int seeds, int d, int n, std::uint64_t seed) {
    CheckResult out{"davis_kahan_chain", true, {}, ""};
    const hermite::HermitePoly link = hermite::link_l1();
    const kernel::KernelSpec spec = kernel::KernelSpec::from_name("gaussian", d);
    int violations = 0;
    int applicable = 0;
    double worst_margin = -INFINITY;
    for (int s = 0; s < seeds; ++s) {
        const model::Subspace u = model::haar_subspace(d, 1, mix64(seed, s, 1));
        const DkReport rep = dk_chain_check(link, u, 2, spec, n, mix64(seed, s, 2));
        if (!rep.applicable) continue;
        ++applicable;
        violations += rep.violated ? 1 : 0;
        worst_margin = std::max(worst_margin, rep.sin_theta - rep.bound);
    }
    out.scalars["applicable"] = applicable;
    out.scalars["violations"] = violations;
    out.scalars["worst_sin_minus_bound"] = worst_margin;
    out.passed = violations == 0 && applicable == seeds;
    return out;
}

CheckResult check_kernel_fourier_decay(const std::vector<int>& dims, int seeds, std::uint64_t seed) {
    CheckResult out{"kernel_fourier_residual_decay", true, {}, ""};
    std::vector<double> means;
    for (int d : dims) {
        const int n = static_cast<int>(std::ceil(std::pow(static_cast<double>(d), 1.2)));
        double total = 0.0;
        for (int s = 0; s < seeds; ++s) {
            const Matrix x = model::sample_inputs(model::InputDist::hypercube, n, d, mix64(seed, d, s));
            total += kernel_fourier_residual(kernel::exp_profile(), x, 1);
        }
        means.push_back(total / seeds);
        out.scalars["mean_residual_d" + std::to_string(d)] = means.back();
    }
    for (std::size_t k = 1; k < means.size(); ++k) out.passed = out.passed && means[k] < means[k - 1];
    return out;
}

CheckResult check_poly_kernel_decay(std::uint64_t seed) {
    CheckResult out{"poly_kernel_residual_slope", true, {}, ""};
    const std::vector<int> dims{8, 16, 32};
    const int n = 40;
    std::vector<double> lx, ly;
    for (int d : dims) {
        const Matrix x = model::sample_inputs(model::InputDist::hypercube, n, d, mix64(seed, d));
        const double res = kernel_fourier_residual(kernel::square_profile(), x, 2);
        lx.push_back(std::log(static_cast<double>(d)));
        ly.push_back(std::log(res));
    }
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
    const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (int k = 0; k < 3; ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    out.scalars["loglog_slope"] = sxy / sxx;
    out.passed = sxy / sxx <= -0.8;
    return out;
}

CheckResult check_prop42_decay(int trials, std::uint64_t seed) {
    CheckResult out{"prop42_residual_decay", true, {}, ""};
    const hermite::HermitePoly link = hermite::link_l1();
    std::vector<double> means;
    for (int d : {20, 40, 80}) {
        double total = 0.0;
        double zeta = 0.0;
        for (int t = 0; t < trials; ++t) {
            const Prop42Report rep = prop42_pipeline(link, d, 1.2, 0.01, mix64(seed, d, t));
            total += rep.residual;
            zeta = rep.implied_zeta;
        }
        means.push_back(total / trials);
        out.scalars["mean_residual_d" + std::to_string(d)] = means.back();
        out.scalars["implied_zeta_d" + std::to_string(d)] = zeta;
    }
    for (std::size_t k = 1; k < means.size(); ++k) out.passed = out.passed && means[k] < means[k - 1];
    return out;
}

}  // namespace

std::vector<CheckResult> run_suite(bool fast, std::uint64_t seed) {
    std::vector<CheckResult> results;
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            results.push_back(CheckResult{name, false, {}, e.what()});
        }
    };
    guarded("walsh_agop_oracle", [&] { return check_walsh_agop(fast ? 8 : 20, mix64(seed, 1)); });
    guarded("hermite_sigma_mc", [&] { return check_latent_sigma(fast ? 100'000 : 1'000'000, mix64(seed, 2)); });
    guarded("gaussian_norms", [&] { return check_gaussian_norms(); });
    guarded("kernel_gradient_fd", [&] { return check_gradients(fast ? 20 : 100, mix64(seed, 3)); });
    guarded("lemma32_counterexample", [&] { return check_lemma32_counterexample(); });
    guarded("lemma32_scaling", [&] {
        return fast ? check_lemma32_scaling({8, 10, 12}, 3, mix64(seed, 4))
                    : check_lemma32_scaling({8, 12, 16}, 10, mix64(seed, 4));
    });
    guarded("davis_kahan_chain", [&] {
        return fast ? check_davis_kahan(5, 10, 400, mix64(seed, 5)) : check_davis_kahan(50, 14, 2000, mix64(seed, 5));
    });
    guarded("kernel_fourier_residual_decay",
            [&] { return check_kernel_fourier_decay({16, 32, 64}, fast ? 3 : 5, mix64(seed, 6)); });
    guarded("poly_kernel_residual_slope", [&] { return check_poly_kernel_decay(mix64(seed, 7)); });
    guarded("prop42_residual_decay", [&] { return check_prop42_decay(fast ? 2 : 5, mix64(seed, 8)); });
    return results;
}

std::string report_jsonl(const std::vector<CheckResult>& results) {
    std::ostringstream os;
    for (const auto& r : results) {
        nlohmann::json j;
        j["name"] = r.name;
        j["status"] = r.passed ? "pass" : "fail";
        j["scalars"] = r.scalars;
        if (!r.detail.empty()) j["detail"] = r.detail;
        os << j.dump() << '\n';
    }
    return os.str();
}

}  // namespace agopfit::verify
