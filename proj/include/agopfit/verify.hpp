#pragma once

// Numerical checks of the computable theory objects against small-d oracles.

#include "agopfit/common.hpp"
#include "agopfit/hermite.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"
#include "agopfit/walsh.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace agopfit::verify {

// ---------------------------------------------------------------------------
// Independent oracles. None of these go through the closed forms they check.

namespace oracle {

/// 2^{-d} sum_x grad p_{<=cap}(x) grad p_{<=cap}(x)^T by full enumeration,
/// gradients from partial_derivative + eval.
Matrix brute_force_agop(const walsh::WalshPoly& p, int degree_cap);

/// 2^{-d} sum_x f(x)^2.
double brute_force_norm_sq(const walsh::WalshPoly& p);

/// Probabilists' Gauss-Hermite rule (nodes, weights normalized to sum 1) by
/// Golub-Welsch.
std::pair<Vector, Vector> gauss_hermite(int nodes);

/// E[h(z)^2] under N(0, I_r) by tensor Gauss-Hermite quadrature.
double quadrature_norm_sq(const hermite::HermitePoly& h, int nodes);

struct McCovariance {
    Matrix mean;
    /// Entrywise standard error of the mean.
    Matrix std_error;
};

/// Monte Carlo E[grad h_{<=p} grad h_{<=p}^T] with analytic gradients.
McCovariance mc_latent_sigma(const hermite::HermitePoly& h, int p, int samples, std::uint64_t seed);

/// Central finite-difference gradient of a scalar function.
template <typename F>
Vector fd_gradient(F&& f, const Vector& x, double step = 1e-5) {
    Vector g(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp(i) = x(i) + step;
        const double up = f(xp);
        xp(i) = x(i) - step;
        const double down = f(xp);
        xp(i) = x(i);
        g(i) = (up - down) / (2.0 * step);
    }
    return g;
}

}  // namespace oracle

// ---------------------------------------------------------------------------

struct GapReport {
    int d = 0;
    int r = 0;
    int p = 0;
    double mu = 0.0;
    double fstar_norm_sq = 0.0;
    double gap = 0.0;
    /// gap * d / (mu * fstar_norm_sq)
    double normalized_gap = 0.0;
    /// r^2 mu / d
    double theta_u = 0.0;
};

/// ||M_{<=p} - U^T Sigma_p U||_op for the multilinearized target on the cube.
GapReport lemma32_gap(const hermite::HermitePoly& link, const model::Subspace& u, int p);

/// n x N matrix of characters x^S, columns in enumerate_subsets order.
Matrix build_walsh_design(const Matrix& x, int p, std::uint64_t max_entries = 50'000'000);

/// ||K - Phi D Phi^T - (g(1) - g_p(1)) I||_op with D_k = g^{(k)}(0) d^{-k} I.
double kernel_fourier_residual(const kernel::Profile& g, const Matrix& x, int p);

struct DkReport {
    double sin_theta = 0.0;
    double eps_agop = 0.0;
    double s = 0.0;
    double rho = 0.0;
    double bound = 1.0;
    bool applicable = false;
    bool violated = false;
};

/// Davis-Kahan chain for an arbitrary estimate M_hat of M_{<=p}.
DkReport dk_check(const Matrix& m_hat, const Matrix& m_pop, const model::Subspace& u, double slack = 1e-8);

/// One KRR fit on hypercube data, then the chain against the exact M_{<=p}.
DkReport dk_chain_check(const hermite::HermitePoly& link, const model::Subspace& u, int p,
                        const kernel::KernelSpec& spec, int n, std::uint64_t seed, double ridge = 1e-6,
                        double noise_var = 0.01);

struct Prop42Report {
    int d = 0;
    int n = 0;
    double eta = 0.0;
    double c_eta = 0.0;
    double residual = 0.0;
    /// zeta solving eta = d^zeta * max(d^{-delta/2}, d^{-(1-delta)/2}), delta = alpha - 1.
    double implied_zeta = 0.0;
};

/// One KRR fit (Gaussian kernel, hypercube inputs), metric update with eta,
/// then the rescaled-input residual on fresh hypercube samples against Sigma_1.
Prop42Report prop42_pipeline(const hermite::HermitePoly& link, int d, double alpha, double eta_scale,
                             std::uint64_t seed, int eval_samples = 2000, double ridge = 1e-6,
                             double noise_var = 0.01);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::map<std::string, double> scalars;
    std::string detail;
};

/// Small-d suite; `fast` trims seeds and sample sizes.
std::vector<CheckResult> run_suite(bool fast, std::uint64_t seed = 20240601);

/// One JSON object per line: {"name", "status", "scalars", "detail"}.
std::string report_jsonl(const std::vector<CheckResult>& results);

}  // namespace agopfit::verify
