#include "agopfit/krr.hpp"

#include "agopfit/rng.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <cmath>
#include <string>

namespace agopfit::krr {

KrrModel KrrModel::fit(const model::Dataset& data, const kernel::KernelSpec& spec, double ridge) {
    return fit(data.X, data.y, spec, ridge);
}

KrrModel KrrModel::fit(const Matrix& x_train, const Vector& y, const kernel::KernelSpec& spec, double ridge) {
    if (x_train.rows() < 1) throw InvalidArgument("fit: empty training set");
    if (x_train.rows() != y.size()) throw InvalidArgument("fit: X and y have different lengths");
    if (ridge < 0.0) throw InvalidArgument("fit: negative ridge");

    KrrModel m;
    m.spec_ = spec;
    m.x_train_ = x_train;
    m.ridge_ = ridge;
    m.gram_ = kernel::kernel_matrix(spec, x_train);

    const Eigen::Index n = x_train.rows();
    const double mean_diag = m.gram_.diagonal().mean();
    constexpr std::array<double, 4> ladder{0.0, 1e-10, 1e-8, 1e-6};
    for (double step : ladder) {
        const double jitter = step * mean_diag;
        Matrix a = m.gram_;
        a.diagonal().array() += ridge + jitter;
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() != Eigen::Success) continue;
        Vector alpha = llt.solve(y);
        // One step of iterative refinement.
        Vector resid = y - a * alpha;
        alpha += llt.solve(resid);
        resid = a * alpha - y;
        const double ynorm = y.norm();
        const double rel = ynorm > 0.0 ? resid.norm() / ynorm : resid.norm();
        if (!std::isfinite(rel)) continue;
        m.alpha_ = std::move(alpha);
        m.jitter_ = jitter;
        m.dual_residual_ = rel;
        return m;
    }
    throw SingularKernel("fit: kernel matrix factorization failed after jitter escalation (n=" + std::to_string(n) +
                         ")");
}

KrrModel KrrModel::from_dual(kernel::KernelSpec spec, Matrix x_train, Vector alpha) {
    if (x_train.rows() != alpha.size()) throw InvalidArgument("from_dual: size mismatch");
    KrrModel m;
    m.spec_ = std::move(spec);
    m.x_train_ = std::move(x_train);
    m.alpha_ = std::move(alpha);
    return m;
}

Vector KrrModel::predict(const Matrix& x_eval) const {
    if (x_eval.cols() != x_train_.cols()) throw InvalidArgument("predict: column count does not match d");
    return kernel::kernel_matrix(spec_, x_eval, x_train_) * alpha_;
}

Matrix KrrModel::gradient_field(const Matrix& x_eval) const {
    if (x_eval.cols() != x_train_.cols()) throw InvalidArgument("gradient_field: column count does not match d");
    return kernel::kernel_gradient_sum(spec_, x_eval, x_train_, alpha_);
}

Matrix KrrModel::training_gradients() const {
    return kernel::kernel_gradient_sum(spec_, x_train_, x_train_, alpha_, gram_.size() ? &gram_ : nullptr);
}

double mse(const Vector& predictions, const Vector& labels) {
    if (predictions.size() != labels.size()) throw InvalidArgument("mse: length mismatch");
    if (labels.size() == 0) throw InvalidArgument("mse: empty input");
    return (predictions - labels).squaredNorm() / static_cast<double>(labels.size());
}

double test_mse(const KrrModel& m, const model::Dataset& test) { return mse(m.predict(test.X), test.y); }

namespace {

GapEstimate exact_gap_from_values(const walsh::HypercubeFunction& f, const walsh::WalshPoly& target) {
    // Parseval on the full Walsh expansion of f - target.
    const walsh::WalshPoly fc = walsh::walsh_coefficients(f, target.dim(), target.dim());
    double total = 0.0;
    for (const auto& [s, c] : fc.sorted_terms()) {
        const double diff = c - target.coefficient(s);
        total += diff * diff;
    }
    for (const auto& [s, c] : target.sorted_terms())
        if (fc.coefficient(s) == 0.0) total += c * c;
    return GapEstimate{total, 0.0, true};
}

// Welford accumulation of squared residuals over batches of cube samples.
template <typename BatchEval>
GapEstimate mc_gap(int d, const walsh::WalshPoly& target, int mc_samples, std::uint64_t seed, BatchEval&& eval) {
    if (mc_samples < 2) throw InvalidArgument("truncation_gap: need at least two Monte Carlo samples");
    constexpr int kBatch = 4096;
    CounterRng rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    long count = 0;
    for (int start = 0; start < mc_samples; start += kBatch) {
        const int rows = std::min(kBatch, mc_samples - start);
        Matrix pts(rows, d);
        for (int k = 0; k < rows; ++k)
            for (int i = 0; i < d; ++i) pts(k, i) = rng.sign();
        const Vector values = eval(pts);
        for (int k = 0; k < rows; ++k) {
            const double r = values(k) - target.eval(pts.row(k).transpose(), false);
            const double v = r * r;
            ++count;
            const double delta = v - mean;
            mean += delta / static_cast<double>(count);
            m2 += delta * (v - mean);
        }
    }
    return GapEstimate{mean, std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)), false};
}

}  // namespace

GapEstimate truncation_gap(const walsh::HypercubeFunction& f, const walsh::WalshPoly& fstar, int p, int mc_samples,
                           std::uint64_t seed) {
    const int d = fstar.dim();
    const walsh::WalshPoly target = walsh::truncate(fstar, p);
    if (d <= kExactGapCap) return exact_gap_from_values(f, target);
    return mc_gap(d, target, mc_samples, seed, [&](const Matrix& pts) {
        Vector v(pts.rows());
        for (Eigen::Index k = 0; k < pts.rows(); ++k) v(k) = f(pts.row(k).transpose());
        return v;
    });
}

GapEstimate truncation_gap(const KrrModel& m, const walsh::WalshPoly& fstar, int p, int mc_samples,
                           std::uint64_t seed) {
    const int d = fstar.dim();
    if (m.x_train().cols() != d) throw InvalidArgument("truncation_gap: dimension mismatch");
    const walsh::WalshPoly target = walsh::truncate(fstar, p);
    if (d <= kExactGapCap) {
        const std::size_t npts = std::size_t{1} << d;
        Matrix pts(static_cast<Eigen::Index>(npts), d);
        for (std::size_t b = 0; b < npts; ++b) pts.row(static_cast<Eigen::Index>(b)) = walsh::hypercube_point(b, d);
        const Vector pred = m.predict(pts);
        // walsh_coefficients visits points in bit order, so a cursor suffices.
        std::size_t cursor = 0;
        return exact_gap_from_values([&](const Vector&) { return pred(static_cast<Eigen::Index>(cursor++)); },
                                     target);
    }
    return mc_gap(d, target, mc_samples, seed, [&](const Matrix& pts) { return m.predict(pts); });
}

}  // namespace agopfit::krr
