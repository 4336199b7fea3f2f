#pragma once

// Kernel ridge regression f(x) = K(x, X) (K(X, X) + lambda I)^{-1} y.

#include "agopfit/common.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"
#include "agopfit/walsh.hpp"

#include <cstdint>

namespace agopfit::krr {

/// Largest d for which truncation_gap enumerates the cube exactly.
inline constexpr int kExactGapCap = 16;

class KrrModel {
public:
    /// Cholesky solve with a jitter ladder {0, 1e-10, 1e-8, 1e-6} x mean diagonal.
    static KrrModel fit(const model::Dataset& data, const kernel::KernelSpec& spec, double ridge);
    static KrrModel fit(const Matrix& x_train, const Vector& y, const kernel::KernelSpec& spec, double ridge);

    const kernel::KernelSpec& spec() const { return spec_; }
    const Matrix& x_train() const { return x_train_; }
    const Vector& alpha() const { return alpha_; }
    double ridge() const { return ridge_; }
    double jitter_used() const { return jitter_; }
    /// ||(K + (lambda + jitter) I) alpha - y|| / ||y|| at fit time.
    double dual_residual() const { return dual_residual_; }

    Vector predict(const Matrix& x_eval) const;

    /// Row j is the gradient of the predictor at row j of x_eval.
    Matrix gradient_field(const Matrix& x_eval) const;
    /// Gradient field at the training inputs, reusing the training Gram matrix.
    Matrix training_gradients() const;

    /// Build from explicit dual coefficients (no solve).
    static KrrModel from_dual(kernel::KernelSpec spec, Matrix x_train, Vector alpha);

private:
    kernel::KernelSpec spec_;
    Matrix x_train_;
    Matrix gram_;
    Vector alpha_;
    double ridge_ = 0.0;
    double jitter_ = 0.0;
    double dual_residual_ = 0.0;
};

double test_mse(const KrrModel& m, const model::Dataset& test);
double mse(const Vector& predictions, const Vector& labels);

struct GapEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = true;
};

/// ||f - fstar_{<=p}||^2 under the uniform cube measure. Exact by Walsh
/// transform for d <= kExactGapCap; otherwise Monte Carlo with `mc_samples`.
GapEstimate truncation_gap(const walsh::HypercubeFunction& f, const walsh::WalshPoly& fstar, int p,
                           int mc_samples = 100000, std::uint64_t seed = 0);
GapEstimate truncation_gap(const KrrModel& m, const walsh::WalshPoly& fstar, int p, int mc_samples = 100000,
                           std::uint64_t seed = 0);

}  // namespace agopfit::krr
