#pragma once

// Recursive Feature Machine: alternate KRR fits and AGOP metric updates
//   M_{t+1} = d / tr(M_hat_t + eta I) * (M_hat_t + eta I).

#include "agopfit/agop.hpp"
#include "agopfit/common.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace agopfit::rfm {

/// Safeguarded, trace-normalized metric; trace of the result is d.
Matrix metric_update(const Matrix& agop, double eta, int d);

/// Principal square root by eigendecomposition. Eigenvalues in
/// [-1e-8 lambda_max, 0) are clamped to zero; anything below throws NotPsd.
Matrix metric_sqrt(const Matrix& m);

struct RfmIteration {
    int iteration = 0;
    Matrix metric;
    double test_mse = 0.0;
    double sin_theta = 0.0;
    std::array<double, 3> top_eigenvalues{};
    double safeguard_floor = 0.0;
    double wall_time_s = 0.0;
    double jitter = 0.0;
};

struct RfmHistory {
    std::vector<RfmIteration> records;
    /// Empty when every fit succeeded; otherwise the failure message.
    std::string failure;
    bool ok() const { return failure.empty(); }
};

struct RfmOptions {
    double ridge = 1e-6;
    double eta = 1.0;
    /// Number of metric updates T; the history holds T + 1 fits.
    int iterations = 5;
    /// Compute the AGOP on these points instead of the training inputs.
    const Matrix* agop_points = nullptr;
};

/// Iteration t fits KRR with M_t (M_0 = I), records test MSE, the sine
/// between the top-r AGOP eigenspace and `u_true`, and the raw AGOP's top
/// three eigenvalues, then updates the metric.
RfmHistory run_rfm(const model::Dataset& train, const kernel::KernelSpec& spec0, const RfmOptions& options,
                   const model::Dataset& eval, const model::Subspace& u_true);

/// x_hat = U^T sqrt(Sigma + eta I) U x + sqrt(eta) U_perp^T U_perp x, one row per sample.
Matrix rescaled_inputs(const model::Subspace& u, const Matrix& sigma, double eta, const Matrix& samples);

/// || M2^{1/2} x - sqrt(d / c_eta) x_hat ||_{L2} / (sqrt(d / c_eta) ||x_hat||_{L2})
/// over the rows of `samples`.
double prop42_residual(const Matrix& m2, const model::Subspace& u, const Matrix& sigma, double eta, double c_eta,
                       const Matrix& samples);

}  // namespace agopfit::rfm
