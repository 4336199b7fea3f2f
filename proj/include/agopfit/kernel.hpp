#pragma once

// Kernel families with a PSD metric M:
//   gaussian_radial  exp(-q_M / (2h)),   q_M = (x - x')^T M (x - x')
//   laplace_radial   exp(-sqrt(q_M) / h)
//   inner_product    g(x^T M x' / d)

#include "agopfit/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace agopfit::kernel {

enum class Family { gaussian_radial, laplace_radial, inner_product };

/// Analytic profile g for inner-product kernels.
struct Profile {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    /// g^{(k)}(0) for k = 0, 1, ... (as many orders as known).
    std::vector<double> derivatives_at_zero;
};

Profile exp_profile();
/// g(t) = t.
Profile linear_profile();
/// g(t) = t^2.
Profile square_profile();
/// Built-in profile by name: "exp", "linear", "square".
Profile profile_by_name(const std::string& name);

/// Partial Taylor sum g_m(t) = sum_{k<=m} g^{(k)}(0) t^k / k!.
double taylor_truncation(const Profile& g, int m, double t);

class KernelSpec {
public:
    /// Radial family with identity metric of dimension d.
    static KernelSpec radial(Family family, double bandwidth, int d);
    static KernelSpec inner_product(Profile profile, int d);
    /// Config names: "gaussian" (h = d), "laplace" (h = sqrt d), "exp_inner".
    static KernelSpec from_name(const std::string& name, int d, double bandwidth = 0.0);

    Family family() const { return family_; }
    double bandwidth() const { return bandwidth_; }
    const Profile& profile() const { return profile_; }
    const Matrix& metric() const { return metric_; }
    int dim() const { return static_cast<int>(metric_.rows()); }
    bool identity_metric() const { return identity_metric_; }

    /// Copy with a different metric; validates symmetry (1e-10) and PSD (-1e-8).
    KernelSpec with_metric(Matrix metric) const;

    std::string describe() const;

private:
    Family family_ = Family::gaussian_radial;
    double bandwidth_ = 1.0;
    Profile profile_;
    Matrix metric_;
    bool identity_metric_ = true;
};

/// Bandwidth convention by config token: "d", "sqrt_d", or a positive number.
double parse_bandwidth(const std::string& token, int d);

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& xp);

/// n x m matrix of kernel values between rows of a and rows of b.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b);
/// Symmetric Gram matrix K(a, a) (exactly symmetric).
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a);

/// Gradient of x -> K(x, x').
Vector kernel_gradient_x(const KernelSpec& spec, const Vector& x, const Vector& xp);

/// Row j = sum_i weights_i * kernel_gradient_x(x_eval_j, x_train_i), in
/// matrix form. `gram` may pass a precomputed K(x_eval, x_train).
Matrix kernel_gradient_sum(const KernelSpec& spec, const Matrix& x_eval, const Matrix& x_train, const Vector& weights,
                           const Matrix* gram = nullptr);

}  // namespace agopfit::kernel
