#include "agopfit/kernel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace agopfit::kernel {

namespace {

constexpr double kNegativeQuadTol = 1e-8;
constexpr int kExpTableOrder = 20;

double clamp_quad(double q) {
    if (q < -kNegativeQuadTol) throw NotPsd("kernel: negative quadratic form q_M = " + std::to_string(q));
    return q < 0.0 ? 0.0 : q;
}

// Pairwise quadratic forms x^T M y for rows of a and b.
Matrix metric_inner(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    if (spec.identity_metric()) return a * b.transpose();
    return (a * spec.metric()) * b.transpose();
}

Vector metric_sq_norms(const KernelSpec& spec, const Matrix& a) {
    if (spec.identity_metric()) return a.rowwise().squaredNorm();
    return ((a * spec.metric()).array() * a.array()).rowwise().sum();
}

void check_dims(const KernelSpec& spec, Eigen::Index cols) {
    if (cols != spec.dim()) throw InvalidArgument("kernel: input dimension does not match metric");
}

// q from the expansion |a|^2 + |b|^2 - 2<a,b>; cancellation below the
// relative round-off level is treated as coincident points.
double pair_quad(double na, double nb, double inner) {
    const double q = na + nb - 2.0 * inner;
    if (std::abs(q) <= 1e-12 * (std::abs(na) + std::abs(nb))) return 0.0;
    return clamp_quad(q);
}

double radial_from_quad(const KernelSpec& spec, double q) {
    if (spec.family() == Family::gaussian_radial) return std::exp(-q / (2.0 * spec.bandwidth()));
    return std::exp(-std::sqrt(q) / spec.bandwidth());
}

// Fill k(i, j) from the inner-product matrix `inner` and squared norms.
void apply_profile(const KernelSpec& spec, Matrix& inner, const Vector& na, const Vector& nb) {
    const double d = static_cast<double>(spec.dim());
    for (Eigen::Index j = 0; j < inner.cols(); ++j) {
        for (Eigen::Index i = 0; i < inner.rows(); ++i) {
            double& v = inner(i, j);
            if (spec.family() == Family::inner_product) {
                v = spec.profile().value(v / d);
            } else {
                v = radial_from_quad(spec, pair_quad(na(i), nb(j), v));
            }
        }
    }
}

}  // namespace

Profile exp_profile() {
    return Profile{"exp", [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); },
                   std::vector<double>(kExpTableOrder + 1, 1.0)};
}

Profile linear_profile() {
    std::vector<double> table(kExpTableOrder + 1, 0.0);
    table[1] = 1.0;
    return Profile{"linear", [](double t) { return t; }, [](double) { return 1.0; }, table};
}

Profile square_profile() {
    std::vector<double> table(kExpTableOrder + 1, 0.0);
    table[2] = 2.0;
    return Profile{"square", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }, table};
}

Profile profile_by_name(const std::string& name) {
    if (name == "exp") return exp_profile();
    if (name == "linear") return linear_profile();
    if (name == "square") return square_profile();
    throw InvalidArgument("unknown kernel profile '" + name + "'");
}

double taylor_truncation(const Profile& g, int m, double t) {
    if (m < 0) throw InvalidArgument("taylor_truncation: negative order");
    if (static_cast<std::size_t>(m) >= g.derivatives_at_zero.size())
        throw InvalidArgument("taylor_truncation: profile '" + g.name + "' has no derivative of order " +
                              std::to_string(m));
    double total = 0.0;
    double power_over_fact = 1.0;  // t^k / k!
    for (int k = 0; k <= m; ++k) {
        if (k > 0) power_over_fact *= t / static_cast<double>(k);
        total += g.derivatives_at_zero[k] * power_over_fact;
    }
    return total;
}

KernelSpec KernelSpec::radial(Family family, double bandwidth, int d) {
    if (family == Family::inner_product) throw InvalidArgument("KernelSpec::radial: inner_product is not radial");
    if (!(bandwidth > 0.0)) throw InvalidArgument("KernelSpec: bandwidth must be positive");
    KernelSpec spec;
    spec.family_ = family;
    spec.bandwidth_ = bandwidth;
    spec.metric_ = Matrix::Identity(d, d);
    return spec;
}

KernelSpec KernelSpec::inner_product(Profile profile, int d) {
    KernelSpec spec;
    spec.family_ = Family::inner_product;
    spec.profile_ = std::move(profile);
    spec.metric_ = Matrix::Identity(d, d);
    return spec;
}

KernelSpec KernelSpec::from_name(const std::string& name, int d, double bandwidth) {
    if (name == "gaussian") return radial(Family::gaussian_radial, bandwidth > 0 ? bandwidth : d, d);
    if (name == "laplace") return radial(Family::laplace_radial, bandwidth > 0 ? bandwidth : std::sqrt(double(d)), d);
    if (name == "exp_inner") return inner_product(exp_profile(), d);
    throw InvalidArgument("unknown kernel '" + name + "' (expected gaussian, laplace or exp_inner)");
}

KernelSpec KernelSpec::with_metric(Matrix metric) const {
    if (metric.rows() != metric.cols() || metric.rows() != dim())
        throw InvalidArgument("with_metric: metric must be d x d");
    if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("with_metric: metric is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(metric, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-8) throw NotPsd("with_metric: metric is not positive semidefinite");
    KernelSpec out = *this;
    out.identity_metric_ = metric.isIdentity(0.0);
    out.metric_ = std::move(metric);
    return out;
}

std::string KernelSpec::describe() const {
    std::ostringstream os;
    switch (family_) {
        case Family::gaussian_radial: os << "gaussian_radial exp(-q/(2h)) h=" << bandwidth_; break;
        case Family::laplace_radial: os << "laplace_radial exp(-sqrt(q)/h) h=" << bandwidth_; break;
        case Family::inner_product: os << "inner_product g=" << profile_.name; break;
    }
    return os.str();
}

double parse_bandwidth(const std::string& token, int d) {
    if (token == "d") return static_cast<double>(d);
    if (token == "sqrt_d") return std::sqrt(static_cast<double>(d));
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size() || !(v > 0.0)) throw InvalidArgument("bad bandwidth '" + token + "'");
    return v;
}

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& xp) {
    check_dims(spec, x.size());
    check_dims(spec, xp.size());
    if (spec.family() == Family::inner_product) {
        const double t = spec.identity_metric() ? x.dot(xp) : x.dot(spec.metric() * xp);
        return spec.profile().value(t / spec.dim());
    }
    const Vector diff = x - xp;
    const double q = spec.identity_metric() ? diff.squaredNorm() : diff.dot(spec.metric() * diff);
    return radial_from_quad(spec, clamp_quad(q));
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    check_dims(spec, a.cols());
    check_dims(spec, b.cols());
    Matrix inner = metric_inner(spec, a, b);
    Vector na, nb;
    if (spec.family() != Family::inner_product) {
        na = metric_sq_norms(spec, a);
        nb = metric_sq_norms(spec, b);
    }
    apply_profile(spec, inner, na, nb);
    return inner;
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a) {
    Matrix k = kernel_matrix(spec, a, a);
    k.triangularView<Eigen::StrictlyLower>() = k.transpose().triangularView<Eigen::StrictlyLower>();
    if (spec.family() != Family::inner_product) k.diagonal().setOnes();
    return k;
}

Vector kernel_gradient_x(const KernelSpec& spec, const Vector& x, const Vector& xp) {
    check_dims(spec, x.size());
    check_dims(spec, xp.size());
    const Matrix& m = spec.metric();
    if (spec.family() == Family::inner_product) {
        const Vector mxp = m * xp;
        return spec.profile().derivative(x.dot(mxp) / spec.dim()) * mxp / spec.dim();
    }
    const Vector mdiff = m * (x - xp);
    const double q = clamp_quad((x - xp).dot(mdiff));
    const double k = radial_from_quad(spec, q);
    if (spec.family() == Family::gaussian_radial) return -k * mdiff / spec.bandwidth();
    if (q == 0.0) return Vector::Zero(x.size());
    return -k * mdiff / (spec.bandwidth() * std::sqrt(q));
}

Matrix kernel_gradient_sum(const KernelSpec& spec, const Matrix& x_eval, const Matrix& x_train, const Vector& weights,
                           const Matrix* gram) {
    check_dims(spec, x_eval.cols());
    check_dims(spec, x_train.cols());
    if (weights.size() != x_train.rows()) throw InvalidArgument("kernel_gradient_sum: weight length mismatch");
    const double d = static_cast<double>(spec.dim());

    if (spec.family() == Family::inner_product) {
        // row j = sum_i w_i g'(t_ji) M x_i / d
        Matrix w = metric_inner(spec, x_eval, x_train);
        for (Eigen::Index i = 0; i < w.cols(); ++i)
            for (Eigen::Index j = 0; j < w.rows(); ++j) w(j, i) = weights(i) * spec.profile().derivative(w(j, i) / d);
        Matrix out = w * x_train;
        if (!spec.identity_metric()) out = out * spec.metric();
        return out / d;
    }

    // Radial: row j = -M sum_i c_ji (x_j - x_i), with c_ji = w_i K_ji / h (gaussian)
    // or w_i K_ji / (h sqrt(q_ji)) (laplace, 0 at q = 0).
    Matrix c = gram ? *gram : kernel_matrix(spec, x_eval, x_train);
    if (spec.family() == Family::gaussian_radial) {
        c = c * (weights / spec.bandwidth()).asDiagonal();
    } else {
        const Vector na = metric_sq_norms(spec, x_eval);
        const Vector nb = metric_sq_norms(spec, x_train);
        const Matrix inner = metric_inner(spec, x_eval, x_train);
        for (Eigen::Index i = 0; i < c.cols(); ++i) {
            for (Eigen::Index j = 0; j < c.rows(); ++j) {
                const double q = pair_quad(na(j), nb(i), inner(j, i));
                c(j, i) = q > 0.0 ? weights(i) * c(j, i) / (spec.bandwidth() * std::sqrt(q)) : 0.0;
            }
        }
    }
    const Vector row_sums = c.rowwise().sum();
    Matrix diffsum = row_sums.asDiagonal() * x_eval - c * x_train;
    if (!spec.identity_metric()) diffsum = diffsum * spec.metric();
    return -diffsum;
}

}  // namespace agopfit::kernel
