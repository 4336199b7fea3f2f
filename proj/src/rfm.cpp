#include "agopfit/rfm.hpp"

#include "agopfit/krr.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>

namespace agopfit::rfm {

Matrix metric_update(const Matrix& agop, double eta, int d) {
    if (!(eta > 0.0)) throw InvalidArgument("metric_update: eta must be positive");
    if (agop.rows() != d || agop.cols() != d) throw InvalidArgument("metric_update: AGOP must be d x d");
    Matrix m = agop;
    m.diagonal().array() += eta;
    const double trace = m.trace();
    return (static_cast<double>(d) / trace) * m;
}

Matrix metric_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw Error("metric_sqrt: eigensolver failed");
    Vector ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev.maxCoeff()), std::abs(ev.minCoeff()));
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < -1e-8 * scale) throw NotPsd("metric_sqrt: matrix has a negative eigenvalue");
        ev(k) = ev(k) < 0.0 ? 0.0 : std::sqrt(ev(k));
    }
    const Matrix& q = es.eigenvectors();
    return q * ev.asDiagonal() * q.transpose();
}

RfmHistory run_rfm(const model::Dataset& train, const kernel::KernelSpec& spec0, const RfmOptions& options,
                   const model::Dataset& eval, const model::Subspace& u_true) {
    if (options.iterations < 1) throw InvalidArgument("run_rfm: need at least one iteration");
    const int d = train.d();
    RfmHistory history;
    Matrix metric = Matrix::Identity(d, d);
    double floor = 0.0;
    for (int t = 0; t <= options.iterations; ++t) {
        const auto start = std::chrono::steady_clock::now();
        RfmIteration rec;
        rec.iteration = t;
        rec.metric = metric;
        rec.safeguard_floor = floor;
        try {
            const kernel::KernelSpec spec = t == 0 ? spec0 : spec0.with_metric(metric);
            const krr::KrrModel model = krr::KrrModel::fit(train, spec, options.ridge);
            rec.jitter = model.jitter_used();
            rec.test_mse = krr::test_mse(model, eval);
            const Matrix grads =
                options.agop_points ? model.gradient_field(*options.agop_points) : model.training_gradients();
            const agop::AgopResult res = agop::empirical_agop(grads);
            rec.sin_theta = agop::sin_theta_op(agop::top_subspace(res, u_true.r()), u_true);
            for (int k = 0; k < 3; ++k) rec.top_eigenvalues[k] = k < res.eigenvalues.size() ? res.eigenvalues(k) : 0.0;
            if (t < options.iterations) {
                floor = static_cast<double>(d) / (res.matrix.trace() + options.eta * d) * options.eta;
                metric = metric_update(res.matrix, options.eta, d);
            }
        } catch (const Error& e) {
            history.failure = "iteration " + std::to_string(t) + ": " + e.what();
            return history;
        }
        rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        history.records.push_back(std::move(rec));
    }
    return history;
}

Matrix rescaled_inputs(const model::Subspace& u, const Matrix& sigma, double eta, const Matrix& samples) {
    if (sigma.rows() != u.r() || sigma.cols() != u.r()) throw InvalidArgument("rescaled_inputs: Sigma must be r x r");
    Matrix shifted = sigma;
    shifted.diagonal().array() += eta;
    const Matrix root = metric_sqrt(shifted);
    const Matrix& b = u.basis();
    const Matrix p = u.projector();
    const Matrix lin = b.transpose() * root * b + std::sqrt(eta) * (Matrix::Identity(u.d(), u.d()) - p);
    return samples * lin.transpose();
}

double prop42_residual(const Matrix& m2, const model::Subspace& u, const Matrix& sigma, double eta, double c_eta,
                       const Matrix& samples) {
    if (!(c_eta > 0.0)) throw InvalidArgument("prop42_residual: c_eta must be positive");
    const double scale = std::sqrt(static_cast<double>(u.d()) / c_eta);
    const Matrix xhat = rescaled_inputs(u, sigma, eta, samples);
    const Matrix lhs = samples * metric_sqrt(m2);  // rows (M2^{1/2} x)^T; M2^{1/2} is symmetric
    const double num = (lhs - scale * xhat).squaredNorm();
    const double den = scale * scale * xhat.squaredNorm();
    return std::sqrt(num / den);
}

}  // namespace agopfit::rfm
