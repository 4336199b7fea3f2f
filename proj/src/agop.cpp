#include "agopfit/agop.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace agopfit::agop {

bool AgopResult::degenerate(int r) const {
    if (r <= 0 || r >= eigenvalues.size()) return false;
    return std::abs(eigenvalues(r - 1) - eigenvalues(r)) <= kTieTolerance;
}

AgopResult decompose(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric);
    if (es.info() != Eigen::Success) throw Error("decompose: eigensolver failed");
    AgopResult res;
    res.matrix = symmetric;
    res.eigenvalues = es.eigenvalues().reverse();
    res.eigenvectors = es.eigenvectors().rowwise().reverse();
    return res;
}

AgopResult empirical_agop(const Matrix& grads) {
    if (grads.rows() < 1) throw InvalidArgument("empirical_agop: no gradients");
    Matrix m = grads.transpose() * grads / static_cast<double>(grads.rows());
    m = 0.5 * (m + m.transpose()).eval();
    return decompose(m);
}

model::Subspace top_subspace(const AgopResult& res, int r) {
    if (r < 1 || r > res.dim()) throw InvalidArgument("top_subspace: need 1 <= r <= d");
    Matrix rows = res.eigenvectors.leftCols(r).transpose();
    return model::Subspace(std::move(rows), 1e-8);
}

double sin_theta_op(const model::Subspace& u_hat, const model::Subspace& u) {
    if (u_hat.r() != u.r() || u_hat.d() != u.d()) throw InvalidArgument("sin_theta_op: shape mismatch");
    // sigma_max(U_hat (I - U^T U)) equals sqrt(1 - sigma_min(U_hat U^T)^2) and
    // keeps full relative accuracy for small angles.
    const Matrix cross = u_hat.basis() * u.basis().transpose();
    const Matrix residual = u_hat.basis() - cross * u.basis();
    Eigen::JacobiSVD<Matrix> svd(residual);
    return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

SRho s_rho(const Matrix& m, const model::Subspace& u) {
    if (m.rows() != u.d() || m.cols() != u.d()) throw InvalidArgument("s_rho: shape mismatch");
    const Matrix& b = u.basis();
    const Matrix inner = b * m * b.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    const Matrix p = u.projector();
    const Matrix outside = m - p * m * p;
    return SRho{es.eigenvalues()(0), sym_op_norm(0.5 * (outside + outside.transpose()))};
}

double davis_kahan_bound(double eps_agop, double rho, double s) {
    if (!(s > 0.0)) throw UndefinedBound("davis_kahan_bound: requires s_p > 0");
    return std::min(1.0, 4.0 * (rho + eps_agop) / s);
}

}  // namespace agopfit::agop
