#pragma once

// Empirical AGOP, its leading eigenspace, and subspace-distance diagnostics.

#include "agopfit/common.hpp"
#include "agopfit/model.hpp"

namespace agopfit::agop {

/// Eigenvalue ties within this tolerance at the r/(r+1) boundary mark the
/// top-r eigenspace as degenerate.
inline constexpr double kTieTolerance = 1e-10;

struct AgopResult {
    Matrix matrix;
    /// Descending.
    Vector eigenvalues;
    /// Column k pairs with eigenvalues(k).
    Matrix eigenvectors;

    int dim() const { return static_cast<int>(matrix.rows()); }
    /// True when lambda_r and lambda_{r+1} coincide within kTieTolerance.
    bool degenerate(int r) const;
};

/// Symmetric eigendecomposition, eigenvalues sorted in descending order.
AgopResult decompose(const Matrix& symmetric);

/// (1/m) G^T G, symmetrized, with its eigendecomposition.
AgopResult empirical_agop(const Matrix& grads);

/// Rows spanning the eigenvectors of the r largest eigenvalues.
model::Subspace top_subspace(const AgopResult& res, int r);

/// Largest principal-angle sine, sqrt(max(0, 1 - sigma_min(U_hat U^T)^2)).
double sin_theta_op(const model::Subspace& u_hat, const model::Subspace& u);

struct SRho {
    double s = 0.0;
    double rho = 0.0;
};

/// s = lambda_min(U M U^T), rho = ||M - P M P||_op with P = U^T U.
SRho s_rho(const Matrix& m, const model::Subspace& u);

/// min(1, 4 (rho + eps) / s); requires s > 0.
double davis_kahan_bound(double eps_agop, double rho, double s);

}  // namespace agopfit::agop
