#pragma once

// Multi-index targets f*(x) = h(Ux), planted subspaces and data sampling.

#include "agopfit/common.hpp"
#include "agopfit/hermite.hpp"
#include "agopfit/walsh.hpp"

#include <cstdint>
#include <string>

namespace agopfit::model {

/// Row-orthonormal r x d matrix U.
class Subspace {
public:
    Subspace() = default;
    /// Validates U U^T = I_r to `tol`.
    explicit Subspace(Matrix basis, double tol = 1e-10);

    const Matrix& basis() const { return basis_; }
    int r() const { return static_cast<int>(basis_.rows()); }
    int d() const { return static_cast<int>(basis_.cols()); }

    /// Orthogonal projector U^T U (d x d).
    Matrix projector() const { return basis_.transpose() * basis_; }
    /// (d - r) x d orthonormal complement U_perp.
    Matrix complement() const;

private:
    Matrix basis_;
};

/// First r rows of a Haar orthogonal matrix (Gaussian fill + Gram-Schmidt, two passes).
Subspace haar_subspace(int d, int r, std::uint64_t seed);

/// Rows supported on disjoint blocks [j s, (j+1) s), standard normal entries, unit norm.
Subspace sparse_subspace(int d, int r, int support_size, std::uint64_t seed);

/// round(d^{0.3}).
int default_support_size(int d);

/// Rows e_0, ..., e_{r-1}.
Subspace axis_aligned_subspace(int d, int r);

/// mu(U) = (d/r) max_i ||U_{:,i}||^2.
double coherence(const Subspace& s);

/// h(Ux).
double target_eval(const hermite::HermitePoly& link, const Subspace& s, const Vector& x);

/// Multilinear representative of x -> h(Ux) on {-1,1}^d, degree <= max_deg
/// (exact 2^d enumeration, d <= walsh::kExactEnumerationCap).
walsh::WalshPoly target_walsh(const hermite::HermitePoly& link, const Subspace& s, int max_deg);

enum class InputDist { hypercube, gaussian };

InputDist parse_input_dist(const std::string& name);
std::string to_string(InputDist dist);

struct Dataset {
    Matrix X;
    Vector y;
    InputDist dist = InputDist::hypercube;
    double noise_var = 0.0;
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }
};

/// n x d design: uniform signs or standard normals, row-major draw order.
Matrix sample_inputs(InputDist dist, int n, int d, std::uint64_t seed);

/// X i.i.d. from `dist`, y_i = h(U x_i) + N(0, noise_var). Inputs and noise
/// come from independent streams derived from `seed`.
Dataset sample_dataset(InputDist dist, const Subspace& s, const hermite::HermitePoly& link, int n, double noise_var,
                       std::uint64_t seed);

}  // namespace agopfit::model
