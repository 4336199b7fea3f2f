#include "agopfit/model.hpp"

#include "agopfit/rng.hpp"

#include <Eigen/QR>

#include <cmath>

namespace agopfit::model {

namespace {

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

}  // namespace

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)) {
    if (basis_.rows() > basis_.cols()) throw InvalidArgument("Subspace: r exceeds d");
    const Matrix gram = basis_ * basis_.transpose();
    const double err = (gram - Matrix::Identity(basis_.rows(), basis_.rows())).cwiseAbs().maxCoeff();
    if (basis_.rows() > 0 && err > tol) throw InvalidArgument("Subspace: rows are not orthonormal");
}

Matrix Subspace::complement() const {
    // Full QR of U^T; trailing columns of Q span row(U)^perp.
    Eigen::HouseholderQR<Matrix> qr(basis_.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(d(), d());
    return q.rightCols(d() - r()).transpose();
}

Subspace haar_subspace(int d, int r, std::uint64_t seed) {
    if (r < 1 || r > d) throw InvalidArgument("haar_subspace: need 1 <= r <= d");
    CounterRng rng(seed);
    Matrix u(r, d);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < d; ++j) u(i, j) = rng.normal();
    for (int i = 0; i < r; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < i; ++k) u.row(i) -= u.row(i).dot(u.row(k)) * u.row(k);
        }
        u.row(i).normalize();
    }
    return Subspace(std::move(u));
}

int default_support_size(int d) { return static_cast<int>(std::lround(std::pow(static_cast<double>(d), 0.3))); }

Subspace sparse_subspace(int d, int r, int support_size, std::uint64_t seed) {
    if (r < 1 || support_size < 1 || static_cast<long>(r) * support_size > d)
        throw InvalidArgument("sparse_subspace: infeasible support allocation (need r * support_size <= d)");
    CounterRng rng(seed);
    Matrix u = Matrix::Zero(r, d);
    for (int j = 0; j < r; ++j) {
        for (int k = 0; k < support_size; ++k) u(j, j * support_size + k) = rng.normal();
        u.row(j).normalize();
    }
    return Subspace(std::move(u));
}

Subspace axis_aligned_subspace(int d, int r) {
    if (r < 1 || r > d) throw InvalidArgument("axis_aligned_subspace: need 1 <= r <= d");
    return Subspace(Matrix::Identity(r, d));
}

double coherence(const Subspace& s) {
    const double max_col = s.basis().colwise().squaredNorm().maxCoeff();
    return static_cast<double>(s.d()) / static_cast<double>(s.r()) * max_col;
}

double target_eval(const hermite::HermitePoly& link, const Subspace& s, const Vector& x) {
    if (x.size() != s.d()) throw InvalidArgument("target_eval: point length does not match d");
    return hermite::hermite_eval_multi(link, s.basis() * x);
}

walsh::WalshPoly target_walsh(const hermite::HermitePoly& link, const Subspace& s, int max_deg) {
    return walsh::walsh_coefficients([&](const Vector& x) { return target_eval(link, s, x); }, s.d(), max_deg);
}

InputDist parse_input_dist(const std::string& name) {
    if (name == "hypercube") return InputDist::hypercube;
    if (name == "gaussian") return InputDist::gaussian;
    throw InvalidArgument("unknown input distribution '" + name + "' (expected hypercube or gaussian)");
}

std::string to_string(InputDist dist) { return dist == InputDist::hypercube ? "hypercube" : "gaussian"; }

Matrix sample_inputs(InputDist dist, int n, int d, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = dist == InputDist::hypercube ? rng.sign() : rng.normal();
    return x;
}

Dataset sample_dataset(InputDist dist, const Subspace& s, const hermite::HermitePoly& link, int n, double noise_var,
                       std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_dataset: n must be positive");
    if (noise_var < 0.0) throw InvalidArgument("sample_dataset: negative noise variance");
    Dataset data;
    data.dist = dist;
    data.noise_var = noise_var;
    data.seed = seed;
    data.X = sample_inputs(dist, n, s.d(), mix64(seed, kInputStream));
    data.y.resize(n);
    CounterRng noise(mix64(seed, kNoiseStream));
    const double sd = std::sqrt(noise_var);
    for (int i = 0; i < n; ++i) {
        data.y(i) = target_eval(link, s, data.X.row(i).transpose());
        if (noise_var > 0.0) data.y(i) += sd * noise.normal();
    }
    return data;
}

}  // namespace agopfit::model
