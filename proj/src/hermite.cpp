#include "agopfit/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agopfit::hermite {

namespace {

void check_entries(const std::vector<int>& e) {
    for (int v : e)
        if (v < 0) throw InvalidArgument("multi-index entries must be nonnegative");
}

// Enumerate all multi-indices of length r and total degree q.
void for_each_of_degree(int r, int q, const auto& visit) {
    std::vector<int> e(r, 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == r - 1) {
            e[pos] = remaining;
            visit(MultiIndex(e));
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            e[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    if (r == 0) {
        if (q == 0) visit(MultiIndex{});
        return;
    }
    rec(rec, 0, q);
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> entries) : entries_(entries) { check_entries(entries_); }

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) { check_entries(entries_); }

int MultiIndex::total_degree() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

std::uint64_t factorial(int n) {
    if (n < 0 || n > kMaxDegree) throw InvalidArgument("factorial: argument outside [0, 20]");
    std::uint64_t out = 1;
    for (int k = 2; k <= n; ++k) out *= static_cast<std::uint64_t>(k);
    return out;
}

std::uint64_t MultiIndex::factorial() const {
    if (total_degree() > kMaxDegree) throw InvalidArgument("multi-index degree exceeds the exact-arithmetic cap");
    std::uint64_t out = 1;
    for (int v : entries_) out *= hermite::factorial(v);
    return out;
}

MultiIndex MultiIndex::plus_unit(int j) const {
    MultiIndex m = *this;
    ++m.entries_[j];
    return m;
}

MultiIndex MultiIndex::minus_unit(int j) const {
    if (entries_[j] == 0) throw InvalidArgument("minus_unit: entry already zero");
    MultiIndex m = *this;
    --m.entries_[j];
    return m;
}

HermitePoly::HermitePoly(int r, std::initializer_list<std::pair<MultiIndex, double>> terms) : r_(r) {
    for (const auto& [lambda, a] : terms) add(lambda, a);
}

int HermitePoly::max_degree() const {
    int m = 0;
    for (const auto& [lambda, a] : coeffs_) m = std::max(m, lambda.total_degree());
    return m;
}

double HermitePoly::coefficient(const MultiIndex& lambda) const {
    auto it = coeffs_.find(lambda);
    return it == coeffs_.end() ? 0.0 : it->second;
}

void HermitePoly::add(const MultiIndex& lambda, double a) {
    if (lambda.size() != r_) throw InvalidArgument("multi-index length does not match r");
    const double v = coefficient(lambda) + a;
    if (v == 0.0)
        coeffs_.erase(lambda);
    else
        coeffs_[lambda] = v;
}

HermitePoly HermitePoly::component(int q) const {
    HermitePoly out(r_);
    for (const auto& [lambda, a] : coeffs_)
        if (lambda.total_degree() == q) out.coeffs_[lambda] = a;
    return out;
}

HermitePoly HermitePoly::truncated(int p) const {
    HermitePoly out(r_);
    for (const auto& [lambda, a] : coeffs_)
        if (lambda.total_degree() <= p) out.coeffs_[lambda] = a;
    return out;
}

HermitePoly HermitePoly::tail(int p) const {
    HermitePoly out(r_);
    for (const auto& [lambda, a] : coeffs_)
        if (lambda.total_degree() > p) out.coeffs_[lambda] = a;
    return out;
}

HermitePoly HermitePoly::scaled(double factor) const {
    HermitePoly out(r_);
    for (const auto& [lambda, a] : coeffs_) out.add(lambda, a * factor);
    return out;
}

double hermite_eval(int n, double t) {
    if (n < 0) throw InvalidArgument("hermite_eval: negative degree");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = t;
    for (int k = 1; k < n; ++k) {
        const double next = t * cur - static_cast<double>(k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> hermite_table(int n, double t) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    out[0] = 1.0;
    if (n >= 1) out[1] = t;
    for (int k = 1; k < n; ++k) out[k + 1] = t * out[k] - static_cast<double>(k) * out[k - 1];
    return out;
}

double hermite_eval_multi(const HermitePoly& h, const Vector& z) {
    if (z.size() != h.r()) throw InvalidArgument("hermite_eval_multi: point length does not match r");
    const int deg = h.max_degree();
    std::vector<std::vector<double>> tables;
    for (int j = 0; j < h.r(); ++j) tables.push_back(hermite_table(deg, z(j)));
    double total = 0.0;
    for (const auto& [lambda, a] : h.coeffs()) {
        double term = a;
        for (int j = 0; j < h.r(); ++j) term *= tables[j][lambda[j]];
        total += term;
    }
    return total;
}

Vector hermite_gradient(const HermitePoly& h, const Vector& z) {
    if (z.size() != h.r()) throw InvalidArgument("hermite_gradient: point length does not match r");
    const int deg = h.max_degree();
    std::vector<std::vector<double>> tables;
    for (int j = 0; j < h.r(); ++j) tables.push_back(hermite_table(deg, z(j)));
    Vector g = Vector::Zero(h.r());
    for (const auto& [lambda, a] : h.coeffs()) {
        for (int s = 0; s < h.r(); ++s) {
            if (lambda[s] == 0) continue;
            double term = a * lambda[s];
            for (int j = 0; j < h.r(); ++j) term *= tables[j][j == s ? lambda[j] - 1 : lambda[j]];
            g(s) += term;
        }
    }
    return g;
}

double inversion_coefficient(const MultiIndex& alpha, const MultiIndex& lambda) {
    if (alpha.size() != lambda.size()) throw InvalidArgument("inversion_coefficient: length mismatch");
    if (alpha.total_degree() > kMaxDegree) throw InvalidArgument("inversion_coefficient: degree above cap");
    std::uint64_t value = 1;
    for (int j = 0; j < alpha.size(); ++j) {
        const int diff = alpha[j] - lambda[j];
        if (diff < 0 || diff % 2 != 0) return 0.0;
        const int nu = diff / 2;
        // alpha!/(lambda! nu! 2^nu): pairings of nu pairs among alpha items.
        const std::uint64_t num = factorial(alpha[j]);
        const std::uint64_t den = factorial(lambda[j]) * factorial(nu) * (std::uint64_t{1} << nu);
        value *= num / den;
    }
    return static_cast<double>(value);
}

HermitePoly monomial_to_hermite(const std::map<MultiIndex, double>& monomials) {
    if (monomials.empty()) return HermitePoly(0);
    const int r = monomials.begin()->first.size();
    HermitePoly out(r);
    for (const auto& [alpha, b] : monomials) {
        if (alpha.size() != r) throw InvalidArgument("monomial_to_hermite: inconsistent r");
        if (alpha.total_degree() > kMaxDegree) throw InvalidArgument("monomial_to_hermite: degree above cap");
        // Enumerate lambda with lambda_j = alpha_j - 2 nu_j.
        std::vector<int> lam(alpha.entries());
        auto rec = [&](auto&& self, int j) -> void {
            if (j == r) {
                MultiIndex lambda(lam);
                out.add(lambda, b * inversion_coefficient(alpha, lambda));
                return;
            }
            for (int v = alpha[j]; v >= 0; v -= 2) {
                lam[j] = v;
                self(self, j + 1);
            }
        };
        rec(rec, 0);
    }
    return out;
}

std::map<MultiIndex, double> hermite_to_monomial(const HermitePoly& h) {
    // He_n(t) = sum_k (-1)^k n! / (k! (n-2k)! 2^k) t^{n-2k}.
    std::map<MultiIndex, double> out;
    const int r = h.r();
    for (const auto& [lambda, a] : h.coeffs()) {
        std::vector<int> alpha(r);
        auto rec = [&](auto&& self, int j, double coef) -> void {
            if (j == r) {
                MultiIndex key(alpha);
                out[key] += coef;
                return;
            }
            const int n = lambda[j];
            for (int k = 0; 2 * k <= n; ++k) {
                const double c = static_cast<double>(factorial(n) /
                                                     (factorial(k) * factorial(n - 2 * k) * (std::uint64_t{1} << k)));
                alpha[j] = n - 2 * k;
                self(self, j + 1, coef * ((k % 2) ? -c : c));
            }
        };
        rec(rec, 0, a);
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0.0; });
    return out;
}

double gaussian_l2_norm_sq(const HermitePoly& h) {
    double total = 0.0;
    for (const auto& [lambda, a] : h.coeffs()) total += a * a * static_cast<double>(lambda.factorial());
    return total;
}

Matrix latent_gradient_covariance(const HermitePoly& h, int q) {
    const int r = h.r();
    Matrix g = Matrix::Zero(r, r);
    if (q < 1) return g;
    // d_s h_q = sum_{|gamma|=q-1} (gamma_s + 1) a_{gamma+e_s} He_gamma.
    for_each_of_degree(r, q - 1, [&](const MultiIndex& gamma) {
        const double gf = static_cast<double>(gamma.factorial());
        for (int s = 0; s < r; ++s) {
            const double as = (gamma[s] + 1) * h.coefficient(gamma.plus_unit(s));
            if (as == 0.0) continue;
            for (int t = 0; t < r; ++t) {
                const double at = (gamma[t] + 1) * h.coefficient(gamma.plus_unit(t));
                g(s, t) += as * at * gf;
            }
        }
    });
    return g;
}

Matrix latent_sigma(const HermitePoly& h, int p) {
    if (p < 0) throw InvalidArgument("latent_sigma: negative degree cap");
    Matrix sigma = Matrix::Zero(h.r(), h.r());
    for (int q = 1; q <= p; ++q) sigma += latent_gradient_covariance(h, q);
    return sigma;
}

HermitePoly link_l1() {
    return HermitePoly(1, {{MultiIndex{1}, 1.0}, {MultiIndex{4}, 1.0 / std::sqrt(24.0)}});
}

HermitePoly link_l2() {
    return HermitePoly(2, {{MultiIndex{1, 1}, 1.0}, {MultiIndex{2, 2}, 0.5}});
}

HermitePoly link_by_name(const std::string& name) {
    if (name == "L1") return link_l1();
    if (name == "L2") return link_l2();
    throw InvalidArgument("unknown link '" + name + "' (expected L1 or L2)");
}

}  // namespace agopfit::hermite
