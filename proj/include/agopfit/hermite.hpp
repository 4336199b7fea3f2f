#pragma once

// Probabilists' Hermite polynomials in r variables.

#include "agopfit/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace agopfit::hermite {

/// Degree cap for exact factorial and inversion-coefficient arithmetic.
inline constexpr int kMaxDegree = 20;

/// Multi-index lambda in N^r.
class MultiIndex {
public:
    MultiIndex() = default;
    MultiIndex(std::initializer_list<int> entries);
    explicit MultiIndex(std::vector<int> entries);

    /// Zero multi-index of length r.
    static MultiIndex zeros(int r) { return MultiIndex(std::vector<int>(r, 0)); }

    int size() const { return static_cast<int>(entries_.size()); }
    int operator[](int j) const { return entries_[j]; }
    const std::vector<int>& entries() const { return entries_; }
    int total_degree() const;

    /// lambda! = prod_j lambda_j!, exact for total degree <= kMaxDegree.
    std::uint64_t factorial() const;

    MultiIndex plus_unit(int j) const;
    MultiIndex minus_unit(int j) const;

    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> entries_;
};

/// n! for 0 <= n <= 20.
std::uint64_t factorial(int n);

/// h(z) = sum_lambda a_lambda He_lambda(z).
class HermitePoly {
public:
    using Coeffs = std::map<MultiIndex, double>;

    HermitePoly() = default;
    explicit HermitePoly(int r) : r_(r) {}
    HermitePoly(int r, std::initializer_list<std::pair<MultiIndex, double>> terms);

    int r() const { return r_; }
    int max_degree() const;
    const Coeffs& coeffs() const { return coeffs_; }
    double coefficient(const MultiIndex& lambda) const;
    void add(const MultiIndex& lambda, double a);

    /// Degree-q homogeneous part h_q.
    HermitePoly component(int q) const;
    /// h_{<=p}.
    HermitePoly truncated(int p) const;
    /// h_{>p}.
    HermitePoly tail(int p) const;

    HermitePoly scaled(double factor) const;

private:
    int r_ = 0;
    Coeffs coeffs_;
};

/// He_n(t) by the three-term recursion.
double hermite_eval(int n, double t);

/// Values He_0(t), ..., He_n(t).
std::vector<double> hermite_table(int n, double t);

/// sum_lambda a_lambda prod_j He_{lambda_j}(z_j).
double hermite_eval_multi(const HermitePoly& h, const Vector& z);

/// Analytic gradient, using d/dt He_n = n He_{n-1}.
Vector hermite_gradient(const HermitePoly& h, const Vector& z);

/// Coefficient B_{alpha,lambda} of He_lambda in z^alpha (0 when alpha - lambda
/// is not in (2N)^r). Exact integer arithmetic promoted to double at the end.
double inversion_coefficient(const MultiIndex& alpha, const MultiIndex& lambda);

/// Rewrite sum_alpha b_alpha z^alpha in the Hermite basis.
HermitePoly monomial_to_hermite(const std::map<MultiIndex, double>& monomials);

/// Inverse direction: expand sum a_lambda He_lambda into monomials.
std::map<MultiIndex, double> hermite_to_monomial(const HermitePoly& h);

/// Gaussian norm ||h||^2 = sum a_lambda^2 lambda!.
double gaussian_l2_norm_sq(const HermitePoly& h);

/// G_q = E[grad h_q grad h_q^T] under N(0, I_r).
Matrix latent_gradient_covariance(const HermitePoly& h, int q);

/// Sigma_p = sum_{q=1}^p G_q = E[grad h_{<=p} grad h_{<=p}^T].
Matrix latent_sigma(const HermitePoly& h, int p);

/// He_1(z_1) + He_4(z_1)/sqrt(24).
HermitePoly link_l1();
/// He_1(z_1)He_1(z_2) + He_2(z_1)He_2(z_2)/2.
HermitePoly link_l2();
/// Built-in link by name ("L1", "L2").
HermitePoly link_by_name(const std::string& name);

}  // namespace agopfit::hermite
