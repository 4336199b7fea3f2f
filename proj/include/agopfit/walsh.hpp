#pragma once

// Fourier-Walsh analysis on the Boolean hypercube {-1,1}^d.

#include "agopfit/common.hpp"

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace agopfit::walsh {

/// Largest d accepted by walsh_coefficients (2^d function evaluations).
inline constexpr int kExactEnumerationCap = 20;

/// Extracted coefficients with magnitude below this are dropped.
inline constexpr double kDropTolerance = 1e-12;

/// A subset S of [d], stored as strictly increasing coordinate indices.
class SubsetIndex {
public:
    SubsetIndex() = default;
    SubsetIndex(std::initializer_list<int> members);
    explicit SubsetIndex(std::vector<int> members);

    /// Subset whose members are the set bits of `mask`.
    static SubsetIndex from_mask(std::uint64_t mask);

    const std::vector<int>& members() const { return members_; }
    int degree() const { return static_cast<int>(members_.size()); }
    bool empty() const { return members_.empty(); }
    bool contains(int i) const;

    /// Bitmask of members; only meaningful when every member is < 64.
    std::uint64_t mask() const;
    bool fits_mask() const { return members_.empty() || members_.back() < 64; }

    SubsetIndex without(int i) const;
    SubsetIndex with(int i) const;

    /// Value of the character x^S at a point.
    double character(const Vector& x) const;

    /// Ordering by (degree, lexicographic).
    friend bool operator<(const SubsetIndex& a, const SubsetIndex& b);
    friend bool operator==(const SubsetIndex& a, const SubsetIndex& b) = default;

private:
    std::vector<int> members_;
};

struct SubsetHash {
    std::size_t operator()(const SubsetIndex& s) const;
};

/// All subsets of [d] with degree <= max_deg, ordered by (degree, lexicographic).
std::vector<SubsetIndex> enumerate_subsets(int d, int max_deg);

/// Number of subsets of [d] with degree <= max_deg.
std::uint64_t count_subsets(int d, int max_deg);

/// Multilinear reduction of a monomial: the subset of odd exponents.
SubsetIndex multilinearize(std::span<const int> exponents);

/// Multilinear polynomial sum_S c_S x^S on {-1,1}^d.
class WalshPoly {
public:
    using Terms = std::unordered_map<SubsetIndex, double, SubsetHash>;

    WalshPoly() = default;
    /// max_degree < 0 means "bounded only by dim".
    explicit WalshPoly(int dim, int max_degree = -1);
    WalshPoly(int dim, std::initializer_list<std::pair<SubsetIndex, double>> terms);

    int dim() const { return dim_; }
    /// Declared degree bound; every stored term satisfies |S| <= max_degree().
    int max_degree() const { return max_degree_; }
    /// Largest degree actually present (0 for the zero polynomial).
    int degree() const;
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    /// Coefficient of S (0 if absent).
    double coefficient(const SubsetIndex& s) const;
    void set(const SubsetIndex& s, double c);
    void add(const SubsetIndex& s, double c);

    const Terms& terms() const { return terms_; }
    /// Terms ordered by (degree, lexicographic); use for any reduction.
    std::vector<std::pair<SubsetIndex, double>> sorted_terms() const;

    /// Evaluate at x. In strict mode every entry must be exactly +-1.
    double eval(const Vector& x, bool strict = true) const;

    /// One line per term: `S=<comma-joined indices> c=<decimal>`.
    std::string dump() const;

private:
    int dim_ = 0;
    int max_degree_ = 0;
    Terms terms_;
};

using HypercubeFunction = std::function<double(const Vector&)>;

/// Exact coefficients c_S = 2^{-d} sum_x f(x) x^S for |S| <= max_deg, via a
/// fast Walsh-Hadamard transform of the 2^d function table.
WalshPoly walsh_coefficients(const HypercubeFunction& f, int d, int max_deg);

/// Keep terms of degree <= degree.
WalshPoly truncate(const WalshPoly& p, int degree);

/// Degree-q homogeneous component.
WalshPoly homogeneous_part(const WalshPoly& p, int q);

/// Discrete derivative D_i: { S \ {i} -> c_S : i in S }.
WalshPoly partial_derivative(const WalshPoly& p, int i);

/// Gradient of the multilinear extension at x (coordinatewise D_i then eval).
Vector gradient(const WalshPoly& p, const Vector& x);

/// Parseval: sum_S c_S^2.
double l2_norm_sq(const WalshPoly& p);

/// Exact truncated population AGOP M_{<=cap} = E[grad p_{<=cap} grad p_{<=cap}^T]
/// under the uniform measure, computed from coefficients alone.
Matrix population_agop_exact(const WalshPoly& p, int degree_cap);

/// x in {-1,1}^d whose coordinate i is -1 exactly when bit i of `bits` is set.
Vector hypercube_point(std::uint64_t bits, int d);

}  // namespace agopfit::walsh
