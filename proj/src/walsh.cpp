#include "agopfit/walsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace agopfit::walsh {

namespace {

void check_sorted_unique(const std::vector<int>& m) {
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (m[k] < 0) throw InvalidArgument("subset member must be nonnegative");
        if (k > 0 && m[k] <= m[k - 1]) throw InvalidArgument("subset members must be strictly increasing");
    }
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t out = 1;
    for (int j = 1; j <= k; ++j) out = out * static_cast<std::uint64_t>(n - k + j) / static_cast<std::uint64_t>(j);
    return out;
}

}  // namespace

SubsetIndex::SubsetIndex(std::initializer_list<int> members) : members_(members) {
    check_sorted_unique(members_);
}

SubsetIndex::SubsetIndex(std::vector<int> members) : members_(std::move(members)) {
    check_sorted_unique(members_);
}

SubsetIndex SubsetIndex::from_mask(std::uint64_t mask) {
    SubsetIndex s;
    while (mask) {
        s.members_.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return s;
}

bool SubsetIndex::contains(int i) const { return std::binary_search(members_.begin(), members_.end(), i); }

std::uint64_t SubsetIndex::mask() const {
    std::uint64_t m = 0;
    for (int i : members_) m |= std::uint64_t{1} << i;
    return m;
}

SubsetIndex SubsetIndex::without(int i) const {
    SubsetIndex s;
    s.members_.reserve(members_.size());
    for (int j : members_)
        if (j != i) s.members_.push_back(j);
    return s;
}

SubsetIndex SubsetIndex::with(int i) const {
    SubsetIndex s = *this;
    auto it = std::lower_bound(s.members_.begin(), s.members_.end(), i);
    if (it == s.members_.end() || *it != i) s.members_.insert(it, i);
    return s;
}

double SubsetIndex::character(const Vector& x) const {
    double v = 1.0;
    for (int i : members_) v *= x(i);
    return v;
}

bool operator<(const SubsetIndex& a, const SubsetIndex& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.members_ < b.members_;
}

std::size_t SubsetHash::operator()(const SubsetIndex& s) const {
    if (s.fits_mask()) return std::hash<std::uint64_t>{}(s.mask());
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int i : s.members()) h = (h ^ static_cast<std::size_t>(i)) * 0x100000001b3ULL;
    return h;
}

std::uint64_t count_subsets(int d, int max_deg) {
    std::uint64_t total = 0;
    for (int k = 0; k <= max_deg; ++k) total += binomial(d, k);
    return total;
}

std::vector<SubsetIndex> enumerate_subsets(int d, int max_deg) {
    if (d < 0 || max_deg < 0) throw InvalidArgument("enumerate_subsets: negative argument");
    if (max_deg > d) throw InvalidArgument("enumerate_subsets: max_deg exceeds d");
    std::vector<SubsetIndex> out;
    out.reserve(count_subsets(d, max_deg));
    for (int k = 0; k <= max_deg; ++k) {
        // Lexicographic k-combinations of 0..d-1.
        std::vector<int> comb(k);
        for (int j = 0; j < k; ++j) comb[j] = j;
        while (true) {
            out.emplace_back(comb);
            int j = k - 1;
            while (j >= 0 && comb[j] == d - k + j) --j;
            if (j < 0) break;
            ++comb[j];
            for (int t = j + 1; t < k; ++t) comb[t] = comb[t - 1] + 1;
        }
    }
    return out;
}

SubsetIndex multilinearize(std::span<const int> exponents) {
    std::vector<int> odd;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (exponents[i] < 0) throw InvalidArgument("multilinearize: negative exponent");
        if (exponents[i] % 2 == 1) odd.push_back(static_cast<int>(i));
    }
    return SubsetIndex(std::move(odd));
}

WalshPoly::WalshPoly(int dim, int max_degree) : dim_(dim), max_degree_(max_degree < 0 ? dim : std::min(max_degree, dim)) {
    if (dim < 0) throw InvalidArgument("WalshPoly: negative dimension");
}

WalshPoly::WalshPoly(int dim, std::initializer_list<std::pair<SubsetIndex, double>> terms) : WalshPoly(dim) {
    for (const auto& [s, c] : terms) add(s, c);
}

int WalshPoly::degree() const {
    int m = 0;
    for (const auto& [s, c] : terms_) m = std::max(m, s.degree());
    return m;
}

double WalshPoly::coefficient(const SubsetIndex& s) const {
    auto it = terms_.find(s);
    return it == terms_.end() ? 0.0 : it->second;
}

void WalshPoly::set(const SubsetIndex& s, double c) {
    if (!s.empty() && s.members().back() >= dim_) throw InvalidArgument("subset member out of range");
    if (s.degree() > max_degree_) throw InvalidArgument("term degree exceeds the polynomial's degree bound");
    if (c == 0.0)
        terms_.erase(s);
    else
        terms_[s] = c;
}

void WalshPoly::add(const SubsetIndex& s, double c) { set(s, coefficient(s) + c); }

std::vector<std::pair<SubsetIndex, double>> WalshPoly::sorted_terms() const {
    std::vector<std::pair<SubsetIndex, double>> out(terms_.begin(), terms_.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

double WalshPoly::eval(const Vector& x, bool strict) const {
    if (x.size() != dim_) throw InvalidArgument("eval: point has wrong length");
    if (strict) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) != 1.0 && x(i) != -1.0) throw InvalidArgument("eval: entries must be +-1 in strict mode");
    }
    double total = 0.0;
    for (const auto& [s, c] : terms_) total += c * s.character(x);
    return total;
}

std::string WalshPoly::dump() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [s, c] : sorted_terms()) {
        os << "S=";
        for (std::size_t k = 0; k < s.members().size(); ++k) os << (k ? "," : "") << s.members()[k];
        os << " c=" << c << '\n';
    }
    return os.str();
}

Vector hypercube_point(std::uint64_t bits, int d) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x(i) = ((bits >> i) & 1U) ? -1.0 : 1.0;
    return x;
}

WalshPoly walsh_coefficients(const HypercubeFunction& f, int d, int max_deg) {
    if (d > kExactEnumerationCap)
        throw DimensionTooLarge("walsh_coefficients: d=" + std::to_string(d) + " exceeds exact-enumeration cap " +
                                std::to_string(kExactEnumerationCap));
    if (d < 0 || max_deg < 0) throw InvalidArgument("walsh_coefficients: negative argument");
    const std::size_t n = std::size_t{1} << d;
    std::vector<double> table(n);
    for (std::size_t b = 0; b < n; ++b) table[b] = f(hypercube_point(b, d));

    // In-place Walsh-Hadamard transform; afterwards table[S] = sum_b f(b) (-1)^{|S & b|}.
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t start = 0; start < n; start += len << 1) {
            for (std::size_t k = start; k < start + len; ++k) {
                const double a = table[k];
                const double b = table[k + len];
                table[k] = a + b;
                table[k + len] = a - b;
            }
        }
    }

    WalshPoly out(d, max_deg);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (std::popcount(s) > max_deg) continue;
        const double c = table[s] * scale;
        if (std::abs(c) >= kDropTolerance) out.set(SubsetIndex::from_mask(s), c);
    }
    return out;
}

WalshPoly truncate(const WalshPoly& p, int degree) {
    WalshPoly out(p.dim(), std::min(std::max(degree, 0), p.max_degree()));
    for (const auto& [s, c] : p.terms())
        if (s.degree() <= degree) out.set(s, c);
    return out;
}

WalshPoly homogeneous_part(const WalshPoly& p, int q) {
    WalshPoly out(p.dim());
    for (const auto& [s, c] : p.terms())
        if (s.degree() == q) out.set(s, c);
    return out;
}

WalshPoly partial_derivative(const WalshPoly& p, int i) {
    if (i < 0 || i >= p.dim()) throw InvalidArgument("partial_derivative: coordinate out of range");
    WalshPoly out(p.dim(), std::max(p.max_degree() - 1, 0));
    for (const auto& [s, c] : p.terms())
        if (s.contains(i)) out.set(s.without(i), c);
    return out;
}

Vector gradient(const WalshPoly& p, const Vector& x) {
    Vector g = Vector::Zero(p.dim());
    for (int i = 0; i < p.dim(); ++i) g(i) = partial_derivative(p, i).eval(x, false);
    return g;
}

double l2_norm_sq(const WalshPoly& p) {
    double total = 0.0;
    for (const auto& [s, c] : p.sorted_terms()) total += c * c;
    return total;
}

Matrix population_agop_exact(const WalshPoly& p, int degree_cap) {
    // grad p(x) = sum_R v_R x^R with (v_R)_i = c_{R + {i}} for i not in R;
    // orthonormality of characters gives E[grad grad^T] = sum_R v_R v_R^T.
    const int d = p.dim();
    std::map<SubsetIndex, std::vector<std::pair<int, double>>> grouped;
    for (const auto& [s, c] : p.sorted_terms()) {
        if (s.degree() > degree_cap || s.empty()) continue;
        for (int i : s.members()) grouped[s.without(i)].emplace_back(i, c);
    }
    Matrix m = Matrix::Zero(d, d);
    for (const auto& [r, entries] : grouped) {
        for (const auto& [i, ci] : entries)
            for (const auto& [j, cj] : entries) m(i, j) += ci * cj;
    }
    return m;
}

}  // namespace agopfit::walsh
