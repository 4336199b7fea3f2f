#include "doctest.h"

#include "agopfit/hermite.hpp"
#include "agopfit/model.hpp"
#include "agopfit/rng.hpp"
#include "agopfit/verify.hpp"
#include "agopfit/walsh.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace agopfit;
using walsh::SubsetIndex;
using walsh::WalshPoly;

namespace {

WalshPoly random_poly(std::uint64_t seed, int d, int max_deg, int terms) {
    CounterRng rng(seed);
    WalshPoly p(d);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> members;
        const int deg = static_cast<int>(rng.next_u64() % (max_deg + 1));
        while (static_cast<int>(members.size()) < deg) {
            const int i = static_cast<int>(rng.next_u64() % d);
            if (std::find(members.begin(), members.end(), i) == members.end()) members.push_back(i);
        }
        std::sort(members.begin(), members.end());
        p.add(SubsetIndex(members), rng.normal());
    }
    return p;
}

}  // namespace

TEST_CASE("enumerate_subsets order and counts") {
    const auto s31 = walsh::enumerate_subsets(3, 1);
    REQUIRE(s31.size() == 4);
    CHECK(s31[0] == SubsetIndex{});
    CHECK(s31[1] == SubsetIndex{0});
    CHECK(s31[3] == SubsetIndex{2});
    CHECK(walsh::enumerate_subsets(4, 2).size() == 11);
    CHECK(walsh::count_subsets(4, 2) == 11);
    const auto s22 = walsh::enumerate_subsets(2, 2);
    REQUIRE(s22.size() == 4);
    CHECK(s22[3] == SubsetIndex({0, 1}));
    CHECK_THROWS_AS(walsh::enumerate_subsets(2, 3), InvalidArgument);
}

TEST_CASE("multilinearize keeps odd exponents") {
    std::vector<int> a{2, 0, 1}, b{0, 0, 0}, c{3, 1};
    CHECK(walsh::multilinearize(a) == SubsetIndex{2});
    CHECK(walsh::multilinearize(b).empty());
    CHECK(walsh::multilinearize(c) == SubsetIndex({0, 1}));
}

TEST_CASE("walsh_coefficients examples") {
    const auto p = walsh::walsh_coefficients([](const Vector& x) { return x(0) * x(1); }, 3, 2);
    CHECK(p.size() == 1);
    CHECK(p.coefficient(SubsetIndex({0, 1})) == doctest::Approx(1.0));

    const auto q = walsh::walsh_coefficients([](const Vector& x) { return (x(0) + x(1)) * (x(0) + x(1)); }, 2, 2);
    CHECK(q.coefficient(SubsetIndex{}) == doctest::Approx(2.0));
    CHECK(q.coefficient(SubsetIndex({0, 1})) == doctest::Approx(2.0));
    CHECK(q.coefficient(SubsetIndex{0}) == 0.0);

    // L1 along e0 on d=4: enumeration oracle coefficient by coefficient.
    const auto link = hermite::link_l1();
    const auto u = model::axis_aligned_subspace(4, 1);
    auto f = [&](const Vector& x) { return model::target_eval(link, u, x); };
    const auto w = walsh::walsh_coefficients(f, 4, 4);
    for (const auto& s : walsh::enumerate_subsets(4, 4)) {
        double brute = 0.0;
        for (std::uint64_t b = 0; b < 16; ++b) {
            const Vector x = walsh::hypercube_point(b, 4);
            brute += f(x) * s.character(x);
        }
        CHECK(w.coefficient(s) == doctest::Approx(brute / 16.0).epsilon(1e-12));
    }
    // He4 is the constant -2 on {-1, 1}.
    CHECK(w.coefficient(SubsetIndex{0}) == doctest::Approx(1.0));
    CHECK(w.coefficient(SubsetIndex{}) == doctest::Approx(-2.0 / std::sqrt(24.0)));

    CHECK_THROWS_AS(walsh::walsh_coefficients([](const Vector&) { return 0.0; }, 21, 1), DimensionTooLarge);
}

TEST_CASE("truncate") {
    WalshPoly p(3, {{SubsetIndex{0}, 1.0}, {SubsetIndex({0, 1}), 1.0}});
    const auto t = walsh::truncate(p, 1);
    CHECK(t.size() == 1);
    CHECK(t.coefficient(SubsetIndex{0}) == 1.0);
    CHECK(t.max_degree() == 1);
    const auto same = walsh::truncate(p, 5);
    CHECK(same.size() == p.size());
    CHECK(same.max_degree() == p.max_degree());
    WalshPoly cubic(3, {{SubsetIndex({0, 1, 2}), 1.0}});
    CHECK(walsh::truncate(cubic, 2).is_zero());
}

TEST_CASE("partial_derivative") {
    WalshPoly p(3, {{SubsetIndex({0, 1}), 1.0}, {SubsetIndex{2}, 0.5}});
    const auto d0 = walsh::partial_derivative(p, 0);
    CHECK(d0.size() == 1);
    CHECK(d0.coefficient(SubsetIndex{1}) == 1.0);
    WalshPoly c(3, {{SubsetIndex{}, 2.0}});
    CHECK(walsh::partial_derivative(c, 1).is_zero());
    WalshPoly r(3, {{SubsetIndex{0}, 1.0}, {SubsetIndex({0, 1, 2}), 1.0}});
    const auto d1 = walsh::partial_derivative(r, 1);
    CHECK(d1.size() == 1);
    CHECK(d1.coefficient(SubsetIndex({0, 2})) == 1.0);
}

TEST_CASE("eval and strictness") {
    WalshPoly p(2, {{SubsetIndex({0, 1}), 1.0}});
    CHECK(p.eval(Vector::Map(std::vector<double>{1, -1}.data(), 2)) == -1.0);
    WalshPoly c(2, {{SubsetIndex{}, 3.0}});
    CHECK(c.eval(Vector::Ones(2)) == 3.0);
    WalshPoly s(2, {{SubsetIndex{0}, 1.0}, {SubsetIndex{1}, 1.0}});
    CHECK(s.eval(Vector::Ones(2)) == 2.0);
    Vector bad(2);
    bad << 0.5, 1.0;
    CHECK_THROWS_AS(s.eval(bad), InvalidArgument);
    CHECK_NOTHROW(s.eval(bad, false));
}

TEST_CASE("l2_norm_sq") {
    WalshPoly p(2, {{SubsetIndex{0}, 1.0}, {SubsetIndex({0, 1}), 1.0}});
    CHECK(walsh::l2_norm_sq(p) == 2.0);
    CHECK(walsh::l2_norm_sq(WalshPoly(3)) == 0.0);

    const auto link = hermite::link_l1();
    const auto u = model::axis_aligned_subspace(6, 1);
    const auto f = model::target_walsh(link, u, 4);
    const Matrix x = model::sample_inputs(model::InputDist::hypercube, 100000, 6, 11);
    double mean = 0.0, m2 = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double v = f.eval(x.row(i).transpose());
        mean += v * v;
        m2 += v * v * v * v;
    }
    const double n = static_cast<double>(x.rows());
    mean /= n;
    const double se = std::sqrt((m2 / n - mean * mean) / n);
    CHECK(std::abs(walsh::l2_norm_sq(f) - mean) <= 3.0 * se);
}

TEST_CASE("population_agop_exact examples") {
    WalshPoly lin(4, {{SubsetIndex{0}, 1.0}});
    Matrix e00 = Matrix::Zero(4, 4);
    e00(0, 0) = 1.0;
    CHECK((walsh::population_agop_exact(lin, 1) - e00).norm() < 1e-15);

    WalshPoly quad(4, {{SubsetIndex({0, 1}), 1.0}});
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = 1.0;
    CHECK((walsh::population_agop_exact(quad, 2) - m).norm() < 1e-15);
    CHECK((verify::oracle::brute_force_agop(quad, 2) - m).norm() < 1e-12);

    WalshPoly mixed(4, {{SubsetIndex{0}, 1.0}, {SubsetIndex({0, 1, 2}), 1.0}});
    CHECK((walsh::population_agop_exact(mixed, 1) - e00).norm() < 1e-15);
}

TEST_CASE("Parseval against enumeration") {
    for (int k = 0; k < 5; ++k) {
        const int d = 4 + 2 * k;
        const auto p = random_poly(mix64(7, k), d, 4, 12);
        CHECK(walsh::l2_norm_sq(p) == doctest::Approx(verify::oracle::brute_force_norm_sq(p)).epsilon(1e-10));
    }
}

TEST_CASE("coefficient equals hypercube mean of iterated derivative") {
    const auto p = random_poly(99, 6, 3, 10);
    for (const auto& [s, c] : p.sorted_terms()) {
        WalshPoly q = p;
        for (int i : s.members()) q = walsh::partial_derivative(q, i);
        double avg = 0.0;
        for (std::uint64_t b = 0; b < 64; ++b) avg += q.eval(walsh::hypercube_point(b, 6));
        CHECK(avg / 64.0 == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("AGOP matches enumeration and is additive over degrees") {
    for (int k = 0; k < 6; ++k) {
        const int d = 3 + k;
        const auto p = random_poly(mix64(3, k), d, std::min(4, d), 10);
        for (int cap = 1; cap <= std::min(4, d); ++cap) {
            const Matrix exact = walsh::population_agop_exact(p, cap);
            CHECK((exact - verify::oracle::brute_force_agop(p, cap)).cwiseAbs().maxCoeff() < 1e-10);
            Matrix sum = Matrix::Zero(d, d);
            for (int q = 1; q <= cap; ++q) sum += walsh::population_agop_exact(walsh::homogeneous_part(p, q), q);
            CHECK((exact - sum).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("truncated norm is monotone in p") {
    const auto p = random_poly(5, 8, 5, 20);
    double prev = -1.0;
    for (int deg = 0; deg <= 5; ++deg) {
        const double v = walsh::l2_norm_sq(walsh::truncate(p, deg));
        CHECK(v >= prev);
        prev = v;
    }
}
