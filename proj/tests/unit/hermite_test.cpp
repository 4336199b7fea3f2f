#include "doctest.h"

#include "agopfit/hermite.hpp"
#include "agopfit/rng.hpp"
#include "agopfit/verify.hpp"

#include <cmath>

using namespace agopfit;
using hermite::HermitePoly;
using hermite::MultiIndex;

TEST_CASE("hermite_eval recursion values") {
    CHECK(hermite::hermite_eval(0, 7.3) == 1.0);
    CHECK(hermite::hermite_eval(2, 1.0) == 0.0);
    CHECK(hermite::hermite_eval(4, 0.0) == 3.0);
    CHECK(hermite::hermite_eval(4, 1.0) == -2.0);
}

TEST_CASE("monomial_to_hermite examples") {
    const auto z = hermite::monomial_to_hermite({{MultiIndex{1}, 1.0}});
    CHECK(z.coefficient(MultiIndex{1}) == 1.0);
    const auto z2 = hermite::monomial_to_hermite({{MultiIndex{2}, 1.0}});
    CHECK(z2.coefficient(MultiIndex{2}) == 1.0);
    CHECK(z2.coefficient(MultiIndex{0}) == 1.0);
    const auto z4 = hermite::monomial_to_hermite({{MultiIndex{4}, 1.0}});
    CHECK(z4.coefficient(MultiIndex{4}) == 1.0);
    CHECK(z4.coefficient(MultiIndex{2}) == 6.0);
    CHECK(z4.coefficient(MultiIndex{0}) == 3.0);

    // Projection oracle <z^4, He_k>/k! by quadrature.
    const auto [nodes, weights] = verify::oracle::gauss_hermite(32);
    for (int k = 0; k <= 4; ++k) {
        double proj = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i)
            proj += weights(i) * std::pow(nodes(i), 4) * hermite::hermite_eval(k, nodes(i));
        CHECK(proj / static_cast<double>(hermite::factorial(k)) ==
              doctest::Approx(z4.coefficient(MultiIndex{k})).epsilon(1e-10));
    }
}

TEST_CASE("latent_sigma examples") {
    const HermitePoly he1(1, {{MultiIndex{1}, 1.0}});
    CHECK(hermite::latent_sigma(he1, 1)(0, 0) == doctest::Approx(1.0));
    const Matrix s1 = hermite::latent_sigma(hermite::link_l1(), 4);
    CHECK(s1(0, 0) == doctest::Approx(5.0));
    CHECK(hermite::latent_sigma(hermite::link_l1(), 1)(0, 0) == doctest::Approx(1.0));
    const Matrix s2 = hermite::latent_sigma(hermite::link_l2(), 2);
    CHECK((s2 - Matrix::Identity(2, 2)).norm() < 1e-14);
    const Matrix s4 = hermite::latent_sigma(hermite::link_l2(), 4);
    CHECK((s4 - 3.0 * Matrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("gaussian_l2_norm_sq examples") {
    CHECK(hermite::gaussian_l2_norm_sq(hermite::link_l1()) == doctest::Approx(2.0));
    CHECK(hermite::gaussian_l2_norm_sq(hermite::link_l2()) == doctest::Approx(2.0));
    CHECK(hermite::gaussian_l2_norm_sq(HermitePoly(2)) == 0.0);
    CHECK(verify::oracle::quadrature_norm_sq(hermite::link_l1(), 64) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(verify::oracle::quadrature_norm_sq(hermite::link_l2(), 64) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("hermite_eval_multi examples") {
    CHECK(hermite::hermite_eval_multi(hermite::link_l1(), Vector::Zero(1)) == doctest::Approx(3.0 / std::sqrt(24.0)));
    CHECK(hermite::hermite_eval_multi(hermite::link_l2(), Vector::Ones(2)) == doctest::Approx(1.0));
    const HermitePoly c(2, {{MultiIndex{0, 0}, 4.5}});
    CHECK(hermite::hermite_eval_multi(c, Vector::Constant(2, -0.3)) == 4.5);
}

TEST_CASE("orthogonality under quadrature") {
    const auto [nodes, weights] = verify::oracle::gauss_hermite(32);
    for (int n = 0; n <= 8; ++n) {
        for (int m = 0; m <= 8; ++m) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < nodes.size(); ++i)
                s += weights(i) * hermite::hermite_eval(n, nodes(i)) * hermite::hermite_eval(m, nodes(i));
            if (n == m)
                CHECK(s == doctest::Approx(static_cast<double>(hermite::factorial(n))).epsilon(1e-8));
            else
                CHECK(std::abs(s) < 1e-8);
        }
    }
}

TEST_CASE("latent_sigma agrees with Monte Carlo for every link and p") {
    for (const char* name : {"L1", "L2"}) {
        const HermitePoly h = hermite::link_by_name(name);
        for (int p = 1; p <= 4; ++p) {
            const Matrix closed = hermite::latent_sigma(h, p);
            const auto mc = verify::oracle::mc_latent_sigma(h, p, 200000, mix64(17, p));
            for (int s = 0; s < h.r(); ++s)
                for (int t = 0; t < h.r(); ++t)
                    CHECK(std::abs(closed(s, t) - mc.mean(s, t)) <= 4.0 * mc.std_error(s, t) + 1e-12);
        }
    }
}

TEST_CASE("analytic gradient matches finite differences") {
    CounterRng rng(4);
    for (const char* name : {"L1", "L2"}) {
        const HermitePoly h = hermite::link_by_name(name);
        for (int k = 0; k < 20; ++k) {
            Vector z(h.r());
            for (int j = 0; j < h.r(); ++j) z(j) = rng.normal();
            const Vector g = hermite::hermite_gradient(h, z);
            const Vector fd =
                verify::oracle::fd_gradient([&](const Vector& v) { return hermite::hermite_eval_multi(h, v); }, z);
            CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
        }
    }
}

TEST_CASE("norm splits orthogonally") {
    for (const char* name : {"L1", "L2"}) {
        const HermitePoly h = hermite::link_by_name(name);
        for (int p = 0; p <= 4; ++p) {
            CHECK(hermite::gaussian_l2_norm_sq(h) ==
                  doctest::Approx(hermite::gaussian_l2_norm_sq(h.truncated(p)) +
                                  hermite::gaussian_l2_norm_sq(h.tail(p))));
        }
    }
}

TEST_CASE("monomial round trip up to degree 6") {
    CounterRng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        std::map<MultiIndex, double> mono;
        for (int a = 0; a <= 6; ++a)
            for (int b = 0; a + b <= 6; ++b)
                if (rng.uniform() < 0.4) mono[MultiIndex{a, b}] = rng.normal();
        if (mono.empty()) continue;
        const auto back = hermite::hermite_to_monomial(hermite::monomial_to_hermite(mono));
        for (const auto& [alpha, c] : mono) CHECK(back.count(alpha) == 1);
        for (const auto& [alpha, c] : back) {
            const double want = mono.count(alpha) ? mono.at(alpha) : 0.0;
            CHECK(std::abs(c - want) < 1e-10);
        }
    }
}

TEST_CASE("exact integer inversion coefficients") {
    CHECK(hermite::inversion_coefficient(MultiIndex{4}, MultiIndex{2}) == 6.0);
    CHECK(hermite::inversion_coefficient(MultiIndex{4}, MultiIndex{1}) == 0.0);
    CHECK(hermite::factorial(20) == 2432902008176640000ULL);
    CHECK_THROWS_AS(hermite::factorial(21), InvalidArgument);
}
