#include "doctest.h"

#include "agopfit/agop.hpp"
#include "agopfit/hermite.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/model.hpp"
#include "agopfit/verify.hpp"
#include "agopfit/walsh.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

using namespace agopfit;

TEST_CASE("lemma32_gap examples") {
    const hermite::HermitePoly he1(1, {{hermite::MultiIndex{1}, 1.0}});
    const auto axis = model::axis_aligned_subspace(8, 1);
    CHECK(verify::lemma32_gap(he1, axis, 1).gap < 1e-12);
    const hermite::HermitePoly z2 = hermite::monomial_to_hermite({{hermite::MultiIndex{2}, 1.0}});
    const auto rep = verify::lemma32_gap(z2, axis, 2);
    CHECK(rep.gap == doctest::Approx(4.0));
    CHECK(rep.mu == doctest::Approx(8.0));
}

TEST_CASE("normalized gap is invariant to scaling the link") {
    const auto u = model::haar_subspace(10, 1, 3);
    const auto a = verify::lemma32_gap(hermite::link_l1(), u, 4);
    const auto b = verify::lemma32_gap(hermite::link_l1().scaled(2.0), u, 4);
    CHECK(b.gap == doctest::Approx(4.0 * a.gap).epsilon(1e-10));
    CHECK(b.fstar_norm_sq == doctest::Approx(4.0 * a.fstar_norm_sq).epsilon(1e-10));
    CHECK(std::abs(b.normalized_gap - a.normalized_gap) < 1e-8);
    CHECK(a.theta_u == doctest::Approx(a.mu / 10.0));
}

TEST_CASE("build_walsh_design") {
    const Matrix x = model::sample_inputs(model::InputDist::hypercube, 6, 5, 1);
    const Matrix p0 = verify::build_walsh_design(x, 0);
    CHECK(p0.cols() == 1);
    CHECK(p0.isOnes());
    const Matrix p1 = verify::build_walsh_design(x, 1);
    CHECK(p1.cols() == 6);
    CHECK(p1.col(0).isOnes());
    CHECK(p1.rightCols(5) == x);
    CHECK_THROWS_AS(verify::build_walsh_design(x, 2, 10), BudgetExceeded);

    double prev = INFINITY;
    for (int n : {1000, 10000}) {
        const Matrix xs = model::sample_inputs(model::InputDist::hypercube, n, 10, 2);
        const Matrix phi = verify::build_walsh_design(xs, 2);
        Matrix gram = phi.transpose() * phi / n;
        CHECK(gram.diagonal().isOnes(1e-12));
        gram.diagonal().setZero();
        const double off = gram.cwiseAbs().maxCoeff();
        CHECK(off < prev);
        prev = off;
    }
    CHECK(prev < 0.06);
}

TEST_CASE("kernel_fourier_residual") {
    const Matrix x = model::sample_inputs(model::InputDist::hypercube, 30, 12, 3);
    CHECK(verify::kernel_fourier_residual(kernel::linear_profile(), x, 1) < 1e-12);
    const double r8 = verify::kernel_fourier_residual(kernel::square_profile(),
                                                      model::sample_inputs(model::InputDist::hypercube, 40, 8, 4), 2);
    const double c = r8 * 8.0;
    for (int d : {16, 32}) {
        const double r = verify::kernel_fourier_residual(
            kernel::square_profile(), model::sample_inputs(model::InputDist::hypercube, 40, d, 4), 2);
        CHECK(r <= 1.5 * c / d);
    }
}

TEST_CASE("dk_check synthetic cases") {
    const auto link = hermite::link_l1();
    const auto u = model::haar_subspace(9, 1, 5);
    const auto f = model::target_walsh(link, u, 4);
    const Matrix pop = walsh::population_agop_exact(f, 2);
    const auto exact = verify::dk_check(pop, pop, u);
    REQUIRE(exact.applicable);
    CHECK(exact.eps_agop == 0.0);
    CHECK(exact.sin_theta <= std::min(1.0, 4.0 * exact.rho / exact.s) + 1e-12);
    CHECK_FALSE(exact.violated);

    Matrix sig(1, 1);
    sig << 5.0;
    const Matrix clean = u.basis().transpose() * sig * u.basis();
    const auto ideal = verify::dk_check(clean, clean, u);
    CHECK(ideal.sin_theta < 1e-7);
    CHECK(ideal.bound >= 0.0);

    const auto zero = verify::dk_check(Matrix::Zero(9, 9), Matrix::Zero(9, 9), u);
    CHECK_FALSE(zero.applicable);
    CHECK_FALSE(zero.violated);
}

TEST_CASE("dk_chain_check on a small instance") {
    const auto u = model::haar_subspace(10, 1, 6);
    const auto rep = verify::dk_chain_check(hermite::link_l1(), u, 2, kernel::KernelSpec::from_name("gaussian", 10),
                                            300, 7);
    CHECK(rep.applicable);
    CHECK_FALSE(rep.violated);
}

TEST_CASE("oracles") {
    const auto [nodes, weights] = verify::oracle::gauss_hermite(10);
    CHECK(weights.sum() == doctest::Approx(1.0));
    double m2 = 0.0;
    for (int i = 0; i < 10; ++i) m2 += weights(i) * nodes(i) * nodes(i);
    CHECK(m2 == doctest::Approx(1.0));
    const Vector g = verify::oracle::fd_gradient([](const Vector& v) { return v.squaredNorm(); }, Vector::Ones(3));
    CHECK((g - 2.0 * Vector::Ones(3)).norm() < 1e-8);
}

TEST_CASE("prop42 pipeline reports") {
    const auto rep = verify::prop42_pipeline(hermite::link_l1(), 20, 1.2, 0.01, 3, 500);
    CHECK(rep.n == 36);
    CHECK(rep.eta == doctest::Approx(0.2));
    CHECK(rep.residual > 0.0);
    CHECK(std::isfinite(rep.implied_zeta));
}

TEST_CASE("report_jsonl has one record per check") {
    std::vector<verify::CheckResult> results{{"a", true, {{"x", 1.5}}, ""}, {"b", false, {}, "boom"}};
    std::istringstream in(verify::report_jsonl(results));
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("name"));
        CHECK(j.contains("status"));
        CHECK(j.contains("scalars"));
        ++count;
    }
    CHECK(count == 2);
}
