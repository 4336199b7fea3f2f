#include "agopfit/common.hpp"
#include "agopfit/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace agopfit {

double sym_op_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double CounterRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace agopfit
