#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace agopfit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Exact 2^d enumeration requested beyond the supported cap.
class DimensionTooLarge : public Error {
public:
    using Error::Error;
};

class SingularKernel : public Error {
public:
    using Error::Error;
};

class NotPsd : public Error {
public:
    using Error::Error;
};

class UndefinedBound : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// Largest eigenvalue magnitude of a symmetric matrix (operator norm).
double sym_op_norm(const Matrix& a);

}  // namespace agopfit
