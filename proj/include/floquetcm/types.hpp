#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fcm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Base of everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: schema violations, unknown ids, parameters out of domain.
class UsageError : public Error {
public:
    using Error::Error;
};

// Integration failure, non-convergence, non-contraction.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public UsageError {
public:
    using UsageError::UsageError;
};

}  // namespace fcm
