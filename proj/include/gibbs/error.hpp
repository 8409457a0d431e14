#ifndef GIBBS_ERROR_HPP
#define GIBBS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gibbs {

/// A parameter lies outside the open domain where the quantity is defined
/// (tilt outside int(Theta), a target mean outside int(C_X), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A covariance or Hessian is numerically singular.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested operation has no implementation for the given family mix.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A numerical routine (quadrature, root bracketing) failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace gibbs

#endif
