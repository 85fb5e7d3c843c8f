#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hippoicl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library. Numerical failures
/// (singular resolvents, divergence, bad preconditions) all derive from it so
/// callers can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hippoicl
