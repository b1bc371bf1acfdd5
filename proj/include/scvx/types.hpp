#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace scvx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector or matrix had the wrong shape for the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An evaluation produced NaN or Inf. `component()` is the offending output
/// index of the map being evaluated.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, Eigen::Index component)
      : Error(what + " (component " + std::to_string(component) + ")"),
        component_(component) {}

  Eigen::Index component() const { return component_; }

 private:
  Eigen::Index component_;
};

inline void require_size(Eigen::Index actual, Eigen::Index expected,
                         const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected size " +
                         std::to_string(expected) + ", got " +
                         std::to_string(actual));
  }
}

/// Throws NonFiniteError naming the first non-finite entry of `v`.
template <typename Derived>
void require_finite(const Eigen::PlainObjectBase<Derived>& v,
                    const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v.data()[i])) {
      throw NonFiniteError(std::string(what) + ": non-finite value", i);
    }
  }
}

}  // namespace scvx
