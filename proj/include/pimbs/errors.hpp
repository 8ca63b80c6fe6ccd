#pragma once

#include <stdexcept>
#include <string>

namespace pimbs {

/// Filesystem-level failure (open/read/write), as opposed to malformed
/// content or invalid configuration.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown that is not tied to a single QP instance, e.g. a
/// model whose tension QP is infeasible on nearly every draw.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pimbs
