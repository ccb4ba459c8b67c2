#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace modcomb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Error type for all invalid inputs and numerical failures in the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

inline void require_dim(Eigen::Index expected, Eigen::Index actual,
                        const std::string& what) {
  if (expected != actual) {
    throw Error(what + ": expected dimension " + std::to_string(expected) +
                ", got " + std::to_string(actual));
  }
}

}  // namespace modcomb
