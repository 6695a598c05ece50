#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace neflab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec vec1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

inline Vec vec2(double x, double y) {
  Vec v(2);
  v(0) = x;
  v(1) = y;
  return v;
}

// Thrown when a Newton iteration does not reach its tolerance.
struct ConvergenceError : std::runtime_error {
  Vec best_iterate;
  double residual;
  ConvergenceError(std::string msg, Vec best, double res)
      : std::runtime_error(std::move(msg)),
        best_iterate(std::move(best)),
        residual(res) {}
};

// Iterate left the open domain and backtracking could not recover.
struct DomainEscapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonNormalizableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  std::string path;
  ParseError(std::string msg, std::string p = "")
      : std::runtime_error(std::move(msg)), path(std::move(p)) {}
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace neflab
