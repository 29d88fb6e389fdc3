#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nqd {

/// Largest ambient dimension supported by the fixed-capacity point type.
inline constexpr int kMaxDim = 8;

/// Point or vector of R^n. Storage is inline (no heap) up to kMaxDim.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::MatrixXd;

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch,
  Singular,
  NotConverged,
  RankDeficient,
  Parse,
  Io,
  Internal,
  NotQuadratic,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised when a numerical procedure exhausts its budget; carries the best bound reached.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(ErrorCode::NotConverged, what), achieved_(achieved) {}
  [[nodiscard]] double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

#define NQD_REQUIRE(cond, code, msg)                 \
  do {                                               \
    if (!(cond)) throw ::nqd::Error((code), (msg));  \
  } while (0)

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec unit_vec(int n, int axis) {
  Vec v = Vec::Zero(n);
  v[axis] = 1.0;
  return v;
}

}  // namespace nqd
