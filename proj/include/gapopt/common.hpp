#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gapopt {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, std::int64_t>;
using Index = std::int64_t;

/// Largest dense state / operator dimension any routine will touch (2^20).
inline constexpr Index kSizeGuard = Index{1} << 20;

/// Cap on the number of stored nonzeros of an assembled operator.
inline constexpr Index kNonzeroGuard = Index{1} << 25;

enum class ErrorCode {
  kInvalidInput = 1,
  kInvalidSize,
  kTooLarge,
  kEmptySector,
  kConvergence,
  kFeasibility,
  kStiffness,
  kParse,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// d^n, throwing kTooLarge once the result exceeds `limit`.
Index checked_pow(Index d, int n, Index limit = kSizeGuard);

}  // namespace gapopt
