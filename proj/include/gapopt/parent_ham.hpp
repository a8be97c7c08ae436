#pragma once

#include <string>

#include "gapopt/common.hpp"
#include "gapopt/operators.hpp"
#include "gapopt/symmetry.hpp"
#include "gapopt/tensor_net.hpp"

namespace gapopt::ph {

enum class BasisConvention { kSvd, kAkltClosedForm, kGhzClosedForm };

const char* to_string(BasisConvention convention);

/// Orthonormal basis of the orthogonal complement of the blocked tensor's
/// image; the columns of `vectors` are the kernel vectors phi_1 ... phi_M.
struct KernelBasis {
  int block_len = 0;
  int phys_dim = 0;
  Mat vectors;
  double lambda_tag = 0.0;
  BasisConvention convention = BasisConvention::kSvd;

  int m() const { return static_cast<int>(vectors.cols()); }
  Index local_dim() const { return vectors.rows(); }
};

/// Left null space of the injectivity map; every vector is phase-fixed so
/// its largest-magnitude entry is real and positive.
KernelBasis kernel_basis_svd(const tn::InjectivityMap& map, double tol, double lambda_tag = 0.0);

/// Closed-form AKLT-family basis on two sites, levels (+1, 0, -1):
///  phi1 = |+1,+1>
///  phi2 ~ |+1,0> + l |0,+1>
///  phi3 ~ |+1,-1> + 2 l^2 |0,0> + l^2 |-1,+1>
///  phi4 ~ |0,-1> + l |-1,0>
///  phi5 = |-1,-1>
KernelBasis aklt_kernel_basis(double lambda);

/// Closed-form GHZ/cluster-family basis on three sites:
///  phi1 ~ l |000> - |010>,   phi2 ~ |001> - |011>,
///  phi3 ~ -|100> + |110>,    phi4 ~ -|101> + l |111>.
KernelBasis ghz_kernel_basis(double lambda);

/// Positive definite, trace-one S, optionally tied to the generator B with
/// S = exp(-B) / tr exp(-B).
class SMatrix {
 public:
  /// Wraps an explicit S; throws kFeasibility unless S > 0, and
  /// kInvalidInput unless S is Hermitian with unit trace.
  static SMatrix from_matrix(const Mat& s);

  const Mat& matrix() const { return s_; }
  const Mat& generator() const { return b_; }
  bool has_generator() const { return b_.size() > 0; }
  int m() const { return static_cast<int>(s_.rows()); }
  double min_eigenvalue() const { return min_eig_; }

 private:
  friend SMatrix s_from_generator(const Mat& b, const sym::STemplate* structure);
  Mat s_;
  Mat b_;
  double min_eig_ = 0.0;
};

/// S = exp(-B)/tr exp(-B); with a structure template, B is first projected
/// onto the template's commutant.
SMatrix s_from_generator(const Mat& b, const sym::STemplate* structure = nullptr);

/// Phi S Phi^dagger on one window, exactly Hermitian.
Mat local_term(const KernelBasis& basis, const Mat& s);

/// H = sum over the N periodic windows of Phi S Phi^dagger, or W^dagger H W
/// when a sector is given. No positivity check on `s`, so affine families
/// can be assembled term by term.
SparseHamiltonian assemble(const KernelBasis& basis, const Mat& s, int n_sites,
                           const sym::SectorMap* sector = nullptr);

inline SparseHamiltonian assemble(const KernelBasis& basis, const SMatrix& s, int n_sites,
                                  const sym::SectorMap* sector = nullptr) {
  return assemble(basis, s.matrix(), n_sites, sector);
}

}  // namespace gapopt::ph
