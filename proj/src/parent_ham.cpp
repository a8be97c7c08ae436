#include "gapopt/parent_ham.hpp"

#include <cmath>
#include <numbers>

#include "gapopt/linalg.hpp"

namespace gapopt::ph {

const char* to_string(BasisConvention convention) {
  switch (convention) {
    case BasisConvention::kSvd: return "svd";
    case BasisConvention::kAkltClosedForm: return "aklt-closed-form";
    case BasisConvention::kGhzClosedForm: return "ghz-closed-form";
  }
  return "unknown";
}

KernelBasis kernel_basis_svd(const tn::InjectivityMap& map, double tol, double lambda_tag) {
  if (tol <= 0.0) throw Error(ErrorCode::kInvalidInput, "tolerance must be positive");
  KernelBasis basis;
  basis.block_len = map.block_len;
  basis.phys_dim = map.phys_dim;
  basis.vectors = linalg::left_null_space(map.matrix, tol);
  basis.lambda_tag = lambda_tag;
  basis.convention = BasisConvention::kSvd;
  return basis;
}

KernelBasis aklt_kernel_basis(double lambda) {
  const double l = lambda;
  const double l2 = l * l;
  Mat phi = Mat::Zero(9, 5);
  // two-site index 3 * s1 + s2, levels (+1, 0, -1) -> (0, 1, 2)
  phi(0, 0) = 1.0;
  phi(1, 1) = 1.0;
  phi(3, 1) = l;
  phi(2, 2) = 1.0;
  phi(4, 2) = 2.0 * l2;
  phi(6, 2) = l2;
  phi(5, 3) = 1.0;
  phi(7, 3) = l;
  phi(8, 4) = 1.0;
  phi.colwise().normalize();

  KernelBasis basis;
  basis.block_len = 2;
  basis.phys_dim = 3;
  basis.vectors = std::move(phi);
  basis.lambda_tag = lambda;
  basis.convention = BasisConvention::kAkltClosedForm;
  return basis;
}

KernelBasis ghz_kernel_basis(double lambda) {
  const double l = lambda;
  const double r = std::sqrt(1.0 + l * l);
  const double h = 1.0 / std::numbers::sqrt2;
  Mat phi = Mat::Zero(8, 4);
  phi(0, 0) = l / r;
  phi(2, 0) = -1.0 / r;
  phi(1, 1) = h;
  phi(3, 1) = -h;
  phi(4, 2) = -h;
  phi(6, 2) = h;
  phi(5, 3) = -1.0 / r;
  phi(7, 3) = l / r;

  KernelBasis basis;
  basis.block_len = 3;
  basis.phys_dim = 2;
  basis.vectors = std::move(phi);
  basis.lambda_tag = lambda;
  basis.convention = BasisConvention::kGhzClosedForm;
  return basis;
}

SMatrix SMatrix::from_matrix(const Mat& s) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw Error(ErrorCode::kInvalidInput, "S must be a nonempty square matrix");
  }
  if (!s.allFinite()) throw Error(ErrorCode::kInvalidInput, "S has non-finite entries");
  if (!linalg::is_hermitian(s, 1e-12)) throw Error(ErrorCode::kInvalidInput, "S is not Hermitian");
  if (std::abs(s.trace() - cplx(1.0)) > 1e-10) {
    throw Error(ErrorCode::kInvalidInput, "S must have unit trace");
  }
  SMatrix out;
  out.s_ = 0.5 * (s + s.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> eig(out.s_, Eigen::EigenvaluesOnly);
  out.min_eig_ = eig.eigenvalues()(0);
  if (!(out.min_eig_ > 0.0)) {
    throw Error(ErrorCode::kFeasibility,
                "S is not positive definite (min eigenvalue " + std::to_string(out.min_eig_) + ")");
  }
  return out;
}

SMatrix s_from_generator(const Mat& b, const sym::STemplate* structure) {
  if (b.rows() != b.cols() || b.rows() == 0) {
    throw Error(ErrorCode::kInvalidInput, "generator must be a nonempty square matrix");
  }
  if (!b.allFinite()) throw Error(ErrorCode::kInvalidInput, "generator has non-finite entries");
  if (!linalg::is_hermitian(b, 1e-10)) {
    throw Error(ErrorCode::kInvalidInput, "generator B is not Hermitian");
  }
  Mat herm = 0.5 * (b + b.adjoint());
  if (structure) herm = sym::project_onto_template(herm, *structure);

  Eigen::SelfAdjointEigenSolver<Mat> eig(herm);
  const RVec& vals = eig.eigenvalues();
  // shift by the smallest eigenvalue so the largest weight is exp(0)
  const RVec w = (-(vals.array() - vals(0))).exp();
  const double z = w.sum();
  SMatrix out;
  out.b_ = std::move(herm);
  out.s_ = eig.eigenvectors() * (w / z).cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
  out.s_ = 0.5 * (out.s_ + out.s_.adjoint());
  out.min_eig_ = w.minCoeff() / z;
  return out;
}

Mat local_term(const KernelBasis& basis, const Mat& s) {
  if (s.rows() != basis.m() || s.cols() != basis.m()) {
    throw Error(ErrorCode::kInvalidInput, "S does not match the kernel dimension");
  }
  if (basis.m() == 0) return Mat::Zero(basis.local_dim(), basis.local_dim());
  const Mat h = basis.vectors * s * basis.vectors.adjoint();
  return 0.5 * (h + h.adjoint());
}

SparseHamiltonian assemble(const KernelBasis& basis, const Mat& s, int n_sites,
                           const sym::SectorMap* sector) {
  if (n_sites < basis.block_len + 1) {
    throw Error(ErrorCode::kInvalidSize, "the chain needs at least L+1 = " +
                                             std::to_string(basis.block_len + 1) + " sites");
  }
  if (sector && (sector->n_sites != n_sites || sector->phys_dim != basis.phys_dim)) {
    throw Error(ErrorCode::kInvalidInput, "sector does not match the chain");
  }
  const ChainLayout layout(basis.phys_dim, n_sites, basis.block_len);
  const SparseHamiltonian full = place_local_terms(layout, local_term(basis, s));
  if (!sector) return full;
  return sym::project(full, *sector);
}

}  // namespace gapopt::ph
