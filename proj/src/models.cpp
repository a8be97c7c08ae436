#include "gapopt/models.hpp"

#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>

#include "gapopt/linalg.hpp"

namespace gapopt::models {

namespace {

const tn::RandomMpsFamily& family_of(const ModelSpec& spec) {
  if (!spec.family) {
    throw Error(ErrorCode::kInvalidInput, "random model needs a generated family");
  }
  return *spec.family;
}

}  // namespace

int block_len(Model model) {
  switch (model) {
    case Model::kAklt: return 2;
    case Model::kGhz: return 3;
    case Model::kRandom: return 2;
  }
  return 0;
}

tn::SiteTensor site_tensor(const ModelSpec& spec, double lambda) {
  switch (spec.model) {
    case Model::kAklt: return tn::aklt_tensor(lambda);
    case Model::kGhz: return tn::ghz_tensor(lambda);
    case Model::kRandom: return tn::random_family_tensor(family_of(spec), lambda);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown model");
}

ph::KernelBasis kernel_basis(const ModelSpec& spec, double lambda) {
  const bool closed = spec.basis != BasisChoice::kSvd && spec.model != Model::kRandom;
  if (spec.basis == BasisChoice::kClosedForm && spec.model == Model::kRandom) {
    throw Error(ErrorCode::kInvalidInput, "the random model has no closed-form kernel basis");
  }
  if (closed) {
    return spec.model == Model::kAklt ? ph::aklt_kernel_basis(lambda)
                                      : ph::ghz_kernel_basis(lambda);
  }
  const auto map = tn::block_tensor(site_tensor(spec, lambda), block_len(spec.model));
  return ph::kernel_basis_svd(map, 1e-10, lambda);
}

Mat singlet_preparation_unitary() {
  const double h = 1.0 / std::numbers::sqrt2;
  Mat hadamard(2, 2);
  hadamard << h, h, h, -h;
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  Mat cnot = Mat::Zero(4, 4);
  cnot(0, 0) = 1.0;
  cnot(1, 1) = 1.0;
  cnot(3, 2) = 1.0;
  cnot(2, 3) = 1.0;
  const Mat id = Mat::Identity(2, 2);
  return cnot * Eigen::kroneckerProduct(hadamard, id).eval() *
         Eigen::kroneckerProduct(x, x).eval();
}

Mat pair_disentangler_term(const tn::RandomMpsFamily& family, double lambda) {
  const Mat p_inv = linalg::exp_hermitian(family.k2, cplx(0.0, -family.t)) *
                    linalg::exp_hermitian(family.k1, cplx(-lambda, 0.0));
  const Mat id2 = Mat::Identity(2, 2);
  const Mat u_inv = singlet_preparation_unitary().adjoint();
  const Mat o = Eigen::kroneckerProduct(id2, Eigen::kroneckerProduct(u_inv, id2).eval()).eval() *
                Eigen::kroneckerProduct(p_inv, p_inv).eval();
  Mat down = Mat::Zero(2, 2);
  down(1, 1) = 1.0;
  const Mat pi2 = Eigen::kroneckerProduct(down, id2).eval() + Eigen::kroneckerProduct(id2, down).eval();
  const Mat pi = Eigen::kroneckerProduct(id2, Eigen::kroneckerProduct(pi2, id2).eval()).eval();
  const Mat h = o.adjoint() * pi * o;
  return 0.5 * (h + h.adjoint());
}

Mat canonical_s(const ModelSpec& spec, double lambda, const ph::KernelBasis& basis) {
  const int m = basis.m();
  if (m == 0) throw Error(ErrorCode::kInvalidInput, "empty kernel basis");
  if (spec.model != Model::kRandom) return Mat::Identity(m, m) / static_cast<double>(m);
  const Mat h = pair_disentangler_term(family_of(spec), lambda);
  if (h.rows() != basis.local_dim()) {
    throw Error(ErrorCode::kInvalidInput, "kernel basis does not live on two blocks");
  }
  Mat s = basis.vectors.adjoint() * h * basis.vectors;
  s = 0.5 * (s + s.adjoint());
  return s / s.trace().real();
}

Vec ground_state(const ModelSpec& spec, double lambda) {
  Vec psi = tn::contract_to_statevector(tn::make_mps(site_tensor(spec, lambda), spec.n_sites));
  const double norm = psi.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "the MPS vanishes on this chain length");
  }
  return psi / norm;
}

}  // namespace gapopt::models
