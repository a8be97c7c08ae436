#pragma once

#include "gapopt/common.hpp"
#include "gapopt/operators.hpp"
#include "gapopt/parent_ham.hpp"
#include "gapopt/symmetry.hpp"

namespace gapopt::spectra {

enum class Solver { kDense, kIterative };

const char* to_string(Solver solver);

struct SolverOptions {
  Index dense_limit = 4096;  // dense below this dimension
  int max_restarts = 2000;
  double tol = 1e-10;  // residual tolerance relative to max(1, |H|_est)
  bool force_iterative = false;
};

struct EigenResult {
  RVec eigenvalues;  // ascending
  Mat eigenvectors;
  int ground_degeneracy = 0;
  Solver solver = Solver::kDense;
  RVec residuals;  // |H v - E v| per pair
};

/// Cheap upper bound on the spectral norm (largest absolute row sum).
double norm_estimate(const SparseHamiltonian& h);

/// 1e-8 * max(1, |H|_est).
double default_deg_tol(const SparseHamiltonian& h);

/// k lowest eigenpairs. Dense self-adjoint solver below dense_limit, block
/// thick-restart Lanczos with full reorthogonalization above; the block
/// size equals k, so multiplicities up to k are resolved.
EigenResult lowest_eigenpairs(const SparseHamiltonian& h, int k, double deg_tol,
                              const SolverOptions& opts = {});

struct GapResult {
  double gap = 0.0;  // 0 when the ground level is degenerate
  double e0 = 0.0;
  double e1 = 0.0;  // lowest level above the ground level
  Vec excited;      // first eigenvector of e1
  int ground_degeneracy = 0;
  bool degenerate = false;          // ground_degeneracy > 1
  bool excited_degenerate = false;  // e1 level has multiplicity > 1
  double deg_tol = 0.0;
  Solver solver = Solver::kDense;
};

/// deg_tol <= 0 selects default_deg_tol.
GapResult spectral_gap(const SparseHamiltonian& h, double deg_tol = -1.0,
                       const SolverOptions& opts = {});

struct ChiMatrix {
  Mat entries;
  double excited_energy = 0.0;
};

/// chi_{ab} = sum_i <psi|phi_{i,a}><phi_{i,b}|psi>; a sector vector is
/// lifted through the isometry first. A layout matching the chain may be
/// passed to skip rebuilding the index tables.
ChiMatrix chi_matrix(const Vec& excited, const ph::KernelBasis& basis, int n_sites,
                     const sym::SectorMap* sector = nullptr,
                     const ChainLayout* layout = nullptr);

}  // namespace gapopt::spectra
