#pragma once

#include <vector>

#include "gapopt/common.hpp"

namespace gapopt {

/// Hermitian operator on the full chain or on a symmetry sector.
struct SparseHamiltonian {
  Index dim = 0;
  SpMat matrix;
  int locality = 0;  // sites per local term
  int n_terms = 0;   // number of placed local terms
};

/// Index bookkeeping for L-site windows on a periodic chain of N d-level
/// sites. For window i (sites i, ..., i+L-1 mod N) every basis state x splits
/// into a local index (big-endian over the window) and a rest index
/// (big-endian over sites i+L, ..., i-1 mod N).
class ChainLayout {
 public:
  ChainLayout(int phys_dim, int n_sites, int window);

  int phys_dim() const { return d_; }
  int n_sites() const { return n_; }
  int window() const { return window_; }
  Index dim() const { return dim_; }
  Index local_dim() const { return local_dim_; }
  Index rest_dim() const { return dim_ / local_dim_; }

  std::int32_t local(int placement, Index x) const { return local_[placement][x]; }
  std::int32_t rest(int placement, Index x) const { return rest_[placement][x]; }

  /// Basis index of the state with local index `l` and rest index `r` in
  /// window `placement`.
  Index compose(int placement, Index l, Index r) const {
    return inverse_[placement][l * rest_dim() + r];
  }

  int digit(Index x, int site) const;

 private:
  int d_;
  int n_;
  int window_;
  Index dim_;
  Index local_dim_;
  std::vector<std::vector<std::int32_t>> local_;
  std::vector<std::vector<std::int32_t>> rest_;
  std::vector<std::vector<std::int32_t>> inverse_;
};

/// Sum over all N windows of the dense local operator `h` (local_dim x
/// local_dim) acting on the window, identity elsewhere. Hermitian input gives
/// an exactly Hermitian result.
SparseHamiltonian place_local_terms(const ChainLayout& layout, const Mat& h);

/// chi_{ab} = sum_i <psi|(|phi_a><phi_b|)_i|psi> for the kernel vectors in
/// the columns of `phi`, psi a full-chain vector.
Mat window_overlaps(const ChainLayout& layout, const Mat& phi, const Vec& psi);

/// Largest |entry| of a sparse matrix.
double max_abs(const SpMat& m);

}  // namespace gapopt
