#include "gapopt/operators.hpp"

namespace gapopt {

ChainLayout::ChainLayout(int phys_dim, int n_sites, int window)
    : d_(phys_dim), n_(n_sites), window_(window) {
  if (phys_dim < 2) throw Error(ErrorCode::kInvalidSize, "physical dimension must be >= 2");
  if (window < 1 || window > n_sites) {
    throw Error(ErrorCode::kInvalidSize, "window length must lie in [1, N]");
  }
  dim_ = checked_pow(d_, n_);
  local_dim_ = checked_pow(d_, window_);
  local_.assign(n_, std::vector<std::int32_t>(dim_));
  rest_.assign(n_, std::vector<std::int32_t>(dim_));
  inverse_.assign(n_, std::vector<std::int32_t>(dim_));
  std::vector<int> digits(n_);
  for (Index x = 0; x < dim_; ++x) {
    Index rem = x;
    for (int s = n_ - 1; s >= 0; --s) {
      digits[s] = static_cast<int>(rem % d_);
      rem /= d_;
    }
    for (int p = 0; p < n_; ++p) {
      Index l = 0;
      for (int k = 0; k < window_; ++k) l = l * d_ + digits[(p + k) % n_];
      Index r = 0;
      for (int k = window_; k < n_; ++k) r = r * d_ + digits[(p + k) % n_];
      local_[p][x] = static_cast<std::int32_t>(l);
      rest_[p][x] = static_cast<std::int32_t>(r);
      inverse_[p][l * (dim_ / local_dim_) + r] = static_cast<std::int32_t>(x);
    }
  }
}

int ChainLayout::digit(Index x, int site) const {
  for (int s = n_ - 1; s > site; --s) x /= d_;
  return static_cast<int>(x % d_);
}

SparseHamiltonian place_local_terms(const ChainLayout& layout, const Mat& h) {
  const Index ld = layout.local_dim();
  if (h.rows() != ld || h.cols() != ld) {
    throw Error(ErrorCode::kInvalidInput, "local term does not match the window dimension");
  }
  const Index dim = layout.dim();
  const int n = layout.n_sites();

  // column-wise sparsity of the local term
  std::vector<std::vector<std::pair<Index, cplx>>> cols(ld);
  Index max_col = 0;
  for (Index c = 0; c < ld; ++c) {
    for (Index r = 0; r < ld; ++r) {
      if (h(r, c) != cplx(0.0)) cols[c].emplace_back(r, h(r, c));
    }
    max_col = std::max<Index>(max_col, static_cast<Index>(cols[c].size()));
  }
  const Index estimate = dim * n * max_col;
  if (estimate > kNonzeroGuard) {
    throw Error(ErrorCode::kTooLarge,
                "operator would hold ~" + std::to_string(estimate) +
                    " nonzeros, above the size guard of " + std::to_string(kNonzeroGuard));
  }

  std::vector<Eigen::Triplet<cplx, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(estimate));
  for (int p = 0; p < n; ++p) {
    for (Index x = 0; x < dim; ++x) {
      const Index l = layout.local(p, x);
      const Index r = layout.rest(p, x);
      for (const auto& [lr, value] : cols[l]) {
        const Index y = layout.compose(p, lr, r);
        triplets.emplace_back(y, x, value);
      }
    }
  }
  SparseHamiltonian out;
  out.dim = dim;
  out.matrix.resize(dim, dim);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  out.locality = layout.window();
  out.n_terms = n;
  return out;
}

Mat window_overlaps(const ChainLayout& layout, const Mat& phi, const Vec& psi) {
  if (psi.size() != layout.dim()) {
    throw Error(ErrorCode::kInvalidInput, "state does not match the chain dimension");
  }
  if (phi.rows() != layout.local_dim()) {
    throw Error(ErrorCode::kInvalidInput, "kernel vectors do not match the window dimension");
  }
  const Index m = phi.cols();
  Mat chi = Mat::Zero(m, m);
  if (m == 0) return chi;
  Mat reshaped(layout.local_dim(), layout.rest_dim());
  for (int p = 0; p < layout.n_sites(); ++p) {
    for (Index x = 0; x < layout.dim(); ++x) {
      reshaped(layout.local(p, x), layout.rest(p, x)) = psi(x);
    }
    // z(a, r) = <phi_a (x) r | psi>
    const Mat z = phi.adjoint() * reshaped;
    chi.noalias() += z.conjugate() * z.transpose();
  }
  return chi;
}

double max_abs(const SpMat& m) {
  double out = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

}  // namespace gapopt
