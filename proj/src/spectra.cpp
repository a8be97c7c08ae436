#include "gapopt/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "gapopt/linalg.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace gapopt::spectra {

namespace {

bool is_real(const SpMat& m) {
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

int count_ground(const RVec& vals, double deg_tol) {
  int g = 0;
  while (g < vals.size() && vals(g) - vals(0) < deg_tol) ++g;
  return g;
}

// Partial spectrum (indices 1..k) through LAPACK's MRRR drivers.
EigenResult dense_eigenpairs(const SparseHamiltonian& h, int k) {
  EigenResult out;
  out.solver = Solver::kDense;
  const lapack_int n = static_cast<lapack_int>(h.dim);
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  RVec w(n);
  if (is_real(h.matrix)) {
    RMat a = Mat(h.matrix).real();
    RMat z(n, k);
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0,
                                           0.0, 1, k, 0.0, &found, w.data(), z.data(), n,
                                           support.data());
    if (info != 0 || found != k) throw Error(ErrorCode::kConvergence, "dense eigensolver failed");
    out.eigenvectors = z.cast<cplx>();
  } else {
    Mat a(h.matrix);
    Mat z(n, k);
    const lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, 'V', 'I', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()),
        n, 0.0, 0.0, 1, k, 0.0, &found, w.data(),
        reinterpret_cast<lapack_complex_double*>(z.data()), n, support.data());
    if (info != 0 || found != k) throw Error(ErrorCode::kConvergence, "dense eigensolver failed");
    out.eigenvectors = std::move(z);
  }
  out.eigenvalues = w.head(k);
  return out;
}

// Block thick-restart Lanczos: the basis grows by the residuals of the
// unconverged wanted Ritz pairs (which span the next Krylov block) and is
// compressed onto the lowest Ritz vectors when full.
EigenResult iterative_eigenpairs(const SparseHamiltonian& h, int k, const SolverOptions& opts) {
  const Index n = h.dim;
  const double scale = std::max(1.0, norm_estimate(h));
  const double tol = opts.tol * scale;
  const Index m_max = std::min<Index>(n, std::max<Index>(60, 4 * Index{k} + 20));
  const Index keep = std::min<Index>(m_max - k, std::max<Index>(2 * Index{k}, Index{k} + 10));

  Mat v(n, m_max);
  Mat av(n, m_max);
  Index j = 0;

  auto append = [&](Vec w) {
    if (j >= m_max) return false;
    const double before = w.norm();
    if (!(before > 0.0)) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (j > 0) w -= v.leftCols(j) * (v.leftCols(j).adjoint() * w);
    }
    const double after = w.norm();
    if (after < 1e-10 * before) return false;
    v.col(j) = w / after;
    av.col(j) = h.matrix * v.col(j);
    ++j;
    return true;
  };

  linalg::Rng rng(0x5eed5eedULL);
  for (int c = 0; c < k; ++c) {
    Vec w(n);
    for (Index i = 0; i < n; ++i) w(i) = cplx(rng.normal(), rng.normal());
    append(std::move(w));
  }

  int restarts = 0;
  RVec theta;
  Mat y;
  RVec res(k);
  for (;;) {
    Mat t = v.leftCols(j).adjoint() * av.leftCols(j);
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> eig(t);
    theta = eig.eigenvalues();
    y = eig.eigenvectors();

    const Index want = std::min<Index>(k, j);
    const Mat ritz = v.leftCols(j) * y.leftCols(want);
    const Mat resid = av.leftCols(j) * y.leftCols(want) - ritz * theta.head(want).asDiagonal();
    std::vector<Index> open;
    for (Index c = 0; c < want; ++c) {
      res(c) = resid.col(c).norm();
      if (res(c) > tol) open.push_back(c);
    }
    if ((open.empty() && want == k) || j == n) {
      EigenResult out;
      out.solver = Solver::kIterative;
      out.eigenvalues = theta.head(want);
      out.eigenvectors = ritz;
      return out;
    }
    if (j + static_cast<Index>(open.size()) > m_max) {
      if (++restarts > opts.max_restarts) {
        std::string msg = "Lanczos did not converge; residuals:";
        for (Index c = 0; c < want; ++c) msg += " " + std::to_string(res(c));
        throw Error(ErrorCode::kConvergence, msg);
      }
      const Index kk = std::min(keep, j);
      const Mat vk = v.leftCols(j) * y.leftCols(kk);
      const Mat avk = av.leftCols(j) * y.leftCols(kk);
      v.leftCols(kk) = vk;
      av.leftCols(kk) = avk;
      j = kk;
      continue;
    }
    bool grew = false;
    for (Index c : open) grew = append(resid.col(c)) || grew;
    if (want < k) {
      Vec w(n);
      for (Index i = 0; i < n; ++i) w(i) = cplx(rng.normal(), rng.normal());
      grew = append(std::move(w)) || grew;
    }
    if (!grew) {
      // invariant subspace reached: widen with a fresh random direction
      Vec w(n);
      for (Index i = 0; i < n; ++i) w(i) = cplx(rng.normal(), rng.normal());
      if (!append(std::move(w))) {
        throw Error(ErrorCode::kConvergence, "Lanczos basis stagnated");
      }
    }
  }
}

}  // namespace

const char* to_string(Solver solver) {
  return solver == Solver::kDense ? "dense" : "iterative";
}

double norm_estimate(const SparseHamiltonian& h) {
  RVec rows = RVec::Zero(h.dim);
  for (Index k = 0; k < h.matrix.outerSize(); ++k) {
    for (SpMat::InnerIterator it(h.matrix, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return h.dim > 0 ? rows.maxCoeff() : 0.0;
}

double default_deg_tol(const SparseHamiltonian& h) {
  return 1e-8 * std::max(1.0, norm_estimate(h));
}

EigenResult lowest_eigenpairs(const SparseHamiltonian& h, int k, double deg_tol,
                              const SolverOptions& opts) {
  if (k < 2) throw Error(ErrorCode::kInvalidInput, "need at least 2 eigenpairs");
  if (k > h.dim) {
    throw Error(ErrorCode::kInvalidInput, "requested more eigenpairs than the dimension");
  }
  if (h.matrix.rows() != h.dim || h.matrix.cols() != h.dim) {
    throw Error(ErrorCode::kInvalidInput, "operator shape does not match its dimension");
  }
  if (deg_tol <= 0.0) deg_tol = default_deg_tol(h);
  const bool dense = !opts.force_iterative && (h.dim < opts.dense_limit || 2 * k >= h.dim);
  EigenResult out = dense ? dense_eigenpairs(h, k) : iterative_eigenpairs(h, k, opts);
  out.ground_degeneracy = count_ground(out.eigenvalues, deg_tol);
  out.residuals.resize(out.eigenvalues.size());
  for (Index c = 0; c < out.eigenvalues.size(); ++c) {
    out.residuals(c) =
        (h.matrix * out.eigenvectors.col(c) - out.eigenvalues(c) * out.eigenvectors.col(c)).norm();
  }
  return out;
}

GapResult spectral_gap(const SparseHamiltonian& h, double deg_tol, const SolverOptions& opts) {
  if (h.dim < 2) throw Error(ErrorCode::kInvalidSize, "a gap needs at least two states");
  if (deg_tol <= 0.0) deg_tol = default_deg_tol(h);
  int k = static_cast<int>(std::min<Index>(3, h.dim));
  for (;;) {
    const EigenResult eig = lowest_eigenpairs(h, k, deg_tol, opts);
    const int g = eig.ground_degeneracy;
    if (g + 2 <= k || k == h.dim) {
      GapResult out;
      out.deg_tol = deg_tol;
      out.solver = eig.solver;
      out.e0 = eig.eigenvalues(0);
      out.ground_degeneracy = g;
      out.degenerate = g > 1;
      const int e = std::min(g, k - 1);
      out.e1 = eig.eigenvalues(e);
      out.excited = eig.eigenvectors.col(e);
      out.gap = out.degenerate || g >= k ? 0.0 : out.e1 - out.e0;
      out.excited_degenerate = e + 1 < k && eig.eigenvalues(e + 1) - out.e1 < deg_tol;
      return out;
    }
    k = static_cast<int>(std::min<Index>(h.dim, 2 * Index{k}));
  }
}

ChiMatrix chi_matrix(const Vec& excited, const ph::KernelBasis& basis, int n_sites,
                     const sym::SectorMap* sector, const ChainLayout* layout) {
  Vec psi;
  if (sector) {
    if (excited.size() != sector->dim()) {
      throw Error(ErrorCode::kInvalidInput, "excited state does not match the sector dimension");
    }
    psi = sector->lift(excited);
  } else {
    psi = excited;
  }
  ChiMatrix out;
  if (layout) {
    if (layout->n_sites() != n_sites || layout->phys_dim() != basis.phys_dim ||
        layout->window() != basis.block_len) {
      throw Error(ErrorCode::kInvalidInput, "layout does not match the chain");
    }
    out.entries = window_overlaps(*layout, basis.vectors, psi);
  } else {
    const ChainLayout own(basis.phys_dim, n_sites, basis.block_len);
    out.entries = window_overlaps(own, basis.vectors, psi);
  }
  out.entries = 0.5 * (out.entries + out.entries.adjoint()).eval();
  return out;
}

}  // namespace gapopt::spectra
