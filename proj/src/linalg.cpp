#include "gapopt/linalg.hpp"

#include <cmath>
#include <numbers>

namespace gapopt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kInvalidSize: return "invalid-size";
    case ErrorCode::kTooLarge: return "too-large";
    case ErrorCode::kEmptySector: return "empty-sector";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kFeasibility: return "feasibility";
    case ErrorCode::kStiffness: return "stiffness";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Index checked_pow(Index d, int n, Index limit) {
  Index out = 1;
  for (int i = 0; i < n; ++i) {
    out *= d;
    if (out > limit) {
      throw Error(ErrorCode::kTooLarge,
                  std::to_string(d) + "^" + std::to_string(n) +
                      " exceeds the size guard of " + std::to_string(limit));
    }
  }
  return out;
}

}  // namespace gapopt

namespace gapopt::linalg {

double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol;
}

Mat exp_hermitian(const Mat& k, cplx factor) {
  if (factor == cplx(0.0)) return Mat::Identity(k.rows(), k.cols());
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  const auto& u = es.eigenvectors();
  Vec d(k.rows());
  for (Index i = 0; i < k.rows(); ++i) {
    d(i) = std::exp(factor * es.eigenvalues()(i));
  }
  return u * d.asDiagonal() * u.adjoint();
}

int numerical_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0)) ++r;
  }
  return r;
}

void fix_phase(Eigen::Ref<Vec> v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    // strict comparison with a relative slack keeps the first index on ties
    if (std::abs(v(i)) > best_abs * (1.0 + 1e-12)) {
      best_abs = std::abs(v(i));
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  v *= std::conj(v(best)) / best_abs;
  v(best) = cplx(std::abs(v(best)), 0.0);
}

Mat left_null_space(const Mat& m, double tol) {
  const Index rows = m.rows();
  if (m.cols() == 0) return Mat::Identity(rows, rows);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  Index rank = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol * s(0)) ++rank;
    }
  }
  Mat out = svd.matrixU().rightCols(rows - rank);
  for (Index c = 0; c < out.cols(); ++c) fix_phase(out.col(c));
  return out;
}

double projector_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::kInvalidInput, "projector_distance: row mismatch");
  }
  const Mat pa = a * (a.adjoint() * a).inverse() * a.adjoint();
  const Mat pb = b * (b.adjoint() * b).inverse() * b.adjoint();
  return (pa - pb).norm();
}

double Rng::uniform() {
  // 53 random bits, open at 0 so log() below stays finite
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

Mat ginibre(int n, Rng& rng) {
  Mat g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = cplx(re, im) / std::numbers::sqrt2;
    }
  }
  return g;
}

Mat random_hermitian(int n, Rng& rng) {
  const Mat g = ginibre(n, rng);
  Mat h = 0.5 * (g + g.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 0.0) h /= radius;
  return h;
}

}  // namespace gapopt::linalg
