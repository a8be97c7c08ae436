#pragma once

#include <random>

#include "gapopt/common.hpp"

namespace gapopt::linalg {

double max_abs(const Mat& m);
bool is_hermitian(const Mat& m, double tol);

/// U diag(exp(factor * k_i)) U^dagger for Hermitian K = U diag(k) U^dagger.
Mat exp_hermitian(const Mat& k, cplx factor);

/// Number of singular values above tol * sigma_max.
int numerical_rank(const Mat& m, double tol);

/// Rotate v so that its largest-magnitude entry (first one on ties) is real
/// and positive.
void fix_phase(Eigen::Ref<Vec> v);

/// Orthonormal basis of {x : x^dagger m = 0}, i.e. the orthogonal complement
/// of the column space, one phase-fixed vector per column.
Mat left_null_space(const Mat& m, double tol);

/// Frobenius distance between the orthogonal projectors onto span(a), span(b).
double projector_distance(const Mat& a, const Mat& b);

/// Pseudorandom source for every stochastic draw in the library:
/// std::mt19937_64 raw output, 53-bit uniforms, Box-Muller normals.
/// The stream is fully specified, so draws are identical across toolchains.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/box-muller v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Complex Ginibre matrix, entries (a + ib)/sqrt(2) with a,b standard normal.
Mat ginibre(int n, Rng& rng);

/// (G + G^dagger)/2 of a Ginibre draw, scaled to unit spectral radius.
Mat random_hermitian(int n, Rng& rng);

}  // namespace gapopt::linalg
