#pragma once

#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/linalg.hpp"

/// Matrix-product-state tensors, blocking, and the three interpolation
/// families (AKLT, GHZ/cluster, random injective).
///
/// Index conventions, used everywhere in the library:
///  - a physical multi-index (s_1, ..., s_L) is flattened big-endian,
///    i.e. s_1 is the most significant digit;
///  - a virtual pair (a, b) is flattened row-major, a * D + b;
///  - AKLT physical levels are ordered (+1, 0, -1);
///  - spin-1/2 levels are ordered (up, down) = (0, 1).
namespace gapopt::tn {

class SiteTensor {
 public:
  SiteTensor(int phys_dim, int bond_dim);
  explicit SiteTensor(std::vector<Mat> matrices);

  int phys_dim() const { return static_cast<int>(mats_.size()); }
  int bond_dim() const { return static_cast<int>(mats_.front().rows()); }

  const Mat& matrix(int sigma) const { return mats_.at(sigma); }
  Mat& matrix(int sigma) { return mats_.at(sigma); }
  cplx entry(int sigma, int alpha, int beta) const {
    return mats_.at(sigma)(alpha, beta);
  }

  bool operator==(const SiteTensor& other) const;

 private:
  std::vector<Mat> mats_;
};

struct Mps {
  std::vector<SiteTensor> sites;
  bool translation_invariant = true;

  int n_sites() const { return static_cast<int>(sites.size()); }
  int phys_dim() const { return sites.front().phys_dim(); }
};

struct InjectivityMap {
  int block_len = 0;
  int phys_dim = 0;
  int bond_dim = 0;
  /// (d^L) x (D^2); entry (s_1..s_L, (a,b)) = (A^{s_1} ... A^{s_L})_{a,b}.
  Mat matrix;
};

struct RandomMpsFamily {
  Mat k1;  // generator of Q = exp(lambda K1)
  Mat k2;  // generator of W = exp(i K2 t)
  double t = 0.0;
  std::uint64_t seed = 0;
  int pair_state_dim = 2;
};

Mps make_mps(const SiteTensor& tensor, int n_sites);

/// Unnormalized amplitudes of the periodic MPS, length d^N.
Vec contract_to_statevector(const Mps& mps);

InjectivityMap block_tensor(const SiteTensor& tensor, int block_len);

bool is_injective(const InjectivityMap& map, double tol);

/// Product state |0...0> at lambda = 0, AKLT state at lambda = 1.
SiteTensor aklt_tensor(double lambda);

/// A0 = [[0,0],[1,1]], A1 = [[1,lambda],[0,0]]: product state at -1,
/// GHZ at 0, cluster state at +1.
SiteTensor ghz_tensor(double lambda);

/// Draws K1, then K2, from one Rng stream seeded with `seed`.
RandomMpsFamily make_random_family(std::uint64_t seed, double t = 0.0);

/// Singlet pairs (up down - down up)/sqrt(2) with the map
/// P = exp(lambda K1) exp(i K2 t) applied to the two spins of each block.
/// Block j holds the right spin of pair j and the left spin of pair j+1, so
/// the blocked tensor has d = 4, D = 2.
SiteTensor random_family_tensor(const RandomMpsFamily& family, double lambda);

/// P = exp(lambda K1) exp(i K2 t) as a 4x4 matrix on one block.
Mat random_family_map(const RandomMpsFamily& family, double lambda);

}  // namespace gapopt::tn
