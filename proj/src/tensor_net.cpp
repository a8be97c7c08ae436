#include "gapopt/tensor_net.hpp"

#include <cmath>
#include <numbers>

namespace gapopt::tn {

namespace {

void check_finite(const std::vector<Mat>& mats) {
  for (const auto& m : mats) {
    if (!m.allFinite()) {
      throw Error(ErrorCode::kInvalidInput, "site tensor has non-finite entries");
    }
  }
}

}  // namespace

SiteTensor::SiteTensor(int phys_dim, int bond_dim) {
  if (phys_dim < 2 || bond_dim < 1) {
    throw Error(ErrorCode::kInvalidSize, "site tensor needs d >= 2 and D >= 1");
  }
  mats_.assign(phys_dim, Mat::Zero(bond_dim, bond_dim));
}

SiteTensor::SiteTensor(std::vector<Mat> matrices) : mats_(std::move(matrices)) {
  if (mats_.size() < 2) {
    throw Error(ErrorCode::kInvalidSize, "site tensor needs d >= 2");
  }
  const Index bond = mats_.front().rows();
  if (bond < 1) throw Error(ErrorCode::kInvalidSize, "site tensor needs D >= 1");
  for (const auto& m : mats_) {
    if (m.rows() != bond || m.cols() != bond) {
      throw Error(ErrorCode::kInvalidSize, "site tensor matrices must be D x D");
    }
  }
  check_finite(mats_);
}

bool SiteTensor::operator==(const SiteTensor& other) const {
  if (mats_.size() != other.mats_.size()) return false;
  for (std::size_t s = 0; s < mats_.size(); ++s) {
    if (mats_[s].rows() != other.mats_[s].rows()) return false;
    if (mats_[s] != other.mats_[s]) return false;
  }
  return true;
}

Mps make_mps(const SiteTensor& tensor, int n_sites) {
  if (n_sites < 2) {
    throw Error(ErrorCode::kInvalidSize, "an MPS chain needs at least 2 sites");
  }
  return Mps{std::vector<SiteTensor>(n_sites, tensor), true};
}

Vec contract_to_statevector(const Mps& mps) {
  const int n = mps.n_sites();
  if (n < 1) throw Error(ErrorCode::kInvalidSize, "empty MPS");
  for (int i = 0; i < n; ++i) {
    const int next = (i + 1) % n;
    if (mps.sites[i].bond_dim() != mps.sites[next].bond_dim()) {
      throw Error(ErrorCode::kInvalidInput, "bond dimensions do not match cyclically");
    }
  }
  const int d = mps.phys_dim();
  const Index dim = checked_pow(d, n);
  const int bond = mps.sites.front().bond_dim();

  Vec psi(dim);
  // prefix[k] = A^{s_0} ... A^{s_{k-1}}; walk strings in big-endian order and
  // only recompute the suffix of the product that changed
  std::vector<Mat> prefix(n + 1, Mat::Identity(bond, bond));
  std::vector<int> digits(n, 0);
  for (int k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * mps.sites[k].matrix(0);
  for (Index x = 0; x < dim; ++x) {
    psi(x) = prefix[n].trace();
    int k = n - 1;
    while (k >= 0 && digits[k] == d - 1) {
      digits[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++digits[k];
    for (int j = k; j < n; ++j) {
      prefix[j + 1] = prefix[j] * mps.sites[j].matrix(digits[j]);
    }
  }
  return psi;
}

InjectivityMap block_tensor(const SiteTensor& tensor, int block_len) {
  if (block_len < 1) throw Error(ErrorCode::kInvalidSize, "block length must be >= 1");
  const int d = tensor.phys_dim();
  const int bond = tensor.bond_dim();
  const Index rows = checked_pow(d, block_len);
  InjectivityMap map{block_len, d, bond, Mat(rows, Index{bond} * bond)};
  for (Index x = 0; x < rows; ++x) {
    Mat prod = Mat::Identity(bond, bond);
    Index rem = x;
    Index place = rows / d;
    for (int k = 0; k < block_len; ++k) {
      const int s = static_cast<int>(rem / place);
      rem %= place;
      place = std::max<Index>(place / d, 1);
      prod = prod * tensor.matrix(s);
    }
    for (int a = 0; a < bond; ++a) {
      for (int b = 0; b < bond; ++b) map.matrix(x, Index{a} * bond + b) = prod(a, b);
    }
  }
  return map;
}

bool is_injective(const InjectivityMap& map, double tol) {
  if (tol <= 0.0) throw Error(ErrorCode::kInvalidInput, "tolerance must be positive");
  const Index target = Index{map.bond_dim} * map.bond_dim;
  if (map.matrix.rows() < target) return false;
  return linalg::numerical_rank(map.matrix, tol) == target;
}

SiteTensor aklt_tensor(double lambda) {
  using std::numbers::sqrt2;
  Mat plus = Mat::Zero(2, 2);
  Mat zero = Mat::Zero(2, 2);
  Mat minus = Mat::Zero(2, 2);
  plus(0, 1) = -lambda;
  zero(0, 0) = 1.0 / sqrt2;
  zero(1, 1) = -lambda / sqrt2;
  minus(1, 0) = lambda;
  return SiteTensor({plus, zero, minus});
}

SiteTensor ghz_tensor(double lambda) {
  Mat a0 = Mat::Zero(2, 2);
  Mat a1 = Mat::Zero(2, 2);
  a0(1, 0) = 1.0;
  a0(1, 1) = 1.0;
  a1(0, 0) = 1.0;
  a1(0, 1) = lambda;
  return SiteTensor({a0, a1});
}

RandomMpsFamily make_random_family(std::uint64_t seed, double t) {
  linalg::Rng rng(seed);
  RandomMpsFamily family;
  family.k1 = linalg::random_hermitian(4, rng);
  family.k2 = linalg::random_hermitian(4, rng);
  family.t = t;
  family.seed = seed;
  family.pair_state_dim = 2;
  return family;
}

Mat random_family_map(const RandomMpsFamily& family, double lambda) {
  if (family.pair_state_dim != 2) {
    throw Error(ErrorCode::kInvalidInput, "only spin-1/2 pairs are supported");
  }
  const Mat q = linalg::exp_hermitian(family.k1, cplx(lambda, 0.0));
  const Mat w = linalg::exp_hermitian(family.k2, cplx(0.0, family.t));
  return q * w;
}

SiteTensor random_family_tensor(const RandomMpsFamily& family, double lambda) {
  if (lambda < 0.0) throw Error(ErrorCode::kInvalidInput, "lambda must be >= 0");
  // singlet amplitudes c(x, y) of (|01> - |10>)/sqrt(2)
  Mat c = Mat::Zero(2, 2);
  c(0, 1) = 1.0 / std::numbers::sqrt2;
  c(1, 0) = -1.0 / std::numbers::sqrt2;

  // bare block tensor: physical (y, x') with y the right spin of the pair to
  // the left and x' the left spin of the pair to the right
  std::vector<Mat> bare(4, Mat::Zero(2, 2));
  for (int y = 0; y < 2; ++y) {
    for (int xp = 0; xp < 2; ++xp) {
      for (int a = 0; a < 2; ++a) bare[2 * y + xp](a, xp) = c(a, y);
    }
  }
  const Mat p = random_family_map(family, lambda);
  std::vector<Mat> mats(4, Mat::Zero(2, 2));
  for (int s = 0; s < 4; ++s) {
    for (int sp = 0; sp < 4; ++sp) mats[s] += p(s, sp) * bare[sp];
  }
  return SiteTensor(std::move(mats));
}

}  // namespace gapopt::tn
