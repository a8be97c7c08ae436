#include <cmath>

#include "doctest.h"
#include "gapopt/tensor_net.hpp"
#include "test_util.hpp"

using namespace gapopt;

namespace {

// Sum over every physical string and every closed virtual loop explicitly.
Vec brute_force_contract(const tn::SiteTensor& a, int n) {
  const int d = a.phys_dim();
  const int bond = a.bond_dim();
  Index dim = 1;
  for (int i = 0; i < n; ++i) dim *= d;
  Index loops = 1;
  for (int i = 0; i < n; ++i) loops *= bond;
  Vec out = Vec::Zero(dim);
  for (Index x = 0; x < dim; ++x) {
    std::vector<int> s(n);
    Index rem = x;
    for (int i = n - 1; i >= 0; --i) {
      s[i] = static_cast<int>(rem % d);
      rem /= d;
    }
    for (Index v = 0; v < loops; ++v) {
      std::vector<int> alpha(n);
      Index r = v;
      for (int i = 0; i < n; ++i) {
        alpha[i] = static_cast<int>(r % bond);
        r /= bond;
      }
      cplx prod = 1.0;
      for (int i = 0; i < n; ++i) prod *= a.entry(s[i], alpha[i], alpha[(i + 1) % n]);
      out(x) += prod;
    }
  }
  return out;
}

int rank_of(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * sv(0)) ++r;
  }
  return r;
}

}  // namespace

TEST_CASE("contraction matches the brute-force loop sum") {
  const auto family = tn::make_random_family(11);
  const std::vector<std::pair<tn::SiteTensor, int>> cases = {
      {tn::aklt_tensor(0.7), 5}, {tn::aklt_tensor(1.0), 6}, {tn::ghz_tensor(0.4), 6},
      {tn::ghz_tensor(-0.8), 5}, {tn::random_family_tensor(family, 0.6), 4}};
  for (const auto& [tensor, n] : cases) {
    const Vec fast = tn::contract_to_statevector(tn::make_mps(tensor, n));
    const Vec slow = brute_force_contract(tensor, n);
    CHECK((fast - slow).norm() <= 1e-12 * slow.norm());
  }
}

TEST_CASE("AKLT product-state end is |0...0>") {
  const Vec psi = tn::contract_to_statevector(tn::make_mps(tn::aklt_tensor(0.0), 5));
  // level 0 is index 1 in (+1, 0, -1), so |00000> = 1 + 3 + 9 + 27 + 81
  const Index zero_string = 121;
  CHECK(std::abs(psi(zero_string)) > 0.1);
  CHECK(psi.norm() == doctest::Approx(std::abs(psi(zero_string))).epsilon(1e-14));
}

TEST_CASE("GHZ point contracts to |000> + |111>") {
  const Vec psi = tn::contract_to_statevector(tn::make_mps(tn::ghz_tensor(0.0), 3));
  REQUIRE(psi.size() == 8);
  for (Index x = 0; x < 8; ++x) {
    const double expect = (x == 0 || x == 7) ? 1.0 : 0.0;
    CHECK(std::abs(psi(x) - expect) < 1e-14);
  }
}

TEST_CASE("tensor families") {
  const auto a = tn::aklt_tensor(0.5);
  CHECK(a.phys_dim() == 3);
  CHECK(a.bond_dim() == 2);
  CHECK(a.entry(0, 0, 1) == cplx(-0.5));
  CHECK(a.entry(0, 0, 0) == cplx(0.0));
  CHECK(a.entry(0, 1, 0) == cplx(0.0));
  const auto a0 = tn::aklt_tensor(0.0);
  CHECK(a0.matrix(0).norm() == 0.0);
  CHECK(a0.matrix(2).norm() == 0.0);
  CHECK(std::abs(a0.entry(1, 0, 0) - 1.0 / std::sqrt(2.0)) < 1e-16);

  const auto g = tn::ghz_tensor(1.0);
  CHECK(g.entry(0, 1, 0) == cplx(1.0));
  CHECK(g.entry(0, 1, 1) == cplx(1.0));
  CHECK(g.entry(1, 0, 0) == cplx(1.0));
  CHECK(g.entry(1, 0, 1) == cplx(1.0));
  CHECK(tn::ghz_tensor(-1.0).entry(1, 0, 1) == cplx(-1.0));
}

TEST_CASE("make_mps validates the chain length") {
  CHECK_THROWS_AS(tn::make_mps(tn::aklt_tensor(1.0), 1), Error);
  const auto mps = tn::make_mps(tn::aklt_tensor(1.0), 4);
  CHECK(mps.n_sites() == 4);
  CHECK(mps.phys_dim() == 3);
  CHECK(mps.sites[0] == mps.sites[3]);
}

TEST_CASE("size guard on dense contraction") {
  try {
    tn::contract_to_statevector(tn::make_mps(tn::aklt_tensor(1.0), 13));
    FAIL("expected the size guard");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooLarge);
  }
}

TEST_CASE("injectivity after blocking") {
  const auto aklt2 = tn::block_tensor(tn::aklt_tensor(1.0), 2);
  CHECK(aklt2.matrix.rows() == 9);
  CHECK(aklt2.matrix.cols() == 4);
  CHECK(rank_of(aklt2.matrix) == 4);
  CHECK(tn::is_injective(aklt2, 1e-10));
  CHECK_FALSE(tn::is_injective(tn::block_tensor(tn::aklt_tensor(1.0), 1), 1e-10));

  const auto ghz3 = tn::block_tensor(tn::ghz_tensor(0.5), 3);
  CHECK(ghz3.matrix.rows() == 8);
  CHECK(rank_of(ghz3.matrix) == 4);
  const auto ghz0 = tn::block_tensor(tn::ghz_tensor(0.0), 3);
  CHECK(rank_of(ghz0.matrix) < 4);
  CHECK_FALSE(tn::is_injective(ghz0, 1e-10));
  CHECK_THROWS_AS(tn::is_injective(ghz3, 0.0), Error);

  for (int k = 1; k <= 20; ++k) {
    const double lambda = 0.05 * k;
    CHECK(tn::is_injective(tn::block_tensor(tn::aklt_tensor(lambda), 2), 1e-10));
  }
}

TEST_CASE("two-site blocking composes single-site blocks") {
  const auto t = tn::ghz_tensor(0.3);
  const auto one = tn::block_tensor(t, 1);
  const auto two = tn::block_tensor(t, 2);
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      Mat a(2, 2), b(2, 2);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          a(r, c) = one.matrix(s1, 2 * r + c);
          b(r, c) = one.matrix(s2, 2 * r + c);
        }
      }
      const Mat ab = a * b;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) CHECK(std::abs(two.matrix(2 * s1 + s2, 2 * r + c) - ab(r, c)) < 1e-15);
      }
    }
  }
}

TEST_CASE("random family") {
  const auto f1 = tn::make_random_family(7);
  const auto f2 = tn::make_random_family(7);
  CHECK(f1.k1 == f2.k1);
  CHECK(f1.k2 == f2.k2);
  CHECK(linalg::max_abs(f1.k1 - f1.k1.adjoint()) <= 1e-12);
  CHECK(linalg::max_abs(f1.k2 - f1.k2.adjoint()) <= 1e-12);
  CHECK(tn::random_family_tensor(f1, 0.3) == tn::random_family_tensor(f2, 0.3));
  CHECK_FALSE(tn::make_random_family(8).k1 == f1.k1);

  const auto map = tn::block_tensor(tn::random_family_tensor(f1, 0.3), 2);
  CHECK(map.matrix.rows() == 16);
  CHECK(rank_of(map.matrix) == 4);
  CHECK(tn::is_injective(map, 1e-10));
  CHECK_THROWS_AS(tn::random_family_tensor(f1, -0.1), Error);

  // lambda = 0, t = 0: the bare singlet-pair tensor, A^{(y,x')}_{a,b} = c(a,y) delta(x',b)
  const auto bare = tn::random_family_tensor(f1, 0.0);
  const double h = 1.0 / std::sqrt(2.0);
  const double c[2][2] = {{0.0, h}, {-h, 0.0}};
  for (int y = 0; y < 2; ++y) {
    for (int xp = 0; xp < 2; ++xp) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double expect = b == xp ? c[a][y] : 0.0;
          CHECK(std::abs(bare.entry(2 * y + xp, a, b) - expect) < 1e-15);
        }
      }
    }
  }
}

TEST_CASE("random family with t uses the unitary factor") {
  const auto f0 = tn::make_random_family(3, 0.0);
  const auto f1 = tn::make_random_family(3, 0.4);
  const Mat p0 = tn::random_family_map(f0, 0.5);
  const Mat p1 = tn::random_family_map(f1, 0.5);
  // P = Q W with W unitary, so P P^dagger is independent of t
  CHECK(linalg::max_abs(p0 * p0.adjoint() - p1 * p1.adjoint()) < 1e-12);
  CHECK(linalg::max_abs(p0 - p1) > 1e-3);
}
