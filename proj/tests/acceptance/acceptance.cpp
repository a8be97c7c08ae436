// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "gapopt/gap_opt.hpp"
#include "gapopt/linalg.hpp"
#include "gapopt/models.hpp"
#include "gapopt/runner.hpp"
#include "gapopt/spectra.hpp"
#include "test_util.hpp"

using namespace gapopt;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kOperatorTol = 1e-10;      // 2: AKLT identity
constexpr double kGhzTermTol = 1e-12;       // 2: GHZ local term
constexpr double kFrustrationTol = 1e-10;   // 3
constexpr double kConcavityTol = 1e-9;      // 4
constexpr double kGradientTol = 1e-5;       // 5
constexpr double kOracleTol = 1e-4;         // 6
constexpr double kCertTol = 1e-5;           // 7: off-diagonal and spread
constexpr double kCommonTol = 1e-6;         // 7: common eigenvalue vs gap
constexpr double kDominanceTol = 1e-9;      // 8
constexpr double kOdeSTol = 1e-3;           // 10
constexpr double kOdeGapTol = 1e-5;         // 10

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string strf(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string strf(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

models::ModelSpec random_spec(int chain, std::uint64_t seed) {
  return {Model::kRandom, chain, models::BasisChoice::kAuto, tn::make_random_family(seed)};
}

// Random point of a template family with min eig(S) above `margin`.
RVec template_point(const opt::Objective& obj, std::mt19937_64& rng, double spread, double margin) {
  std::uniform_real_distribution<double> u(-spread, spread);
  for (int tries = 0; tries < 10000; ++tries) {
    RVec p = obj.canonical_params();
    for (Index k = 0; k < p.size(); ++k) p(k) += u(rng);
    const Eigen::SelfAdjointEigenSolver<Mat> es(obj.s_of(p), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() > margin) return p;
  }
  throw std::runtime_error("no feasible template point found");
}

Mat random_density(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat g(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) g(i, j) = cplx(n(rng), n(rng));
  Mat s = g * g.adjoint() + 0.05 * Mat::Identity(m, m);
  s = 0.5 * (s + s.adjoint()).eval();
  return s / s.trace().real();
}

// Sweeps used by more than one criterion, computed on first use.
struct Shared {
  std::optional<opt::PathResult> aklt8;
  std::vector<opt::PathResult> ghz;     // sector, N = 6, 8 over 41 points
  std::vector<opt::PathResult> oracle;  // AKLT N = 8 at 0.1 and 0.7

  static opt::ProblemSetup aklt8_setup() {
    return opt::make_setup({Model::kAklt, 8}, sym::ground_sector(Model::kAklt), true);
  }
  const opt::PathResult& aklt8_sweep() {
    if (!aklt8) aklt8 = opt::sweep(aklt8_setup(), grid(0.0, 1.0, 21));
    return *aklt8;
  }
  const std::vector<opt::PathResult>& ghz_sector() {
    if (ghz.empty()) {
      for (int n : {6, 8}) {
        const auto setup = opt::make_setup({Model::kGhz, n}, sym::ground_sector(Model::kGhz), true);
        ghz.push_back(opt::sweep(setup, grid(-1.0, 1.0, 41)));
      }
    }
    return ghz;
  }
  const std::vector<opt::PathResult>& oracle_points() {
    if (oracle.empty()) {
      for (double l : {0.1, 0.7}) oracle.push_back(opt::sweep(aklt8_setup(), {l}));
    }
    return oracle;
  }
};

Shared shared;

// ---------------------------------------------------------------- 1

Outcome sector_dimensions() {
  const Index aklt[] = {2, 3, 6, 10, 22, 42, 98, 216, 532};  // N = 2..10
  const Index ghz[] = {2, 4, 4, 8, 9, 18, 23, 44, 63, 122};   // N = 3..12
  int bad = 0;
  std::string first;
  for (int n = 2; n <= 10; ++n) {
    const Index d = sym::sector_dimension(Model::kAklt, n, sym::ground_sector(Model::kAklt));
    if (d != aklt[n - 2]) {
      ++bad;
      if (first.empty()) first = strf(" (AKLT N=%d: %lld)", n, static_cast<long long>(d));
    }
  }
  for (int n = 3; n <= 12; ++n) {
    const Index d = sym::sector_dimension(Model::kGhz, n, sym::ground_sector(Model::kGhz));
    if (d != ghz[n - 3]) {
      ++bad;
      if (first.empty()) first = strf(" (GHZ N=%d: %lld)", n, static_cast<long long>(d));
    }
  }
  return {bad == 0, strf("19 tabulated dimensions, %d mismatches%s; AKLT N=8 -> %lld, GHZ N=10 -> %lld", bad,
                        first.c_str(),
                        static_cast<long long>(sym::sector_dimension(Model::kAklt, 8, sym::ground_sector(Model::kAklt))),
                        static_cast<long long>(sym::sector_dimension(Model::kGhz, 10, sym::ground_sector(Model::kGhz))))};
}

// ---------------------------------------------------------------- 2

Outcome canonical_operators() {
  using testutil::kron_all;
  using testutil::site_op;
  const int n = 4;
  const Mat sz = testutil::spin1_z();
  const Mat sp = testutil::spin1_plus();
  const Mat sm = sp.adjoint();
  const Index dim = 81;
  Mat ref = Mat::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Mat ss = site_op(sz, i, n) * site_op(sz, j, n) +
                   0.5 * (site_op(sp, i, n) * site_op(sm, j, n) + site_op(sm, i, n) * site_op(sp, j, n));
    ref += 0.5 * ss + ss * ss / 6.0 + Mat::Identity(dim, dim) / 3.0;
  }
  const auto basis = ph::aklt_kernel_basis(1.0);
  const double fifth = linalg::max_abs(Mat(ph::assemble(basis, Mat::Identity(5, 5) / 5.0, n).matrix) - ref / 5.0);
  const double unit = linalg::max_abs(Mat(ph::assemble(basis, Mat::Identity(5, 5), n).matrix) - ref);

  const Mat x = testutil::pauli_x();
  const Mat z = testutil::pauli_z();
  const Mat id = Mat::Identity(2, 2);
  double ghz = 0.0;
  for (double l : grid(-1.0, 1.0, 21)) {
    const Mat h = ph::local_term(ph::ghz_kernel_basis(l), Mat::Identity(4, 4) / 4.0);
    const double den = 16.0 * (1.0 + l * l);
    const Mat expect = Mat::Identity(8, 8) / 8.0 - (1 + l) * (1 + l) / den * kron_all({id, x, id}) -
                       (1 - l * l) / den * (kron_all({z, z, id}) + kron_all({id, z, z})) +
                       (1 - l) * (1 - l) / den * kron_all({z, x, z});
    ghz = std::max(ghz, linalg::max_abs(h - expect));
  }
  const bool pass = fifth < kOperatorTol && unit < kOperatorTol && ghz < kGhzTermTol;
  return {pass, strf("AKLT N=4: |H(1/5) - sum/5| = %.1e, |H(1) - sum| = %.1e (< %.0e); "
                    "GHZ term over 21 lambdas: %.1e (< %.0e)",
                    fifth, unit, kOperatorTol, ghz, kGhzTermTol)};
}

// ---------------------------------------------------------------- 3

Outcome frustration_free() {
  std::mt19937_64 rng(3);
  struct Case {
    models::ModelSpec spec;
    double lo, hi;
  };
  const std::vector<Case> cases = {
      {{Model::kAklt, 6}, 0.0, 1.0}, {{Model::kGhz, 8}, -1.0, 1.0}, {random_spec(4, 7), 0.0, 1.0}};
  double worst_rq = 0.0, worst_e0 = 0.0;
  int count = 0;
  for (const auto& c : cases) {
    for (double l : grid(c.lo, c.hi, 21)) {
      const auto basis = models::kernel_basis(c.spec, l);
      const Vec psi = models::ground_state(c.spec, l);
      for (int t = 0; t < 20; ++t) {
        const auto h = ph::assemble(basis, random_density(basis.m(), rng), c.spec.n_sites);
        const double rq = std::abs(psi.dot(h.matrix * psi)) / psi.squaredNorm();
        const auto eig = spectra::lowest_eigenpairs(h, 2, spectra::default_deg_tol(h));
        worst_rq = std::max(worst_rq, rq);
        worst_e0 = std::max(worst_e0, std::abs(eig.eigenvalues(0)));
        ++count;
      }
    }
  }
  return {worst_rq < kFrustrationTol && worst_e0 <= kFrustrationTol,
          strf("%d Hamiltonians (AKLT N=6, GHZ N=8, random N=8): max <psi|H|psi> = %.1e, max |E0| = %.1e (< %.0e)",
              count, worst_rq, worst_e0, kFrustrationTol)};
}

// ---------------------------------------------------------------- 4

double gap_of(const ph::KernelBasis& basis, const Mat& s, int n, const sym::SectorMap* sector) {
  return spectra::spectral_gap(ph::assemble(basis, s, n, sector)).gap;
}

Outcome concavity() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = -1e300;
  int count = 0;
  const std::vector<models::ModelSpec> specs = {{Model::kAklt, 6}, {Model::kGhz, 6}, random_spec(3, 11)};
  for (const auto& spec : specs) {
    const bool symmetric = spec.model != Model::kRandom;
    std::optional<sym::SectorMap> sector;
    if (symmetric) sector = sym::build_sector(spec.model, spec.n_sites, sym::ground_sector(spec.model));
    const auto setup = symmetric ? opt::make_setup(spec, sym::ground_sector(spec.model), true)
                                 : opt::make_setup(spec, std::nullopt, false);
    const double lo = spec.model == Model::kGhz ? -0.95 : 0.05;
    for (int t = 0; t < 200; ++t) {
      const double l = lo + (1.0 - lo) * u(rng);
      const opt::Objective obj(setup, l);
      Mat s0, s1;
      if (symmetric) {
        s0 = obj.s_of(template_point(obj, rng, 0.15, 1e-3));
        s1 = obj.s_of(template_point(obj, rng, 0.15, 1e-3));
      } else {
        s0 = random_density(obj.m(), rng);
        s1 = random_density(obj.m(), rng);
      }
      const double s = u(rng);
      const auto& basis = obj.basis();
      const sym::SectorMap* w = sector ? &*sector : nullptr;
      const double mid = gap_of(basis, (1 - s) * s0 + s * s1, spec.n_sites, w);
      const double chord = (1 - s) * gap_of(basis, s0, spec.n_sites, w) + s * gap_of(basis, s1, spec.n_sites, w);
      worst = std::max(worst, chord - mid);
      ++count;
    }
  }
  return {worst <= kConcavityTol,
          strf("%d triples (AKLT, GHZ sectors; random full space; N=6): max chord - value = %.2e (<= %.0e)", count,
              worst, kConcavityTol)};
}

// ---------------------------------------------------------------- 5

Outcome gradients() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  struct Kind {
    const char* name;
    opt::ProblemSetup setup;
    double lo, hi;
  };
  std::vector<Kind> kinds;
  kinds.push_back({"aklt-template", opt::make_setup({Model::kAklt, 6}, sym::ground_sector(Model::kAklt), true), 0.05, 1.0});
  kinds.push_back({"ghz-template", opt::make_setup({Model::kGhz, 6}, sym::ground_sector(Model::kGhz), true), -0.95, 0.95});
  kinds.push_back({"random-full", opt::make_setup(random_spec(3, 21), std::nullopt, false), 0.0, 1.0});
  kinds.push_back({"random-sector", opt::make_setup(random_spec(3, 22), sym::ground_sector(Model::kRandom), false), 0.0, 1.0});
  kinds.push_back({"ghz-generator", opt::make_setup({Model::kGhz, 5}, std::nullopt, false), 0.1, 0.95});
  double worst = 0.0;
  int skipped = 0;
  const double h = 1e-5;
  for (int t = 0; t < 50; ++t) {
    const auto& k = kinds[t % kinds.size()];
    for (;;) {
      const opt::Objective obj(k.setup, k.lo + (k.hi - k.lo) * u(rng));
      RVec p;
      if (obj.template_mode()) {
        p = template_point(obj, rng, 0.05, 1e-2);
      } else {
        p = RVec::NullaryExpr(obj.n_params(), [&](Index) { return 0.5 * n(rng); });
      }
      const auto ev = obj.evaluate(p);
      if (ev.subgradient || ev.degenerate) {
        ++skipped;  // no gradient at a level crossing
        continue;
      }
      RVec fd(p.size());
      for (Index i = 0; i < p.size(); ++i) {
        RVec a = p, b = p;
        a(i) += h;
        b(i) -= h;
        fd(i) = (obj.evaluate(a).value - obj.evaluate(b).value) / (2 * h);
      }
      worst = std::max(worst, (ev.gradient - fd).norm() / std::max(fd.norm(), 1e-12));
      break;
    }
  }
  return {worst < kGradientTol, strf("50 configurations over 5 problem kinds (%d redraws at crossings): "
                                    "max relative error %.2e (< %.0e)",
                                    skipped, worst, kGradientTol)};
}

// ---------------------------------------------------------------- 6

Outcome oracle() {
  const int n = 8;
  const int steps = 200;
  const auto tmpl = sym::symmetric_s_template(Model::kAklt);
  const auto sector = sym::build_sector(Model::kAklt, n, sym::ground_sector(Model::kAklt));
  double worst = 0.0;
  std::string detail;
  const auto& paths = shared.oracle_points();
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const auto& pt = paths[k].points.front();
    const double l = pt.lambda;
    if (!pt.ok) return {false, strf("sweep failed at lambda=%.1f: %s", l, pt.error.c_str())};

    // independent oracle: sector matrices of the three affine pieces,
    // diagonalized with Eigen on a closed grid over S11, S22 in [0, 1/2]
    const auto basis = models::kernel_basis({Model::kAklt, n}, l);
    const Mat h0 = Mat(ph::assemble(basis, tmpl.offset, n, &sector).matrix);
    const Mat h1 = Mat(ph::assemble(basis, tmpl.directions[0], n, &sector).matrix);
    const Mat h2 = Mat(ph::assemble(basis, tmpl.directions[1], n, &sector).matrix);
    double best = -1.0, b11 = 0, b22 = 0;
    Eigen::SelfAdjointEigenSolver<Mat> es;
    for (int i = 0; i < steps; ++i) {
      for (int j = 0; j < steps; ++j) {
        const double s11 = 0.5 * i / (steps - 1);
        const double s22 = 0.5 * j / (steps - 1);
        if (1.0 - 2 * s11 - 2 * s22 < -1e-14) continue;
        es.compute(h0 + s11 * h1 + s22 * h2, Eigen::EigenvaluesOnly);
        const double g = es.eigenvalues()(1) - es.eigenvalues()(0);
        if (g > best) {
          best = g;
          b11 = s11;
          b22 = s22;
        }
      }
    }
    const double diff = std::abs(pt.gap_optimized - best);
    worst = std::max(worst, diff);
    detail += strf("lambda=%.1f: BFGS %.8f at (%.4f, %.4f), grid %.8f at (%.4f, %.4f); ", l, pt.gap_optimized,
                  pt.params(0), pt.params(1), best, b11, b22);
  }
  return {worst < kOracleTol, detail + strf("max |diff| = %.1e (< %.0e)", worst, kOracleTol)};
}

// ---------------------------------------------------------------- 7

Outcome certificates() {
  std::vector<const opt::PathResult*> paths = {&shared.aklt8_sweep()};
  for (const auto& p : shared.ghz_sector()) paths.push_back(&p);
  for (const auto& p : shared.oracle_points()) paths.push_back(&p);
  int checked = 0, failed = 0, unconverged = 0;
  double off = 0.0, spread = 0.0, common = 0.0;
  for (const auto* path : paths) {
    for (const auto& pt : path->points) {
      if (!pt.ok || !pt.converged) {
        ++unconverged;
        continue;
      }
      const auto& c = pt.certificate;
      ++checked;
      const double dc = std::abs(c.common_value - pt.gap_optimized);
      off = std::max(off, c.off_diag_norm);
      spread = std::max(spread, c.eigen_spread);
      common = std::max(common, dc);
      if (!c.evaluated || !(c.off_diag_norm < kCertTol) || !(c.eigen_spread < kCertTol) || !(dc < kCommonTol)) {
        ++failed;
      }
    }
  }
  return {checked > 0 && failed == 0,
          strf("%d converged sector optima (%d unconverged/nonsmooth skipped): max off-diag %.1e, max spread %.1e "
              "(< %.0e), max |common - gap| %.1e (< %.0e); %d violations",
              checked, unconverged, off, spread, kCertTol, common, kCommonTol, failed)};
}

// ---------------------------------------------------------------- 8

Outcome ghz_degeneracy() {
  bool pass = true;
  std::string detail;
  for (int n : {6, 8}) {
    const auto basis = ph::ghz_kernel_basis(0.0);
    const Mat s = Mat::Identity(4, 4) / 4.0;
    const auto full = spectra::spectral_gap(ph::assemble(basis, s, n));
    const auto sector = sym::build_sector(Model::kGhz, n, sym::ground_sector(Model::kGhz));
    const auto sec = spectra::spectral_gap(ph::assemble(basis, s, n, &sector));
    const bool ok_full = full.ground_degeneracy == 2 && full.gap == 0.0;
    const bool ok_sec = sec.gap > 0.0 && sec.ground_degeneracy == 1;
    pass = pass && ok_full && ok_sec;
    detail += strf("N=%d: full-space degeneracy %d gap %g, sector gap %.6f; ", n, full.ground_degeneracy, full.gap,
                  sec.gap);
  }
  double worst = 1e300;
  int points = 0, failed_points = 0;
  for (const auto& path : shared.ghz_sector()) {
    for (const auto& pt : path.points) {
      ++points;
      if (!pt.ok) {
        ++failed_points;
        continue;
      }
      worst = std::min(worst, pt.gap_optimized - pt.gap_canonical);
    }
  }
  pass = pass && failed_points == 0 && worst >= -kDominanceTol;
  return {pass, detail + strf("sector sweeps N=6,8 x 41 points: min(opt - can) = %.2e (>= -%.0e), %d/%d failed",
                             worst, kDominanceTol, failed_points, points)};
}

// ---------------------------------------------------------------- 9

Outcome random_improvement() {
  opt::SweepOptions opts;
  opts.maximize.max_iter = 2000;
  opts.init = opt::InitMode::kCanonical;
  bool every = true;
  double mean[2] = {0.0, 0.0};
  std::string ratios[2];
  const int seeds = 10;
  for (int which = 0; which < 2; ++which) {
    const int spins = which == 0 ? 6 : 8;
    for (int seed = 1; seed <= seeds; ++seed) {
      const auto setup = opt::make_setup(random_spec(spins / 2, seed), std::nullopt, false);
      const auto path = opt::sweep(setup, {1.0}, opts);
      const auto& pt = path.points.front();
      double r = pt.ok ? pt.gap_optimized / pt.gap_canonical : std::nan("");
      if (!(r > 1.0)) every = false;
      mean[which] += r / seeds;
      ratios[which] += strf("%s%.1f", seed == 1 ? "" : " ", r);
    }
  }
  const bool trend = mean[1] > mean[0];
  return {every && trend, strf("ratio > 1 for every seed: %s; mean N=6 %.2f [%s], mean N=8 %.2f [%s]; "
                              "N=8 mean above N=6: %s",
                              every ? "yes" : "no", mean[0], ratios[0].c_str(), mean[1], ratios[1].c_str(),
                              trend ? "yes" : "no")};
}

// ---------------------------------------------------------------- 10

Outcome ode_equivalence() {
  const auto& sweep = shared.aklt8_sweep();
  const auto setup = shared.aklt8_setup();
  const auto lambdas = grid(0.0, 1.0, 21);
  RVec start;
  if (sweep.points.front().ok && sweep.points.front().certificate.passed) start = sweep.points.front().params;
  const auto ode = opt::ode_follow(setup, lambdas, start);
  double ds = 0.0, dg = 0.0;
  int restarts = 0, failed = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& a = ode.points[i];
    const auto& b = sweep.points[i];
    if (!a.ok || !b.ok) {
      ++failed;
      continue;
    }
    if (a.ode_restart) ++restarts;
    ds = std::max(ds, linalg::max_abs(a.s - b.s));
    dg = std::max(dg, std::abs(a.gap_optimized - b.gap_optimized));
  }
  return {failed == 0 && ds < kOdeSTol && dg < kOdeGapTol,
          strf("AKLT N=8 sector, 21 points: max |S_ode - S_sweep| = %.1e (< %.0e), max |gap diff| = %.1e (< %.0e), "
              "%d pointwise restarts, %d failed",
              ds, kOdeSTol, dg, kOdeGapTol, restarts, failed)};
}

// ---------------------------------------------------------------- 11

std::string csv_body_of(const fs::path& file) {
  std::ifstream in(file);
  std::stringstream s;
  s << in.rdbuf();
  const std::string text = s.str();
  return text.substr(text.find('\n') + 1);
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "gapopt_acceptance_determinism";
  fs::remove_all(root);
  const char* configs[] = {
      "[model]\nname = aklt\nn_sites = 6\n[lambda]\nsteps = 6\n",
      "[model]\nname = ghz\nn_sites = 6\n[lambda]\nstart = -1\nsteps = 6\n",
      "[model]\nname = random\nn_sites = 6\n[lambda]\nsteps = 4\n[optimizer]\nmax_iter = 150\n"
      "[random_model]\nseed = 3\nn_instances = 2\n",
  };
  int compared = 0, differing = 0;
  for (int k = 0; k < 3; ++k) {
    auto c = cfg::parse_config(configs[k]);
    std::vector<std::string> bodies[2];
    for (int rep = 0; rep < 2; ++rep) {
      c.out_dir = (root / strf("c%d_r%d", k, rep)).string();
      const auto r = run::run_experiment(c, rep + 1);  // also vary the worker count
      for (const auto& inst : r.instances) bodies[rep].push_back(csv_body_of(fs::path(inst.dir) / "results.csv"));
    }
    for (std::size_t i = 0; i < bodies[0].size(); ++i) {
      ++compared;
      if (bodies[0][i] != bodies[1][i] || bodies[0][i].empty()) ++differing;
    }
  }
  fs::remove_all(root);
  return {differing == 0, strf("%d CSV bodies rerun (1 vs 2 workers): %d differ", compared, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  // arguments: criterion ids to run (default all); --allow-fail ID keeps a
  // known failure from setting the exit code, its FAIL line is still printed
  std::vector<int> only, allowed;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--allow-fail") == 0 && i + 1 < argc) {
      allowed.push_back(std::atoi(argv[++i]));
    } else {
      only.push_back(std::atoi(argv[i]));
    }
  }
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "sector dimensions", sector_dimensions},
      {2, "canonical operators", canonical_operators},
      {3, "frustration freeness", frustration_free},
      {4, "concavity", concavity},
      {5, "gradient", gradients},
      {6, "optimizer vs grid oracle", oracle},
      {7, "optimality certificate", certificates},
      {8, "GHZ degeneracy and dominance", ghz_degeneracy},
      {9, "random-MPS improvement", random_improvement},
      {10, "ODE vs pointwise", ode_equivalence},
      {11, "determinism", determinism},
  };
  int run = 0, failures = 0, blocking = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) {
      ++failures;
      if (std::find(allowed.begin(), allowed.end(), c.id) == allowed.end()) ++blocking;
    }
    const std::string line = strf("%s [%2d] %s: ", o.pass ? "PASS" : "FAIL", c.id, c.name) + o.detail +
                             strf(" (%.1f s)", secs);
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    ++run;
  }
  std::printf("%d of %d criteria passed", run - failures, run);
  if (failures > blocking) std::printf(" (%d known failure%s allowed)", failures - blocking, failures - blocking == 1 ? "" : "s");
  std::printf("\n");
  return blocking == 0 ? 0 : 1;
}
