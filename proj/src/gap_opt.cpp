#include "gapopt/gap_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gapopt/linalg.hpp"

namespace gapopt::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_norm(const RVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Divided difference of exp(-x): (e^-x - e^-y)/(x - y), limit -e^-x.
double exp_divided_difference(double x, double y) {
  const double d = x - y;
  if (std::abs(d) < 1e-300) return -std::exp(-x);
  // e^-x - e^-y = e^-y (e^-(x-y) - 1)
  return std::exp(-y) * std::expm1(-d) / d;
}

}  // namespace

// ---------------------------------------------------------------------------

AscentResult bfgs_maximize(const EvalFn& eval, const RVec& x0, const MaximizeOptions& opts,
                           const MaxStepFn& max_step) {
  const Index n = x0.size();
  AscentResult r;
  r.x = x0;
  PointEval cur = eval(x0);
  ++r.evaluations;
  if (!cur.feasible || !std::isfinite(cur.value)) {
    throw Error(ErrorCode::kFeasibility, "initial point is not feasible");
  }
  r.subgradient_seen = cur.subgradient;
  r.history.push_back(cur.value);

  RMat hinv = RMat::Identity(n, n);
  bool fresh = true;
  double trust = 1.0;
  int failures = 0;

  for (;;) {
    const double gnorm = max_norm(cur.gradient);
    if (gnorm < opts.grad_tol) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      break;
    }
    if (r.iterations >= opts.max_iter) {
      r.message = "iteration limit reached";
      break;
    }
    RVec d = hinv * cur.gradient;
    double slope = cur.gradient.dot(d);
    if (!(slope > 0.0)) {
      hinv.setIdentity();
      fresh = true;
      d = cur.gradient;
      slope = d.squaredNorm();
    }
    // no single trial step moves a parameter by more than `trust`
    double alpha = trust / std::max(max_norm(d), 1e-300);
    alpha = std::min(alpha, 1.0);
    if (fresh) alpha = std::min(alpha, trust / std::max(gnorm, 1e-300));
    if (max_step) {
      const double am = max_step(r.x, d);
      if (std::isfinite(am)) alpha = std::min(alpha, opts.boundary_fraction * am);
    }
    // below this predicted change the objective is dominated by rounding, and
    // steps are judged by the directional derivative instead
    const double noise = 1e-12 * std::max(1.0, std::abs(cur.value));

    bool accepted = false;
    RVec xt;
    PointEval pt;
    for (int bt = 0; bt < opts.max_backtracks && alpha > 0.0; ++bt, alpha *= 0.5) {
      xt = r.x + alpha * d;
      pt = eval(xt);
      ++r.evaluations;
      if (!pt.feasible || !std::isfinite(pt.value)) continue;
      const double gain = pt.value - cur.value;
      if (gain >= opts.armijo * alpha * slope) {
        accepted = true;
        break;
      }
      if (alpha * slope < noise && gain >= -noise && pt.gradient.dot(d) >= -0.5 * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ++failures;
      if (failures == 1) {
        hinv.setIdentity();
        fresh = true;
        continue;
      }
      if (failures == 2) {
        trust *= 0.5;
        hinv.setIdentity();
        fresh = true;
        continue;
      }
      r.nonsmooth = true;
      r.message = "line search failed repeatedly";
      break;
    }
    failures = 0;

    const RVec s = xt - r.x;
    const RVec y = cur.gradient - pt.gradient;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (fresh) hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const RMat id = RMat::Identity(n, n);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) +
             rho * s * s.transpose();
      fresh = false;
    }
    r.x = xt;
    cur = pt;
    ++r.iterations;
    r.subgradient_seen = r.subgradient_seen || pt.subgradient;
    r.history.push_back(cur.value);

    const std::size_t w = static_cast<std::size_t>(std::max(opts.stall_window, 0));
    if (w > 0 && r.subgradient_seen && r.history.size() > w &&
        cur.value - r.history[r.history.size() - 1 - w] <= noise) {
      r.nonsmooth = true;
      r.message = "no progress at a nonsmooth point";
      break;
    }
  }
  r.value = cur.value;
  r.gradient = cur.gradient;
  return r;
}

// ---------------------------------------------------------------------------

ProblemSetup make_setup(const models::ModelSpec& model, const std::optional<sym::SectorSpec>& sector,
                        bool use_template, sym::TemplateKind kind, const ObjectiveOptions& options) {
  ProblemSetup setup;
  setup.model = model;
  setup.options = options;
  if (use_template) {
    if (model.model == Model::kRandom) {
      throw Error(ErrorCode::kInvalidInput, "the random model has no symmetric S template");
    }
    setup.tmpl = sym::symmetric_s_template(model.model, kind);
  }
  const int l = models::block_len(model.model);
  if (model.n_sites < l + 1) {
    throw Error(ErrorCode::kInvalidSize, "chain needs at least " + std::to_string(l + 1) + " sites");
  }
  if (sector && !sector->empty()) {
    const bool discrete = sector->sz_total || sector->q_eigen || sector->parity || sector->reversal;
    if (discrete && !use_template) {
      throw Error(ErrorCode::kInvalidInput,
                  "sector " + sector->describe() + " is only invariant for templated S");
    }
    setup.sector = std::make_shared<const sym::SectorMap>(
        sym::build_sector(model.model, model.n_sites, *sector));
  }
  setup.layout = std::make_shared<const ChainLayout>(site_dim(model.model), model.n_sites, l);
  return setup;
}

Mat generator_from_params(const RVec& params, int m) {
  if (params.size() != Index{m} * m) {
    throw Error(ErrorCode::kInvalidInput, "generator needs M^2 parameters");
  }
  Mat b = Mat::Zero(m, m);
  Index k = 0;
  for (int a = 0; a < m; ++a) b(a, a) = params(k++);
  for (int a = 0; a < m; ++a) {
    for (int c = a + 1; c < m; ++c) {
      const cplx v(params(k), params(k + 1));
      k += 2;
      b(a, c) = v;
      b(c, a) = std::conj(v);
    }
  }
  return b;
}

RVec params_from_generator(const Mat& b) {
  const Index m = b.rows();
  RVec p(m * m);
  Index k = 0;
  for (Index a = 0; a < m; ++a) p(k++) = b(a, a).real();
  for (Index a = 0; a < m; ++a) {
    for (Index c = a + 1; c < m; ++c) {
      p(k++) = b(a, c).real();
      p(k++) = b(a, c).imag();
    }
  }
  return p;
}

Objective::Objective(const ProblemSetup& setup, double lambda)
    : setup_(setup), lambda_(lambda), basis_(models::kernel_basis(setup.model, lambda)),
      tmpl_(setup.tmpl) {
  if (!setup_.layout) {
    setup_.layout = std::make_shared<const ChainLayout>(
        site_dim(setup.model.model), setup.model.n_sites, models::block_len(setup.model.model));
  }
  if (basis_.m() == 0) throw Error(ErrorCode::kInvalidInput, "kernel is empty; nothing to optimize");
  canonical_s_ = models::canonical_s(setup.model, lambda, basis_);
  const Vec psi = models::ground_state(setup.model, lambda);
  ground_ = setup_.sector ? setup_.sector->restrict(psi) : psi;
  const double norm = ground_.norm();
  if (norm < 1e-8) throw Error(ErrorCode::kEmptySector, "ground state is not in the chosen sector");
  ground_ /= norm;

  if (tmpl_) {
    if (tmpl_->m() != basis_.m()) {
      throw Error(ErrorCode::kInvalidInput, "template size does not match the kernel dimension");
    }
    n_params_ = tmpl_->n_params();
    auto place = [&](const Mat& s) {
      SparseHamiltonian h = place_local_terms(*setup_.layout, ph::local_term(basis_, s));
      return setup_.sector ? sym::project(h, *setup_.sector) : h;
    };
    h_offset_ = place(tmpl_->offset);
    for (const Mat& dir : tmpl_->directions) h_dir_.push_back(place(dir));
    canonical_params_ = tmpl_->params_of(canonical_s_);
  } else {
    n_params_ = basis_.m() * basis_.m();
    canonical_params_ = params_of(canonical_s_);
  }
}

Mat Objective::s_of(const RVec& params) const {
  if (params.size() != n_params_) throw Error(ErrorCode::kInvalidInput, "wrong parameter count");
  if (tmpl_) return tmpl_->embed(params);
  return ph::s_from_generator(generator_from_params(params, basis_.m())).matrix();
}

RVec Objective::params_of(const Mat& s) const {
  if (tmpl_) return tmpl_->params_of(s);
  Eigen::SelfAdjointEigenSolver<Mat> eig(s);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::kFeasibility, "S has no positive eigenvalue");
  RVec logs(eig.eigenvalues().size());
  for (Index i = 0; i < logs.size(); ++i) {
    logs(i) = -std::log(std::max(eig.eigenvalues()(i), 1e-14 * top));
  }
  const Mat b = eig.eigenvectors() * logs.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
  return params_from_generator(0.5 * (b + b.adjoint()));
}

SparseHamiltonian Objective::hamiltonian(const Mat& s, const RVec& params) const {
  if (tmpl_) {
    SparseHamiltonian h = h_offset_;
    for (int k = 0; k < n_params_; ++k) h.matrix += params(k) * h_dir_[k].matrix;
    h.matrix.prune(cplx(0.0));
    return h;
  }
  SparseHamiltonian h = place_local_terms(*setup_.layout, ph::local_term(basis_, s));
  return setup_.sector ? sym::project(h, *setup_.sector) : h;
}

RVec Objective::gap_gradient(const RVec& params, const Mat& chi, double delta) const {
  RVec g(n_params_);
  if (tmpl_) {
    for (int k = 0; k < n_params_; ++k) {
      g(k) = tmpl_->directions[k].cwiseProduct(chi).sum().real();
    }
    return g;
  }
  // dDelta = tr(dB Gm) with Gm = U K^T U^dagger in the eigenbasis of B,
  // K_ab = f[b_a, b_b] (X_ba - Delta delta_ab) / Z, X = chi^T rotated
  const int m = basis_.m();
  Eigen::SelfAdjointEigenSolver<Mat> eig(generator_from_params(params, m));
  const RVec b = eig.eigenvalues();
  const Mat& u = eig.eigenvectors();
  const double shift = b.minCoeff();
  double z = 0.0;
  for (int a = 0; a < m; ++a) z += std::exp(-(b(a) - shift));
  const Mat x = u.adjoint() * chi.transpose() * u;
  Mat k(m, m);
  for (int a = 0; a < m; ++a) {
    for (int c = 0; c < m; ++c) {
      const double f = exp_divided_difference(b(a) - shift, b(c) - shift);
      k(a, c) = f * (x(c, a) - (a == c ? delta : 0.0)) / z;
    }
  }
  const Mat gm = u * k.transpose() * u.adjoint();
  Index idx = 0;
  for (int a = 0; a < m; ++a) g(idx++) = gm(a, a).real();
  for (int a = 0; a < m; ++a) {
    for (int c = a + 1; c < m; ++c) {
      g(idx++) = (gm(c, a) + gm(a, c)).real();
      g(idx++) = (cplx(0.0, 1.0) * (gm(c, a) - gm(a, c))).real();
    }
  }
  return g;
}

RVec Objective::barrier_gradient(const Mat& s) const {
  RVec g = RVec::Zero(n_params_);
  const double w = setup_.options.barrier_weight;
  if (!tmpl_ || w == 0.0) return g;
  const Mat sinv = s.inverse();
  for (int k = 0; k < n_params_; ++k) {
    g(k) = w * (sinv * tmpl_->directions[k]).trace().real();
  }
  return g;
}

Evaluation Objective::evaluate(const RVec& params) const {
  Evaluation ev;
  ev.gradient = RVec::Zero(n_params_);
  ev.s = s_of(params);
  double log_det = 0.0;
  if (tmpl_) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(ev.s, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues()(0) > 0.0)) {
      ev.feasible = false;
      ev.value = -kInf;
      return ev;
    }
    log_det = eig.eigenvalues().array().log().sum();
  }
  const SparseHamiltonian h = hamiltonian(ev.s, params);
  const auto gap = spectra::spectral_gap(h, setup_.options.deg_tol, setup_.options.solver);
  const auto chi = spectra::chi_matrix(gap.excited, basis_, setup_.model.n_sites,
                                       setup_.sector.get(), setup_.layout.get());
  ev.chi = chi.entries;
  ev.gap = gap.gap;
  ev.e0 = gap.e0;
  ev.e1 = gap.e1;
  ev.ground_degeneracy = gap.ground_degeneracy;
  ev.degenerate = gap.degenerate;
  ev.subgradient = gap.excited_degenerate;
  ev.solver = gap.solver;
  const double delta = (ev.s * ev.chi.transpose()).trace().real();
  ev.gradient = gap_gradient(params, ev.chi, delta);
  ev.value = ev.gap;
  if (tmpl_) {
    ev.value += setup_.options.barrier_weight * log_det;
    ev.gradient += barrier_gradient(ev.s);
  }
  return ev;
}

RVec Objective::raw_gradient(const RVec& params) const {
  const Mat s = s_of(params);
  const SparseHamiltonian h = hamiltonian(s, params);
  const int k = static_cast<int>(std::min<Index>(h.dim, 4));
  const auto eig = spectra::lowest_eigenpairs(h, k, setup_.options.deg_tol, setup_.options.solver);
  Index pick = -1;
  for (Index c = 0; c < eig.eigenvalues.size(); ++c) {
    if (std::norm(ground_.dot(eig.eigenvectors.col(c))) < 0.5) {
      pick = c;
      break;
    }
  }
  if (pick < 0) throw Error(ErrorCode::kConvergence, "no excited state separated from the MPS");
  const auto chi = spectra::chi_matrix(eig.eigenvectors.col(pick), basis_, setup_.model.n_sites,
                                       setup_.sector.get(), setup_.layout.get());
  const double delta = (s * chi.entries.transpose()).trace().real();
  return gap_gradient(params, chi.entries, delta);
}

RMat Objective::barrier_hessian(const RVec& params) const {
  RMat hess = RMat::Zero(n_params_, n_params_);
  const double w = setup_.options.barrier_weight;
  if (!tmpl_ || w == 0.0) return hess;
  const Mat sinv = s_of(params).inverse();
  std::vector<Mat> a;
  for (const Mat& d : tmpl_->directions) a.push_back(sinv * d);
  for (int i = 0; i < n_params_; ++i) {
    for (int j = 0; j <= i; ++j) {
      hess(i, j) = hess(j, i) = -w * (a[i] * a[j]).trace().real();
    }
  }
  return hess;
}

double Objective::max_step(const RVec& params, const RVec& dir) const {
  if (!tmpl_) return kInf;
  const Mat s = s_of(params);
  Mat d = Mat::Zero(s.rows(), s.cols());
  for (int k = 0; k < n_params_; ++k) d += dir(k) * tmpl_->directions[k];
  // S + a D stays positive while a < 1 / max eig(-S^{-1/2} D S^{-1/2})
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(-d, s, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  return top > 0.0 ? 1.0 / top : kInf;
}

OptimalityReport certify(const Mat& s, const Mat& chi, double delta, bool converged,
                         double cert_tol) {
  OptimalityReport rep;
  rep.evaluated = converged;
  rep.delta = delta;
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const RVec sv = es.eigenvalues();
  const double top = sv.maxCoeff();
  std::vector<bool> support(sv.size());
  for (Index g = 0; g < sv.size(); ++g) {
    support[g] = sv(g) > 1e-4 * top;
    if (support[g]) ++rep.s_rank;
  }
  const Mat x = es.eigenvectors().adjoint() * chi.transpose() * es.eigenvectors();
  double lo = kInf;
  double hi = -kInf;
  double sum = 0.0;
  for (Index a = 0; a < x.rows(); ++a) {
    for (Index b = 0; b < x.cols(); ++b) {
      if (a == b || !(support[a] || support[b])) continue;
      rep.off_diag_norm = std::max(rep.off_diag_norm, std::abs(x(a, b)));
    }
    if (support[a]) {
      const double v = x(a, a).real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
  }
  if (rep.s_rank > 0) {
    rep.eigen_spread = hi - lo;
    rep.common_value = sum / rep.s_rank;
  }
  Eigen::SelfAdjointEigenSolver<Mat> ec(chi, Eigen::EigenvaluesOnly);
  const double chi_top = ec.eigenvalues().cwiseAbs().maxCoeff();
  for (Index g = 0; g < ec.eigenvalues().size(); ++g) {
    if (chi_top > 0.0 && ec.eigenvalues()(g) > 1e-8 * chi_top) ++rep.chi_rank;
  }
  rep.passed = converged && rep.off_diag_norm < cert_tol && rep.eigen_spread < cert_tol &&
               std::abs(rep.common_value - delta) < 1e-6;
  return rep;
}

OptState maximize(const Objective& objective, const RVec& init, const MaximizeOptions& opts) {
  Evaluation last;
  auto eval = [&](const RVec& p) {
    Evaluation ev = objective.evaluate(p);
    PointEval pe{ev.value, ev.gradient, ev.feasible, ev.subgradient};
    return pe;
  };
  MaxStepFn step;
  if (objective.template_mode()) {
    step = [&](const RVec& x, const RVec& d) { return objective.max_step(x, d); };
  }
  const AscentResult ar = bfgs_maximize(eval, init, opts, step);
  last = objective.evaluate(ar.x);

  OptState st;
  st.params = ar.x;
  st.value = last.value;
  st.gap = last.gap;
  st.gradient = last.gradient;
  st.grad_norm = max_norm(last.gradient);
  st.iteration = ar.iterations;
  st.converged = ar.converged;
  st.nonsmooth = ar.nonsmooth;
  st.subgradient = ar.subgradient_seen || last.subgradient;
  st.degenerate = last.degenerate;
  st.history = ar.history;
  st.s = last.s;
  st.chi = last.chi;
  st.message = ar.message;
  return st;
}

// ---------------------------------------------------------------------------

namespace {

struct PointSolve {
  OptState state;
  bool canonical_restart = false;
};

PointSolve solve_point(const Objective& obj, const RVec& warm, double gap_canonical,
                       const MaximizeOptions& opts) {
  const RVec& canonical = obj.canonical_params();
  PointSolve out;
  const bool use_warm = warm.size() == obj.n_params() && obj.evaluate(warm).feasible;
  out.state = maximize(obj, use_warm ? warm : canonical, opts);
  if (use_warm && out.state.gap < gap_canonical) {
    OptState again = maximize(obj, canonical, opts);
    if (again.gap > out.state.gap) {
      out.state = std::move(again);
      out.canonical_restart = true;
    }
  }
  return out;
}

void fill_from_state(PointResult& pr, const OptState& st, double cert_tol) {
  pr.params = st.params;
  pr.s = st.s;
  pr.gap_optimized = st.gap;
  pr.degenerate_optimized = st.degenerate;
  pr.n_iter = st.iteration;
  pr.converged = st.converged;
  pr.grad_norm = st.grad_norm;
  pr.nonsmooth = st.nonsmooth;
  pr.subgradient = st.subgradient;
  pr.certificate = certify(st.s, st.chi, st.gap, st.converged, cert_tol);
}

void summarize(PathResult& path) {
  path.min_gap_canonical = kInf;
  path.min_gap_optimized = kInf;
  path.n_failed = 0;
  for (const auto& p : path.points) {
    if (!p.ok) {
      ++path.n_failed;
      continue;
    }
    path.min_gap_canonical = std::min(path.min_gap_canonical, p.gap_canonical);
    path.min_gap_optimized = std::min(path.min_gap_optimized, p.gap_optimized);
  }
  if (!std::isfinite(path.min_gap_canonical)) path.min_gap_canonical = 0.0;
  if (!std::isfinite(path.min_gap_optimized)) path.min_gap_optimized = 0.0;
}

RMat fd_hessian(const Objective& obj, const RVec& p, double h) {
  const int n = obj.n_params();
  RMat hess(n, n);
  for (int i = 0; i < n; ++i) {
    RVec up = p;
    RVec dn = p;
    up(i) += h;
    dn(i) -= h;
    hess.col(i) = (obj.raw_gradient(up) - obj.raw_gradient(dn)) / (2.0 * h);
  }
  hess = 0.5 * (hess + hess.transpose()).eval();
  return hess + obj.barrier_hessian(p);
}

// Solves hess x = rhs for a negative definite hess, throwing kStiffness when
// it is not, or when its condition number exceeds cond_tol.
RVec solve_negative_definite(const RMat& hess, const RVec& rhs, double cond_tol, double* cond) {
  Eigen::SelfAdjointEigenSolver<RMat> eig(hess);
  const RVec ev = eig.eigenvalues();
  const double top = ev.maxCoeff();
  const double big = ev.cwiseAbs().maxCoeff();
  const double c = top < 0.0 ? big / -top : kInf;
  if (cond) *cond = c;
  if (!(top < 0.0) || c > cond_tol) {
    throw Error(ErrorCode::kStiffness,
                "Hessian is singular or indefinite (condition " + std::to_string(c) +
                    "); pointwise mode is more robust here");
  }
  const RVec coeff = (eig.eigenvectors().transpose() * rhs).cwiseQuotient(ev);
  return eig.eigenvectors() * coeff;
}

}  // namespace

PathResult sweep(const ProblemSetup& setup, const std::vector<double>& lambdas,
                 const SweepOptions& opts) {
  PathResult path;
  RVec warm;
  for (double lambda : lambdas) {
    PointResult pr;
    pr.lambda = lambda;
    try {
      const Objective obj(setup, lambda);
      const Evaluation can = obj.evaluate(obj.canonical_params());
      pr.gap_canonical = can.gap;
      pr.degenerate_canonical = can.degenerate;
      RVec start = opts.init == InitMode::kWarm ? warm : RVec();
      if (path.points.empty() && opts.first_params.size()) {
        if (opts.first_params.size() != obj.n_params()) {
          throw Error(ErrorCode::kInvalidInput,
                      "initial parameters have length " + std::to_string(opts.first_params.size()) +
                          ", the problem has " + std::to_string(obj.n_params()));
        }
        start = opts.first_params;
      }
      const PointSolve ps = solve_point(obj, start, can.gap, opts.maximize);
      fill_from_state(pr, ps.state, opts.cert_tol);
      pr.canonical_restart = ps.canonical_restart;
      pr.ok = true;
      warm = ps.state.params;
    } catch (const Error& e) {
      pr.ok = false;
      pr.error = e.what();
      pr.error_code = e.code();
    }
    path.points.push_back(std::move(pr));
  }
  summarize(path);
  if (!path.points.empty() && path.n_failed == static_cast<int>(path.points.size())) {
    throw Error(path.points.front().error_code,
                "every grid point failed; first: " + path.points.front().error);
  }
  return path;
}

RVec path_derivative(const ProblemSetup& setup, double lambda, const RVec& params,
                     const OdeOptions& opts, double* condition) {
  if (!setup.tmpl) {
    throw Error(ErrorCode::kInvalidInput, "path following needs a template (smooth sector)");
  }
  const Objective obj(setup, lambda);
  const RMat hess = fd_hessian(obj, params, opts.h_p);
  const Objective up(setup, lambda + opts.h_lambda);
  const Objective dn(setup, lambda - opts.h_lambda);
  const RVec mixed = (up.raw_gradient(params) - dn.raw_gradient(params)) / (2.0 * opts.h_lambda);
  return -solve_negative_definite(hess, mixed, opts.cond_tol, condition);
}

PathResult ode_follow(const ProblemSetup& setup, const std::vector<double>& lambdas,
                      const RVec& init, const SweepOptions& sweep_opts, const OdeOptions& opts) {
  if (!setup.tmpl) {
    throw Error(ErrorCode::kInvalidInput, "path following needs a template (smooth sector)");
  }
  if (opts.substeps < 1) throw Error(ErrorCode::kInvalidInput, "substeps must be positive");
  PathResult path;
  RVec p = init;
  RVec last_good;
  for (std::size_t idx = 0; idx < lambdas.size(); ++idx) {
    const double lambda = lambdas[idx];
    PointResult pr;
    pr.lambda = lambda;
    try {
      const Objective obj(setup, lambda);
      const Evaluation can = obj.evaluate(obj.canonical_params());
      pr.gap_canonical = can.gap;
      pr.degenerate_canonical = can.degenerate;

      bool restart = idx == 0 && p.size() != obj.n_params();
      if (idx > 0 && !last_good.size()) restart = true;
      if (idx > 0 && last_good.size()) {
        p = last_good;
        try {
          const double span = lambda - lambdas[idx - 1];
          const double step = span / opts.substeps;
          double l = lambdas[idx - 1];
          for (int s = 0; s < opts.substeps; ++s, l += step) {
            const RVec k1 = path_derivative(setup, l, p, opts);
            const RVec k2 = path_derivative(setup, l + 0.5 * step, p + 0.5 * step * k1, opts);
            const RVec k3 = path_derivative(setup, l + 0.5 * step, p + 0.5 * step * k2, opts);
            const RVec k4 = path_derivative(setup, l + step, p + step * k3, opts);
            p += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          }
          // Newton step at the new point measures how far the path estimate
          // is from the optimum; a large step marks a kink
          const Evaluation ev = obj.evaluate(p);
          if (!ev.feasible) throw Error(ErrorCode::kFeasibility, "path left the positive cone");
          const RVec newton = -solve_negative_definite(fd_hessian(obj, p, opts.h_p), ev.gradient,
                                                       opts.cond_tol, nullptr);
          if (max_norm(newton) > opts.newton_tol) {
            throw Error(ErrorCode::kStiffness, "Newton step " + std::to_string(max_norm(newton)) +
                                                   " exceeds the kink tolerance");
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kStiffness && e.code() != ErrorCode::kFeasibility) throw;
          if (!opts.restart_on_kink) throw;
          restart = true;
        }
      }

      const bool polish = opts.reproject_every > 0 && idx > 0 &&
                          static_cast<int>(idx) % opts.reproject_every == 0;
      if (restart) {
        const PointSolve ps = solve_point(obj, last_good, can.gap, sweep_opts.maximize);
        fill_from_state(pr, ps.state, sweep_opts.cert_tol);
        pr.canonical_restart = ps.canonical_restart;
        pr.ode_restart = idx > 0;
      } else if (polish) {
        fill_from_state(pr, maximize(obj, p, sweep_opts.maximize), sweep_opts.cert_tol);
      } else {
        const Evaluation ev = obj.evaluate(p);
        OptState st;
        st.params = p;
        st.gap = ev.gap;
        st.s = ev.s;
        st.chi = ev.chi;
        st.degenerate = ev.degenerate;
        st.subgradient = ev.subgradient;
        st.grad_norm = max_norm(ev.gradient);
        st.converged = st.grad_norm < std::max(sweep_opts.maximize.grad_tol, 1e-5);
        fill_from_state(pr, st, sweep_opts.cert_tol);
      }
      pr.ok = true;
      last_good = pr.params;
      p = pr.params;
    } catch (const Error& e) {
      pr.ok = false;
      pr.error = e.what();
      pr.error_code = e.code();
      last_good.resize(0);
    }
    path.points.push_back(std::move(pr));
  }
  summarize(path);
  return path;
}

}  // namespace gapopt::opt
