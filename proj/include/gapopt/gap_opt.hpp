#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gapopt/models.hpp"
#include "gapopt/operators.hpp"
#include "gapopt/parent_ham.hpp"
#include "gapopt/spectra.hpp"
#include "gapopt/symmetry.hpp"

namespace gapopt::opt {

// ---------------------------------------------------------------------------
// Generic quasi-Newton ascent

struct PointEval {
  double value = 0.0;
  RVec gradient;
  bool feasible = true;
  bool subgradient = false;  // gradient only a subgradient at this point
};

using EvalFn = std::function<PointEval(const RVec&)>;
/// Largest alpha such that x + alpha d stays feasible (infinity if unbounded).
using MaxStepFn = std::function<double(const RVec& x, const RVec& d)>;

struct MaximizeOptions {
  double grad_tol = 1e-7;  // on the max-norm of the gradient
  int max_iter = 500;
  double armijo = 1e-4;
  double boundary_fraction = 0.95;  // fraction-to-boundary rule
  int max_backtracks = 50;
  // once a subgradient was seen: stop when this many accepted steps
  // together gained less than rounding noise (0 disables)
  int stall_window = 25;
};

struct AscentResult {
  RVec x;
  double value = 0.0;
  RVec gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool nonsmooth = false;  // stopped after repeated line-search failure
  bool subgradient_seen = false;
  std::vector<double> history;  // objective after every accepted step
  std::string message;
};

/// BFGS on the negated objective with Armijo backtracking. A failed line
/// search first resets the curvature model, a second consecutive failure
/// halves the trial step once more, a third stops with `nonsmooth`.
AscentResult bfgs_maximize(const EvalFn& eval, const RVec& x0, const MaximizeOptions& opts,
                           const MaxStepFn& max_step = {});

// ---------------------------------------------------------------------------
// Gap objective

struct ObjectiveOptions {
  double deg_tol = -1.0;  // <= 0: spectra::default_deg_tol
  spectra::SolverOptions solver;
  double barrier_weight = 1e-8;  // template mode: w log det S
};

/// Shared, lambda-independent pieces of one optimization problem.
struct ProblemSetup {
  models::ModelSpec model;
  std::shared_ptr<const sym::SectorMap> sector;  // null: full space
  std::shared_ptr<const ChainLayout> layout;
  std::optional<sym::STemplate> tmpl;  // null: generator mode
  ObjectiveOptions options;
};

/// Builds sector and layout for a model; a sector beyond pure momentum
/// needs a template, since generic S break the discrete symmetries.
ProblemSetup make_setup(const models::ModelSpec& model, const std::optional<sym::SectorSpec>& sector,
                        bool use_template, sym::TemplateKind kind = sym::TemplateKind::kFull,
                        const ObjectiveOptions& options = {});

struct Evaluation {
  double value = 0.0;  // gap plus barrier; -inf when infeasible
  double gap = 0.0;
  RVec gradient;  // of value
  Mat s;
  Mat chi;
  double e0 = 0.0;
  double e1 = 0.0;
  int ground_degeneracy = 0;
  bool degenerate = false;
  bool subgradient = false;
  bool feasible = true;
  spectra::Solver solver = spectra::Solver::kDense;
};

/// Delta(S(params)) at fixed lambda. Template mode: params are template
/// coordinates, S affine in them, barrier w log det S added. Generator mode:
/// params are the M^2 real coordinates of Hermitian B (diagonal entries,
/// then Re and Im of each upper entry), S = exp(-B)/tr exp(-B).
class Objective {
 public:
  Objective(const ProblemSetup& setup, double lambda);

  int n_params() const { return n_params_; }
  int m() const { return basis_.m(); }
  double lambda() const { return lambda_; }
  bool template_mode() const { return tmpl_.has_value(); }
  const ph::KernelBasis& basis() const { return basis_; }
  const Mat& canonical_s() const { return canonical_s_; }
  const RVec& canonical_params() const { return canonical_params_; }

  Mat s_of(const RVec& params) const;
  /// Parameters reproducing S (template coordinates, or B = -log S).
  RVec params_of(const Mat& s) const;

  Evaluation evaluate(const RVec& params) const;

  /// Gradient of the gap alone, following the excited level continuously:
  /// the excited state is the lowest eigenvector orthogonal to the MPS, so
  /// the result stays defined slightly outside the positive cone.
  RVec raw_gradient(const RVec& params) const;

  /// Hessian of w log det S in template mode (zero in generator mode).
  RMat barrier_hessian(const RVec& params) const;

  double max_step(const RVec& params, const RVec& dir) const;

 private:
  SparseHamiltonian hamiltonian(const Mat& s, const RVec& params) const;
  RVec gap_gradient(const RVec& params, const Mat& chi, double delta) const;
  RVec barrier_gradient(const Mat& s) const;

  ProblemSetup setup_;
  double lambda_;
  ph::KernelBasis basis_;
  std::optional<sym::STemplate> tmpl_;
  int n_params_ = 0;
  Mat canonical_s_;
  RVec canonical_params_;
  Vec ground_;  // MPS in the working space
  // template mode: H(p) = h_offset + sum_k p_k h_dir[k]
  SparseHamiltonian h_offset_;
  std::vector<SparseHamiltonian> h_dir_;
};

/// Real coordinates <-> Hermitian generator.
Mat generator_from_params(const RVec& params, int m);
RVec params_from_generator(const Mat& b);

struct OptimalityReport {
  bool evaluated = false;  // false for unconverged states (raw values only)
  double off_diag_norm = 0.0;
  double eigen_spread = 0.0;
  double common_value = 0.0;  // mean chi diagonal over supp(S)
  double delta = 0.0;
  int s_rank = 0;
  int chi_rank = 0;
  bool passed = false;
};

/// Rotates chi^T into the eigenbasis of S; off-diagonal entries are taken
/// over pairs touching supp(S) (eigenvalues above 1e-4 of the largest).
OptimalityReport certify(const Mat& s, const Mat& chi, double delta, bool converged,
                         double cert_tol = 1e-5);

struct OptState {
  RVec params;
  double value = 0.0;
  double gap = 0.0;
  RVec gradient;
  double grad_norm = 0.0;  // max-norm
  int iteration = 0;
  bool converged = false;
  bool nonsmooth = false;
  bool subgradient = false;
  bool degenerate = false;
  std::vector<double> history;
  Mat s;
  Mat chi;
  OptimalityReport certificate;
  std::string message;
};

OptState maximize(const Objective& objective, const RVec& init, const MaximizeOptions& opts = {});

// ---------------------------------------------------------------------------
// Paths over lambda

enum class InitMode { kCanonical, kWarm };

struct SweepOptions {
  MaximizeOptions maximize;
  InitMode init = InitMode::kWarm;
  double cert_tol = 1e-5;
  RVec first_params;  // start of the first point instead of the canonical S
};

struct PointResult {
  double lambda = 0.0;
  bool ok = false;
  std::string error;
  ErrorCode error_code = ErrorCode::kInvalidInput;
  double gap_canonical = 0.0;
  double gap_optimized = 0.0;
  bool degenerate_canonical = false;
  bool degenerate_optimized = false;
  RVec params;
  Mat s;
  int n_iter = 0;
  bool converged = false;
  double grad_norm = 0.0;
  bool nonsmooth = false;
  bool subgradient = false;
  bool canonical_restart = false;  // optimum re-derived from the canonical start
  bool ode_restart = false;        // ODE restarted from a pointwise optimum here
  OptimalityReport certificate;
};

struct PathResult {
  std::vector<PointResult> points;
  double min_gap_canonical = 0.0;
  double min_gap_optimized = 0.0;
  int n_failed = 0;
};

/// Pointwise maximization along the grid. Warm mode starts each point from
/// the previous optimum and falls back to the canonical start whenever that
/// does worse than the canonical gap. Failed points are recorded and the
/// sweep continues; throws only when every point failed.
PathResult sweep(const ProblemSetup& setup, const std::vector<double>& lambdas,
                 const SweepOptions& opts = {});

struct OdeOptions {
  double h_p = 1e-4;
  double h_lambda = 1e-4;
  int substeps = 4;           // RK4 steps per grid interval
  int reproject_every = 0;    // polish with maximize every k points (0: never)
  double cond_tol = 1e12;
  double newton_tol = 1e-4;   // max-norm of the Newton step that flags a kink
  bool restart_on_kink = true;
};

/// d params / d lambda = -Hess^{-1} d_lambda grad, Hessian by central
/// differences of the analytic gap gradient plus the exact barrier Hessian.
/// `init` must be an optimum at lambdas.front(); pass an empty vector to
/// have it computed.
PathResult ode_follow(const ProblemSetup& setup, const std::vector<double>& lambdas,
                      const RVec& init, const SweepOptions& sweep_opts = {},
                      const OdeOptions& opts = {});

/// Right-hand side of the path ODE (exposed for tests).
RVec path_derivative(const ProblemSetup& setup, double lambda, const RVec& params,
                     const OdeOptions& opts, double* condition = nullptr);

}  // namespace gapopt::opt
