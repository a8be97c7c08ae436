#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/operators.hpp"

namespace gapopt {

enum class Model { kAklt, kGhz, kRandom };

const char* to_string(Model model);
Model parse_model(const std::string& name);

/// Physical dimension of one chain site (the blocked d = 4 site for random).
int site_dim(Model model);

}  // namespace gapopt

namespace gapopt::sym {

/// Quantum numbers selecting a symmetry sector. Unset fields are not imposed.
///  momentum  - k in [0, N); T eigenvalue exp(2 pi i k / N), T shifts j -> j+1
///  sz_total  - total S^z (AKLT)
///  q_eigen   - eigenvalue of Q = (spin flip on every site) * R (AKLT)
///  parity    - eigenvalue of P = prod sigma^x (GHZ)
///  reversal  - eigenvalue of R, site j -> N-1-j (GHZ)
struct SectorSpec {
  std::optional<int> momentum;
  std::optional<int> sz_total;
  std::optional<int> q_eigen;
  std::optional<int> parity;
  std::optional<int> reversal;

  bool empty() const {
    return !momentum && !sz_total && !q_eigen && !parity && !reversal;
  }
  std::string describe() const;
};

/// The sector holding the ground state: AKLT (T=1, Sz=0, Q=1),
/// GHZ (T=1, R=1, P=1), random (T=1).
SectorSpec ground_sector(Model model);

struct SectorMap {
  Model model = Model::kAklt;
  int n_sites = 0;
  int phys_dim = 0;
  SectorSpec spec;
  /// d^N x d_g, orthonormal columns ordered by their smallest basis index.
  SpMat isometry;

  Index dim() const { return isometry.cols(); }
  Index full_dim() const { return isometry.rows(); }

  Vec lift(const Vec& v) const { return isometry * v; }
  Vec restrict(const Vec& v) const { return isometry.adjoint() * v; }
};

SectorMap build_sector(Model model, int n_sites, const SectorSpec& spec);

/// Sector dimension without materializing the isometry.
Index sector_dimension(Model model, int n_sites, const SectorSpec& spec);

/// W^dagger H W.
SparseHamiltonian project(const SparseHamiltonian& h, const SectorMap& sector);

struct ConstraintOperator {
  std::string name;
  SpMat op;
  cplx eigenvalue;
};

/// Full-space operators for every quantum number set in `spec`.
std::vector<ConstraintOperator> constraint_operators(Model model, int n_sites,
                                                     const SectorSpec& spec);

struct SymmetryReport {
  std::vector<std::pair<std::string, double>> commutator_norms;
  bool passed = false;
};

/// Max-norm of [H, O] for each constraint operator; passes below 1e-9.
SymmetryReport symmetrize_check(const SparseHamiltonian& h, Model model, int n_sites,
                                const SectorSpec& spec);

/// Group average of H over the model's ground-sector symmetry group
/// (translations, the discrete Z2 operations, and a U(1) S^z average for AKLT).
SparseHamiltonian symmetrize(const SparseHamiltonian& h, Model model, int n_sites);

enum class TemplateKind { kFull, kDiagonal };

/// Affine family of trace-one S matrices commuting with the local symmetry
/// action on the kernel basis.
struct STemplate {
  Model model = Model::kAklt;
  TemplateKind kind = TemplateKind::kFull;
  std::vector<std::string> param_names;
  Mat offset;
  std::vector<Mat> directions;
  RVec canonical;  // parameters of S = 1/M

  /// Local unitaries on the kernel basis that S must commute with.
  std::vector<Mat> local_symmetries;
  /// Local S^z charges of the kernel vectors; S may only couple equal charges.
  std::optional<RVec> charges;
  bool real = false;

  int n_params() const { return static_cast<int>(directions.size()); }
  int m() const { return static_cast<int>(offset.rows()); }
  Mat embed(const RVec& params) const;
  /// Least-squares inverse of embed; exact for matrices inside the family.
  RVec params_of(const Mat& s) const;
};

/// AKLT: S = diag(S11, S22, 1 - 2 S11 - 2 S22, S22, S11).
/// GHZ full: real S commuting with the local parity and reversal action,
///   parameters (S11, S12, S14, S23), S22 = 1/2 - S11, S13 = -S12.
/// GHZ diagonal: S = diag(S11, 1/2 - S11, 1/2 - S11, S11).
STemplate symmetric_s_template(Model model, TemplateKind kind = TemplateKind::kFull);

/// Projection of a Hermitian matrix onto the commutant the template imposes.
Mat project_onto_template(const Mat& b, const STemplate& tmpl);

/// Largest |[S, U]| over the template's local symmetries (and charge mixing).
double template_violation(const Mat& s, const STemplate& tmpl);

}  // namespace gapopt::sym
