#include "gapopt/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "gapopt/linalg.hpp"

namespace gapopt {

const char* to_string(Model model) {
  switch (model) {
    case Model::kAklt: return "aklt";
    case Model::kGhz: return "ghz";
    case Model::kRandom: return "random";
  }
  return "unknown";
}

Model parse_model(const std::string& name) {
  if (name == "aklt") return Model::kAklt;
  if (name == "ghz") return Model::kGhz;
  if (name == "random") return Model::kRandom;
  throw Error(ErrorCode::kInvalidInput, "unknown model '" + name + "'");
}

int site_dim(Model model) {
  switch (model) {
    case Model::kAklt: return 3;
    case Model::kGhz: return 2;
    case Model::kRandom: return 4;
  }
  return 0;
}

}  // namespace gapopt

namespace gapopt::sym {

namespace {

// Signed-free symmetry element acting on product basis states:
// |s_0 ... s_{N-1}> -> |s'> with s'_{perm[j]} = flip ? d-1-s_j : s_j.
struct Element {
  std::vector<int> perm;
  bool flip = false;
  cplx character{1.0, 0.0};

  bool same_action(const Element& o) const { return flip == o.flip && perm == o.perm; }
};

Element identity(int n) {
  Element e;
  e.perm.resize(n);
  for (int j = 0; j < n; ++j) e.perm[j] = j;
  return e;
}

Element translation(int n, cplx character) {
  Element e = identity(n);
  for (int j = 0; j < n; ++j) e.perm[j] = (j + 1) % n;
  e.character = character;
  return e;
}

Element reversal(int n, cplx character) {
  Element e = identity(n);
  for (int j = 0; j < n; ++j) e.perm[j] = n - 1 - j;
  e.character = character;
  return e;
}

Element flip_all(int n, cplx character) {
  Element e = identity(n);
  e.flip = true;
  e.character = character;
  return e;
}

// g after e
Element compose(const Element& g, const Element& e) {
  Element out;
  const int n = static_cast<int>(e.perm.size());
  out.perm.resize(n);
  for (int j = 0; j < n; ++j) out.perm[j] = g.perm[e.perm[j]];
  out.flip = g.flip != e.flip;
  out.character = g.character * e.character;
  return out;
}

std::vector<Element> close_group(int n, const std::vector<Element>& generators) {
  std::vector<Element> group{identity(n)};
  for (std::size_t head = 0; head < group.size(); ++head) {
    for (const auto& g : generators) {
      Element next = compose(g, group[head]);
      auto it = std::find_if(group.begin(), group.end(),
                             [&](const Element& x) { return x.same_action(next); });
      if (it == group.end()) {
        group.push_back(std::move(next));
      } else if (std::abs(it->character - next.character) > 1e-9) {
        throw Error(ErrorCode::kInvalidInput,
                    "requested quantum numbers are not simultaneously compatible "
                    "(reversal-type symmetries need momentum 0 or N/2)");
      }
    }
  }
  return group;
}

cplx momentum_phase(int k, int n) {
  const double angle = 2.0 * std::numbers::pi * k / n;
  // exact values for the real cases keep characters consistent under closure
  if (k == 0) return {1.0, 0.0};
  if (2 * k == n) return {-1.0, 0.0};
  return {std::cos(angle), std::sin(angle)};
}

void validate_spec(Model model, int n, const SectorSpec& spec) {
  auto reject = [&](const char* field) {
    throw Error(ErrorCode::kInvalidInput, std::string("quantum number '") + field +
                                              "' is not defined for model " + to_string(model));
  };
  auto check_sign = [](const std::optional<int>& v, const char* field) {
    if (v && *v != 1 && *v != -1) {
      throw Error(ErrorCode::kInvalidInput, std::string(field) + " must be +1 or -1");
    }
  };
  if (spec.momentum && (*spec.momentum < 0 || *spec.momentum >= n)) {
    throw Error(ErrorCode::kInvalidInput, "momentum must lie in [0, N)");
  }
  check_sign(spec.q_eigen, "q_eigen");
  check_sign(spec.parity, "parity");
  check_sign(spec.reversal, "reversal");
  switch (model) {
    case Model::kAklt:
      if (spec.parity) reject("parity");
      if (spec.reversal) reject("reversal");
      if (spec.q_eigen && spec.sz_total && *spec.sz_total != 0) {
        throw Error(ErrorCode::kInvalidInput, "Q only acts within the Sz = 0 sector");
      }
      break;
    case Model::kGhz:
      if (spec.sz_total) reject("sz_total");
      if (spec.q_eigen) reject("q_eigen");
      break;
    case Model::kRandom:
      if (spec.sz_total) reject("sz_total");
      if (spec.q_eigen) reject("q_eigen");
      if (spec.parity) reject("parity");
      if (spec.reversal) reject("reversal");
      break;
  }
}

std::vector<Element> sector_generators(Model model, int n, const SectorSpec& spec) {
  std::vector<Element> gens;
  if (spec.momentum) gens.push_back(translation(n, momentum_phase(*spec.momentum, n)));
  if (spec.q_eigen) {
    Element q = compose(flip_all(n, 1.0), reversal(n, 1.0));
    q.character = static_cast<double>(*spec.q_eigen);
    gens.push_back(q);
  }
  if (spec.reversal) gens.push_back(reversal(n, static_cast<double>(*spec.reversal)));
  if (spec.parity) gens.push_back(flip_all(n, static_cast<double>(*spec.parity)));
  (void)model;
  return gens;
}

class Action {
 public:
  Action(int d, int n) : d_(d), n_(n), digits_(n), powers_(n) {
    Index p = 1;
    for (int s = n - 1; s >= 0; --s) {
      powers_[s] = p;
      p *= d;
    }
  }

  void load(Index x) {
    for (int s = n_ - 1; s >= 0; --s) {
      digits_[s] = static_cast<int>(x % d_);
      x /= d_;
    }
  }

  Index apply(const Element& g) const {
    Index y = 0;
    for (int j = 0; j < n_; ++j) {
      const int v = g.flip ? d_ - 1 - digits_[j] : digits_[j];
      y += v * powers_[g.perm[j]];
    }
    return y;
  }

  // total S^z for the AKLT level order (+1, 0, -1)
  int sz() const {
    int total = 0;
    for (int v : digits_) total += 1 - v;
    return total;
  }

 private:
  int d_;
  int n_;
  std::vector<int> digits_;
  std::vector<Index> powers_;
};

// Visits every nonzero orbit vector of the sector in seed order.
template <class Visit>
void for_each_orbit(Model model, int n, const SectorSpec& spec, Visit&& visit) {
  validate_spec(model, n, spec);
  const int d = site_dim(model);
  const Index dim = checked_pow(d, n);
  const std::vector<Element> group = close_group(n, sector_generators(model, n, spec));
  const double inv_order = 1.0 / static_cast<double>(group.size());

  std::vector<char> seen(static_cast<std::size_t>(dim), 0);
  std::map<Index, cplx> amps;
  Action act(d, n);
  for (Index x = 0; x < dim; ++x) {
    if (seen[x]) continue;
    act.load(x);
    if (spec.sz_total && act.sz() != *spec.sz_total) continue;
    amps.clear();
    for (const auto& g : group) {
      const Index y = act.apply(g);
      seen[y] = 1;
      amps[y] += std::conj(g.character) * inv_order;
    }
    double norm2 = 0.0;
    for (const auto& [y, a] : amps) norm2 += std::norm(a);
    // amplitudes are sums of unit-modulus characters over |G|, so a surviving
    // orbit has norm >= 1/|G|; anything this small is an exact cancellation
    if (norm2 < 1e-20 + 1e-10 * inv_order * inv_order) continue;
    visit(amps, std::sqrt(norm2));
  }
}

SpMat element_operator(const Element& g, int d, int n) {
  const Index dim = checked_pow(d, n);
  SpMat op(dim, dim);
  std::vector<Eigen::Triplet<cplx, Index>> trips;
  trips.reserve(static_cast<std::size_t>(dim));
  Action act(d, n);
  for (Index x = 0; x < dim; ++x) {
    act.load(x);
    trips.emplace_back(act.apply(g), x, cplx(1.0));
  }
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

SpMat sz_operator(int n) {
  const Index dim = checked_pow(3, n);
  SpMat op(dim, dim);
  std::vector<Eigen::Triplet<cplx, Index>> trips;
  Action act(3, n);
  for (Index x = 0; x < dim; ++x) {
    act.load(x);
    const int sz = act.sz();
    if (sz != 0) trips.emplace_back(x, x, cplx(sz));
  }
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

}  // namespace

std::string SectorSpec::describe() const {
  std::ostringstream out;
  bool first = true;
  auto field = [&](const char* name, const std::optional<int>& v) {
    if (!v) return;
    if (!first) out << ", ";
    out << name << "=" << *v;
    first = false;
  };
  field("k", momentum);
  field("Sz", sz_total);
  field("Q", q_eigen);
  field("P", parity);
  field("R", reversal);
  if (first) out << "full space";
  return out.str();
}

SectorSpec ground_sector(Model model) {
  SectorSpec spec;
  spec.momentum = 0;
  switch (model) {
    case Model::kAklt:
      spec.sz_total = 0;
      spec.q_eigen = 1;
      break;
    case Model::kGhz:
      spec.reversal = 1;
      spec.parity = 1;
      break;
    case Model::kRandom:
      break;
  }
  return spec;
}

SectorMap build_sector(Model model, int n_sites, const SectorSpec& spec) {
  if (n_sites < 2) throw Error(ErrorCode::kInvalidSize, "a chain needs at least 2 sites");
  SectorMap out;
  out.model = model;
  out.n_sites = n_sites;
  out.phys_dim = site_dim(model);
  out.spec = spec;
  const Index dim = checked_pow(out.phys_dim, n_sites);

  std::vector<Eigen::Triplet<cplx, Index>> trips;
  Index col = 0;
  for_each_orbit(model, n_sites, spec, [&](const std::map<Index, cplx>& amps, double norm) {
    for (const auto& [y, a] : amps) {
      if (a != cplx(0.0)) trips.emplace_back(y, col, a / norm);
    }
    ++col;
  });
  if (col == 0) {
    throw Error(ErrorCode::kEmptySector, std::string("sector (") + spec.describe() +
                                             ") of model " + to_string(model) + " at N=" +
                                             std::to_string(n_sites) + " is empty");
  }
  out.isometry.resize(dim, col);
  out.isometry.setFromTriplets(trips.begin(), trips.end());
  out.isometry.makeCompressed();
  return out;
}

Index sector_dimension(Model model, int n_sites, const SectorSpec& spec) {
  if (n_sites < 2) throw Error(ErrorCode::kInvalidSize, "a chain needs at least 2 sites");
  Index count = 0;
  for_each_orbit(model, n_sites, spec, [&](const std::map<Index, cplx>&, double) { ++count; });
  return count;
}

SparseHamiltonian project(const SparseHamiltonian& h, const SectorMap& sector) {
  if (h.dim != sector.full_dim()) {
    throw Error(ErrorCode::kInvalidInput, "operator and sector dimensions differ");
  }
  const SpMat& w = sector.isometry;
  SpMat hw = h.matrix * w;
  SpMat block = w.adjoint() * hw;
  SpMat herm = 0.5 * (block + SpMat(block.adjoint()));
  herm.prune(cplx(0.0), 0.0);
  SparseHamiltonian out;
  out.dim = sector.dim();
  out.matrix = std::move(herm);
  out.matrix.makeCompressed();
  out.locality = h.locality;
  out.n_terms = h.n_terms;
  return out;
}

std::vector<ConstraintOperator> constraint_operators(Model model, int n_sites,
                                                     const SectorSpec& spec) {
  validate_spec(model, n_sites, spec);
  const int d = site_dim(model);
  std::vector<ConstraintOperator> ops;
  if (spec.momentum) {
    ops.push_back({"T", element_operator(translation(n_sites, 1.0), d, n_sites),
                   momentum_phase(*spec.momentum, n_sites)});
  }
  if (spec.sz_total) {
    ops.push_back({"Sz", sz_operator(n_sites), cplx(*spec.sz_total)});
  }
  if (spec.q_eigen) {
    const Element q = compose(flip_all(n_sites, 1.0), reversal(n_sites, 1.0));
    ops.push_back({"Q", element_operator(q, d, n_sites), cplx(*spec.q_eigen)});
  }
  if (spec.parity) {
    ops.push_back({"P", element_operator(flip_all(n_sites, 1.0), d, n_sites),
                   cplx(*spec.parity)});
  }
  if (spec.reversal) {
    ops.push_back({"R", element_operator(reversal(n_sites, 1.0), d, n_sites),
                   cplx(*spec.reversal)});
  }
  return ops;
}

SymmetryReport symmetrize_check(const SparseHamiltonian& h, Model model, int n_sites,
                                const SectorSpec& spec) {
  SymmetryReport report;
  report.passed = true;
  for (const auto& c : constraint_operators(model, n_sites, spec)) {
    if (c.op.rows() != h.dim) {
      throw Error(ErrorCode::kInvalidInput, "symmetry check needs a full-space operator");
    }
    const SpMat comm = SpMat(h.matrix * c.op) - SpMat(c.op * h.matrix);
    const double norm = max_abs(comm);
    report.commutator_norms.emplace_back(c.name, norm);
    if (!(norm < 1e-9)) report.passed = false;
  }
  return report;
}

SparseHamiltonian symmetrize(const SparseHamiltonian& h, Model model, int n_sites) {
  const int d = site_dim(model);
  if (h.dim != checked_pow(d, n_sites)) {
    throw Error(ErrorCode::kInvalidInput, "symmetrize needs a full-space operator");
  }
  std::vector<Element> gens{translation(n_sites, 1.0)};
  if (model == Model::kAklt) gens.push_back(compose(flip_all(n_sites, 1.0), reversal(n_sites, 1.0)));
  if (model == Model::kGhz) {
    gens.push_back(reversal(n_sites, 1.0));
    gens.push_back(flip_all(n_sites, 1.0));
  }
  const auto group = close_group(n_sites, gens);
  SpMat acc(h.dim, h.dim);
  for (const auto& g : group) {
    const SpMat u = element_operator(g, d, n_sites);
    acc += SpMat(u * h.matrix * SpMat(u.adjoint()));
  }
  acc *= cplx(1.0 / static_cast<double>(group.size()));
  if (model == Model::kAklt) {
    // Haar average over exp(i theta Sz) keeps the Sz-conserving blocks
    std::vector<int> sz(static_cast<std::size_t>(h.dim));
    Action act(3, n_sites);
    for (Index x = 0; x < h.dim; ++x) {
      act.load(x);
      sz[x] = act.sz();
    }
    acc.prune([&](Index r, Index c, const cplx&) { return sz[r] == sz[c]; });
  }
  SparseHamiltonian out = h;
  out.matrix = 0.5 * (acc + SpMat(acc.adjoint()));
  out.matrix.makeCompressed();
  return out;
}

Mat STemplate::embed(const RVec& params) const {
  if (params.size() != n_params()) {
    throw Error(ErrorCode::kInvalidInput, "template expects " + std::to_string(n_params()) +
                                              " parameters, got " +
                                              std::to_string(params.size()));
  }
  Mat s = offset;
  for (int k = 0; k < n_params(); ++k) s += params(k) * directions[k];
  return s;
}

RVec STemplate::params_of(const Mat& s) const {
  const Index mm = Index{m()} * m();
  RMat a(2 * mm, n_params());
  RVec b(2 * mm);
  const Mat diff = s - offset;
  for (Index e = 0; e < mm; ++e) {
    b(e) = diff.data()[e].real();
    b(mm + e) = diff.data()[e].imag();
    for (int k = 0; k < n_params(); ++k) {
      a(e, k) = directions[k].data()[e].real();
      a(mm + e, k) = directions[k].data()[e].imag();
    }
  }
  return a.colPivHouseholderQr().solve(b);
}

STemplate symmetric_s_template(Model model, TemplateKind kind) {
  STemplate t;
  t.model = model;
  t.kind = kind;
  t.real = true;
  if (model == Model::kAklt) {
    if (kind != TemplateKind::kFull) {
      throw Error(ErrorCode::kInvalidInput, "the AKLT template is already diagonal");
    }
    t.param_names = {"S11", "S22"};
    t.offset = Mat::Zero(5, 5);
    t.offset(2, 2) = 1.0;
    Mat d1 = Mat::Zero(5, 5);
    d1(0, 0) = 1.0;
    d1(2, 2) = -2.0;
    d1(4, 4) = 1.0;
    Mat d2 = Mat::Zero(5, 5);
    d2(1, 1) = 1.0;
    d2(2, 2) = -2.0;
    d2(3, 3) = 1.0;
    t.directions = {d1, d2};
    t.canonical = RVec::Constant(2, 0.2);
    Mat q = Mat::Zero(5, 5);
    for (int a = 0; a < 5; ++a) q(4 - a, a) = 1.0;
    t.local_symmetries = {q};
    RVec charges(5);
    charges << 2, 1, 0, -1, -2;
    t.charges = charges;
    return t;
  }
  if (model == Model::kGhz) {
    t.offset = Mat::Zero(4, 4);
    t.offset(1, 1) = 0.5;
    t.offset(2, 2) = 0.5;
    Mat d11 = Mat::Zero(4, 4);
    d11(0, 0) = 1.0;
    d11(1, 1) = -1.0;
    d11(2, 2) = -1.0;
    d11(3, 3) = 1.0;
    Mat p = Mat::Zero(4, 4);
    for (int a = 0; a < 4; ++a) p(3 - a, a) = 1.0;
    Mat r = Mat::Zero(4, 4);
    r(0, 0) = 1.0;
    r(2, 1) = -1.0;
    r(1, 2) = -1.0;
    r(3, 3) = 1.0;
    t.local_symmetries = {p, r};
    if (kind == TemplateKind::kDiagonal) {
      t.param_names = {"S11"};
      t.directions = {d11};
      t.canonical = RVec::Constant(1, 0.25);
      return t;
    }
    auto sym = [](std::initializer_list<std::tuple<int, int, double>> entries) {
      Mat m = Mat::Zero(4, 4);
      for (const auto& [i, j, v] : entries) {
        m(i, j) = v;
        m(j, i) = v;
      }
      return m;
    };
    t.param_names = {"S11", "S12", "S14", "S23"};
    t.directions = {d11, sym({{0, 1, 1.0}, {0, 2, -1.0}, {1, 3, -1.0}, {2, 3, 1.0}}),
                    sym({{0, 3, 1.0}}), sym({{1, 2, 1.0}})};
    t.canonical = RVec::Zero(4);
    t.canonical(0) = 0.25;
    return t;
  }
  throw Error(ErrorCode::kInvalidInput,
              std::string("no symmetric S template for model ") + to_string(model));
}

Mat project_onto_template(const Mat& b, const STemplate& tmpl) {
  if (b.rows() != tmpl.m() || b.cols() != tmpl.m()) {
    throw Error(ErrorCode::kInvalidInput, "matrix does not match the template size");
  }
  // close the local symmetry group under multiplication
  std::vector<Mat> group{Mat::Identity(tmpl.m(), tmpl.m())};
  for (std::size_t head = 0; head < group.size(); ++head) {
    for (const auto& u : tmpl.local_symmetries) {
      Mat next = u * group[head];
      const bool known = std::any_of(group.begin(), group.end(), [&](const Mat& g) {
        return linalg::max_abs(g - next) < 1e-12;
      });
      if (!known) group.push_back(std::move(next));
      if (group.size() > 256) {
        throw Error(ErrorCode::kInvalidInput, "template symmetry group is too large");
      }
    }
  }
  Mat avg = Mat::Zero(tmpl.m(), tmpl.m());
  for (const auto& g : group) avg += g * b * g.adjoint();
  avg /= static_cast<double>(group.size());
  if (tmpl.charges) {
    for (int i = 0; i < tmpl.m(); ++i) {
      for (int j = 0; j < tmpl.m(); ++j) {
        if ((*tmpl.charges)(i) != (*tmpl.charges)(j)) avg(i, j) = 0.0;
      }
    }
  }
  if (tmpl.kind == TemplateKind::kDiagonal) avg = Mat(avg.diagonal().asDiagonal());
  if (tmpl.real) avg = avg.real().cast<cplx>();
  return 0.5 * (avg + avg.adjoint());
}

double template_violation(const Mat& s, const STemplate& tmpl) {
  double worst = 0.0;
  for (const auto& u : tmpl.local_symmetries) {
    worst = std::max(worst, linalg::max_abs(s * u - u * s));
  }
  for (int i = 0; i < s.rows(); ++i) {
    for (int j = 0; j < s.cols(); ++j) {
      if (tmpl.charges && (*tmpl.charges)(i) != (*tmpl.charges)(j)) {
        worst = std::max(worst, std::abs(s(i, j)));
      }
      if (tmpl.kind == TemplateKind::kDiagonal && i != j) {
        worst = std::max(worst, std::abs(s(i, j)));
      }
      if (tmpl.real) worst = std::max(worst, std::abs(s(i, j).imag()));
    }
  }
  return worst;
}

}  // namespace gapopt::sym
