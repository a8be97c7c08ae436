#include "gapopt/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace gapopt::cfg {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParse, field + ": " + what);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Drops a trailing " ; comment" or " # comment".
std::string strip_inline_comment(const std::string& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if ((v[i] == ';' || v[i] == '#') && std::isspace(static_cast<unsigned char>(v[i - 1]))) {
      return trim(v.substr(0, i));
    }
  }
  return trim(v);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model", {"name", "n_sites", "basis"}},
      {"lambda", {"start", "stop", "steps"}},
      {"sector", {"enabled", "momentum", "sz_total", "q_eigen", "parity", "reversal"}},
      {"template", {"enabled", "kind"}},
      {"optimizer",
       {"grad_tol", "max_iter", "init", "init_file", "cert_tol", "barrier_weight", "armijo",
        "boundary_fraction", "stall_window"}},
      {"solver", {"dense_limit", "tol", "max_restarts", "deg_tol", "force_iterative"}},
      {"random_model", {"seed", "t", "n_instances"}},
      {"ode",
       {"enabled", "h_p", "h_lambda", "substeps", "reproject_every", "cond_tol", "newton_tol",
        "restart_on_kink"}},
      {"output", {"dir", "formats"}},
  };
  return s;
}

class Fields {
 public:
  explicit Fields(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) fail(section, "key outside of any section");
      const auto known = schema().find(section);
      if (known == schema().end()) fail(section, "unknown section");
      for (const auto& [key, value] : body) {
        if (!known->second.count(key)) fail(section + "." + key, "unknown key");
        values_[section + "." + key] = strip_inline_comment(value.data());
      }
    }
  }

  bool has(const std::string& f) const { return values_.count(f) > 0; }

  std::string text(const std::string& f, const std::string& fallback) const {
    const auto it = values_.find(f);
    return it == values_.end() ? fallback : it->second;
  }

  double real(const std::string& f, double fallback) const {
    if (!has(f)) return fallback;
    const std::string v = values_.at(f);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail(f, "expected a finite number, got '" + v + "'");
    }
  }

  long long integer(const std::string& f, long long fallback) const {
    if (!has(f)) return fallback;
    const std::string v = values_.at(f);
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail(f, "expected an integer, got '" + v + "'");
    }
  }

  bool boolean(const std::string& f, bool fallback) const {
    if (!has(f)) return fallback;
    std::string v = values_.at(f);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(f, "expected true or false, got '" + values_.at(f) + "'");
  }

 private:
  std::map<std::string, std::string> values_;
};

double positive(const Fields& f, const std::string& field, double fallback) {
  const double v = f.real(field, fallback);
  if (!(v > 0.0)) fail(field, "must be positive");
  return v;
}

int int_in(const Fields& f, const std::string& field, long long fallback, long long lo, long long hi) {
  const long long v = f.integer(field, fallback);
  if (v < lo || v > hi) {
    fail(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

void apply_sector(const Fields& f, ExperimentConfig& c) {
  c.sector_enabled = f.boolean("sector.enabled", true);
  c.sector = sym::ground_sector(c.model);
  const bool aklt = c.model == Model::kAklt;
  const bool ghz = c.model == Model::kGhz;
  auto qn = [&](const char* key, bool allowed, std::optional<int>& slot, bool z2) {
    const std::string field = std::string("sector.") + key;
    if (!f.has(field)) return;
    if (!allowed) fail(field, std::string("not a quantum number of the ") + to_string(c.model) + " model");
    const long long v = f.integer(field, 0);
    if (z2 && v != 1 && v != -1) fail(field, "must be 1 or -1");
    slot = static_cast<int>(v);
  };
  qn("momentum", true, c.sector.momentum, false);
  qn("sz_total", aklt, c.sector.sz_total, false);
  qn("q_eigen", aklt, c.sector.q_eigen, true);
  qn("parity", ghz, c.sector.parity, true);
  qn("reversal", ghz, c.sector.reversal, true);
  if (c.sector.momentum && (*c.sector.momentum < 0 || *c.sector.momentum >= c.chain_sites())) {
    fail("sector.momentum", "must lie in [0, chain length)");
  }
}

}  // namespace

std::vector<double> LambdaGrid::values() const {
  std::vector<double> out(steps);
  for (int i = 0; i < steps; ++i) {
    out[i] = start + (stop - start) * static_cast<double>(i) / (steps - 1);
  }
  out.back() = stop;
  return out;
}

int ExperimentConfig::chain_sites() const {
  return model == Model::kRandom ? n_sites / 2 : n_sites;
}

models::ModelSpec ExperimentConfig::model_spec(std::uint64_t instance_seed) const {
  models::ModelSpec spec{model, chain_sites(), basis, std::nullopt};
  if (model == Model::kRandom) spec.family = tn::make_random_family(instance_seed, t);
  return spec;
}

std::optional<sym::SectorSpec> ExperimentConfig::sector_spec() const {
  if (!sector_enabled) return std::nullopt;
  return sector;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Fields f(tree);
  ExperimentConfig c;

  if (!f.has("model.name")) fail("model.name", "required");
  try {
    c.model = parse_model(f.text("model.name", ""));
  } catch (const Error& e) {
    fail("model.name", e.what());
  }
  if (!f.has("model.n_sites")) fail("model.n_sites", "required");
  c.n_sites = int_in(f, "model.n_sites", 0, 1, 64);
  if (c.model == Model::kRandom && c.n_sites % 2 != 0) {
    fail("model.n_sites", "the random model pairs spins into blocks; n_sites must be even");
  }
  const std::string basis = f.text("model.basis", "auto");
  if (basis == "auto") c.basis = models::BasisChoice::kAuto;
  else if (basis == "closed_form") c.basis = models::BasisChoice::kClosedForm;
  else if (basis == "svd") c.basis = models::BasisChoice::kSvd;
  else fail("model.basis", "expected auto, closed_form or svd");
  if (c.model == Model::kRandom && c.basis == models::BasisChoice::kClosedForm) {
    fail("model.basis", "the random model has no closed-form kernel basis");
  }

  c.lambda.start = f.real("lambda.start", 0.0);
  c.lambda.stop = f.real("lambda.stop", 1.0);
  c.lambda.steps = int_in(f, "lambda.steps", 21, 2, 100000);
  if (c.lambda.stop < c.lambda.start) fail("lambda.stop", "must not be below lambda.start");

  apply_sector(f, c);

  c.use_template = f.boolean("template.enabled", c.model != Model::kRandom);
  if (c.use_template && c.model == Model::kRandom) {
    fail("template.enabled", "the random model has no symmetric template");
  }
  const std::string kind = f.text("template.kind", "full");
  if (kind == "full") c.template_kind = sym::TemplateKind::kFull;
  else if (kind == "diagonal") c.template_kind = sym::TemplateKind::kDiagonal;
  else fail("template.kind", "expected full or diagonal");
  if (c.sector_enabled && !c.use_template) {
    const auto& s = c.sector;
    if (s.sz_total || s.q_eigen || s.parity || s.reversal) {
      fail("template.enabled", "sector " + s.describe() + " needs the symmetric template");
    }
  }

  c.optimizer.grad_tol = positive(f, "optimizer.grad_tol", 1e-7);
  c.optimizer.max_iter = int_in(f, "optimizer.max_iter", 500, 0, 1000000);
  c.optimizer.armijo = positive(f, "optimizer.armijo", 1e-4);
  c.optimizer.boundary_fraction = positive(f, "optimizer.boundary_fraction", 0.95);
  c.optimizer.stall_window = int_in(f, "optimizer.stall_window", 25, 0, 1000000);
  if (c.optimizer.armijo >= 1.0) fail("optimizer.armijo", "must be below 1");
  if (c.optimizer.boundary_fraction >= 1.0) fail("optimizer.boundary_fraction", "must be below 1");
  c.cert_tol = positive(f, "optimizer.cert_tol", 1e-5);
  c.objective.barrier_weight = f.real("optimizer.barrier_weight", 1e-8);
  if (c.objective.barrier_weight < 0.0) fail("optimizer.barrier_weight", "must be non-negative");
  const std::string init = f.text("optimizer.init", "warm");
  if (init == "warm") c.init = InitKind::kWarm;
  else if (init == "canonical") c.init = InitKind::kCanonical;
  else if (init == "file") c.init = InitKind::kFile;
  else fail("optimizer.init", "expected canonical, warm or file");
  c.init_file = f.text("optimizer.init_file", "");
  if (c.init == InitKind::kFile && c.init_file.empty()) {
    fail("optimizer.init_file", "required when optimizer.init = file");
  }

  c.objective.solver.dense_limit = int_in(f, "solver.dense_limit", 4096, 2, 1 << 20);
  c.objective.solver.tol = positive(f, "solver.tol", 1e-10);
  c.objective.solver.max_restarts = int_in(f, "solver.max_restarts", 2000, 1, 1000000);
  c.objective.solver.force_iterative = f.boolean("solver.force_iterative", false);
  const std::string deg = f.text("solver.deg_tol", "auto");
  c.objective.deg_tol = deg == "auto" ? -1.0 : positive(f, "solver.deg_tol", 1.0);

  const long long seed = f.integer("random_model.seed", 1);
  if (seed < 0) fail("random_model.seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.t = f.real("random_model.t", 0.0);
  c.n_instances = int_in(f, "random_model.n_instances", 1, 1, 100000);

  c.ode_enabled = f.boolean("ode.enabled", false);
  c.ode.h_p = positive(f, "ode.h_p", 1e-4);
  c.ode.h_lambda = positive(f, "ode.h_lambda", 1e-4);
  c.ode.substeps = int_in(f, "ode.substeps", 4, 1, 10000);
  c.ode.reproject_every = int_in(f, "ode.reproject_every", 0, 0, 100000);
  c.ode.cond_tol = positive(f, "ode.cond_tol", 1e12);
  c.ode.newton_tol = positive(f, "ode.newton_tol", 1e-4);
  c.ode.restart_on_kink = f.boolean("ode.restart_on_kink", true);
  if (c.ode_enabled && !c.use_template) fail("ode.enabled", "path following needs the template");

  c.out_dir = f.text("output.dir", "results");
  if (c.out_dir.empty()) fail("output.dir", "must not be empty");
  if (f.has("output.formats")) {
    c.write_csv = c.write_json = c.write_dat = false;
    std::stringstream list(f.text("output.formats", ""));
    std::string item;
    while (std::getline(list, item, ',')) {
      item = trim(item);
      if (item == "csv") c.write_csv = true;
      else if (item == "json") c.write_json = true;
      else if (item == "dat") c.write_dat = true;
      else fail("output.formats", "unknown format '" + item + "' (csv, json, dat)");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = parse_config(buf.str());
  const auto base = std::filesystem::path(path).parent_path();
  if (!c.init_file.empty() && std::filesystem::path(c.init_file).is_relative()) {
    c.init_file = (base / c.init_file).lexically_normal().string();
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  const char* basis = c.basis == models::BasisChoice::kAuto        ? "auto"
                      : c.basis == models::BasisChoice::kClosedForm ? "closed_form"
                                                                    : "svd";
  const char* init = c.init == InitKind::kWarm ? "warm" : c.init == InitKind::kCanonical ? "canonical" : "file";
  json sector = {{"enabled", c.sector_enabled}, {"description", c.sector.describe()}};
  auto put = [&](const char* k, const std::optional<int>& v) {
    if (v) sector[k] = *v;
  };
  put("momentum", c.sector.momentum);
  put("sz_total", c.sector.sz_total);
  put("q_eigen", c.sector.q_eigen);
  put("parity", c.sector.parity);
  put("reversal", c.sector.reversal);
  json formats = json::array();
  if (c.write_csv) formats.push_back("csv");
  if (c.write_json) formats.push_back("json");
  if (c.write_dat) formats.push_back("dat");
  return {
      {"model", {{"name", to_string(c.model)}, {"n_sites", c.n_sites}, {"basis", basis}}},
      {"lambda", {{"start", c.lambda.start}, {"stop", c.lambda.stop}, {"steps", c.lambda.steps}}},
      {"sector", sector},
      {"template",
       {{"enabled", c.use_template},
        {"kind", c.template_kind == sym::TemplateKind::kFull ? "full" : "diagonal"}}},
      {"optimizer",
       {{"grad_tol", c.optimizer.grad_tol},
        {"max_iter", c.optimizer.max_iter},
        {"init", init},
        {"init_file", c.init_file},
        {"cert_tol", c.cert_tol},
        {"barrier_weight", c.objective.barrier_weight},
        {"armijo", c.optimizer.armijo},
        {"boundary_fraction", c.optimizer.boundary_fraction},
        {"stall_window", c.optimizer.stall_window}}},
      {"solver",
       {{"dense_limit", c.objective.solver.dense_limit},
        {"tol", c.objective.solver.tol},
        {"max_restarts", c.objective.solver.max_restarts},
        {"deg_tol", c.objective.deg_tol > 0 ? json(c.objective.deg_tol) : json("auto")},
        {"force_iterative", c.objective.solver.force_iterative}}},
      {"random_model", {{"seed", c.seed}, {"t", c.t}, {"n_instances", c.n_instances}}},
      {"ode",
       {{"enabled", c.ode_enabled},
        {"h_p", c.ode.h_p},
        {"h_lambda", c.ode.h_lambda},
        {"substeps", c.ode.substeps},
        {"reproject_every", c.ode.reproject_every},
        {"cond_tol", c.ode.cond_tol},
        {"newton_tol", c.ode.newton_tol},
        {"restart_on_kink", c.ode.restart_on_kink}}},
      {"output", {{"dir", c.out_dir}, {"formats", formats}}},
  };
}

double estimated_nonzeros(const ExperimentConfig& c) {
  const double d = site_dim(c.model);
  const int chain = c.chain_sites();
  return std::pow(d, chain) * chain * std::pow(d, models::block_len(c.model));
}

void enforce_size_guard(const ExperimentConfig& c) {
  const double full_dim = std::pow(static_cast<double>(site_dim(c.model)), c.chain_sites());
  if (full_dim > static_cast<double>(kSizeGuard)) {
    throw Error(ErrorCode::kTooLarge, "Hilbert space dimension " +
                                          std::to_string(static_cast<long long>(full_dim)) +
                                          " exceeds the size guard of 2^20");
  }
  const double nnz = estimated_nonzeros(c);
  if (nnz > static_cast<double>(kNonzeroGuard)) {
    throw Error(ErrorCode::kTooLarge, "assembling the Hamiltonian needs about " +
                                          std::to_string(static_cast<long long>(nnz)) +
                                          " nonzeros, beyond the size guard of 2^25; use a smaller chain");
  }
}

nlohmann::json validate(const ExperimentConfig& c) {
  using nlohmann::json;
  json r;
  json errors = json::array();
  json warnings = json::array();
  const int chain = c.chain_sites();
  const int d = site_dim(c.model);
  const int l = models::block_len(c.model);
  r["model"] = to_string(c.model);
  r["n_sites"] = c.n_sites;
  r["chain_sites"] = chain;
  r["site_dim"] = d;
  r["block_len"] = l;
  r["lambda_points"] = c.lambda.steps;
  r["instances"] = c.instance_count();
  if (c.model != Model::kRandom && c.n_instances > 1) {
    warnings.push_back("random_model.n_instances is ignored for the " + std::string(to_string(c.model)) + " model");
  }
  if (chain < l + 1) {
    errors.push_back("chain of " + std::to_string(chain) + " sites is shorter than " +
                     std::to_string(l + 1) + " (local terms must overlap)");
  }

  const double full_dim = std::pow(static_cast<double>(d), chain);
  r["full_dim"] = full_dim;
  r["estimated_nonzeros"] = estimated_nonzeros(c);
  bool sized = true;
  try {
    enforce_size_guard(c);
  } catch (const Error& e) {
    errors.push_back(e.what());
    sized = false;
  }

  try {
    const auto spec = c.model_spec(c.instance_seed(0));
    const auto basis = models::kernel_basis(spec, c.lambda.start);
    r["kernel_dim"] = basis.m();
    if (c.use_template) {
      r["n_params"] = sym::symmetric_s_template(c.model, c.template_kind).n_params();
    } else {
      r["n_params"] = basis.m() * basis.m();
    }
  } catch (const Error& e) {
    errors.push_back(std::string("kernel basis: ") + e.what());
  }

  double working = full_dim;
  r["sector"] = c.sector_enabled ? c.sector.describe() : "none";
  if (sized && chain >= l + 1) {
    if (c.sector_enabled) {
      try {
        working = static_cast<double>(sym::sector_dimension(c.model, chain, c.sector));
        r["sector_dim"] = working;
        if (working < 2) errors.push_back("sector " + c.sector.describe() + " has fewer than two states");
      } catch (const Error& e) {
        errors.push_back(std::string("sector: ") + e.what());
      }
    }
  }
  r["working_dim"] = working;
  const bool dense = !c.objective.solver.force_iterative && working < c.objective.solver.dense_limit;
  r["solver"] = dense ? "dense" : "iterative";
  double bytes = 3.0 * chain * full_dim * 4.0 + 2.0 * estimated_nonzeros(c) * 24.0;
  bytes += dense ? 2.0 * working * working * 16.0 : 2.0 * working * 80.0 * 16.0;
  r["estimated_memory_bytes"] = bytes;
  if (c.init == InitKind::kFile && !std::filesystem::exists(c.init_file)) {
    errors.push_back("optimizer.init_file " + c.init_file + " does not exist");
  }
  r["errors"] = errors;
  r["warnings"] = warnings;
  r["ok"] = errors.empty();
  return r;
}

RVec read_init_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read init file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  const nlohmann::json* arr = &j;
  if (j.is_object()) {
    if (j.contains("params")) {
      arr = &j["params"];
    } else if (j.contains("rows") && !j["rows"].empty() && j["rows"][0].contains("s_params")) {
      arr = &j["rows"][0]["s_params"];
    } else {
      throw Error(ErrorCode::kParse, path + ": expected \"params\" or results rows");
    }
  }
  if (!arr->is_array() || arr->empty()) throw Error(ErrorCode::kParse, path + ": expected a number array");
  RVec p(arr->size());
  for (std::size_t i = 0; i < arr->size(); ++i) {
    if (!(*arr)[i].is_number()) throw Error(ErrorCode::kParse, path + ": non-numeric parameter");
    p(static_cast<Index>(i)) = (*arr)[i].get<double>();
  }
  return p;
}

}  // namespace gapopt::cfg
