#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapopt/gap_opt.hpp"
#include "json.hpp"

namespace gapopt::cfg {

enum class InitKind { kCanonical, kWarm, kFile };

struct LambdaGrid {
  double start = 0.0;
  double stop = 1.0;
  int steps = 21;

  /// start + i (stop - start)/(steps - 1), endpoints exact.
  std::vector<double> values() const;
};

/// One experiment, read from an INI file (see README for the grammar).
struct ExperimentConfig {
  Model model = Model::kAklt;
  int n_sites = 8;  // physical sites; spin-1/2 sites for the random model
  models::BasisChoice basis = models::BasisChoice::kAuto;
  LambdaGrid lambda;

  bool sector_enabled = true;
  sym::SectorSpec sector;  // resolved: ground sector plus overrides

  bool use_template = true;
  sym::TemplateKind template_kind = sym::TemplateKind::kFull;

  opt::MaximizeOptions optimizer;
  InitKind init = InitKind::kWarm;
  std::string init_file;
  double cert_tol = 1e-5;
  opt::ObjectiveOptions objective;

  std::uint64_t seed = 1;
  double t = 0.0;
  int n_instances = 1;

  bool ode_enabled = false;
  opt::OdeOptions ode;

  std::string out_dir = "results";
  bool write_csv = true;
  bool write_json = true;
  bool write_dat = true;

  /// Chain length the Hamiltonian lives on (n_sites / 2 blocks for random).
  int chain_sites() const;
  models::ModelSpec model_spec(std::uint64_t instance_seed) const;
  std::optional<sym::SectorSpec> sector_spec() const;
  int instance_count() const { return model == Model::kRandom ? n_instances : 1; }
  std::uint64_t instance_seed(int k) const { return seed + static_cast<std::uint64_t>(k); }
};

/// Throws Error(kParse) naming the offending field, e.g. "optimizer.grad_tol".
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& config);

/// Rough nonzero count of the assembled full-space Hamiltonian.
double estimated_nonzeros(const ExperimentConfig& config);

/// Throws kTooLarge when the full space or its assembly exceeds the guards.
void enforce_size_guard(const ExperimentConfig& config);

/// Dimensions, sector size, solver choice and a memory estimate, without
/// running anything. "ok" is false when a size guard would refuse the run.
nlohmann::json validate(const ExperimentConfig& config);

/// Initial parameters for init = file: a JSON array of numbers, an object
/// with a "params" array, or a results.json record (first row's s_params).
RVec read_init_params(const std::string& path);

}  // namespace gapopt::cfg
