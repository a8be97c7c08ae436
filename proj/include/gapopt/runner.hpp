#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gapopt/config.hpp"

namespace gapopt::run {

const char* version();

struct InstanceRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::string dir;  // where this instance's files went
  bool ok = false;
  std::string error;
  ErrorCode error_code = ErrorCode::kInvalidInput;
  opt::PathResult path;
  std::optional<opt::PathResult> ode;
  double wall_seconds = 0.0;
  nlohmann::json record;  // results.json content
};

struct RunResult {
  std::vector<InstanceRecord> instances;
  int n_failed = 0;
  std::string out_dir;
  nlohmann::json summary;
};

/// Runs every instance (seeds seed, seed+1, ... for the random model) on a
/// pool of `workers` threads and writes the requested files. Single
/// instances write into out_dir directly, several into
/// out_dir/instance_<k>_seed_<seed>/ next to a summary.json.
RunResult run_experiment(const cfg::ExperimentConfig& config, int workers = 1);

/// One instance, no files written.
InstanceRecord run_instance(const cfg::ExperimentConfig& config, int index);

/// Summary of one path over its converged rows.
nlohmann::json path_summary(const opt::PathResult& path);

struct CsvRow {
  double lambda = 0.0;
  double gap_canonical = 0.0;
  double gap_optimized = 0.0;
  int n_iter = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<double> s_params;
};

inline constexpr const char* kCsvHeader =
    "lambda,gap_canonical,gap_optimized,n_iter,converged,grad_norm,s_params_json";

/// CSV body: header line plus one row per point, numbers at 17 significant
/// digits. The caller adds the "# gapopt <version> <timestamp>" line.
std::string csv_body(const opt::PathResult& path);
std::vector<CsvRow> parse_csv(const std::string& text);
std::vector<CsvRow> read_csv(const std::string& file);

nlohmann::json path_json(const opt::PathResult& path);

/// Whitespace-separated blocks (lambda, value) separated by two blank lines:
/// canonical gap, optimized gap, the ODE gap when present, then one block per
/// template parameter.
std::string path_dat(const opt::PathResult& path, const opt::PathResult* ode, bool with_params);

}  // namespace gapopt::run
