#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "gapopt/gapopt.h"

namespace {

int report(gapopt_status s) {
  std::fprintf(stderr, "gapopt: %s: %s\n", gapopt_status_string(s), gapopt_last_error());
  return 2;
}

gapopt_config* load(const std::string& path, gapopt_status& s) {
  gapopt_config* c = nullptr;
  s = gapopt_config_load(path.c_str(), &c);
  return c;
}

int cmd_validate(const std::string& path) {
  gapopt_status s;
  gapopt_config* c = load(path, s);
  if (s != GAPOPT_OK) return report(s);
  char* json = nullptr;
  int feasible = 0;
  s = gapopt_validate(c, &json, &feasible);
  gapopt_config_free(c);
  if (s != GAPOPT_OK) return report(s);
  std::printf("%s\n", json);
  gapopt_string_free(json);
  return feasible ? 0 : 1;
}

int cmd_run(const std::string& path, const std::string& out_dir, int workers) {
  gapopt_status s;
  gapopt_config* c = load(path, s);
  if (s != GAPOPT_OK) return report(s);
  // --out-dir wins over GAPOPT_OUT_DIR, which wins over [output] dir.
  std::string dir = out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("GAPOPT_OUT_DIR")) dir = env;
  }
  if (!dir.empty() && (s = gapopt_config_set_out_dir(c, dir.c_str())) != GAPOPT_OK) {
    gapopt_config_free(c);
    return report(s);
  }
  gapopt_result* r = nullptr;
  s = gapopt_run(c, workers, &r);
  gapopt_config_free(c);
  if (!r) return report(s);

  char* summary = nullptr;
  if (gapopt_result_summary_json(r, &summary) == GAPOPT_OK) {
    std::printf("%s\n", summary);
    gapopt_string_free(summary);
  }
  const size_t n = gapopt_result_instance_count(r);
  const size_t failed = gapopt_result_failed_count(r);
  gapopt_result_free(r);
  if (failed > 0) std::fprintf(stderr, "gapopt: %zu of %zu instances failed\n", failed, n);
  if (s != GAPOPT_OK) return report(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gap-optimized parent Hamiltonian paths"};
  app.set_version_flag("--version", std::string(gapopt_version()));
  app.require_subcommand(1);

  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config_path, out_dir;
  int workers = 1;
  auto* run = app.add_subcommand("run", "run the sweeps and write results");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "output directory (overrides the config)");
  run->add_option("--workers", workers, "parallel instances")->check(CLI::Range(1, 1024));
  run->add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto* validate = app.add_subcommand("validate", "report dimensions and size guards without running");
  validate->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  validate->add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  CLI11_PARSE(app, argc, argv);
  gapopt_set_log_level(log_level.c_str());

  if (*validate) return cmd_validate(config_path);
  return cmd_run(config_path, out_dir, workers);
}
