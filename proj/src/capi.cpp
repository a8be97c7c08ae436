#include "gapopt/gapopt.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <spdlog/spdlog.h>

#include "gapopt/runner.hpp"

struct gapopt_config {
  gapopt::cfg::ExperimentConfig config;
};

struct gapopt_result {
  gapopt::run::RunResult result;
};

namespace {

thread_local std::string last_error;

gapopt_status status_of(gapopt::ErrorCode code) {
  using gapopt::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kInvalidSize: return GAPOPT_ERR_INVALID_ARGUMENT;
    case ErrorCode::kTooLarge: return GAPOPT_ERR_TOO_LARGE;
    case ErrorCode::kEmptySector: return GAPOPT_ERR_EMPTY_SECTOR;
    case ErrorCode::kConvergence: return GAPOPT_ERR_CONVERGENCE;
    case ErrorCode::kFeasibility: return GAPOPT_ERR_FEASIBILITY;
    case ErrorCode::kStiffness: return GAPOPT_ERR_STIFFNESS;
    case ErrorCode::kParse: return GAPOPT_ERR_PARSE;
    case ErrorCode::kIo: return GAPOPT_ERR_IO;
  }
  return GAPOPT_ERR_INTERNAL;
}

gapopt_status fail(gapopt_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs f, translating exceptions into status codes.
template <typename F>
gapopt_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const gapopt::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GAPOPT_ERR_TOO_LARGE, "out of memory");
  } catch (const std::exception& e) {
    return fail(GAPOPT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GAPOPT_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gapopt_version(void) { return gapopt::run::version(); }

const char* gapopt_status_string(gapopt_status status) {
  switch (status) {
    case GAPOPT_OK: return "ok";
    case GAPOPT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GAPOPT_ERR_PARSE: return "parse error";
    case GAPOPT_ERR_TOO_LARGE: return "too large";
    case GAPOPT_ERR_EMPTY_SECTOR: return "empty sector";
    case GAPOPT_ERR_CONVERGENCE: return "convergence failure";
    case GAPOPT_ERR_FEASIBILITY: return "infeasible";
    case GAPOPT_ERR_STIFFNESS: return "stiff path";
    case GAPOPT_ERR_IO: return "i/o error";
    case GAPOPT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gapopt_last_error(void) { return last_error.c_str(); }

gapopt_status gapopt_set_log_level(const char* level) {
  if (!level) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "level is null");
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && std::strcmp(level, "off") != 0) {
    return fail(GAPOPT_ERR_INVALID_ARGUMENT, std::string("unknown log level ") + level);
  }
  spdlog::set_level(parsed);
  return GAPOPT_OK;
}

gapopt_status gapopt_config_load(const char* path, gapopt_config** out) {
  if (!path || !out) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new gapopt_config{gapopt::cfg::load_config(path)};
    return GAPOPT_OK;
  });
}

gapopt_status gapopt_config_parse(const char* text, gapopt_config** out) {
  if (!text || !out) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new gapopt_config{gapopt::cfg::parse_config(text)};
    return GAPOPT_OK;
  });
}

gapopt_status gapopt_config_set_out_dir(gapopt_config* config, const char* dir) {
  if (!config || !dir || !*dir) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null or empty argument");
  config->config.out_dir = dir;
  return GAPOPT_OK;
}

void gapopt_config_free(gapopt_config* config) { delete config; }

gapopt_status gapopt_validate(const gapopt_config* config, char** report_json, int* feasible) {
  if (!config || !report_json) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  *report_json = nullptr;
  return guarded([&] {
    const auto report = gapopt::cfg::validate(config->config);
    *report_json = copy_string(report.dump(2));
    if (feasible) *feasible = report["ok"].get<bool>() ? 1 : 0;
    return GAPOPT_OK;
  });
}

gapopt_status gapopt_run(const gapopt_config* config, int workers, gapopt_result** out) {
  if (!config || !out) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  if (workers < 1) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "workers must be at least 1");
  *out = nullptr;
  return guarded([&] {
    auto* r = new gapopt_result{gapopt::run::run_experiment(config->config, workers)};
    *out = r;
    const auto& inst = r->result.instances;
    if (!inst.empty() && r->result.n_failed == static_cast<int>(inst.size())) {
      return fail(status_of(inst.front().error_code), "every instance failed; first: " + inst.front().error);
    }
    return GAPOPT_OK;
  });
}

size_t gapopt_result_instance_count(const gapopt_result* result) {
  return result ? result->result.instances.size() : 0;
}

size_t gapopt_result_failed_count(const gapopt_result* result) {
  return result ? static_cast<size_t>(result->result.n_failed) : 0;
}

size_t gapopt_result_point_count(const gapopt_result* result, size_t instance) {
  if (!result || instance >= result->result.instances.size()) return 0;
  return result->result.instances[instance].path.points.size();
}

gapopt_status gapopt_result_point(const gapopt_result* result, size_t instance, size_t point,
                                  gapopt_point* out) {
  if (!result || !out) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  if (instance >= result->result.instances.size()) {
    return fail(GAPOPT_ERR_INVALID_ARGUMENT, "instance index out of range");
  }
  const auto& points = result->result.instances[instance].path.points;
  if (point >= points.size()) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "point index out of range");
  const auto& p = points[point];
  out->lambda = p.lambda;
  out->gap_canonical = p.gap_canonical;
  out->gap_optimized = p.gap_optimized;
  out->grad_norm = p.grad_norm;
  out->n_iter = p.n_iter;
  out->converged = p.converged ? 1 : 0;
  out->ok = p.ok ? 1 : 0;
  out->certified = p.certificate.passed ? 1 : 0;
  return GAPOPT_OK;
}

gapopt_status gapopt_result_summary_json(const gapopt_result* result, char** json) {
  if (!result || !json) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  *json = nullptr;
  return guarded([&] {
    *json = copy_string(result->result.summary.dump(2));
    return GAPOPT_OK;
  });
}

void gapopt_result_free(gapopt_result* result) { delete result; }

gapopt_status gapopt_gap(const gapopt_config* config, double lambda, const double* params,
                         size_t n_params, double* gap) {
  if (!config || !gap || (n_params && !params)) return fail(GAPOPT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& c = config->config;
    const auto setup = gapopt::opt::make_setup(c.model_spec(c.instance_seed(0)), c.sector_spec(),
                                               c.use_template, c.template_kind, c.objective);
    const gapopt::opt::Objective obj(setup, lambda);
    if (n_params != static_cast<size_t>(obj.n_params())) {
      return fail(GAPOPT_ERR_INVALID_ARGUMENT,
                  "expected " + std::to_string(obj.n_params()) + " parameters");
    }
    const gapopt::RVec p = Eigen::Map<const gapopt::RVec>(params, obj.n_params());
    const auto ev = obj.evaluate(p);
    if (!ev.feasible) return fail(GAPOPT_ERR_FEASIBILITY, "S is not positive definite");
    *gap = ev.gap;
    return GAPOPT_OK;
  });
}

void gapopt_string_free(char* s) { std::free(s); }

}  // extern "C"
