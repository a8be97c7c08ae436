#include "gapopt/runner.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

namespace gapopt::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string params_json(const RVec& p) {
  std::string out = "[";
  for (Index i = 0; i < p.size(); ++i) {
    if (i) out += ',';
    out += fmt17(p(i));
  }
  return out + "]";
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json matrix_json(const Mat& m) {
  json re = json::array();
  json im = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json rr = json::array();
    json ri = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_file(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + file.string());
}

opt::SweepOptions sweep_options(const cfg::ExperimentConfig& c) {
  opt::SweepOptions s;
  s.maximize = c.optimizer;
  s.cert_tol = c.cert_tol;
  s.init = c.init == cfg::InitKind::kCanonical ? opt::InitMode::kCanonical : opt::InitMode::kWarm;
  if (c.init == cfg::InitKind::kFile) s.first_params = cfg::read_init_params(c.init_file);
  return s;
}

void write_outputs(const cfg::ExperimentConfig& c, InstanceRecord& rec) {
  fs::create_directories(rec.dir);
  const std::string stamp = "# gapopt " + std::string(version()) + " " + timestamp() + "\n";
  if (c.write_csv && rec.ok) {
    write_file(fs::path(rec.dir) / "results.csv", stamp + csv_body(rec.path));
    if (rec.ode) write_file(fs::path(rec.dir) / "ode_results.csv", stamp + csv_body(*rec.ode));
  }
  if (c.write_json) write_file(fs::path(rec.dir) / "results.json", rec.record.dump(2) + "\n");
  if (c.write_dat && rec.ok) {
    write_file(fs::path(rec.dir) / "path.dat",
               path_dat(rec.path, rec.ode ? &*rec.ode : nullptr, c.use_template));
  }
}

}  // namespace

const char* version() { return "0.1.0"; }

json path_summary(const opt::PathResult& path) {
  double min_can = INFINITY;
  double min_opt = INFINITY;
  int converged = 0;
  for (const auto& p : path.points) {
    if (!p.ok || !p.converged) continue;
    ++converged;
    min_can = std::min(min_can, p.gap_canonical);
    min_opt = std::min(min_opt, p.gap_optimized);
  }
  json s = {{"n_points", path.points.size()},
            {"n_failed", path.n_failed},
            {"n_converged", converged},
            {"min_gap_canonical", number_or_null(min_can)},
            {"min_gap_optimized", number_or_null(min_opt)}};
  // ratio at the last grid point; converged_end says whether that row is a
  // certified stationary point or a best-so-far value at a non-smooth optimum
  if (!path.points.empty() && path.points.back().ok && path.points.back().gap_canonical > 0.0) {
    const auto& e = path.points.back();
    s["improvement_ratio"] = e.gap_optimized / e.gap_canonical;
    s["converged_end"] = e.converged;
  } else {
    s["improvement_ratio"] = nullptr;
    s["converged_end"] = false;
  }
  return s;
}

std::string csv_body(const opt::PathResult& path) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& p : path.points) {
    const bool ok = p.ok;
    out += fmt17(p.lambda) + ',' + (ok ? fmt17(p.gap_canonical) : "nan") +
           ',' + (ok ? fmt17(p.gap_optimized) : "nan") + ',' + std::to_string(p.n_iter) + ',' +
           (p.converged ? "true" : "false") + ',' + (ok ? fmt17(p.grad_norm) : "nan") + ",\"" +
           params_json(p.params) + "\"\n";
  }
  return out;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<CsvRow> rows;
  bool header = false;
  auto num = [](const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw Error(ErrorCode::kParse, "unexpected CSV header: " + line);
      header = true;
      continue;
    }
    const auto quote = line.find(",\"");
    if (quote == std::string::npos || line.back() != '"') {
      throw Error(ErrorCode::kParse, "malformed CSV row: " + line);
    }
    std::vector<std::string> cells;
    std::stringstream head(line.substr(0, quote));
    std::string cell;
    while (std::getline(head, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw Error(ErrorCode::kParse, "expected 7 columns: " + line);
    CsvRow r;
    r.lambda = num(cells[0]);
    r.gap_canonical = num(cells[1]);
    r.gap_optimized = num(cells[2]);
    r.n_iter = std::stoi(cells[3]);
    r.converged = cells[4] == "true";
    r.grad_norm = num(cells[5]);
    const json arr = json::parse(line.substr(quote + 2, line.size() - quote - 3));
    for (const auto& v : arr) r.s_params.push_back(v.get<double>());
    rows.push_back(std::move(r));
  }
  if (!header) throw Error(ErrorCode::kParse, "CSV has no header");
  return rows;
}

std::vector<CsvRow> read_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + file);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

json path_json(const opt::PathResult& path) {
  json rows = json::array();
  for (const auto& p : path.points) {
    json r = {{"lambda", p.lambda}, {"ok", p.ok}};
    if (!p.ok) {
      r["error"] = p.error;
      r["error_code"] = to_string(p.error_code);
      rows.push_back(r);
      continue;
    }
    std::vector<double> params(p.params.data(), p.params.data() + p.params.size());
    const auto& c = p.certificate;
    r.update({{"gap_canonical", p.gap_canonical},
              {"gap_optimized", p.gap_optimized},
              {"n_iter", p.n_iter},
              {"converged", p.converged},
              {"grad_norm", p.grad_norm},
              {"s_params", params},
              {"s_matrix", matrix_json(p.s)},
              {"degenerate_canonical", p.degenerate_canonical},
              {"degenerate_optimized", p.degenerate_optimized},
              {"nonsmooth", p.nonsmooth},
              {"subgradient", p.subgradient},
              {"canonical_restart", p.canonical_restart},
              {"ode_restart", p.ode_restart},
              {"certificate",
               {{"evaluated", c.evaluated},
                {"passed", c.passed},
                {"off_diag_norm", c.off_diag_norm},
                {"eigen_spread", c.eigen_spread},
                {"common_value", c.common_value},
                {"s_rank", c.s_rank},
                {"chi_rank", c.chi_rank}}}});
    rows.push_back(r);
  }
  return rows;
}

std::string path_dat(const opt::PathResult& path, const opt::PathResult* ode, bool with_params) {
  std::string out;
  auto block = [&](const std::string& title, const opt::PathResult& p, auto value) {
    if (!out.empty()) out += "\n\n";
    out += "# lambda " + title + "\n";
    for (const auto& pt : p.points) {
      if (!pt.ok) continue;
      out += fmt17(pt.lambda) + ' ' + fmt17(value(pt)) + '\n';
    }
  };
  block("gap_canonical", path, [](const opt::PointResult& p) { return p.gap_canonical; });
  block("gap_optimized", path, [](const opt::PointResult& p) { return p.gap_optimized; });
  if (ode) block("gap_ode", *ode, [](const opt::PointResult& p) { return p.gap_optimized; });
  if (with_params) {
    Index n = 0;
    for (const auto& p : path.points) n = std::max(n, p.params.size());
    for (Index k = 0; k < n; ++k) {
      block("param_" + std::to_string(k), path, [k](const opt::PointResult& p) {
        return k < p.params.size() ? p.params(k) : std::numeric_limits<double>::quiet_NaN();
      });
    }
  }
  return out;
}

InstanceRecord run_instance(const cfg::ExperimentConfig& c, int index) {
  InstanceRecord rec;
  rec.index = index;
  rec.seed = c.instance_seed(index);
  const auto t0 = std::chrono::steady_clock::now();
  json record = {{"software", {{"name", "gapopt"}, {"version", version()}}},
                 {"config", cfg::to_json(c)},
                 {"instance", {{"index", index}}}};
  if (c.model == Model::kRandom) record["instance"]["seed"] = rec.seed;
  try {
    cfg::enforce_size_guard(c);
    const auto spec = c.model_spec(rec.seed);
    const auto setup = opt::make_setup(spec, c.sector_spec(), c.use_template, c.template_kind, c.objective);
    const auto grid = c.lambda.values();
    const auto opts = sweep_options(c);
    spdlog::info("instance {}: {} N={} sector {} ({} points)", index, to_string(c.model),
                 c.n_sites, c.sector_enabled ? c.sector.describe() : "none", grid.size());
    rec.path = opt::sweep(setup, grid, opts);
    for (const auto& p : rec.path.points) {
      if (p.ok) {
        spdlog::debug("  lambda {:.4f}: canonical {:.8f} optimized {:.8f} ({} it{})", p.lambda,
                      p.gap_canonical, p.gap_optimized, p.n_iter, p.converged ? "" : ", unconverged");
      } else {
        spdlog::warn("  lambda {:.4f} failed: {}", p.lambda, p.error);
      }
    }
    if (c.ode_enabled) {
      RVec start;
      if (rec.path.points.front().ok && rec.path.points.front().certificate.passed) {
        start = rec.path.points.front().params;
      }
      rec.ode = opt::ode_follow(setup, grid, start, opts, c.ode);
    }
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.error_code = e.code();
    spdlog::error("instance {} failed: {}", index, e.what());
  } catch (const std::bad_alloc&) {
    rec.ok = false;
    rec.error = "out of memory";
    rec.error_code = ErrorCode::kTooLarge;
    spdlog::error("instance {} failed: out of memory", index);
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record["ok"] = rec.ok;
  record["wall_clock_seconds"] = rec.wall_seconds;
  if (rec.ok) {
    record["rows"] = path_json(rec.path);
    record["summary"] = path_summary(rec.path);
    if (rec.ode) {
      record["ode"] = {{"rows", path_json(*rec.ode)}, {"summary", path_summary(*rec.ode)}};
    }
  } else {
    record["error"] = rec.error;
    record["error_code"] = to_string(rec.error_code);
  }
  rec.record = std::move(record);
  return rec;
}

RunResult run_experiment(const cfg::ExperimentConfig& c, int workers) {
  const int n = c.instance_count();
  RunResult out;
  out.out_dir = c.out_dir;
  out.instances.resize(n);
  workers = std::max(1, std::min(workers, n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k = next++; k < n; k = next++) {
      InstanceRecord rec = run_instance(c, k);
      rec.dir = n == 1 ? c.out_dir
                       : (fs::path(c.out_dir) /
                          ("instance_" + std::to_string(k) + "_seed_" + std::to_string(rec.seed)))
                             .string();
      try {
        write_outputs(c, rec);
      } catch (const std::exception& e) {
        spdlog::error("instance {}: {}", k, e.what());
        if (rec.ok) {
          rec.ok = false;
          rec.error = e.what();
          rec.error_code = ErrorCode::kIo;
        }
      }
      out.instances[k] = std::move(rec);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  json instances = json::array();
  for (const auto& rec : out.instances) {
    if (!rec.ok) ++out.n_failed;
    json i = {{"index", rec.index}, {"dir", rec.dir}, {"ok", rec.ok}};
    if (c.model == Model::kRandom) i["seed"] = rec.seed;
    if (rec.ok) i["summary"] = rec.record["summary"];
    else i["error"] = rec.error;
    instances.push_back(i);
  }
  out.summary = {{"software", {{"name", "gapopt"}, {"version", version()}}},
                 {"n_instances", n},
                 {"n_failed", out.n_failed},
                 {"instances", instances}};
  if (n > 1) {
    fs::create_directories(c.out_dir);
    write_file(fs::path(c.out_dir) / "summary.json", out.summary.dump(2) + "\n");
  }
  return out;
}

}  // namespace gapopt::run
