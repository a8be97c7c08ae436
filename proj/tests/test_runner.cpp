#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gapopt/runner.hpp"

using namespace gapopt;
namespace fs = std::filesystem;

namespace {

std::string parse_error(const std::string& text) {
  try {
    cfg::parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// CSV without its "# gapopt <version> <timestamp>" line.
std::string csv_without_stamp(const fs::path& p) {
  const std::string text = slurp(p);
  REQUIRE(text.rfind("# gapopt ", 0) == 0);
  return text.substr(text.find('\n') + 1);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gapopt_test_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kAkltSmall = R"(
[model]
name = aklt
n_sites = 6
[lambda]
start = 0.5
stop = 0.8
steps = 4
)";

}  // namespace

TEST_CASE("config parse errors name the field") {
  CHECK(parse_error("[model]\nn_sites = 6\n").find("model.name") == 0);
  CHECK(parse_error("[model]\nname = xxz\nn_sites = 6\n").find("model.name") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = six\n").find("model.n_sites") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\nshape = ring\n").find("model.shape") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\n[plot]\nx = 1\n").find("plot") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\n[lambda]\nsteps = 1\n").find("lambda.steps") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\n[optimizer]\ngrad_tol = 0\n")
            .find("optimizer.grad_tol") == 0);
  CHECK(parse_error("[model]\nname = random\nn_sites = 7\n").find("model.n_sites") == 0);
  CHECK(parse_error("[model]\nname = random\nn_sites = 6\n[template]\nenabled = true\n")
            .find("template.enabled") == 0);
  CHECK(parse_error("[model]\nname = ghz\nn_sites = 6\n[sector]\nsz_total = 0\n").find("sector.sz_total") == 0);
  CHECK(parse_error("[model]\nname = ghz\nn_sites = 6\n[sector]\nparity = 2\n").find("sector.parity") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\n[random_model]\nn_instances = 0\n")
            .find("random_model.n_instances") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\n[output]\nformats = csv, png\n")
            .find("output.formats") == 0);
  CHECK(parse_error("[model]\nname = aklt\nn_sites = 6\n[optimizer]\ninit = file\n")
            .find("optimizer.init_file") == 0);
}

TEST_CASE("config defaults and inline comments") {
  const auto c = cfg::parse_config(
      "; experiment\n[model]\nname = aklt   ; spin-1\nn_sites = 8 # sites\n[lambda]\nsteps = 11\n");
  CHECK(c.model == Model::kAklt);
  CHECK(c.n_sites == 8);
  CHECK(c.lambda.steps == 11);
  CHECK(c.use_template);
  CHECK(c.sector_enabled);
  CHECK(c.init == cfg::InitKind::kWarm);
  const auto grid = c.lambda.values();
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[5] == doctest::Approx(0.5).epsilon(1e-15));

  const auto r = cfg::parse_config("[model]\nname = random\nn_sites = 6\n[random_model]\nseed = 4\nn_instances = 3\n");
  CHECK_FALSE(r.use_template);
  CHECK(r.instance_count() == 3);
  CHECK(r.instance_seed(2) == 6);
}

TEST_CASE("validate reports sizes without running") {
  SUBCASE("aklt N=8 symmetric sector") {
    const auto j = cfg::validate(cfg::parse_config("[model]\nname = aklt\nn_sites = 8\n"));
    CHECK(j["ok"].get<bool>());
    CHECK(j["sector_dim"].get<long long>() == 98);
    CHECK(j["full_dim"].get<long long>() == 6561);
    CHECK(j["n_params"].get<int>() == 2);
  }
  SUBCASE("ghz N=20 without symmetry is refused") {
    const auto j = cfg::validate(
        cfg::parse_config("[model]\nname = ghz\nn_sites = 20\n[sector]\nenabled = false\n[template]\nenabled = false\n"));
    CHECK_FALSE(j["ok"].get<bool>());
    REQUIRE(j["errors"].size() >= 1);
    CHECK(j["errors"][0].get<std::string>().find("size guard") != std::string::npos);
  }
  SUBCASE("random N=6 blocks pairs of spins") {
    const auto j = cfg::validate(cfg::parse_config("[model]\nname = random\nn_sites = 6\n"));
    CHECK(j["ok"].get<bool>());
    CHECK(j["chain_sites"].get<int>() == 3);
    CHECK(j["site_dim"].get<int>() == 4);
  }
}

TEST_CASE("csv and json records agree") {
  auto c = cfg::parse_config(kAkltSmall);
  const auto dir = scratch("roundtrip");
  c.out_dir = dir.string();
  const auto result = run::run_experiment(c, 1);
  REQUIRE(result.n_failed == 0);
  const auto& path = result.instances[0].path;
  REQUIRE(path.points.size() == 4);

  const auto rows = run::read_csv((dir / "results.csv").string());
  REQUIRE(rows.size() == 4);
  std::ifstream in(dir / "results.json");
  nlohmann::json record;
  in >> record;
  REQUIRE(record["rows"].size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& j = record["rows"][i];
    CHECK(rows[i].lambda == j["lambda"].get<double>());
    CHECK(rows[i].gap_canonical == j["gap_canonical"].get<double>());
    CHECK(rows[i].gap_optimized == j["gap_optimized"].get<double>());
    CHECK(rows[i].n_iter == j["n_iter"].get<int>());
    CHECK(rows[i].converged == j["converged"].get<bool>());
    CHECK(rows[i].grad_norm == j["grad_norm"].get<double>());
    CHECK(rows[i].s_params == j["s_params"].get<std::vector<double>>());
    // and both match the in-memory result exactly
    CHECK(rows[i].gap_optimized == path.points[i].gap_optimized);
    CHECK(rows[i].gap_optimized >= rows[i].gap_canonical - 1e-9);
  }
  CHECK(record["software"]["version"] == run::version());
  CHECK(record["config"]["model"]["name"] == "aklt");
  CHECK(record["summary"]["n_points"] == 4);

  const std::string dat = slurp(dir / "path.dat");
  CHECK(dat.find("# lambda gap_optimized") != std::string::npos);
  CHECK(dat.find("\n\n\n") != std::string::npos);
}

TEST_CASE("csv parser accepts its own output and rejects foreign headers") {
  CHECK_THROWS_AS(run::parse_csv("lambda,gap\n0,1\n"), Error);
  opt::PathResult p;
  opt::PointResult a;
  a.lambda = 0.1;
  a.ok = true;
  a.gap_canonical = 1.0 / 3.0;
  a.gap_optimized = 0.1 + 0.2;
  a.n_iter = 7;
  a.converged = true;
  a.grad_norm = 1e-9;
  a.params = RVec::LinSpaced(2, 0.1, 0.3);
  opt::PointResult b;
  b.lambda = 0.2;
  b.ok = false;
  p.points = {a, b};
  const auto rows = run::parse_csv(run::csv_body(p));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].gap_canonical == 1.0 / 3.0);
  CHECK(rows[0].gap_optimized == 0.1 + 0.2);
  CHECK(rows[0].s_params == std::vector<double>{0.1, 0.3});
  CHECK(std::isnan(rows[1].gap_optimized));
  CHECK_FALSE(rows[1].converged);
}

TEST_CASE("reruns give identical csv bodies") {
  auto c = cfg::parse_config(kAkltSmall);
  const auto d1 = scratch("rerun1");
  const auto d2 = scratch("rerun2");
  c.out_dir = d1.string();
  run::run_experiment(c, 1);
  c.out_dir = d2.string();
  run::run_experiment(c, 1);
  CHECK(csv_without_stamp(d1 / "results.csv") == csv_without_stamp(d2 / "results.csv"));
}

TEST_CASE("random instances run in parallel and keep their own directories") {
  auto c = cfg::parse_config(
      "[model]\nname = random\nn_sites = 6\n[lambda]\nsteps = 3\n[optimizer]\nmax_iter = 40\n"
      "[random_model]\nseed = 5\nn_instances = 3\n");
  const auto dir = scratch("parallel");
  c.out_dir = dir.string();
  const auto par = run::run_experiment(c, 3);
  CHECK(par.n_failed == 0);
  REQUIRE(par.instances.size() == 3);
  CHECK(fs::exists(dir / "summary.json"));
  for (int k = 0; k < 3; ++k) {
    CHECK(par.instances[k].seed == static_cast<std::uint64_t>(5 + k));
    CHECK(fs::exists(fs::path(par.instances[k].dir) / "results.csv"));
  }
  // one worker gives the same numbers
  const auto dir2 = scratch("serial");
  c.out_dir = dir2.string();
  const auto ser = run::run_experiment(c, 1);
  for (int k = 0; k < 3; ++k) {
    CHECK(run::csv_body(par.instances[k].path) == run::csv_body(ser.instances[k].path));
  }
}

TEST_CASE("failed instances are recorded, not thrown") {
  auto c = cfg::parse_config("[model]\nname = aklt\nn_sites = 12\n[sector]\nenabled = false\n"
                             "[template]\nenabled = false\n");
  const auto dir = scratch("fail");
  c.out_dir = dir.string();
  const auto r = run::run_experiment(c, 1);
  CHECK(r.n_failed == 1);
  CHECK_FALSE(r.instances[0].ok);
  CHECK(r.instances[0].error_code == ErrorCode::kTooLarge);
  std::ifstream in(dir / "results.json");
  nlohmann::json record;
  in >> record;
  CHECK_FALSE(record["ok"].get<bool>());
  CHECK(record.contains("error"));
}

TEST_CASE("init file seeds the first point") {
  const auto dir = scratch("init");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "init.json");
    f << R"({"params": [0.25, 0.15]})";
  }
  {
    std::ofstream f(dir / "exp.ini");
    f << kAkltSmall << "[optimizer]\ninit = file\ninit_file = init.json\n[output]\ndir = "
      << (dir / "out").string() << "\n";
  }
  const auto c = cfg::load_config((dir / "exp.ini").string());
  CHECK(c.init_file == (dir / "init.json").string());
  CHECK(cfg::read_init_params(c.init_file).size() == 2);
  const auto r = run::run_experiment(c, 1);
  CHECK(r.n_failed == 0);
  // same optimum as the canonical start (concave problem)
  auto c2 = cfg::parse_config(kAkltSmall);
  c2.out_dir = (dir / "out2").string();
  const auto r2 = run::run_experiment(c2, 1);
  for (std::size_t i = 0; i < r.instances[0].path.points.size(); ++i) {
    CHECK(r.instances[0].path.points[i].gap_optimized ==
          doctest::Approx(r2.instances[0].path.points[i].gap_optimized).epsilon(1e-6));
  }

  std::ofstream(dir / "bad.json") << "[1, \"x\"]";
  CHECK_THROWS_AS(cfg::read_init_params((dir / "bad.json").string()), Error);
  CHECK_THROWS_AS(cfg::read_init_params((dir / "missing.json").string()), Error);
}
