#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "shg/runner.hpp"

using namespace shg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_forward() {
  json j;
  j["task"] = "forward";
  j["k"] = 2.0;
  j["grid"] = {{"nx", 21}};
  j["illuminations"] = {{"count", 2}};
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("validation fills defaults and is idempotent") {
  auto v = validate_config_json(json{{"task", "forward"}, {"k", 2.0}});
  REQUIRE(v.ok);
  CHECK(v.errors.empty());
  const json& m = v.materialized;
  CHECK(m["model"] == "one_way");
  CHECK(m["output_dir"] == "out");
  CHECK(m["grid"]["nx"] == 101);
  CHECK(m["grid"]["ny"] == 101);
  CHECK(m["grid"]["lx"] == 1.0);
  CHECK(m["media"]["gamma_g"]["background"] == 1.0);
  CHECK(m["media"]["gamma_g"]["bounds"] == json::array({0.05, 5.0}));
  CHECK(m["media"]["chi2"]["inclusions"].is_array());
  CHECK(m["illuminations"]["count"] == 4);
  CHECK(m["illuminations"]["pattern"] == "plane_wave");
  CHECK(m["solver"]["res_tol"] == 1e-8);
  CHECK(m["transport"]["delta"] == 0.5);
  CHECK(m["recon_opt"]["experiment"] == "I");

  auto v2 = validate_config_json(m);
  REQUIRE(v2.ok);
  CHECK(v2.materialized == m);

  // ny defaults to nx
  auto vny = validate_config_json(json{{"task", "forward"}, {"k", 1.0}, {"grid", {{"nx", 55}}}});
  REQUIRE(vny.ok);
  CHECK(vny.materialized["grid"]["ny"] == 55);
}

TEST_CASE("validation is exhaustive and names every violation") {
  json bad;
  bad["task"] = "fly";
  bad["bogus"] = 1;
  bad["grid"] = {{"nx", 2}};
  bad["noise"] = {{"level", -0.5}};
  bad["media"] = {{"chi2", {{"bounds", json::array({2.0, 1.0})}}}};
  auto v = validate_config_json(bad);
  CHECK(!v.ok);
  CHECK(v.errors.size() >= 5);  // task, k, bogus, nx, level, bounds
  auto has = [&](const std::string& what) {
    for (const auto& e : v.errors)
      if (e.find(what) != std::string::npos) return true;
    return false;
  };
  CHECK(has("'task' must be one of"));
  CHECK(has("missing required key 'k'"));
  CHECK(has("unknown key 'bogus'"));
  CHECK(has("'nx' and 'ny' must be at least 4"));
  CHECK(has("noise: 'level' must be nonnegative"));
  CHECK(has("'bounds' lower exceeds upper"));
}

TEST_CASE("validation checks types, inclusions and task preconditions") {
  auto v = validate_config_json(json{{"task", "forward"}, {"k", "two"}});
  CHECK(!v.ok);

  json inc;
  inc["task"] = "forward";
  inc["k"] = 1.0;
  inc["media"] = {
      {"eta", {{"inclusions", json::array({{{"kind", "blob"}, {"cy", 0.5}, {"size", -0.1}, {"amplitude", 0.1}}})}}}};
  v = validate_config_json(inc);
  CHECK(!v.ok);
  auto has = [&](const std::string& what) {
    for (const auto& e : v.errors)
      if (e.find(what) != std::string::npos) return true;
    return false;
  };
  CHECK(has("'kind' must be one of"));
  CHECK(has("missing required key 'cx'"));
  CHECK(has("'size' must be positive"));

  v = validate_config_json(json{{"task", "recon_gamma"}, {"k", 1.0}});
  CHECK(!v.ok);
  CHECK(!v.errors.empty());

  v = validate_config_json(
      json{{"task", "recon_direct"}, {"k", 1.0}, {"illuminations", {{"count", 1}}}});
  CHECK(!v.ok);

  v = validate_config_json(
      json{{"task", "forward"}, {"k", 1.0}, {"illuminations", {{"pattern", "affine_pair"}, {"count", 3}}}});
  CHECK(!v.ok);
}

TEST_CASE("parse_config aggregates violations into one error") {
  json bad = {{"task", "forward"}, {"bogus", 1}};
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("invalid config:") != std::string::npos);
    CHECK(msg.find("missing required key 'k'") != std::string::npos);
    CHECK(msg.find("unknown key 'bogus'") != std::string::npos);
  }

  Config cfg = parse_config(tiny_forward());
  CHECK(cfg.task == "forward");
  CHECK(cfg.k == 2.0);
  CHECK(cfg.nx == 21);
  CHECK(cfg.ny == 21);
  CHECK(cfg.grid() == GridSpec::unit_square(21));
  CHECK(cfg.illuminations().size() == 2);
  CHECK(cfg.build_media().sigma.values[0] == 0.2);
}

TEST_CASE("admissibility bounds are enforced when media are built") {
  json j = tiny_forward();
  j["media"] = {{"chi2",
                 {{"background", 0.5},
                  {"inclusions", json::array({{{"kind", "disk"},
                                               {"cx", 0.5},
                                               {"cy", 0.5},
                                               {"size", 0.2},
                                               {"amplitude", 0.8}}})}}}};
  Config cfg = parse_config(j);  // schema-valid
  CHECK_THROWS_AS(cfg.build_media(), AdmissibilityError);
}

TEST_CASE("load_config reads files and reports parse failures") {
  const fs::path dir = "cli_test_cfg";
  fs::create_directories(dir);
  dump(dir / "good.json", tiny_forward());
  Config cfg = load_config((dir / "good.json").string());
  CHECK(cfg.nx == 21);

  CHECK_THROWS_AS(load_config((dir / "absent.json").string()), ConfigError);

  std::ofstream bad(dir / "bad.json");
  bad << "{ not json";
  bad.close();
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("forward task writes manifest, report and artifacts") {
  const fs::path out = "cli_test_forward";
  fs::remove_all(out);
  Config cfg = parse_config(tiny_forward());
  RunOptions opts;
  opts.out_dir = out.string();
  opts.seed_override = 777;
  RunReport rr = run_task(cfg, opts);
  CHECK(rr.contract_ok);
  CHECK(rr.report["task"] == "forward");
  CHECK(rr.report["trivial"] == false);
  REQUIRE(rr.report["illuminations"].size() == 2);
  for (const auto& r : rr.report["illuminations"]) {
    CHECK(r["residual_u"].get<double>() <= 1e-8 * std::max(1.0, r["u_sup"].get<double>()));
    CHECK(r["h_sup"].get<double>() > 0.0);
  }

  for (const char* f : {"manifest.json", "report.json", "timings.json"}) CHECK(fs::is_regular_file(out / f));
  for (const auto& a : rr.report["artifacts"]) CHECK(fs::is_regular_file(out / a.get<std::string>()));

  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["noise"]["seed"] == 777);
  CHECK(read_json(out / "report.json") == rr.report);

  // the manifest is itself a valid config reproducing the run
  Config cfg2 = load_config((out / "manifest.json").string());
  CHECK(cfg2.materialized == manifest);
  CHECK(cfg2.nx == cfg.nx);
  fs::remove_all(out);
}

TEST_CASE("synth task is deterministic byte for byte") {
  json j = tiny_forward();
  j["task"] = "synth";
  j["noise"] = {{"level", 0.01}, {"seed", 99}};
  j["synth"] = {{"polarized", true}, {"want_neumann", true}};
  Config cfg = parse_config(j);

  const fs::path a = "cli_test_synth_a", b = "cli_test_synth_b";
  fs::remove_all(a);
  fs::remove_all(b);
  RunOptions oa, ob;
  oa.out_dir = a.string();
  ob.out_dir = b.string();
  RunReport ra = run_task(cfg, oa);
  RunReport rb = run_task(cfg, ob);
  CHECK(ra.report == rb.report);
  CHECK(ra.report["n_illuminations"] == 2);
  CHECK(ra.report["polarized"] == true);

  size_t compared = 0;
  for (const auto& art : ra.report["artifacts"]) {
    const std::string rel = art.get<std::string>();
    CHECK(slurp(a / rel) == slurp(b / rel));
    ++compared;
  }
  CHECK(compared > 4);

  DataSet ds = load_dataset((a / "dataset").string());
  CHECK(ds.H.size() == 2);
  CHECK(ds.polarized);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("certification task passes on smooth media") {
  json j;
  j["task"] = "certify_linearization";
  j["k"] = 2.0;
  j["model"] = "coupled";
  j["grid"] = {{"nx", 21}};
  j["illuminations"] = {{"count", 2}, {"h", {{"pattern", "plane_wave"}, {"amplitude", 0.6}}}};
  j["media"] = {{"chi2",
                 {{"background", 0.1},
                  {"inclusions",
                   json::array({{{"kind", "gaussian"}, {"cx", 0.5}, {"cy", 0.5}, {"size", 0.2}, {"amplitude", 0.1}}})}}}};
  const fs::path out = "cli_test_cert";
  fs::remove_all(out);
  RunOptions opts;
  opts.out_dir = out.string();
  RunReport rr = run_task(parse_config(j), opts);
  CHECK(rr.contract_ok);
  CHECK(rr.report["pass"] == true);
  CHECK(rr.report["rows"].size() == 4);
  CHECK(fs::is_regular_file(out / "convergence.csv"));
  fs::remove_all(out);
}

TEST_CASE("direct reconstruction task checks its data conditions") {
  json j;
  j["task"] = "recon_direct";
  j["k"] = 2.0;
  j["grid"] = {{"nx", 41}};
  j["illuminations"] = {{"count", 2}, {"pattern", "affine_pair"}, {"affine", {{"c0", 1.0}, {"cy", 0.6}}}};
  const fs::path out = "cli_test_direct";
  fs::remove_all(out);
  RunOptions opts;
  opts.out_dir = out.string();
  RunReport rr = run_task(parse_config(j), opts);
  CHECK(rr.contract_ok);
  CHECK(rr.report["conditions"]["pass"] == true);
  CHECK(rr.report["conditions"]["beta0"].get<double>() > 1e-8);
  CHECK(rr.report["transport"]["inflow_count"].get<int>() > 0);
  for (const char* f : {"E1.fgrd", "E2.fgrd", "xi.fgrd", "eta_rec.fgrd", "sigma_rec.fgrd", "gamma_g_rec.fgrd"})
    CHECK(fs::is_regular_file(out / f));
  fs::remove_all(out);
}

TEST_CASE("gamma reconstruction task recovers the susceptibility from exact data") {
  json j;
  j["task"] = "recon_gamma";
  j["k"] = 1.5;
  j["grid"] = {{"nx", 31}};
  j["illuminations"] = {{"count", 1}, {"h", {{"pattern", "plane_wave"}}}};
  j["media"] = {{"chi2",
                 {{"background", 0.1},
                  {"inclusions",
                   json::array({{{"kind", "gaussian"}, {"cx", 0.45}, {"cy", 0.55}, {"size", 0.15}, {"amplitude", 0.08}}})}}}};
  const fs::path out = "cli_test_gamma";
  fs::remove_all(out);
  RunOptions opts;
  opts.out_dir = out.string();
  RunReport rr = run_task(parse_config(j), opts);
  CHECK(rr.contract_ok);
  CHECK(rr.report["ellipticity"]["pass"] == true);
  CHECK(rr.report["errors"]["chi2_interior"]["rel_l2"].get<double>() < 1e-4);
  CHECK(rr.report["cross_check"]["max_imag_residue"].get<double>() < 1e-6);
  CHECK(fs::is_regular_file(out / "gamma_rec.fgrd"));
  CHECK(fs::is_regular_file(out / "margin.fgrd"));
  fs::remove_all(out);
}

TEST_CASE("optimization task runs the configured experiment") {
  json j;
  j["task"] = "recon_opt";
  j["k"] = 2.0;
  j["grid"] = {{"nx", 17}};
  j["illuminations"] = {{"count", 2}};
  j["recon_opt"] = {{"experiment", "I"}, {"max_iter", 5}};
  j["media"] = {{"chi2",
                 {{"background", 0.1},
                  {"inclusions",
                   json::array({{{"kind", "gaussian"}, {"cx", 0.5}, {"cy", 0.5}, {"size", 0.15}, {"amplitude", 0.08}}})}}}};
  const fs::path out = "cli_test_opt";
  fs::remove_all(out);
  RunOptions opts;
  opts.out_dir = out.string();
  RunReport rr = run_task(parse_config(j), opts);
  CHECK(rr.contract_ok);
  CHECK(rr.report["experiment"] == "I");
  CHECK(rr.report["ls_failed"] == false);
  CHECK(rr.report["errors"].contains("chi2"));
  CHECK(!rr.report["errors"].contains("eta"));
  CHECK(fs::is_regular_file(out / "opt_trace.csv"));
  CHECK(fs::is_regular_file(out / "chi2_rec.fgrd"));
  fs::remove_all(out);
}

TEST_CASE("shgtool exit codes and outputs") {
  REQUIRE(fs::exists("./shgtool"));
  const fs::path dir = "cli_test_tool";
  fs::remove_all(dir);
  fs::create_directories(dir);
  dump(dir / "good.json", tiny_forward());
  json bad = tiny_forward();
  bad["bogus"] = 1;
  dump(dir / "bad.json", bad);

  CHECK(shell("./shgtool validate --config cli_test_tool/good.json > cli_test_tool/mat.json 2>/dev/null") == 0);
  CHECK(read_json(dir / "mat.json")["grid"]["nx"] == 21);
  CHECK(shell("./shgtool validate --config cli_test_tool/bad.json 2>/dev/null") == 2);
  CHECK(shell("./shgtool validate --config cli_test_tool/absent.json 2>/dev/null") == 2);
  CHECK(shell("./shgtool 2>/dev/null") == 2);

  CHECK(shell("./shgtool run --config cli_test_tool/good.json --out cli_test_tool/run > cli_test_tool/run.json "
              "2>/dev/null") == 0);
  CHECK(fs::is_regular_file(dir / "run" / "report.json"));
  CHECK(read_json(dir / "run.json")["contract_ok"] == true);

  CHECK(shell("./shgtool export --in cli_test_tool/run/H_000.fgrd --out cli_test_tool/h.png --csv "
              "cli_test_tool/h.csv > /dev/null 2>&1") == 0);
  CHECK(fs::is_regular_file(dir / "h.png"));
  CHECK(fs::is_regular_file(dir / "h.csv"));
  fs::remove_all(dir);
}
