#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "shg/config.hpp"
#include "shg/errors.hpp"
#include "shg/io.hpp"
#include "shg/png.hpp"
#include "shg/runner.hpp"

namespace {

using shg::Complex;

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const shg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const shg::AdmissibilityError& e) {
    std::cerr << "admissibility error: " << e.what() << "\n";
    return 4;
  } catch (const shg::DataConditionError& e) {
    std::cerr << "data condition error: " << e.what() << "\n";
    return 4;
  } catch (const shg::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const shg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw shg::ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw shg::ConfigError("config parse error in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "shgtool: simulation and reconstruction toolkit for coupled second-harmonic internal-data imaging\n"
      "exit codes: 0 success, 2 config error, 3 solver failure, 4 certification/data-condition failure"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_path, out_path, map_name = "viridis", csv_path;
  std::uint64_t seed = 0;
  int threads = 1;
  bool png = false;

  CLI::App* run = app.add_subcommand("run", "execute the task described by a config file");
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "noise seed (overrides the config)");
  run->add_option("--threads", threads, "worker threads for independent solves")->check(CLI::PositiveNumber);
  run->add_flag("--png", png, "also render written fields as PNG");

  CLI::App* val = app.add_subcommand("validate", "schema-check a config and print the materialized defaults");
  val->add_option("--config", config_path, "JSON config path")->required();

  CLI::App* exp = app.add_subcommand("export", "render an FGRID field to PNG (and optionally CSV)");
  exp->add_option("--in", in_path, "input .fgrd file")->required();
  exp->add_option("--out", out_path, "output .png path")->required();
  exp->add_option("--map", map_name, "colormap: viridis|gray")->check(CLI::IsMember({"viridis", "gray"}));
  exp->add_option("--csv", csv_path, "also write the field as CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    return guarded([&] {
      const shg::Config cfg = shg::parse_config(read_json_file(config_path));
      shg::RunOptions opts;
      opts.out_dir = out_dir;
      if (seed_opt->count() > 0) opts.seed_override = seed;
      opts.threads = threads;
      opts.png = png;
      const shg::RunReport rr = shg::run_task(cfg, opts);
      std::cout << rr.report.dump(2) << "\n";
      return rr.contract_ok ? 0 : 4;
    });
  }

  if (val->parsed()) {
    return guarded([&] {
      const nlohmann::json j = read_json_file(config_path);
      const shg::ValidationResult v = shg::validate_config_json(j);
      if (!v.ok) {
        for (const auto& e : v.errors) std::cerr << "config error: " << e << "\n";
        return 2;
      }
      const shg::Config cfg = shg::parse_config(j);
      cfg.build_media();  // admissibility check, no solves
      std::cout << v.materialized.dump(2) << "\n";
      return 0;
    });
  }

  return guarded([&] {
    const shg::FgridFile f = shg::read_fgrid(in_path);
    if (f.nx < 2 || f.ny < 2) throw shg::ConfigError("export supports 2-D fields only, not boundary traces");
    shg::GridSpec g = shg::GridSpec::make(static_cast<int>(f.nx), static_cast<int>(f.ny), f.x0, f.y0,
                                          f.lx > 0 ? f.lx : 1.0, f.ly > 0 ? f.ly : 1.0);
    shg::RealField field(g);
    if (f.dtype == shg::FgridDtype::Real64) {
      field.values = f.real_values;
    } else {
      for (std::size_t n = 0; n < f.complex_values.size(); ++n) field.values[n] = std::abs(f.complex_values[n]);
    }
    shg::PngOptions popts;
    popts.map = map_name == "gray" ? shg::Colormap::Gray : shg::Colormap::Viridis;
    shg::write_png(out_path, field, popts);
    if (!csv_path.empty()) shg::write_csv(csv_path, field);
    std::cout << "wrote " << out_path << "\n";
    return 0;
  });
}
