#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "shg/medium.hpp"
#include "shg/phantom.hpp"
#include "shg/synth.hpp"

namespace shg {

struct CoefficientConfig {
  double background = 0.0;
  std::vector<Inclusion> inclusions;
  double lower = 0.0;  // admissibility box, also the optimizer bounds
  double upper = 0.0;
};

// Fully materialized run configuration.  `materialized` carries every key
// with defaults filled in and doubles as the run manifest: feeding it back
// through parse_config reproduces the run.
struct Config {
  std::string task;
  std::string output_dir = "out";
  std::string model = "one_way";
  int nx = 101, ny = 101;
  double x0 = 0.0, y0 = 0.0, lx = 1.0, ly = 1.0;
  double k = 1.0;

  CoefficientConfig gamma_g, eta, sigma, chi2;

  int illum_count = 4;
  std::string illum_pattern = "plane_wave";
  double amplitude = 1.0;
  double angle = 0.0;
  double center = 0.0;
  double width = 0.25;
  double aff_c0 = 1.0, aff_cx = 0.0, aff_cy = 0.0;
  std::string h_pattern = "zero";
  double h_amplitude = 1.0;
  double h_angle = 0.0;

  double noise_level = 0.0;
  uint64_t seed = 1234;

  int fine_factor = 1;
  bool polarized = false;
  bool want_neumann = false;

  double res_tol = 1e-8;
  double fp_tol = 1e-12;
  int fp_max_iter = 200;
  double small_data_cap = 0.1;
  bool enforce_small_data = true;

  std::vector<double> cert_eps = {0.08, 0.04, 0.02, 0.01};
  double cert_res_tol = 1e-11;
  double cert_fp_tol = 1e-13;
  double cert_floor_factor = 10.0;

  double delta = 0.5;
  double alpha_floor_rel = 1e-8;
  double beta_floor = 1e-8;
  double xi_mask_threshold = 1e-6;

  double ellipticity_floor = 1e-3;
  double w_pde = 1.0, w_data = 0.0, w_neumann = 1.0;
  bool phase_opt = false;

  std::string experiment = "I";
  double beta = 1e-7, beta1 = 1e-7, beta2 = 1e-7;
  int opt_memory = 10;
  int opt_max_iter = 500;
  double gtol = 1e-8;
  double ftol = 1e-12;
  bool fd_guard = true;

  bool export_png = false;

  nlohmann::json materialized;

  GridSpec grid() const { return GridSpec::make(nx, ny, x0, y0, lx, ly); }
  MediumSet build_media() const;  // bounded phantoms, throws AdmissibilityError
  IlluminationSet illuminations() const;
  IlluminationPattern h_illumination() const;
};

struct ValidationResult {
  bool ok = false;
  std::vector<std::string> errors;  // exhaustive, one per violation
  nlohmann::json materialized;
};

// Schema check: unknown keys rejected, types enforced, defaults filled.
ValidationResult validate_config_json(const nlohmann::json& j);

// Validated parse; throws ConfigError listing every violation.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);

}  // namespace shg
