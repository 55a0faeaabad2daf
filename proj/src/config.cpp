#include "shg/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "shg/errors.hpp"

namespace shg {
namespace {

using nlohmann::json;

// Walks one object level: reads typed values, materializes defaults, and
// records every violation instead of stopping at the first.
struct Section {
  const json* src = nullptr;  // null when the section is absent entirely
  json* mat = nullptr;
  std::string path;
  std::vector<std::string>* errors = nullptr;

  void fail(const std::string& m) const { errors->push_back(path.empty() ? m : path + ": " + m); }
  bool has(const char* k) const { return src && src->is_object() && src->contains(k); }
  const json& raw(const char* k) const { return (*src)[k]; }

  void check_keys(std::initializer_list<const char*> allowed) const {
    if (!src) return;
    if (!src->is_object()) {
      fail("expected an object");
      return;
    }
    for (auto it = src->begin(); it != src->end(); ++it) {
      bool known = false;
      for (const char* a : allowed)
        if (it.key() == a) {
          known = true;
          break;
        }
      if (!known) fail("unknown key '" + it.key() + "'");
    }
  }

  Section sub(const char* k) const {
    (*mat)[k] = json::object();
    Section s;
    s.src = has(k) && raw(k).is_object() ? &raw(k) : nullptr;
    if (has(k) && !raw(k).is_object()) fail(std::string("'") + k + "' must be an object");
    s.mat = &(*mat)[k];
    s.path = path.empty() ? k : path + "." + k;
    s.errors = errors;
    return s;
  }

  double num(const char* k, double def) const {
    double v = def;
    if (has(k)) {
      if (raw(k).is_number())
        v = raw(k).get<double>();
      else
        fail(std::string("'") + k + "' must be a number");
    }
    (*mat)[k] = v;
    return v;
  }

  double num_req(const char* k) const {
    if (!has(k)) {
      fail(std::string("missing required key '") + k + "'");
      (*mat)[k] = 0.0;
      return 0.0;
    }
    return num(k, 0.0);
  }

  int integer(const char* k, int def) const {
    int v = def;
    if (has(k)) {
      if (raw(k).is_number_integer())
        v = raw(k).get<int>();
      else
        fail(std::string("'") + k + "' must be an integer");
    }
    (*mat)[k] = v;
    return v;
  }

  std::uint64_t uinteger(const char* k, std::uint64_t def) const {
    std::uint64_t v = def;
    if (has(k)) {
      if (raw(k).is_number_unsigned() || (raw(k).is_number_integer() && raw(k).get<long long>() >= 0))
        v = raw(k).get<std::uint64_t>();
      else
        fail(std::string("'") + k + "' must be a nonnegative integer");
    }
    (*mat)[k] = v;
    return v;
  }

  bool boolean(const char* k, bool def) const {
    bool v = def;
    if (has(k)) {
      if (raw(k).is_boolean())
        v = raw(k).get<bool>();
      else
        fail(std::string("'") + k + "' must be a boolean");
    }
    (*mat)[k] = v;
    return v;
  }

  std::string str(const char* k, const std::string& def) const {
    std::string v = def;
    if (has(k)) {
      if (raw(k).is_string())
        v = raw(k).get<std::string>();
      else
        fail(std::string("'") + k + "' must be a string");
    }
    (*mat)[k] = v;
    return v;
  }

  std::string choice(const char* k, const std::string& def, std::initializer_list<const char*> opts,
                     bool required = false) const {
    if (required && !has(k)) {
      fail(std::string("missing required key '") + k + "'");
      (*mat)[k] = def;
      return def;
    }
    const std::string v = str(k, def);
    for (const char* o : opts)
      if (v == o) return v;
    std::string all;
    for (const char* o : opts) all += std::string(all.empty() ? "" : ", ") + o;
    fail(std::string("'") + k + "' must be one of {" + all + "}, got '" + v + "'");
    return v;
  }
};

void read_coefficient(const Section& media, const char* name, double bg_def, double lo_def, double hi_def) {
  Section s = media.sub(name);
  s.check_keys({"background", "inclusions", "bounds"});
  s.num("background", bg_def);

  json bounds = json::array({lo_def, hi_def});
  if (s.has("bounds")) {
    const json& b = s.raw("bounds");
    if (b.is_array() && b.size() == 2 && b[0].is_number() && b[1].is_number()) {
      bounds = b;
      if (b[0].get<double>() > b[1].get<double>()) s.fail("'bounds' lower exceeds upper");
    } else {
      s.fail("'bounds' must be a [lower, upper] number pair");
    }
  }
  (*s.mat)["bounds"] = bounds;

  json incs = json::array();
  if (s.has("inclusions")) {
    const json& arr = s.raw("inclusions");
    if (!arr.is_array()) {
      s.fail("'inclusions' must be an array");
    } else {
      for (std::size_t idx = 0; idx < arr.size(); ++idx) {
        json m = json::object();
        Section inc{&arr[idx], &m, s.path + ".inclusions[" + std::to_string(idx) + "]", s.errors};
        if (!arr[idx].is_object()) {
          inc.fail("must be an object");
          continue;
        }
        inc.check_keys({"kind", "cx", "cy", "size", "amplitude"});
        inc.choice("kind", "disk", {"disk", "square", "gaussian"}, true);
        inc.num_req("cx");
        inc.num_req("cy");
        const double sz = inc.num_req("size");
        if (inc.has("size") && !(sz > 0.0)) inc.fail("'size' must be positive");
        inc.num_req("amplitude");
        incs.push_back(m);
      }
    }
  }
  (*s.mat)["inclusions"] = incs;
}

InclusionKind inclusion_kind(const std::string& s) {
  if (s == "disk") return InclusionKind::Disk;
  if (s == "square") return InclusionKind::Square;
  return InclusionKind::Gaussian;
}

CoefficientConfig coefficient_from(const json& m) {
  CoefficientConfig c;
  c.background = m.at("background").get<double>();
  c.lower = m.at("bounds")[0].get<double>();
  c.upper = m.at("bounds")[1].get<double>();
  for (const auto& i : m.at("inclusions"))
    c.inclusions.push_back({inclusion_kind(i.at("kind").get<std::string>()), i.at("cx").get<double>(),
                            i.at("cy").get<double>(), i.at("size").get<double>(), i.at("amplitude").get<double>()});
  return c;
}

}  // namespace

ValidationResult validate_config_json(const json& root) {
  ValidationResult out;
  out.materialized = json::object();
  if (!root.is_object()) {
    out.errors.push_back("config root must be an object");
    return out;
  }

  Section top{&root, &out.materialized, "", &out.errors};
  top.check_keys({"task", "output_dir", "model", "k", "grid", "media", "illuminations", "noise", "synth", "solver",
                  "certify", "transport", "recon_direct", "recon_gamma", "recon_opt", "export_png"});

  const std::string task = top.choice(
      "task", "forward", {"forward", "synth", "certify_linearization", "recon_direct", "recon_gamma", "recon_opt"},
      true);
  top.str("output_dir", "out");
  top.choice("model", "one_way", {"one_way", "coupled"});
  const double k = top.num_req("k");
  if (top.has("k") && !(k > 0.0)) top.fail("'k' must be positive");
  top.boolean("export_png", false);

  Section grid = top.sub("grid");
  grid.check_keys({"nx", "ny", "x0", "y0", "lx", "ly"});
  const int nx = grid.integer("nx", 101);
  const int ny = grid.integer("ny", nx);
  if (nx < 4 || ny < 4) grid.fail("'nx' and 'ny' must be at least 4");
  grid.num("x0", 0.0);
  grid.num("y0", 0.0);
  if (!(grid.num("lx", 1.0) > 0.0)) grid.fail("'lx' must be positive");
  if (!(grid.num("ly", 1.0) > 0.0)) grid.fail("'ly' must be positive");

  Section media = top.sub("media");
  media.check_keys({"gamma_g", "eta", "sigma", "chi2"});
  read_coefficient(media, "gamma_g", 1.0, 0.05, 5.0);
  read_coefficient(media, "eta", 0.1, 0.01, 1.0);
  read_coefficient(media, "sigma", 0.2, 0.01, 2.0);
  read_coefficient(media, "chi2", 0.1, 0.0, 1.0);

  Section illum = top.sub("illuminations");
  illum.check_keys({"count", "pattern", "amplitude", "angle", "center", "width", "affine", "h"});
  const int count = illum.integer("count", 4);
  if (count < 1) illum.fail("'count' must be at least 1");
  const std::string pattern =
      illum.choice("pattern", "plane_wave", {"zero", "constant", "plane_wave", "boundary_bump", "affine_pair"});
  illum.num("amplitude", 1.0);
  illum.num("angle", 0.0);
  illum.num("center", 0.0);
  if (!(illum.num("width", 0.25) > 0.0)) illum.fail("'width' must be positive");
  if (pattern == "affine_pair" && count != 2) illum.fail("pattern 'affine_pair' requires count = 2");

  Section aff = illum.sub("affine");
  aff.check_keys({"c0", "cx", "cy"});
  aff.num("c0", 1.0);
  aff.num("cx", 0.0);
  aff.num("cy", 0.0);

  Section hsec = illum.sub("h");
  hsec.check_keys({"pattern", "amplitude", "angle"});
  const std::string hpat = hsec.choice("pattern", "zero", {"zero", "constant", "plane_wave"});
  hsec.num("amplitude", 1.0);
  hsec.num("angle", 0.0);

  Section noise = top.sub("noise");
  noise.check_keys({"level", "seed"});
  if (noise.num("level", 0.0) < 0.0) noise.fail("'level' must be nonnegative");
  noise.uinteger("seed", 1234);

  Section synth = top.sub("synth");
  synth.check_keys({"fine_factor", "polarized", "want_neumann"});
  if (synth.integer("fine_factor", 1) < 1) synth.fail("'fine_factor' must be at least 1");
  synth.boolean("polarized", false);
  synth.boolean("want_neumann", false);

  Section solver = top.sub("solver");
  solver.check_keys({"res_tol", "fp_tol", "max_iter", "small_data_cap", "enforce_small_data"});
  if (!(solver.num("res_tol", 1e-8) > 0.0)) solver.fail("'res_tol' must be positive");
  if (!(solver.num("fp_tol", 1e-12) > 0.0)) solver.fail("'fp_tol' must be positive");
  if (solver.integer("max_iter", 200) < 1) solver.fail("'max_iter' must be at least 1");
  if (!(solver.num("small_data_cap", 0.1) > 0.0)) solver.fail("'small_data_cap' must be positive");
  solver.boolean("enforce_small_data", true);

  Section cert = top.sub("certify");
  cert.check_keys({"eps", "res_tol", "fp_tol", "floor_factor"});
  json eps = json::array({0.08, 0.04, 0.02, 0.01});
  if (cert.has("eps")) {
    const json& e = cert.raw("eps");
    bool ok = e.is_array() && !e.empty();
    if (ok)
      for (const auto& x : e) ok = ok && x.is_number() && x.get<double>() > 0.0;
    if (ok)
      eps = e;
    else
      cert.fail("'eps' must be a nonempty array of positive numbers");
  }
  (*cert.mat)["eps"] = eps;
  if (!(cert.num("res_tol", 1e-11) > 0.0)) cert.fail("'res_tol' must be positive");
  if (!(cert.num("fp_tol", 1e-13) > 0.0)) cert.fail("'fp_tol' must be positive");
  if (cert.num("floor_factor", 10.0) < 1.0) cert.fail("'floor_factor' must be at least 1");

  Section tr = top.sub("transport");
  tr.check_keys({"delta"});
  if (tr.num("delta", 0.5) < 0.0) tr.fail("'delta' must be nonnegative");

  Section rd = top.sub("recon_direct");
  rd.check_keys({"alpha_floor_rel", "beta_floor", "xi_mask_threshold"});
  if (!(rd.num("alpha_floor_rel", 1e-8) > 0.0)) rd.fail("'alpha_floor_rel' must be positive");
  if (!(rd.num("beta_floor", 1e-8) > 0.0)) rd.fail("'beta_floor' must be positive");
  if (!(rd.num("xi_mask_threshold", 1e-6) > 0.0)) rd.fail("'xi_mask_threshold' must be positive");

  Section rg = top.sub("recon_gamma");
  rg.check_keys({"ellipticity_floor", "w_pde", "w_data", "w_neumann", "optimize_phase"});
  if (!(rg.num("ellipticity_floor", 1e-3) > 0.0)) rg.fail("'ellipticity_floor' must be positive");
  if (!(rg.num("w_pde", 1.0) > 0.0)) rg.fail("'w_pde' must be positive");
  if (rg.num("w_data", 0.0) < 0.0) rg.fail("'w_data' must be nonnegative");
  if (!(rg.num("w_neumann", 1.0) > 0.0)) rg.fail("'w_neumann' must be positive");
  rg.boolean("optimize_phase", false);

  Section ro = top.sub("recon_opt");
  ro.check_keys({"experiment", "beta", "beta1", "beta2", "memory", "max_iter", "gtol", "ftol", "fd_guard"});
  const std::string experiment = ro.choice("experiment", "I", {"I", "II", "III", "IV"});
  if (ro.num("beta", 1e-7) < 0.0) ro.fail("'beta' must be nonnegative");
  if (ro.num("beta1", 1e-7) < 0.0) ro.fail("'beta1' must be nonnegative");
  if (ro.num("beta2", 1e-7) < 0.0) ro.fail("'beta2' must be nonnegative");
  if (ro.integer("memory", 10) < 1) ro.fail("'memory' must be at least 1");
  if (ro.integer("max_iter", 500) < 1) ro.fail("'max_iter' must be at least 1");
  if (!(ro.num("gtol", 1e-8) > 0.0)) ro.fail("'gtol' must be positive");
  if (!(ro.num("ftol", 1e-12) > 0.0)) ro.fail("'ftol' must be positive");
  ro.boolean("fd_guard", true);

  // Task-specific requirements.
  if (task == "recon_direct" && count < 2) out.errors.push_back("recon_direct requires illuminations.count >= 2");
  if (task == "recon_gamma" && hpat == "zero")
    out.errors.push_back("recon_gamma requires a nonzero second-harmonic illumination (illuminations.h.pattern)");
  if (task == "recon_opt" && (experiment == "III" || experiment == "IV") && count < 2)
    out.errors.push_back("recon_opt experiments III/IV require illuminations.count >= 2");

  out.ok = out.errors.empty();
  return out;
}

Config parse_config(const json& j) {
  ValidationResult v = validate_config_json(j);
  if (!v.ok) {
    std::string msg = "invalid config:";
    for (const auto& e : v.errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  const json& m = v.materialized;
  Config c;
  c.materialized = m;
  c.task = m.at("task").get<std::string>();
  c.output_dir = m.at("output_dir").get<std::string>();
  c.model = m.at("model").get<std::string>();
  c.k = m.at("k").get<double>();
  c.export_png = m.at("export_png").get<bool>();

  const json& g = m.at("grid");
  c.nx = g.at("nx").get<int>();
  c.ny = g.at("ny").get<int>();
  c.x0 = g.at("x0").get<double>();
  c.y0 = g.at("y0").get<double>();
  c.lx = g.at("lx").get<double>();
  c.ly = g.at("ly").get<double>();

  const json& med = m.at("media");
  c.gamma_g = coefficient_from(med.at("gamma_g"));
  c.eta = coefficient_from(med.at("eta"));
  c.sigma = coefficient_from(med.at("sigma"));
  c.chi2 = coefficient_from(med.at("chi2"));

  const json& il = m.at("illuminations");
  c.illum_count = il.at("count").get<int>();
  c.illum_pattern = il.at("pattern").get<std::string>();
  c.amplitude = il.at("amplitude").get<double>();
  c.angle = il.at("angle").get<double>();
  c.center = il.at("center").get<double>();
  c.width = il.at("width").get<double>();
  c.aff_c0 = il.at("affine").at("c0").get<double>();
  c.aff_cx = il.at("affine").at("cx").get<double>();
  c.aff_cy = il.at("affine").at("cy").get<double>();
  c.h_pattern = il.at("h").at("pattern").get<std::string>();
  c.h_amplitude = il.at("h").at("amplitude").get<double>();
  c.h_angle = il.at("h").at("angle").get<double>();

  c.noise_level = m.at("noise").at("level").get<double>();
  c.seed = m.at("noise").at("seed").get<std::uint64_t>();

  c.fine_factor = m.at("synth").at("fine_factor").get<int>();
  c.polarized = m.at("synth").at("polarized").get<bool>();
  c.want_neumann = m.at("synth").at("want_neumann").get<bool>();

  const json& so = m.at("solver");
  c.res_tol = so.at("res_tol").get<double>();
  c.fp_tol = so.at("fp_tol").get<double>();
  c.fp_max_iter = so.at("max_iter").get<int>();
  c.small_data_cap = so.at("small_data_cap").get<double>();
  c.enforce_small_data = so.at("enforce_small_data").get<bool>();

  const json& ce = m.at("certify");
  c.cert_eps = ce.at("eps").get<std::vector<double>>();
  c.cert_res_tol = ce.at("res_tol").get<double>();
  c.cert_fp_tol = ce.at("fp_tol").get<double>();
  c.cert_floor_factor = ce.at("floor_factor").get<double>();

  c.delta = m.at("transport").at("delta").get<double>();

  const json& rd = m.at("recon_direct");
  c.alpha_floor_rel = rd.at("alpha_floor_rel").get<double>();
  c.beta_floor = rd.at("beta_floor").get<double>();
  c.xi_mask_threshold = rd.at("xi_mask_threshold").get<double>();

  const json& rg = m.at("recon_gamma");
  c.ellipticity_floor = rg.at("ellipticity_floor").get<double>();
  c.w_pde = rg.at("w_pde").get<double>();
  c.w_data = rg.at("w_data").get<double>();
  c.w_neumann = rg.at("w_neumann").get<double>();
  c.phase_opt = rg.at("optimize_phase").get<bool>();

  const json& ro = m.at("recon_opt");
  c.experiment = ro.at("experiment").get<std::string>();
  c.beta = ro.at("beta").get<double>();
  c.beta1 = ro.at("beta1").get<double>();
  c.beta2 = ro.at("beta2").get<double>();
  c.opt_memory = ro.at("memory").get<int>();
  c.opt_max_iter = ro.at("max_iter").get<int>();
  c.gtol = ro.at("gtol").get<double>();
  c.ftol = ro.at("ftol").get<double>();
  c.fd_guard = ro.at("fd_guard").get<bool>();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

MediumSet Config::build_media() const {
  const GridSpec g = grid();
  MediumSet m;
  m.gamma_g = make_phantom_bounded(g, gamma_g.background, gamma_g.inclusions, gamma_g.lower, gamma_g.upper, "gamma_g");
  m.eta = make_phantom_bounded(g, eta.background, eta.inclusions, eta.lower, eta.upper, "eta");
  m.sigma = make_phantom_bounded(g, sigma.background, sigma.inclusions, sigma.lower, sigma.upper, "sigma");
  m.chi2 = make_phantom_bounded(g, chi2.background, chi2.inclusions, chi2.lower, chi2.upper, "chi2");
  return m;
}

IlluminationPattern Config::h_illumination() const {
  if (h_pattern == "constant") return IlluminationPattern::constant(h_amplitude);
  if (h_pattern == "plane_wave") return IlluminationPattern::plane_wave(h_angle, h_amplitude);
  return IlluminationPattern::zero();
}

IlluminationSet Config::illuminations() const {
  IlluminationSet set;
  const IlluminationPattern h = h_illumination();
  for (int j = 0; j < illum_count; ++j) {
    IlluminationPattern g;
    if (illum_pattern == "zero") {
      g = IlluminationPattern::zero();
    } else if (illum_pattern == "constant") {
      g = IlluminationPattern::constant(amplitude);
    } else if (illum_pattern == "plane_wave") {
      g = IlluminationPattern::plane_wave(angle + 2.0 * std::numbers::pi * j / illum_count, amplitude);
    } else if (illum_pattern == "boundary_bump") {
      double cj = center + static_cast<double>(j) / illum_count;
      cj -= std::floor(cj);
      g = IlluminationPattern::boundary_bump(cj, width, amplitude);
    } else {  // affine_pair
      g = j == 0 ? IlluminationPattern::plane_wave(angle, amplitude)
                 : IlluminationPattern::affine_plane_wave(angle, aff_c0, aff_cx, aff_cy, amplitude);
    }
    set.push_back({g, h});
  }
  return set;
}

}  // namespace shg
