#include "shg/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "shg/coupled.hpp"
#include "shg/errors.hpp"
#include "shg/fd_ops.hpp"
#include "shg/io.hpp"
#include "shg/linearize.hpp"
#include "shg/png.hpp"
#include "shg/recon_direct.hpp"
#include "shg/recon_gamma.hpp"
#include "shg/recon_opt.hpp"
#include "shg/synth.hpp"
#include "shg/util.hpp"

namespace shg {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

RealField abs_field(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t n = 0; n < f.values.size(); ++n) out.values[n] = std::abs(f.values[n]);
  return out;
}

RealField mask_field(const GridSpec& g, const std::vector<std::uint8_t>& mask) {
  RealField out(g);
  for (std::size_t n = 0; n < mask.size() && n < out.values.size(); ++n) out.values[n] = mask[n];
  return out;
}

class Sink {
 public:
  Sink(fs::path dir, bool png) : dir_(std::move(dir)), png_(png) {}

  void field(const std::string& name, const RealField& f) {
    write_fgrid(path(name + ".fgrd"), f);
    add(name + ".fgrd");
    if (png_) {
      write_png(path(name + ".png"), f);
      add(name + ".png");
      add(name + ".png.json");
    }
  }
  void cfield(const std::string& name, const ComplexField& f) {
    write_fgrid(path(name + ".fgrd"), f);
    add(name + ".fgrd");
    if (png_) {
      write_png(path(name + ".png"), abs_field(f));
      add(name + ".png");
      add(name + ".png.json");
    }
  }
  void trace(const std::string& name, const BoundaryTrace& t) {
    write_fgrid_trace(path(name + ".fgrd"), t);
    add(name + ".fgrd");
  }
  void note(const std::string& relpath) { add(relpath); }
  std::string path(const std::string& relpath) const { return (dir_ / relpath).string(); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  void add(std::string f) { files_.push_back(std::move(f)); }
  fs::path dir_;
  bool png_ = false;
  std::vector<std::string> files_;
};

json errors_vs_truth(const RealField& rec, const RealField& truth) {
  json e;
  e["rel_l2"] = rel_l2(rec, truth);
  e["linf"] = norm_linf(sub(rec, truth));
  return e;
}

json errors_vs_truth_masked(const RealField& rec, const RealField& truth, const std::vector<std::uint8_t>& mask) {
  json e;
  e["rel_l2"] = rel_l2_masked(rec, truth, mask);
  double mx = 0.0;
  std::size_t used = 0;
  for (std::size_t n = 0; n < rec.values.size(); ++n) {
    if (!mask[n]) continue;
    mx = std::max(mx, std::abs(rec.values[n] - truth.values[n]));
    ++used;
  }
  e["linf"] = mx;
  e["nodes_used"] = used;
  return e;
}

CoupledOptions coupled_options(const Config& cfg) {
  CoupledOptions o;
  o.fp_tol = cfg.fp_tol;
  o.max_iter = cfg.fp_max_iter;
  o.small_data_cap = cfg.small_data_cap;
  o.enforce_small_data = cfg.enforce_small_data;
  o.res_tol = cfg.res_tol;
  return o;
}

SynthOptions synth_options(const Config& cfg) {
  SynthOptions o;
  o.noise_level = cfg.noise_level;
  o.seed = cfg.seed;
  o.fine_factor = cfg.fine_factor;
  o.want_neumann = cfg.want_neumann;
  o.polarized = cfg.polarized;
  o.coupled = coupled_options(cfg);
  o.one_way.res_tol = cfg.res_tol;
  return o;
}

void task_forward(const Config& cfg, const RunOptions& ropts, Sink& sink, json& rep) {
  const MediumSet media = cfg.build_media();
  const GridSpec g = media.grid();
  const IlluminationSet illum = cfg.illuminations();
  const ForwardModel model = cfg.model == "coupled" ? ForwardModel::Coupled : ForwardModel::OneWay;
  const CoupledOptions copts = coupled_options(cfg);
  OneWayOptions oopts;
  oopts.res_tol = cfg.res_tol;

  std::vector<SHGSolution> sols(illum.size());
  std::exception_ptr err;
  std::mutex err_mu;
  parallel_for(static_cast<int>(illum.size()), ropts.threads, [&](int j) {
    try {
      const BoundaryTrace gt = illum[j].g.evaluate(g, cfg.k);
      if (model == ForwardModel::Coupled) {
        const BoundaryTrace ht = illum[j].h.evaluate(g, 2.0 * cfg.k);
        sols[j] = solve_coupled(media, cfg.k, gt, ht, copts);
      } else {
        sols[j] = solve_one_way(media, cfg.k, gt, oopts);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);

  double data_sup = 0.0;
  json runs = json::array();
  char name[64];
  for (std::size_t j = 0; j < sols.size(); ++j) {
    const RealField h = internal_data(sols[j].u, sols[j].v, media.gamma_g, media.sigma);
    std::snprintf(name, sizeof name, "u_%03zu", j);
    sink.cfield(name, sols[j].u);
    std::snprintf(name, sizeof name, "v_%03zu", j);
    sink.cfield(name, sols[j].v);
    std::snprintf(name, sizeof name, "H_%03zu", j);
    sink.field(name, h);
    json r;
    r["iterations"] = sols[j].iterations;
    r["final_update"] = sols[j].final_update;
    r["residual_u"] = sols[j].residual_u;
    r["residual_v"] = sols[j].residual_v;
    r["u_sup"] = norm_linf(sols[j].u);
    r["v_sup"] = norm_linf(sols[j].v);
    r["h_sup"] = norm_linf(h);
    runs.push_back(r);
    data_sup = std::max(data_sup, norm_linf(h));
  }
  rep["illuminations"] = runs;
  rep["trivial"] = data_sup == 0.0;
}

void task_synth(const Config& cfg, Sink& sink, json& rep) {
  const MediumSet media = cfg.build_media();
  const DataSet ds = synthesize(media, cfg.k, cfg.illuminations(),
                                cfg.model == "coupled" ? ForwardModel::Coupled : ForwardModel::OneWay,
                                synth_options(cfg));
  const std::string sub = sink.path("dataset");
  save_dataset(sub, ds);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(sub)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const auto& n : names) sink.note("dataset/" + n);

  sink.field("true_gamma_g", media.gamma_g);
  sink.field("true_eta", media.eta);
  sink.field("true_sigma", media.sigma);
  sink.field("true_chi2", media.chi2);

  rep["n_illuminations"] = ds.H.size();
  rep["polarized"] = ds.polarized;
  json sup = json::array();
  for (const auto& h : ds.H) sup.push_back(norm_linf(h));
  rep["h_sup"] = sup;
}

void task_certify(const Config& cfg, Sink& sink, json& rep, bool& contract_ok) {
  const MediumSet media = cfg.build_media();
  const GridSpec g = media.grid();
  const IlluminationSet illum = cfg.illuminations();
  EpsFamilySpec fam;
  fam.g1 = illum[0].g.evaluate(g, cfg.k);
  fam.h1 = illum[0].h.evaluate(g, 2.0 * cfg.k);
  fam.g2 = illum.size() > 1 ? illum[1].g.evaluate(g, cfg.k) : BoundaryTrace(g);
  fam.h2 = BoundaryTrace(g);
  fam.eps = cfg.cert_eps;

  CertifyOptions copt;
  copt.coupled = coupled_options(cfg);
  copt.coupled.res_tol = cfg.cert_res_tol;
  copt.coupled.fp_tol = cfg.cert_fp_tol;
  copt.floor_factor = cfg.cert_floor_factor;

  const ConvergenceReport r = certify_expansion(media, cfg.k, fam, copt);
  write_convergence_csv(sink.path("convergence.csv"), r);
  sink.note("convergence.csv");

  json rows = json::array();
  for (const auto& row : r.rows) {
    json x;
    x["eps"] = row.eps;
    x["mu_inf"] = row.mu_inf;
    x["nu_inf"] = row.nu_inf;
    x["rho_inf"] = row.rho_inf;
    x["h_inf"] = row.h_inf;
    rows.push_back(x);
  }
  rep["rows"] = rows;
  rep["slopes"] = {{"mu", r.slope_mu}, {"nu", r.slope_nu}, {"rho", r.slope_rho}, {"h", r.slope_h}};
  rep["exact_linearity"] = r.exact_linearity;
  rep["pass"] = r.pass();
  rep["summary"] = r.summary();
  contract_ok = r.pass();
}

void task_recon_direct(const Config& cfg, Sink& sink, json& rep, bool& contract_ok) {
  const MediumSet media = cfg.build_media();
  SynthOptions sopts = synth_options(cfg);
  sopts.polarized = true;
  const DataSet ds = synthesize(media, cfg.k, cfg.illuminations(),
                                cfg.model == "coupled" ? ForwardModel::Coupled : ForwardModel::OneWay, sopts);

  PolarizedPair pair;
  pair.E1 = real_part(ds.E[0]);
  pair.E2 = ds.E[1];
  pair.H1 = ds.H[0];

  DirectReconOptions dopts;
  dopts.transport.delta = cfg.delta;
  dopts.transport.res_tol = cfg.res_tol;
  dopts.alpha_floor_rel = cfg.alpha_floor_rel;
  dopts.beta_floor = cfg.beta_floor;
  dopts.xi_mask_threshold = cfg.xi_mask_threshold;

  const DirectReconResult r = direct_pipeline(pair, ds.g[0], cfg.k, dopts);

  json errs;
  errs["eta"] = errors_vs_truth_masked(r.potential.eta, media.eta, r.potential.mask);
  errs["sigma"] = errors_vs_truth_masked(r.potential.sigma, media.sigma, r.potential.mask);
  errs["gamma_g"] = errors_vs_truth_masked(r.grueneisen.gamma_g, media.gamma_g, r.grueneisen.mask);
  rep["errors"] = errs;
  rep["conditions"] = {{"alpha0", r.conditions.alpha0},
                       {"beta0", r.conditions.beta0},
                       {"beta_sup", r.conditions.beta_sup},
                       {"e2e1_sup", r.conditions.e2e1_sup},
                       {"pass", r.conditions.pass()}};
  rep["transport"] = {{"inflow_count", r.transport.inflow_count},
                      {"solve_residual_inf", r.transport.solve_residual_inf},
                      {"adv_residual_l2", r.transport.adv_residual_l2},
                      {"adv_residual_inf", r.transport.adv_residual_inf}};
  rep["masked_count"] = r.potential.masked_count;
  contract_ok = r.conditions.pass();

  sink.field("E1", pair.E1);
  sink.cfield("E2", pair.E2);
  sink.field("H1", pair.H1);
  sink.cfield("xi", r.transport.xi);
  sink.field("eta_rec", r.potential.eta);
  sink.field("sigma_rec", r.potential.sigma);
  sink.field("gamma_g_rec", r.grueneisen.gamma_g);
  sink.cfield("q_rec", r.potential.q);
  sink.field("mask", mask_field(media.grid(), r.potential.mask));
  sink.field("true_eta", media.eta);
  sink.field("true_sigma", media.sigma);
  sink.field("true_gamma_g", media.gamma_g);
}

void task_recon_gamma(const Config& cfg, Sink& sink, json& rep, bool& contract_ok) {
  const MediumSet media = cfg.build_media();
  const GridSpec g = media.grid();
  const IlluminationSet illum = cfg.illuminations();
  BoundaryTrace g1 = illum[0].g.evaluate(g, cfg.k);
  BoundaryTrace h1 = illum[0].h.evaluate(g, 2.0 * cfg.k);

  SolveOptions sopt;
  sopt.res_tol = cfg.res_tol;
  auto [u1, v1] = solve_first_order(media, cfg.k, g1, h1, sopt);
  if (cfg.phase_opt) {
    const PhaseFix pf = optimize_phase(u1, v1);
    const Complex rot = std::polar(1.0, pf.phi);
    v1 = scale(v1, rot);
    h1 = scale(h1, rot);
    rep["phase"] = {{"phi", pf.phi}, {"margin", pf.margin}};
  }
  auto [u2, v2] = solve_second_order(media, cfg.k, u1, v1, BoundaryTrace(g), BoundaryTrace(g), sopt);
  LinearizedBundle bundle{u1, v1, u2, v2};
  auto [h2, h3] = data_orders(bundle, media.gamma_g, media.sigma);

  GammaSystemInput in;
  in.u1 = u1;
  in.v1 = v1;
  in.q1 = potential_q1(media.eta, media.sigma, cfg.k);
  in.q2 = potential_q2(media.eta, media.sigma, cfg.k);
  in.k = cfg.k;
  in.h3 = h3;
  in.gamma_g = media.gamma_g;
  in.sigma = media.sigma;
  in.j_u2 = neumann_data(u2);
  in.j_v2 = neumann_data(v2);

  GammaWeights w;
  w.w_pde = cfg.w_pde;
  w.w_data = cfg.w_data;
  w.w_neumann = cfg.w_neumann;
  const GammaSolveResult r = assemble_and_solve(in, w, cfg.ellipticity_floor);
  const GammaFromU2Result x = gamma_from_u2(r.u2, u1, v1, in.q1, cfg.k);

  rep["errors"]["chi2"] = errors_vs_truth(r.gamma, media.chi2);
  rep["errors"]["chi2_interior"] = errors_vs_truth_masked(r.gamma, media.chi2, r.interior_mask);
  rep["ellipticity"] = {{"min_margin", r.ellipticity.min_margin},
                        {"floor", r.ellipticity.floor},
                        {"pass", r.ellipticity.pass}};
  rep["residuals"] = {{"pde_u", r.res_pde_u},
                      {"pde_v", r.res_pde_v},
                      {"data", r.res_data},
                      {"neumann", r.res_neumann}};
  rep["cross_check"] = {{"rel_l2_vs_lsq", rel_l2_masked(x.gamma, r.gamma, x.mask)},
                        {"max_imag_residue", x.max_imag_residue}};
  contract_ok = r.ellipticity.pass;

  sink.field("gamma_rec", r.gamma);
  sink.field("gamma_from_u2", x.gamma);
  sink.field("margin", r.ellipticity.margin);
  sink.cfield("u2_rec", r.u2);
  sink.cfield("v2_rec", r.v2);
  sink.field("h3", h3);
  sink.field("true_chi2", media.chi2);
  sink.trace("j_u2", in.j_u2);
  sink.trace("j_v2", in.j_v2);
}

void task_recon_opt(const Config& cfg, Sink& sink, json& rep, bool& contract_ok) {
  const MediumSet media = cfg.build_media();
  SynthOptions sopts = synth_options(cfg);
  sopts.polarized = false;
  const DataSet ds = synthesize(media, cfg.k, cfg.illuminations(), ForwardModel::OneWay, sopts);

  const std::string& ex = cfg.experiment;
  ObjectiveSpec os;
  os.form = (ex == "III" || ex == "IV") ? ObjForm::Ratio : ObjForm::Absolute;
  os.k = cfg.k;
  os.res_tol = cfg.res_tol;
  os.g = ds.g;
  os.data = ds.H;
  os.gamma_g = media.gamma_g;

  os.eta.active = ex != "I";
  os.sigma.active = ex == "II" || ex == "IV";
  os.chi2.active = true;
  os.eta.lower = cfg.eta.lower;
  os.eta.upper = cfg.eta.upper;
  os.sigma.lower = cfg.sigma.lower;
  os.sigma.upper = cfg.sigma.upper;
  os.chi2.lower = cfg.chi2.lower;
  os.chi2.upper = cfg.chi2.upper;
  if (ex == "I") {
    os.chi2.reg = cfg.beta;
  } else if (ex == "II") {
    os.eta.reg = os.sigma.reg = os.chi2.reg = cfg.beta;
  } else {
    os.eta.reg = cfg.beta1;
    os.sigma.reg = cfg.beta1;
    os.chi2.reg = cfg.beta2;
  }

  const GridSpec gd = ds.grid;
  os.eta0 = os.eta.active ? RealField(gd, 0.5 * (cfg.eta.lower + cfg.eta.upper)) : media.eta;
  os.sigma0 = os.sigma.active ? RealField(gd, 0.5 * (cfg.sigma.lower + cfg.sigma.upper)) : media.sigma;
  os.chi20 = os.chi2.active ? RealField(gd, 0.5 * (cfg.chi2.lower + cfg.chi2.upper)) : media.chi2;

  LbfgsOptions lo;
  lo.memory = cfg.opt_memory;
  lo.max_iter = cfg.opt_max_iter;
  lo.gtol = cfg.gtol;
  lo.ftol = cfg.ftol;
  lo.fd_guard = cfg.fd_guard;

  const OptReconResult r = reconstruct_one_way(os, lo);
  write_opt_trace_csv(sink.path("opt_trace.csv"), r.trace);
  sink.note("opt_trace.csv");

  json errs;
  if (os.eta.active) {
    errs["eta"] = errors_vs_truth(r.medium.eta, media.eta);
    sink.field("eta_rec", r.medium.eta);
    sink.field("true_eta", media.eta);
  }
  if (os.sigma.active) {
    errs["sigma"] = errors_vs_truth(r.medium.sigma, media.sigma);
    sink.field("sigma_rec", r.medium.sigma);
    sink.field("true_sigma", media.sigma);
  }
  errs["chi2"] = errors_vs_truth(r.medium.chi2, media.chi2);
  sink.field("chi2_rec", r.medium.chi2);
  sink.field("true_chi2", media.chi2);

  if (os.form == ObjForm::Ratio) {
    const GammaAverageResult ga = recover_gamma_g_avg(r.medium, cfg.k, ds.g, ds.H);
    errs["gamma_g"] = errors_vs_truth_masked(ga.gamma_g, media.gamma_g, ga.mask);
    sink.field("gamma_g_rec", ga.gamma_g);
    sink.field("true_gamma_g", media.gamma_g);
  }
  rep["errors"] = errs;
  rep["experiment"] = ex;
  rep["objective"] = r.objective;
  rep["iterations"] = r.trace.rows.empty() ? 0 : r.trace.rows.back().iter;
  rep["stop_reason"] = r.trace.stop_reason;
  rep["converged"] = r.trace.converged;
  rep["ls_failed"] = r.trace.ls_failed;
  rep["solves"] = r.solves;
  contract_ok = !r.trace.ls_failed;
}

}  // namespace

RunReport run_task(const Config& cfg_in, const RunOptions& opts) {
  Config cfg = cfg_in;
  if (opts.seed_override) {
    cfg.seed = *opts.seed_override;
    cfg.materialized["noise"]["seed"] = cfg.seed;
  }
  const bool png = opts.png || cfg.export_png;
  const std::string out = opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
  if (!opts.out_dir.empty()) cfg.materialized["output_dir"] = opts.out_dir;
  fs::create_directories(out);

  {
    std::ofstream mf(fs::path(out) / "manifest.json");
    if (!mf) throw Error("cannot write manifest under " + out);
    mf << cfg.materialized.dump(2) << '\n';
  }

  RunReport rr;
  rr.report["task"] = cfg.task;
  Sink sink(out, png);

  const auto t0 = std::chrono::steady_clock::now();
  bool contract_ok = true;
  if (cfg.task == "forward")
    task_forward(cfg, opts, sink, rr.report);
  else if (cfg.task == "synth")
    task_synth(cfg, sink, rr.report);
  else if (cfg.task == "certify_linearization")
    task_certify(cfg, sink, rr.report, contract_ok);
  else if (cfg.task == "recon_direct")
    task_recon_direct(cfg, sink, rr.report, contract_ok);
  else if (cfg.task == "recon_gamma")
    task_recon_gamma(cfg, sink, rr.report, contract_ok);
  else if (cfg.task == "recon_opt")
    task_recon_opt(cfg, sink, rr.report, contract_ok);
  else
    throw ConfigError("unknown task: " + cfg.task);
  const auto t1 = std::chrono::steady_clock::now();

  rr.report["contract_ok"] = contract_ok;
  rr.report["artifacts"] = sink.files();
  rr.contract_ok = contract_ok;
  rr.timings["total_s"] = std::chrono::duration<double>(t1 - t0).count();

  {
    std::ofstream rf(fs::path(out) / "report.json");
    if (!rf) throw Error("cannot write report under " + out);
    rf << rr.report.dump(2) << '\n';
  }
  {
    std::ofstream tf(fs::path(out) / "timings.json");
    if (!tf) throw Error("cannot write timings under " + out);
    tf << rr.timings.dump(2) << '\n';
  }
  return rr;
}

}  // namespace shg
