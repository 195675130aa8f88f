#include "zetaflow/runner.hpp"

#include <chrono>
#include <iostream>

#include "zetaflow/report.hpp"

namespace zf {

namespace {

using nlohmann::json;

struct RunContext {
  const ExperimentConfig* cfg;
  std::string out_dir;
  uint64_t seed = 0;
  bool has_seed = false;
  int workers = 1;
  bool quiet = false;
  RunManifest manifest;

  void emit(const std::string& name, const std::string& body) {
    std::string path = out_dir + "/" + name;
    write_text_file(path, body);
    manifest.outputs.emplace_back(path, hash_hex(fnv1a64(body)));
  }
  void emit_json(const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); }
  void note(const std::string& line) {
    if (!quiet) std::cout << line << "\n";
  }
};

struct SymbolicModel {
  Subshift shift;
  CylinderFunction psi;
  CylinderFunction roof;
  FlowObservable K;
};

SymbolicModel load_symbolic(const ExperimentConfig& cfg) {
  if (!cfg.symbolic) throw SchemaError("this subcommand needs a symbolic model");
  const auto& sm = *cfg.symbolic;
  MixingReport mix = verify_mixing(sm.transition);
  Subshift shift = mix.mixing() ? Subshift(sm.alphabet, sm.transition)
                                : Subshift::unchecked(sm.alphabet, sm.transition);
  CylinderFunction psi = sm.load_psi(shift);
  CylinderFunction roof = sm.load_roof(shift);
  FlowObservable K = sm.load_observable(shift);
  return SymbolicModel{shift, psi, roof, K};
}

struct IntervalModel {
  ExpandingMarkovMap map;
  PiecewisePoly psi, roof;
  PiecewisePoly observable;
};

IntervalModel load_interval(const ExperimentConfig& cfg) {
  if (!cfg.interval) throw SchemaError("this subcommand needs an interval model");
  const auto& im = *cfg.interval;
  ExpandingMarkovMap map(im.intervals, im.branches);
  PiecewisePoly obs = im.observable ? *im.observable : im.roof;
  return IntervalModel{map, im.psi, im.roof, obs};
}

CountMode parse_mode(const json& run) {
  std::string m = run.value("mode", "prime_only");
  if (m == "prime_only") return CountMode::prime_only;
  if (m == "with_repetitions") return CountMode::with_repetitions;
  throw SchemaError("run.mode must be prime_only or with_repetitions");
}

void cmd_pressure(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  double p = pressure(m.shift, m.psi);
  json j = {{"pressure", p}, {"eigenvalue", std::exp(p)}};
  ctx.emit_json("pressure.json", j);
  ctx.note("pressure = " + format_g17(p));
}

void cmd_gibbs(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  CylinderFunction phi = m.psi;
  if (phi.depth() > 2) {
    RecodedSystem rs = recode_depth_one(m.shift, {&phi});
    GibbsData g = rpf(rs.shift, rs.fns[0]);
    ctx.emit_json("gibbs.json", to_json(g));
  } else {
    GibbsData g = rpf(m.shift, phi);
    ctx.emit_json("gibbs.json", to_json(g));
  }
  ctx.note("gibbs data written");
}

void cmd_normalize(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  NormalizationResult r = solve_flow_pressure(m.shift, m.psi, m.roof);
  ctx.emit_json("normalization.json", to_json(r));
  ctx.note("c = " + format_g17(r.c));
}

void cmd_orbits(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  const json& run = ctx.cfg->run;
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  LiftedObservable lk = lift(m.K, sys.roof());

  CsvWriter csv({"period", "word", "multiplicity", "ell", "psi", "k", "total_length"});
  if (run.contains("p_max")) {
    EnumerationOptions opt;
    opt.workers = ctx.workers;
    auto orbits = enumerate_prime_orbits(m.shift, m.psi, sys.roof(), &lk.k,
                                         run.at("p_max").get<int>(), opt);
    for (const auto& o : orbits)
      csv.row({std::to_string(o.period), word_key(o.word, m.shift.alphabet_size()), "1",
               format_g17(o.ell), format_g17(o.psi), format_g17(o.k), format_g17(o.ell)});
    ctx.note(std::to_string(orbits.size()) + " prime orbits");
  } else {
    BudgetOptions opt;
    opt.workers = ctx.workers;
    if (run.contains("max_instances")) opt.max_instances = run.at("max_instances").get<double>();
    auto inst = enumerate_by_budget(sys, lk.k, run.at("budget").get<double>(), opt);
    for (const auto& o : inst)
      csv.row({std::to_string(o.period), "", std::to_string(o.multiplicity),
               format_g17(o.ell), format_g17(o.psi), format_g17(o.k),
               format_g17(o.total_length)});
    ctx.note(std::to_string(inst.size()) + " orbit instances");
  }
  ctx.emit("orbits.csv", csv.body());
}

void cmd_zeta_scan(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  const json& run = ctx.cfg->run;
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  std::string kind = run.at("scan").get<std::string>();
  if (kind == "zero") {
    auto sg = run.at("sigma");
    auto tg = run.at("t");
    ScanReport rep = zero_scan(sys, sg[0].get<double>(), sg[1].get<double>(),
                               tg[0].get<double>(), tg[1].get<double>(),
                               run.value("steps_per_unit", 16), ctx.workers);
    ctx.emit("zero_scan.csv", scan_report_csv(rep));
    CsvWriter cr({"sigma_lo", "sigma_hi", "t"});
    for (const auto& c : rep.crossings)
      cr.row_numeric({c.sigma_lo, c.sigma_hi, c.t});
    ctx.emit("zero_scan_crossings.csv", cr.body());
    ctx.note(std::to_string(rep.crossings.size()) + " crossing cells" +
             (rep.coarse ? " (grid flagged coarse)" : ""));
  } else {
    LiftedObservable lk = lift(m.K, sys.roof());
    std::vector<double> ts;
    for (const auto& v : run.at("t_list")) ts.push_back(v.get<double>());
    ScanReport rep = growth_scan(sys, lk.k, run.at("sigma").get<double>(), ts);
    ctx.emit("growth_scan.csv", scan_report_csv(rep));
    json j = {{"alpha_hat", rep.alpha_hat},
              {"intercept", rep.fit_intercept},
              {"residual", rep.fit_residual},
              {"fit_valid", rep.fit_valid},
              {"all_zero", rep.all_zero}};
    ctx.emit_json("growth_fit.json", j);
    ctx.note("alpha_hat = " + format_g17(rep.alpha_hat));
  }
}

void cmd_residue(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  LiftedObservable lk = lift(m.K, sys.roof());
  ResidueResult r = residue_at_one(sys, lk.k);
  double cross = flow_average(m.shift, m.psi, sys.roof(), lk.k, sys.c()) / sys.c();
  json j = to_json(r);
  j["flow_average_over_c"] = cross;
  j["difference"] = r.residue - cross;
  ctx.emit_json("residue.json", j);
  ctx.note("residue = " + format_g17(r.residue) + ", (1/c) flow average = " +
           format_g17(cross));
}

void cmd_equidist(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  const json& run = ctx.cfg->run;
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  std::vector<double> grid;
  for (const auto& v : run.at("T_grid")) grid.push_back(v.get<double>());
  BudgetOptions opt;
  opt.workers = ctx.workers;
  if (run.contains("max_instances")) opt.max_instances = run.at("max_instances").get<double>();
  CountingCurve curve = error_curve(sys, m.K, grid, parse_mode(run), opt);
  ctx.emit("error_curve.csv", counting_curve_csv(curve));

  std::string fit_kind = run.value("fit", "exponential");
  std::string fit_points = run.value("fit_points", "raw");
  RateFit fit = fit_rate(curve,
                         fit_kind == "polynomial" ? RateFit::Model::polynomial
                                                  : RateFit::Model::exponential,
                         fit_points == "envelope" ? RateFit::Points::envelope
                                                  : RateFit::Points::raw,
                         run.value("fit_blocks", 4));
  ctx.emit_json("rate_fit.json", to_json(fit));
  ctx.note("delta_hat = " + format_g17(fit.delta_hat) + " (residual " +
           format_g17(fit.residual) + ")");
}

void cmd_window(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  const json& run = ctx.cfg->run;
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  LiftedObservable lk = lift(m.K, sys.roof());
  double eps = run.at("eps").get<double>();
  std::vector<double> ts;
  for (const auto& v : run.at("T_list")) ts.push_back(v.get<double>());
  CountMode mode = parse_mode(run);
  BudgetOptions opt;
  opt.workers = ctx.workers;
  if (run.contains("max_instances")) opt.max_instances = run.at("max_instances").get<double>();
  OrbitEnsemble ens(sys, lk.k, ts.back(), opt);
  double ref = flow_average(m.shift, m.psi, sys.roof(), lk.k, sys.c());

  CsvWriter csv({"T", "eps", "value", "reference", "abs_error", "mode"});
  for (double T : ts) {
    double v = ens.window(T, std::min(eps, T), mode);
    csv.row({format_g17(T), format_g17(std::min(eps, T)), format_g17(v), format_g17(ref),
             format_g17(std::abs(v - ref)), to_string(mode)});
  }
  ctx.emit("window.csv", csv.body());
  ctx.note("window curve written");
}

void cmd_perron(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  const json& run = ctx.cfg->run;
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  LiftedObservable lk = lift(m.K, sys.roof());
  double T = run.at("T").get<double>();

  ContourConfig cc;
  if (run.contains("d")) cc.d = run.at("d").get<double>();
  if (run.contains("R")) cc.R = run.at("R").get<double>();
  if (run.contains("quad_tol")) cc.quad_tol = run.at("quad_tol").get<double>();

  PerronResult pr;
  if (run.value("mode", "line") == "shifted") {
    double sigma_left = run.at("sigma_left").get<double>();
    double R = cc.height(T);
    ScanReport cert = zero_scan(sys, sigma_left, 1.05, 0.0, R,
                                run.value("scan_steps", 16), ctx.workers);
    pr = shifted_contour_phi1(sys, lk.k, T, sigma_left, R, cert, cc);
  } else {
    pr = perron_phi1(sys, lk.k, T, cc);
  }

  // direct comparison
  BudgetOptions opt;
  opt.workers = ctx.workers;
  if (run.contains("max_instances")) opt.max_instances = run.at("max_instances").get<double>();
  OrbitEnsemble ens(sys, lk.k, std::log(T + std::pow(T, 0.5)) / sys.c() + 1.0, opt);
  double direct = ens.phi(T, 1, CountMode::with_repetitions);

  json j = to_json(pr);
  j["direct_phi1"] = direct;
  j["difference"] = pr.value - direct;
  ctx.emit_json("perron.json", j);
  ctx.note("contour = " + format_g17(pr.value) + ", direct = " + format_g17(direct));
}

void cmd_psi_ell(RunContext& ctx) {
  SymbolicModel m = load_symbolic(*ctx.cfg);
  const json& run = ctx.cfg->run;
  SuspensionSystem sys(m.shift, m.psi, m.roof);
  LiftedObservable lk = lift(m.K, sys.roof());
  double T = run.at("T").get<double>();
  int ell = run.at("ell").get<int>();

  ContourConfig cc;
  cc.ell = ell;
  if (run.contains("d")) cc.d = run.at("d").get<double>();
  if (run.contains("R")) cc.R = run.at("R").get<double>();
  if (run.contains("eps_exp")) cc.eps_exp = run.at("eps_exp").get<double>();
  if (run.contains("rho_reg")) cc.rho_reg = run.at("rho_reg").get<double>();
  if (run.contains("quad_tol")) cc.quad_tol = run.at("quad_tol").get<double>();
  cc.shift_disabled = run.value("shift_disabled", true);

  PerronResult pr;
  if (cc.shift_disabled) {
    pr = psi_ell_contour(sys, lk.k, T, ell, cc, nullptr);
  } else {
    double R = cc.height(T);
    double h = sys.c();
    double CR = 1.0 - 1.0 / (std::pow(h, cc.rho_reg + 1.0) * std::pow(R, cc.rho_reg));
    ScanReport cert = zero_scan(sys, std::max(0.01, CR - 0.01), 1.05, 0.0, R, 16, ctx.workers);
    pr = psi_ell_contour(sys, lk.k, T, ell, cc, &cert);
  }

  BudgetOptions opt;
  opt.workers = ctx.workers;
  if (run.contains("max_instances")) opt.max_instances = run.at("max_instances").get<double>();
  OrbitEnsemble ens(sys, lk.k, std::log(T) / sys.c() + 1.0, opt);
  double fact = 1;
  for (int i = 2; i <= ell; ++i) fact *= i;
  double direct = ens.phi(T, ell, CountMode::with_repetitions) / fact;

  json j = to_json(pr);
  j["direct_psi_ell"] = direct;
  j["difference"] = pr.value - direct;
  ctx.emit_json("psi_ell.json", j);
  ctx.note("contour = " + format_g17(pr.value) + ", direct = " + format_g17(direct));
}

void cmd_dolgopyat(RunContext& ctx) {
  IntervalModel m = load_interval(*ctx.cfg);
  const json& run = ctx.cfg->run;
  double c = solve_interval_normalization(m.map, m.psi, m.roof);
  DolgopyatProbeResult r = dolgopyat_probe(
      m.map, m.psi, m.roof, c, run.at("sigma").get<double>(), run.at("t").get<double>(),
      run.at("n_max").get<int>(), run.at("trials").get<int>(), ctx.seed,
      run.value("order", 32));
  ctx.emit_json("dolgopyat_probe.json", to_json(r));
  ctx.emit("dolgopyat_norms.csv", norm_sequence_csv(r.norms));
  ctx.note("rho_hat = " + format_g17(r.rho_hat) +
           (r.lattice_warning ? " (lattice roof: decay not expected)" : ""));
}

void cmd_telescope(RunContext& ctx) {
  IntervalModel m = load_interval(*ctx.cfg);
  const json& run = ctx.cfg->run;
  double c = solve_interval_normalization(m.map, m.psi, m.roof);
  Complex s(run.at("s_re").get<double>(), run.at("s_im").get<double>());
  int n_max = run.at("n_max").get<int>();
  PointRule rule = run.value("rule", "fixed_point") == "midpoint" ? PointRule::midpoint
                                                                  : PointRule::fixed_point;
  std::vector<IntervalSpec> ivs;
  for (int i = 0; i < m.map.branch_count(); ++i) ivs.push_back(m.map.interval(i));
  auto grid = std::make_shared<CollocationGrid>(ivs, run.value("order", 32));
  GridFunction k = GridFunction::from_callable(
      grid, [&](int i, double x) { return Complex(m.observable.eval(i, x), 0.0); });

  CsvWriter csv({"n", "residual"});
  for (int n = 1; n <= n_max; ++n)
    csv.row({std::to_string(n),
             format_g17(telescoping_residual(m.map, m.psi, m.roof, c, n, s, k, rule))});
  ctx.emit("telescope.csv", csv.body());
  ctx.note("telescoping residuals written");
}

void cmd_validate(RunContext& ctx) {
  ValidationReport rep = validate_config(*ctx.cfg);
  json j = {{"ok", rep.ok}, {"violations", rep.violations},
            {"cost_estimate", rep.cost_estimate}};
  ctx.emit_json("validate.json", j);
  for (const auto& v : rep.violations) ctx.note("violation: " + v);
  if (!rep.ok) throw SchemaError("config failed validation with " +
                                 std::to_string(rep.violations.size()) + " violation(s)");
  ctx.note("config ok; cost estimate " + format_g17(rep.cost_estimate));
}

}  // namespace

int run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg,
                   const RunOverrides& ov) {
  RunContext ctx;
  ctx.cfg = &cfg;
  ctx.out_dir = ov.out_dir.empty() ? cfg.out_dir : ov.out_dir;
  ctx.workers = ov.workers > 0 ? ov.workers : cfg.workers;
  ctx.quiet = ov.quiet;
  if (ov.seed) {
    ctx.seed = *ov.seed;
    ctx.has_seed = true;
  } else if (cfg.seed) {
    ctx.seed = *cfg.seed;
    ctx.has_seed = true;
  }
  ctx.manifest.config_hash = cfg.config_hash;
  ctx.manifest.version = kToolVersion;
  ctx.manifest.tolerances = {{"rpf_residual", 1e-12},
                             {"normalization_residual", 1e-12},
                             {"pole_condition", kPoleConditionThreshold},
                             {"series_resolvent_rel", 1e-8},
                             {"interp_residual", 1e-10}};

  auto t0 = std::chrono::steady_clock::now();
  try {
    if (subcommand == "pressure") cmd_pressure(ctx);
    else if (subcommand == "gibbs") cmd_gibbs(ctx);
    else if (subcommand == "normalize") cmd_normalize(ctx);
    else if (subcommand == "orbits") cmd_orbits(ctx);
    else if (subcommand == "zeta-scan") cmd_zeta_scan(ctx);
    else if (subcommand == "residue") cmd_residue(ctx);
    else if (subcommand == "equidist") cmd_equidist(ctx);
    else if (subcommand == "window") cmd_window(ctx);
    else if (subcommand == "perron") cmd_perron(ctx);
    else if (subcommand == "psi-ell") cmd_psi_ell(ctx);
    else if (subcommand == "dolgopyat-probe") cmd_dolgopyat(ctx);
    else if (subcommand == "telescope") cmd_telescope(ctx);
    else if (subcommand == "validate") cmd_validate(ctx);
    else throw SchemaError("unknown subcommand '" + subcommand + "'");
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const RefusalError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefusal;
  }
  auto t1 = std::chrono::steady_clock::now();
  ctx.manifest.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  write_text_file(ctx.out_dir + "/manifest.json", ctx.manifest.to_json().dump(2) + "\n");
  return kExitOk;
}

}  // namespace zf
