#include "zetaflow/config.hpp"

#include <set>

#include "zetaflow/report.hpp"

namespace zf {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!j.is_object()) throw SchemaError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!required.count(key) && !optional.count(key))
      throw SchemaError(where + ": unknown key '" + key + "'");
  }
  for (const auto& key : required)
    if (!j.contains(key)) throw SchemaError(where + ": missing key '" + key + "'");
}

CylinderFunction load_cylinder(const Subshift& shift, const json& spec,
                               const std::string& where) {
  require_keys(spec, where, {"depth"}, {"values", "constant"});
  int depth = spec.at("depth").get<int>();
  if (depth < 1) throw SchemaError(where + ": depth must be >= 1");
  if (spec.contains("constant") == spec.contains("values"))
    throw SchemaError(where + ": provide exactly one of 'values' or 'constant'");
  if (spec.contains("constant"))
    return CylinderFunction::constant(shift, depth, spec.at("constant").get<double>());
  std::map<std::string, double> table;
  for (const auto& [key, v] : spec.at("values").items()) {
    if (!v.is_number()) throw SchemaError(where + ": value of '" + key + "' must be a number");
    table[key] = v.get<double>();
  }
  return CylinderFunction::from_table(shift, depth, table);
}

PiecewisePoly load_poly(const json& spec, size_t n_intervals, const std::string& where) {
  if (!spec.is_array() || spec.size() != n_intervals)
    throw SchemaError(where + " must be an array with one coefficient row per interval");
  PiecewisePoly p;
  for (const auto& row : spec) {
    if (!row.is_array() || row.empty() || row.size() > 7)
      throw SchemaError(where + ": coefficient rows must have 1..7 entries (degree <= 6)");
    std::vector<double> c;
    for (const auto& v : row) c.push_back(v.get<double>());
    p.coeffs.push_back(std::move(c));
  }
  return p;
}

const std::set<std::string> kSubcommands = {
    "pressure", "gibbs",    "normalize", "orbits",          "zeta-scan", "residue",
    "equidist", "window",   "perron",    "psi-ell",         "dolgopyat-probe",
    "telescope", "validate"};

void validate_run_section(const json& run, const std::string& sub) {
  const std::string where = "run(" + sub + ")";
  const std::set<std::string> common = {"seed", "workers"};
  if (sub == "validate") {
    // validate inspects the model of configs written for any subcommand; it
    // does not police their run parameters
    if (!run.is_object()) throw SchemaError(where + " must be a JSON object");
  } else if (sub == "pressure" || sub == "gibbs" || sub == "normalize" ||
             sub == "residue") {
    require_keys(run, where, {}, common);
  } else if (sub == "orbits") {
    require_keys(run, where, {}, {"p_max", "budget", "max_instances", "seed", "workers"});
    if (run.contains("p_max") == run.contains("budget"))
      throw SchemaError(where + ": provide exactly one of 'p_max' or 'budget'");
  } else if (sub == "zeta-scan") {
    require_keys(run, where, {"scan"},
                 {"sigma", "t", "steps_per_unit", "t_list", "seed", "workers"});
    std::string scan = run.at("scan").get<std::string>();
    if (scan == "zero") {
      if (!run.contains("sigma") || !run.contains("t"))
        throw SchemaError(where + ": zero scan needs 'sigma' and 't' ranges");
    } else if (scan == "growth") {
      if (!run.contains("sigma") || !run.contains("t_list"))
        throw SchemaError(where + ": growth scan needs 'sigma' and 't_list'");
    } else {
      throw SchemaError(where + ": scan must be 'zero' or 'growth'");
    }
  } else if (sub == "equidist") {
    require_keys(run, where, {"T_grid"},
                 {"mode", "fit", "fit_points", "fit_blocks", "max_instances", "seed",
                  "workers"});
  } else if (sub == "window") {
    require_keys(run, where, {"T_list", "eps"}, {"mode", "max_instances", "seed", "workers"});
  } else if (sub == "perron") {
    require_keys(run, where, {"T"},
                 {"d", "R", "mode", "sigma_left", "scan_steps", "quad_tol", "max_instances",
                  "seed", "workers"});
  } else if (sub == "psi-ell") {
    require_keys(run, where, {"T", "ell"},
                 {"d", "R", "eps_exp", "rho_reg", "shift_disabled", "quad_tol",
                  "max_instances", "seed", "workers"});
  } else if (sub == "dolgopyat-probe") {
    require_keys(run, where, {"sigma", "t", "n_max", "trials", "seed"}, {"order", "workers"});
  } else if (sub == "telescope") {
    require_keys(run, where, {"s_re", "s_im", "n_max"}, {"rule", "order", "seed", "workers"});
  } else {
    throw SchemaError("unknown subcommand '" + sub + "'");
  }
}

}  // namespace

CylinderFunction SymbolicModelConfig::load_psi(const Subshift& s) const {
  return load_cylinder(s, psi_spec, "model.psi");
}

CylinderFunction SymbolicModelConfig::load_roof(const Subshift& s) const {
  CylinderFunction r = load_cylinder(s, roof_spec, "model.roof");
  r.mark_strictly_positive();
  return r;
}

FlowObservable SymbolicModelConfig::load_observable(const Subshift& s) const {
  FlowObservable K;
  if (observable_spec.is_null()) {
    K.coeffs.push_back(CylinderFunction::constant(s, 1, 1.0));
    return K;
  }
  if (!observable_spec.is_array() || observable_spec.empty())
    throw SchemaError("model.observable must be a non-empty array of coefficient specs");
  int expected_degree = 0;
  for (const auto& item : observable_spec) {
    require_keys(item, "model.observable[]", {"degree", "depth"}, {"values", "constant"});
    if (item.at("degree").get<int>() != expected_degree)
      throw SchemaError("model.observable: coefficients must list degrees 0,1,2,... in order");
    ++expected_degree;
    json coeff = item;
    coeff.erase("degree");
    K.coeffs.push_back(load_cylinder(s, coeff, "model.observable[]"));
  }
  return K;
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& subcommand) {
  if (!kSubcommands.count(subcommand))
    throw SchemaError("unknown subcommand '" + subcommand + "'");
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }

  require_keys(j, "config", {"model"}, {"run", "output"});
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.config_hash = hash_hex(fnv1a64(j.dump()));

  const json& model = j.at("model");
  require_keys(model, "model", {"type"},
               {"alphabet", "transition", "psi", "roof", "observable", "intervals",
                "branches", "observable_poly"});
  cfg.model_type = model.at("type").get<std::string>();

  if (cfg.model_type == "symbolic") {
    require_keys(model, "model(symbolic)", {"type", "alphabet", "transition", "psi", "roof"},
                 {"observable"});
    SymbolicModelConfig sm;
    sm.alphabet = model.at("alphabet").get<int>();
    for (const auto& row : model.at("transition")) {
      std::vector<int> r;
      for (const auto& v : row) r.push_back(v.get<int>());
      sm.transition.push_back(std::move(r));
    }
    sm.psi_spec = model.at("psi");
    sm.roof_spec = model.at("roof");
    if (model.contains("observable")) sm.observable_spec = model.at("observable");
    cfg.symbolic = std::move(sm);
  } else if (cfg.model_type == "interval") {
    require_keys(model, "model(interval)", {"type", "intervals", "branches", "roof", "psi"},
                 {"observable_poly"});
    IntervalModelConfig im;
    for (const auto& iv : model.at("intervals")) {
      if (!iv.is_array() || iv.size() != 2)
        throw SchemaError("model.intervals entries must be [a, b] pairs");
      im.intervals.push_back(IntervalSpec{iv[0].get<double>(), iv[1].get<double>()});
    }
    for (const auto& br : model.at("branches")) {
      require_keys(br, "model.branches[]", {"slope", "offset"});
      im.branches.push_back(
          BranchSpec{br.at("slope").get<double>(), br.at("offset").get<double>()});
    }
    im.roof = load_poly(model.at("roof"), im.intervals.size(), "model.roof");
    im.psi = load_poly(model.at("psi"), im.intervals.size(), "model.psi");
    if (model.contains("observable_poly"))
      im.observable = load_poly(model.at("observable_poly"), im.intervals.size(),
                                "model.observable_poly");
    cfg.interval = std::move(im);
  } else {
    throw SchemaError("model.type must be 'symbolic' or 'interval'");
  }

  cfg.run = j.value("run", json::object());
  validate_run_section(cfg.run, subcommand);
  if (cfg.run.contains("seed")) cfg.seed = cfg.run.at("seed").get<uint64_t>();
  if (cfg.run.contains("workers")) {
    cfg.workers = cfg.run.at("workers").get<int>();
    if (cfg.workers < 1) throw SchemaError("run.workers must be >= 1");
  }
  if (subcommand == "dolgopyat-probe" && !cfg.seed)
    throw SchemaError("run.seed is mandatory for randomized operations");

  if (j.contains("output")) {
    const json& out = j.at("output");
    require_keys(out, "output", {}, {"dir", "formats"});
    if (out.contains("dir")) cfg.out_dir = out.at("dir").get<std::string>();
    if (out.contains("formats")) {
      cfg.formats.clear();
      for (const auto& f : out.at("formats")) {
        std::string s = f.get<std::string>();
        if (s != "csv" && s != "json") throw SchemaError("output.formats entries: csv|json");
        cfg.formats.push_back(s);
      }
    }
  }
  return cfg;
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.violations.push_back(msg);
  };

  if (cfg.model_type == "symbolic") {
    const auto& sm = *cfg.symbolic;
    MixingReport mix = verify_mixing(sm.transition);
    if (!mix.mixing())
      fail("model.transition: not mixing (" +
           (mix.diagnostic.empty() ? std::string("periodic") : mix.diagnostic) + ")");
    Subshift shift = Subshift::unchecked(sm.alphabet, sm.transition);
    try {
      CylinderFunction roof = load_cylinder(shift, sm.roof_spec, "model.roof");
      if (!(roof.min_value() > 0))
        fail("model.roof: roof not strictly positive (min " +
             std::to_string(roof.min_value()) + ")");
    } catch (const SchemaError& e) {
      fail(e.what());
    }
    try {
      CylinderFunction psi = load_cylinder(shift, sm.psi_spec, "model.psi");
      if (mix.mixing()) {
        double p = pressure(shift, psi);
        if (!(p > 0))
          fail("model.psi: P(psi) = " + std::to_string(p) +
               " <= 0 (the standing assumption P(Psi) > 0 fails)");
      }
    } catch (const SchemaError& e) {
      fail(e.what());
    }
    // dry-run cost estimate over the budgeted periods
    int horizon = 12;
    if (cfg.run.contains("p_max")) horizon = cfg.run.at("p_max").get<int>();
    BigInt cost = 0;
    for (int n = 1; n <= std::min(horizon, 40); ++n) cost += count_periodic_points(shift, n);
    rep.cost_estimate = static_cast<double>(cost);
  } else {
    try {
      ExpandingMarkovMap map(cfg.interval->intervals, cfg.interval->branches);
      double rmin = cfg.interval->roof.min_on(map);
      if (!(rmin > 0)) fail("model.roof: interval roof not strictly positive");
    } catch (const SchemaError& e) {
      fail(e.what());
    }
    rep.cost_estimate = 0;
  }
  return rep;
}

}  // namespace zf
