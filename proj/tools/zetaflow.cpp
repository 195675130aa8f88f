// zetaflow: experiment runner for thermodynamic-formalism desk models.
//
//   zetaflow <subcommand> --config cfg.json [--out DIR] [--seed N]
//            [--workers N] [--quiet]
//
// Exit codes: 0 ok, 2 schema violation, 3 computational refusal,
// 4 budget exceeded.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "zetaflow/runner.hpp"

namespace {

const std::vector<std::string> kSubcommands = {
    "pressure", "gibbs",    "normalize", "orbits",  "zeta-scan", "residue",
    "equidist", "window",   "perron",    "psi-ell", "dolgopyat-probe",
    "telescope", "validate"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermodynamic formalism and periodic-orbit counting on desk models"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool quiet = false;

  for (const auto& name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--workers", workers, "worker count override");
    sub->add_flag("--quiet", quiet, "suppress progress lines");
  }

  CLI11_PARSE(app, argc, argv);
  std::string subcommand = app.get_subcommands().front()->get_name();

  std::ifstream is(config_path);
  if (!is) {
    std::cerr << "schema error: cannot read config file " << config_path << "\n";
    return zf::kExitSchema;
  }
  std::stringstream buf;
  buf << is.rdbuf();

  zf::ExperimentConfig cfg;
  try {
    cfg = zf::parse_config(buf.str(), subcommand);
  } catch (const zf::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return zf::kExitSchema;
  }

  zf::RunOverrides ov;
  ov.out_dir = out_dir;
  ov.workers = workers;
  ov.quiet = quiet;
  if (seed_set) ov.seed = seed;
  return zf::run_subcommand(subcommand, cfg, ov);
}
