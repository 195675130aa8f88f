#ifndef ZETAFLOW_CONFIG_HPP
#define ZETAFLOW_CONFIG_HPP

// Experiment configs: one documented JSON schema, validated strictly
// (unknown keys are rejected) before any computation runs.

#include <optional>
#include <string>

#include <json.hpp>

#include "zetaflow/interval.hpp"
#include "zetaflow/suspension.hpp"

namespace zf {

struct SymbolicModelConfig {
  int alphabet = 0;
  std::vector<std::vector<int>> transition;
  CylinderFunction load_psi(const Subshift& s) const;
  CylinderFunction load_roof(const Subshift& s) const;
  FlowObservable load_observable(const Subshift& s) const;  // K = 1 when absent
  nlohmann::json psi_spec, roof_spec, observable_spec;
};

struct IntervalModelConfig {
  std::vector<IntervalSpec> intervals;
  std::vector<BranchSpec> branches;
  PiecewisePoly roof;
  PiecewisePoly psi;
  std::optional<PiecewisePoly> observable;  // k for the telescoping probe
};

struct ExperimentConfig {
  nlohmann::json raw;          // canonical parsed config
  std::string config_hash;     // fnv1a64 of the canonical dump

  std::string model_type;      // "symbolic" | "interval"
  std::optional<SymbolicModelConfig> symbolic;
  std::optional<IntervalModelConfig> interval;

  nlohmann::json run;          // validated per-subcommand parameters
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  std::optional<uint64_t> seed;
  int workers = 1;
};

// Parses and validates the config for one subcommand; throws SchemaError on
// any violation (unknown key, missing field, bad type, bad value).
ExperimentConfig parse_config(const std::string& json_text, const std::string& subcommand);

// Itemized semantic validation: mixing, roof positivity, depth consistency,
// P(psi) > 0, enumeration cost estimate.
struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
  double cost_estimate = 0;  // sum of trace(A^n) over budgeted periods
};

ValidationReport validate_config(const ExperimentConfig& cfg);

}  // namespace zf

#endif
