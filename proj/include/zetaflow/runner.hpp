#ifndef ZETAFLOW_RUNNER_HPP
#define ZETAFLOW_RUNNER_HPP

#include <string>

#include "zetaflow/config.hpp"

namespace zf {

struct RunOverrides {
  std::string out_dir;     // empty = keep config
  std::optional<uint64_t> seed;
  int workers = 0;         // 0 = keep config
  bool quiet = false;
};

// Executes one subcommand against a parsed config, writes the artifacts and
// the run manifest, and returns the process exit code (0 on success).
int run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg,
                   const RunOverrides& ov);

// Exit codes per the CLI contract.
constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitRefusal = 3;
constexpr int kExitBudget = 4;

}  // namespace zf

#endif
