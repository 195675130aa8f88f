#ifndef ZETAFLOW_REPORT_HPP
#define ZETAFLOW_REPORT_HPP

// Canonical CSV/JSON emission and the per-run manifest.  CSV bodies are
// byte-stable: fixed column order, "%.17g" floats, '\n' line endings, so
// reruns with the same config hash to identical bytes.

#include <cstdint>
#include <string>
#include <vector>

#include "zetaflow/counting.hpp"
#include "zetaflow/contour.hpp"
#include "zetaflow/interval.hpp"

#include <json.hpp>

namespace zf {

std::string format_g17(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void row(const std::vector<std::string>& cells);
  void row_numeric(const std::vector<double>& cells);
  const std::string& body() const { return body_; }

 private:
  size_t n_cols_;
  std::string body_;
};

uint64_t fnv1a64(const std::string& data);
std::string hash_hex(uint64_t h);

void write_text_file(const std::string& path, const std::string& body);

// JSON shapes for the typed results.
nlohmann::json to_json(const NormalizationResult& r);
nlohmann::json to_json(const GibbsData& g);
nlohmann::json to_json(const RateFit& f);
nlohmann::json to_json(const PerronResult& p);
nlohmann::json to_json(const ResidueResult& r);
nlohmann::json to_json(const LatticeReport& r);
nlohmann::json to_json(const DolgopyatProbeResult& r);

std::string scan_report_csv(const ScanReport& rep);
std::string counting_curve_csv(const CountingCurve& c);
std::string norm_sequence_csv(const std::vector<double>& norms);

struct RunManifest {
  std::string config_hash;
  std::string version;
  double wall_ms = 0;
  nlohmann::json tolerances;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, body hash

  nlohmann::json to_json() const;
};

extern const char* kToolVersion;

}  // namespace zf

#endif
