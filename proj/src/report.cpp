#include "zetaflow/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace zf {

const char* kToolVersion = "0.1.0";

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : n_cols_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) body_ += ',';
    body_ += columns[i];
  }
  body_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_) throw SchemaError("csv row width mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

void CsvWriter::row_numeric(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format_g17(v));
  row(s);
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw SchemaError("cannot open output file " + path);
  os << body;
}

nlohmann::json to_json(const NormalizationResult& r) {
  return {{"c", r.c},
          {"bracket", {r.bracket_lo, r.bracket_hi}},
          {"residual", r.residual},
          {"dP_dc", r.dP_dc},
          {"gibbs_dP_dc", r.gibbs_dP_dc}};
}

nlohmann::json to_json(const GibbsData& g) {
  nlohmann::json j;
  j["eigenvalue"] = g.eigenvalue;
  j["pressure"] = g.pressure();
  j["right_eigenfunction"] = std::vector<double>(g.h.data(), g.h.data() + g.h.size());
  j["left_eigenmeasure"] = std::vector<double>(g.nu.data(), g.nu.data() + g.nu.size());
  j["stationary_law"] = std::vector<double>(g.pi.data(), g.pi.data() + g.pi.size());
  std::vector<std::vector<double>> rows(static_cast<size_t>(g.P.rows()),
                                        std::vector<double>(static_cast<size_t>(g.P.cols())));
  for (int i = 0; i < g.P.rows(); ++i)
    for (int jj = 0; jj < g.P.cols(); ++jj)
      rows[static_cast<size_t>(i)][static_cast<size_t>(jj)] = g.P(i, jj);
  j["transition_kernel"] = rows;
  j["residuals"] = {{"right", g.right_residual},
                    {"left", g.left_residual},
                    {"stationary", g.stationary_residual}};
  return j;
}

nlohmann::json to_json(const RateFit& f) {
  return {{"model", f.model == RateFit::Model::exponential ? "exponential" : "polynomial"},
          {"points", f.points == RateFit::Points::envelope ? "envelope" : "raw"},
          {"delta_hat", f.delta_hat},
          {"intercept", f.intercept},
          {"residual", f.residual},
          {"n_points", f.n_points},
          {"n_excluded", f.n_excluded}};
}

nlohmann::json to_json(const PerronResult& p) {
  return {{"value", p.value},
          {"main_term", p.main_term},
          {"remainder", p.remainder},
          {"quad_error", p.quad_error},
          {"trunc_error", p.trunc_error}};
}

nlohmann::json to_json(const ResidueResult& r) {
  return {{"residue", r.residue},
          {"samples", {r.samples[0], r.samples[1], r.samples[2]}},
          {"stable", r.stable}};
}

nlohmann::json to_json(const LatticeReport& r) {
  return {{"conclusive", r.conclusive},
          {"lattice", r.lattice},
          {"span", r.span},
          {"lengths_used", r.lengths_used}};
}

nlohmann::json to_json(const DolgopyatProbeResult& r) {
  return {{"sigma", r.sigma},
          {"t", r.t},
          {"block_len", r.block_len},
          {"rho_hat", r.rho_hat},
          {"rho_hat_block", r.rho_hat_block},
          {"C_hat", r.C_hat},
          {"fit_residual", r.fit_residual},
          {"lattice_warning", r.lattice_warning},
          {"norms", r.norms}};
}

std::string scan_report_csv(const ScanReport& rep) {
  CsvWriter w({"sigma", "t", "value_re", "value_im", "modulus", "flag"});
  for (const auto& p : rep.grid)
    w.row({format_g17(p.sigma), format_g17(p.t), format_g17(p.value.real()),
           format_g17(p.value.imag()), format_g17(p.modulus), std::to_string(p.flag)});
  return w.body();
}

std::string counting_curve_csv(const CountingCurve& c) {
  CsvWriter w({"T", "value", "reference", "abs_error", "mode"});
  for (size_t i = 0; i < c.T.size(); ++i)
    w.row({format_g17(c.T[i]), format_g17(c.value[i]), format_g17(c.reference),
           format_g17(std::abs(c.value[i] - c.reference)), to_string(c.mode)});
  return w.body();
}

std::string norm_sequence_csv(const std::vector<double>& norms) {
  CsvWriter w({"n", "norm_estimate"});
  for (size_t i = 0; i < norms.size(); ++i)
    w.row({std::to_string(i + 1), format_g17(norms[i])});
  return w.body();
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [path, hash] : outputs) outs.push_back({{"path", path}, {"body_fnv1a64", hash}});
  return {{"config_hash", config_hash},
          {"tool_version", version},
          {"wall_ms", wall_ms},
          {"tolerances", tolerances},
          {"outputs", outs}};
}

}  // namespace zf
