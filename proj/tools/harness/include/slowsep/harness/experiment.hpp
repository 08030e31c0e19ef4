#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slowsep/harness/config.hpp"

namespace slowsep::harness {

inline constexpr int kReportSchemaVersion = 1;

/// How a gate decides pass/fail.
enum class Rule {
  ZScore,  // |z| <= sigma tolerance
  Upper,   // estimate <= tolerance
  Info,    // reported only
};

struct Gate {
  std::string statistic;
  double estimate = 0.0;
  double std_error = 0.0;
  double theory = 0.0;
  double z = 0.0;
  double tolerance = 0.0;
  Rule rule = Rule::Info;
  bool pass = true;
};

Gate z_gate(std::string statistic, double estimate, double std_error, double theory, double sigma);
Gate upper_gate(std::string statistic, double estimate, double tolerance, double theory = 0.0);
Gate info_gate(std::string statistic, double estimate, double std_error = 0.0, double theory = 0.0);

struct CellReport {
  std::string label;
  int n = 0;  // 0 when the cell spans several n
  double theta = 0.0;
  std::vector<Gate> gates;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  /// Plot-ready CSV series (header line first); empty when none.
  std::string series_csv;
  /// Additional artifacts: path relative to the output directory -> bytes.
  std::map<std::string, std::string> extra_files;
  std::optional<std::string> error;

  bool passed() const;
};

/// Runs every grid cell of the experiment. Replicas inside a cell run on
/// `threads` workers; results never depend on the thread count. A failure in
/// one cell is recorded in that cell's report and does not stop the others.
std::vector<CellReport> run_cells(const ExperimentConfig& cfg, unsigned threads);

/// Single cell, exposed for tests and the acceptance runner.
CellReport run_cell(const ExperimentConfig& cfg, int n, double theta, std::size_t cell_index,
                    unsigned threads);

/// Only the PDE side of a hydrodynamics/hydrostatics configuration.
std::vector<CellReport> run_pde_cells(const ExperimentConfig& cfg);

/// Writes <out>/cells/<label>.json, <out>/series/<label>.csv, any extra
/// artifacts and <out>/summary.csv. Returns 0 iff every cell passed, 1 otherwise.
int write_reports(const ExperimentConfig& cfg, const std::vector<CellReport>& cells,
                  const std::filesystem::path& out);

nlohmann::ordered_json to_json(const ExperimentConfig& cfg, const CellReport& cell);

/// Shortest round-trip decimal representation.
std::string format_number(double v);

}  // namespace slowsep::harness
