#pragma once

// Experiment configuration: a flat INI-style document.
//
//   # comment
//   [experiment]
//   kind = hydrodynamics
//   seed = 7
//   [parameters]
//   n = 100, 200
//   theta = 0.5, 1, 2
//
// Lists are comma separated. Every error found is reported, not just the first.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slowsep::harness {

enum class Kind {
  ExactCheck,
  Hydrodynamics,
  Hydrostatics,
  QvCheck,
  Gaussianity,
  OuCovariance,
  ReplacementScaling,
};

std::string_view to_string(Kind kind) noexcept;

enum class InitialData { Flat, Step, Equilibrium };

std::string_view to_string(InitialData initial) noexcept;

struct Tolerances {
  double sigma = 4.0;
  double l1 = 0.02;
  double skewness = 0.1;
  double slope = 0.2;
  double exact = 1e-10;
  double balance = 1e-12;
  double profile = 1e-9;
};

struct ExperimentConfig {
  Kind kind = Kind::ExactCheck;
  std::uint64_t seed = 1;
  std::size_t replicas = 1000;
  std::filesystem::path output = "slowsep-out";
  std::size_t samples = 100;
  int mode = 1;
  InitialData initial = InitialData::Flat;
  double rho0 = 0.5;

  std::vector<int> n;
  std::vector<double> theta;
  double alpha = 0.5;
  double beta = 0.5;
  double rho = 0.5;

  double horizon = 0.0;
  std::vector<double> grid;
  double dt = 1e-3;
  int points = 400;
  double burn_in = 1.0;
  double window = 1.0;

  Tolerances tolerances;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates a configuration document. Throws ConfigError listing
/// every problem (syntax, unknown keys with the nearest valid key, type
/// mismatches, missing required keys, invalid values).
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Levenshtein distance, used for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace slowsep::harness
