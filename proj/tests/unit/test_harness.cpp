#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slowsep/harness/config.hpp"
#include "slowsep/harness/experiment.hpp"

using namespace slowsep::harness;
namespace fs = std::filesystem;

namespace {

bool any_contains(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("minimal hydrodynamics config is filled with defaults") {
  const auto cfg = parse_config(R"(
[experiment]
kind = hydrodynamics   # trailing comment
[parameters]
n = 200
theta = 1
alpha = 0.1
beta = 0.9
[time]
T = 0.1
)");
  CHECK(cfg.kind == Kind::Hydrodynamics);
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.points == 400);
  CHECK(cfg.replicas == 1000);
  CHECK(cfg.n == std::vector<int>{200});
  CHECK(cfg.theta == std::vector<double>{1.0});
  CHECK(cfg.grid == std::vector<double>{0.1});
  CHECK(cfg.tolerances.l1 == 0.02);
  CHECK(cfg.tolerances.sigma == 4.0);
}

TEST_CASE("lists and overrides") {
  const auto cfg = parse_config(R"(
[experiment]
kind = qv-check
seed = 18446744073709551615
replicas = 10
[parameters]
n = 10, 20 , 40
theta = 0, 0.5,1
[time]
T = 0.3
grid = 0.1, 0.2, 0.3
[tolerances]
sigma = 5
)");
  CHECK(cfg.seed == 18446744073709551615ull);
  CHECK(cfg.n == std::vector<int>{10, 20, 40});
  CHECK(cfg.theta == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(cfg.grid.size() == 3);
  CHECK(cfg.tolerances.sigma == 5.0);
}

TEST_CASE("validation errors are aggregated") {
  const auto errors = errors_of(R"(
[experiment]
kind = hydrodynamics
replicas = many
[parameters]
n = 100
theta = -1
thetaa = 2
alpha = 1.5
[time]
T = 0.1
grid = 0.05, 0.02
[bogus]
x = 1
)");
  CHECK(errors.size() >= 5);
  CHECK(any_contains(errors, "thetaa"));
  CHECK(any_contains(errors, "did you mean 'theta'"));
  CHECK(any_contains(errors, "replicas"));
  CHECK(any_contains(errors, "theta"));
  CHECK(any_contains(errors, "bogus"));
  CHECK(any_contains(errors, "increasing"));
}

TEST_CASE("missing and duplicate keys") {
  const auto missing = errors_of("[parameters]\nn = 4\n");
  CHECK(any_contains(missing, "kind"));
  CHECK(any_contains(missing, "theta"));
  const auto dup = errors_of("[experiment]\nkind = exact-check\nkind = exact-check\n[parameters]\nn = 4\ntheta = 0\n");
  CHECK(any_contains(dup, "duplicate"));
  const auto kind = errors_of("[experiment]\nkind = hydrodynamic\n[parameters]\nn = 4\ntheta = 0\n");
  CHECK(any_contains(kind, "hydrodynamics"));
}

TEST_CASE("domain checks") {
  CHECK(any_contains(errors_of("[experiment]\nkind = exact-check\n[parameters]\nn = 15\ntheta = 0\n"), "14"));
  CHECK(any_contains(errors_of("[experiment]\nkind = gaussianity\nreplicas = 10\n[parameters]\nn = 20\ntheta = 0\n"),
                     "1000"));
  CHECK_FALSE(errors_of("[experiment]\nkind = ou-covariance\n[parameters]\nn = 20\ntheta = 0\nalpha = 0.2\n[time]\nT = 1\n")
                  .empty());
  CHECK(edit_distance("thetaa", "theta") == 1);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("kitten", "sitting") == 3);
}

TEST_CASE("exact-check cells pass quickly and deterministically") {
  auto cfg = parse_config("[experiment]\nkind = exact-check\n[parameters]\nn = 6\ntheta = 0, 1, 2\nrho = 0.5\n");
  const auto start = std::chrono::steady_clock::now();
  const auto cells = run_cells(cfg, 1);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed < 60.0);
  REQUIRE(cells.size() == 3);
  for (const auto& c : cells) {
    CHECK(c.passed());
    bool saw_balance = false, saw_form = false, saw_qv = false, saw_stationary = false;
    for (const auto& g : c.gates) {
      saw_balance = saw_balance || g.statistic == "detailed_balance_residual";
      saw_form = saw_form || g.statistic == "dirichlet_form_identity";
      saw_qv = saw_qv || g.statistic == "qv_identity";
      saw_stationary = saw_stationary || g.statistic == "stationarity_residual";
    }
    CHECK(saw_balance);
    CHECK(saw_form);
    CHECK(saw_qv);
    CHECK(saw_stationary);
  }

  const auto dir = fs::temp_directory_path() / "slowsep_harness_test";
  fs::remove_all(dir);
  CHECK(write_reports(cfg, cells, dir / "a") == 0);
  CHECK(write_reports(cfg, run_cells(cfg, 2), dir / "b") == 0);
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir / "a");
    CHECK(slurp(entry.path()) == slurp(dir / "b" / rel));
  }
  const auto report = nlohmann::json::parse(slurp(dir / "a" / "cells" / (cells[0].label + ".json")));
  CHECK(report["schema_version"] == kReportSchemaVersion);
  CHECK(report["passed"] == true);
  CHECK(slurp(dir / "a" / "summary.csv").rfind("cell,statistic,estimate,stderr,theory,z,tolerance,rule,pass\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("statistical cells are reproducible across thread counts") {
  auto cfg = parse_config(R"(
[experiment]
kind = ou-covariance
seed = 3
replicas = 64
[parameters]
n = 12
theta = 2
[time]
T = 0.05
grid = 0.01, 0.05
)");
  const auto a = run_cell(cfg, 12, 2.0, 0, 1);
  const auto b = run_cell(cfg, 12, 2.0, 0, 3);
  CHECK(to_json(cfg, a).dump() == to_json(cfg, b).dump());
  CHECK(a.series_csv == b.series_csv);
}

TEST_CASE("failing cells report an error without stopping others") {
  auto cfg = parse_config("[experiment]\nkind = exact-check\n[parameters]\nn = 4\ntheta = 0\n");
  cfg.n = {4, 40};  // 40 bypasses validation and cannot be enumerated
  const auto cells = run_cells(cfg, 1);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].passed());
  CHECK(cells[1].error.has_value());
  CHECK_FALSE(cells[1].passed());
}

TEST_CASE("gates") {
  const auto z = z_gate("x", 1.0, 0.1, 1.3, 4.0);
  CHECK(z.z == doctest::Approx(-3.0));
  CHECK(z.pass);
  CHECK_FALSE(z_gate("x", 1.0, 0.1, 1.5, 4.0).pass);
  CHECK(upper_gate("y", 0.01, 0.02).pass);
  CHECK_FALSE(upper_gate("y", 0.03, 0.02).pass);
  CHECK(info_gate("i", 1e9).pass);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-12) == "1e-12");
}
