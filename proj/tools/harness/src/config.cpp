#include "slowsep/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "slowsep/exact_oracle.hpp"
#include "slowsep/lattice.hpp"

namespace slowsep::harness {

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& schema() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> s = {
      {"experiment", {"kind", "seed", "replicas", "output", "samples", "mode", "initial", "rho0"}},
      {"parameters", {"n", "theta", "alpha", "beta", "rho"}},
      {"time", {"T", "grid", "dt", "M", "burn_in", "window"}},
      {"tolerances", {"sigma", "l1", "skewness", "slope", "exact", "balance", "profile"}},
  };
  return s;
}

const std::map<std::string_view, Kind>& kind_names() {
  static const std::map<std::string_view, Kind> k = {
      {"exact-check", Kind::ExactCheck},       {"hydrodynamics", Kind::Hydrodynamics},
      {"hydrostatics", Kind::Hydrostatics},    {"qv-check", Kind::QvCheck},
      {"gaussianity", Kind::Gaussianity},      {"ou-covariance", Kind::OuCovariance},
      {"replacement-scaling", Kind::ReplacementScaling},
  };
  return k;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string nearest(std::string_view word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& c : candidates) {
    const auto d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> to_integer(const std::string& s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry>& entries, std::vector<std::string>& errors)
      : entries_(entries), errors_(errors) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  void require(const std::string& key) {
    if (!has(key)) errors_.push_back("missing required key '" + key + "'");
  }

  template <class Fn>
  void with(const std::string& key, Fn&& fn) {
    const auto it = entries_.find(key);
    if (it != entries_.end()) fn(it->second.value, it->second.line);
  }

  void real(const std::string& key, double& out) {
    with(key, [&](const std::string& v, int line) {
      if (auto d = to_double(v)) {
        out = *d;
      } else {
        type_error(key, line, "a real number", v);
      }
    });
  }

  void real_list(const std::string& key, std::vector<double>& out) {
    with(key, [&](const std::string& v, int line) {
      out.clear();
      for (const auto& item : split_list(v)) {
        if (auto d = to_double(item)) {
          out.push_back(*d);
        } else {
          type_error(key, line, "a list of real numbers", v);
          return;
        }
      }
    });
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    with(key, [&](const std::string& v, int line) {
      if (auto d = to_integer<Int>(v)) {
        out = *d;
      } else {
        type_error(key, line, "an integer", v);
      }
    });
  }

  void int_list(const std::string& key, std::vector<int>& out) {
    with(key, [&](const std::string& v, int line) {
      out.clear();
      for (const auto& item : split_list(v)) {
        if (auto d = to_integer<int>(item)) {
          out.push_back(*d);
        } else {
          type_error(key, line, "a list of integers", v);
          return;
        }
      }
    });
  }

 private:
  void type_error(const std::string& key, int line, const char* want, const std::string& got) {
    errors_.push_back("line " + std::to_string(line) + ": '" + key + "' expects " + want + ", got '" +
                      got + "'");
  }

  std::map<std::string, Entry>& entries_;
  std::vector<std::string>& errors_;
};

bool needs_horizon(Kind k) {
  return k == Kind::Hydrodynamics || k == Kind::QvCheck || k == Kind::OuCovariance ||
         k == Kind::ReplacementScaling;
}

bool equilibrium_kind(Kind k) {
  return k == Kind::QvCheck || k == Kind::Gaussianity || k == Kind::OuCovariance ||
         k == Kind::ReplacementScaling;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid configuration:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

std::string_view to_string(Kind kind) noexcept {
  for (const auto& [name, k] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::string_view to_string(InitialData initial) noexcept {
  switch (initial) {
    case InitialData::Flat:
      return "flat";
    case InitialData::Step:
      return "step";
    case InitialData::Equilibrium:
      return "equilibrium";
  }
  return "unknown";
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ExperimentConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  std::map<std::string, Entry> entries;  // "section.key" -> value
  std::string section;
  bool section_known = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? std::string_view(raw)
                                                            : std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header '" + line + "'");
        section_known = false;
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      section_known = schema().count(section) > 0;
      if (!section_known) {
        std::vector<std::string> names;
        for (const auto& [name, keys] : schema()) names.push_back(name);
        errors.push_back(where + "unknown section [" + section + "]; did you mean [" + nearest(section, names) + "]?");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) {
      errors.push_back(where + "key '" + key + "' appears before any [section]");
      continue;
    }
    if (!section_known) continue;
    const auto& keys = schema().find(section)->second;
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      errors.push_back(where + "unknown key '" + key + "' in [" + section + "]; did you mean '" +
                       nearest(key, keys) + "'?");
      continue;
    }
    if (value.empty()) {
      errors.push_back(where + "key '" + key + "' has an empty value");
      continue;
    }
    const std::string full = section + "." + key;
    if (entries.count(full)) {
      errors.push_back(where + "duplicate key '" + key + "' in [" + section + "]");
      continue;
    }
    entries[full] = {value, line_no};
  }

  ExperimentConfig cfg;
  Reader r(entries, errors);

  r.require("experiment.kind");
  r.with("experiment.kind", [&](const std::string& v, int line) {
    const auto it = kind_names().find(v);
    if (it == kind_names().end()) {
      std::vector<std::string> names;
      for (const auto& [name, k] : kind_names()) names.emplace_back(name);
      errors.push_back("line " + std::to_string(line) + ": unknown experiment kind '" + v +
                       "'; did you mean '" + nearest(v, names) + "'?");
    } else {
      cfg.kind = it->second;
    }
  });
  r.integer("experiment.seed", cfg.seed);
  r.integer("experiment.replicas", cfg.replicas);
  r.with("experiment.output", [&](const std::string& v, int) { cfg.output = v; });
  r.integer("experiment.samples", cfg.samples);
  r.integer("experiment.mode", cfg.mode);
  r.with("experiment.initial", [&](const std::string& v, int line) {
    if (v == "flat") {
      cfg.initial = InitialData::Flat;
    } else if (v == "step") {
      cfg.initial = InitialData::Step;
    } else if (v == "equilibrium") {
      cfg.initial = InitialData::Equilibrium;
    } else {
      errors.push_back("line " + std::to_string(line) + ": 'initial' must be flat, step or equilibrium, got '" + v + "'");
    }
  });
  r.real("experiment.rho0", cfg.rho0);

  r.require("parameters.n");
  r.require("parameters.theta");
  r.int_list("parameters.n", cfg.n);
  r.real_list("parameters.theta", cfg.theta);
  r.real("parameters.rho", cfg.rho);
  // Reservoir densities default to rho.
  cfg.alpha = cfg.rho;
  cfg.beta = cfg.rho;
  r.real("parameters.alpha", cfg.alpha);
  r.real("parameters.beta", cfg.beta);

  if (needs_horizon(cfg.kind)) r.require("time.T");
  r.real("time.T", cfg.horizon);
  r.real_list("time.grid", cfg.grid);
  r.real("time.dt", cfg.dt);
  r.integer("time.M", cfg.points);
  r.real("time.burn_in", cfg.burn_in);
  r.real("time.window", cfg.window);

  auto& tol = cfg.tolerances;
  if (cfg.kind == Kind::Hydrostatics) tol.l1 = 0.03;
  r.real("tolerances.sigma", tol.sigma);
  r.real("tolerances.l1", tol.l1);
  r.real("tolerances.skewness", tol.skewness);
  r.real("tolerances.slope", tol.slope);
  r.real("tolerances.exact", tol.exact);
  r.real("tolerances.balance", tol.balance);
  r.real("tolerances.profile", tol.profile);

  // Value validation.
  if (cfg.replicas < 1) errors.push_back("replicas must be >= 1");
  if (cfg.kind == Kind::Gaussianity && cfg.replicas < 1000) {
    errors.push_back("gaussianity needs replicas >= 1000");
  }
  if (cfg.samples < 1) errors.push_back("samples must be >= 1");
  if (r.has("parameters.n") && cfg.n.empty()) errors.push_back("n list is empty");
  for (double th : cfg.theta) {
    for (int n : cfg.n) {
      try {
        (void)make_parameters(n, th, cfg.alpha, cfg.beta, cfg.rho);
      } catch (const std::invalid_argument& e) {
        errors.push_back("parameters (n=" + std::to_string(n) + ", theta=" + trim(std::to_string(th)) +
                         "): " + e.what());
      }
    }
  }
  if (cfg.n.empty()) {
    for (double th : cfg.theta) {
      if (!(th >= 0.0) || !std::isfinite(th)) errors.push_back("theta must be finite and >= 0");
    }
  }
  {
    std::set<int> seen(cfg.n.begin(), cfg.n.end());
    if (seen.size() != cfg.n.size()) errors.push_back("n list has duplicates");
  }
  if (cfg.kind == Kind::ExactCheck) {
    for (int n : cfg.n) {
      if (n > exact::kMaxLatticeSize) {
        errors.push_back("exact-check supports n <= " + std::to_string(exact::kMaxLatticeSize) +
                         ", got " + std::to_string(n));
      }
    }
  }
  if (equilibrium_kind(cfg.kind) && !(cfg.alpha == cfg.rho && cfg.beta == cfg.rho)) {
    errors.push_back(std::string(to_string(cfg.kind)) + " requires alpha = beta = rho");
  }
  if (cfg.kind == Kind::ReplacementScaling && cfg.n.size() < 2) {
    errors.push_back("replacement-scaling needs at least two values of n");
  }
  if (r.has("time.T") && (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))) {
    errors.push_back("T must be positive");
  }
  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    if (!(cfg.grid[k] >= 0.0) || cfg.grid[k] > cfg.horizon) {
      errors.push_back("grid time " + trim(std::to_string(cfg.grid[k])) + " outside [0, T]");
    }
    if (k > 0 && !(cfg.grid[k] > cfg.grid[k - 1])) errors.push_back("grid must be strictly increasing");
  }
  if (!(cfg.dt > 0.0)) errors.push_back("dt must be positive");
  if (cfg.points < 2) errors.push_back("M must be >= 2");
  if (!(cfg.burn_in >= 0.0)) errors.push_back("burn_in must be >= 0");
  if (!(cfg.window > 0.0)) errors.push_back("window must be positive");
  if (!(cfg.rho0 >= 0.0 && cfg.rho0 <= 1.0)) errors.push_back("rho0 must lie in [0, 1]");
  if (cfg.mode < 0) errors.push_back("mode must be >= 0");
  if (!(tol.sigma > 0.0)) errors.push_back("sigma tolerance must be positive");

  if (!errors.empty()) throw ConfigError(std::move(errors));

  if (cfg.grid.empty() && cfg.horizon > 0.0) cfg.grid = {cfg.horizon};
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path.string() + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace slowsep::harness
