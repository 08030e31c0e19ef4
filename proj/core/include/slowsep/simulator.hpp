#pragma once

// Event-driven simulation of the accelerated process n^2 L on a macroscopic
// horizon [0, T]. Bulk swaps of equal neighbours carry no effective rate, so
// every sampled event changes the configuration.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slowsep/lattice.hpp"
#include "slowsep/random.hpp"

namespace slowsep::kmc {

/// Event times (macroscopic) and bonds, in order of occurrence.
struct EventLog {
  std::vector<double> times;
  std::vector<std::uint32_t> bonds;

  std::size_t size() const noexcept { return times.size(); }
};

struct TrajectoryRecord {
  Parameters params;
  double horizon = 0.0;
  std::vector<double> grid;
  /// Configuration in force at each grid time (empty unless kept).
  std::vector<Configuration> snapshots;
  /// Observer name -> series.
  std::map<std::string, std::vector<double>> observables;
  std::uint64_t event_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Configuration initial;
  std::optional<EventLog> events;
};

/// Pluggable per-trajectory observer. A fresh instance is needed per run.
class Observer {
 public:
  virtual ~Observer() = default;

  virtual std::string name() const = 0;
  virtual void start(const Parameters& p, const Configuration& initial) = 0;
  /// Called right after an event at macroscopic time t; `after` is the new state.
  virtual void on_event(double t, BondEvent e, const Configuration& after) = 0;
  /// Called at grid time t with the configuration in force at t.
  virtual void on_grid(std::size_t k, double t, const Configuration& eta) = 0;
  /// Called once at the horizon.
  virtual void finish(double /*horizon*/, const Configuration& /*eta*/) {}
  virtual std::vector<double> series() const = 0;
};

struct RunOptions {
  bool keep_snapshots = true;
  bool keep_event_log = false;
  /// Events between exact rebuilds of the rate index.
  std::size_t rebuild_interval = std::size_t{1} << 16;
};

/// Samples one trajectory. Throws std::invalid_argument on a bad horizon,
/// grid or initial configuration, and std::runtime_error when the rate index
/// drifts beyond 1e-9 relative between rebuilds.
TrajectoryRecord run_trajectory(const Parameters& p, const Configuration& init, double horizon,
                                std::span<const double> grid, std::span<Observer* const> observers,
                                RandomStream& rng, const RunOptions& options = {});

/// Replays a logged trajectory through observers (grid callbacks included).
void replay(const TrajectoryRecord& record, std::span<Observer* const> observers);

struct ProfileEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;
};

/// Per-site sample mean and standard error across replicas at grid time t.
ProfileEstimate empirical_density_profile(std::span<const TrajectoryRecord> records, double t);

/// Particle number at each grid time.
class ParticleCountObserver final : public Observer {
 public:
  std::string name() const override { return "particle_count"; }
  void start(const Parameters& p, const Configuration& initial) override;
  void on_event(double t, BondEvent e, const Configuration& after) override;
  void on_grid(std::size_t k, double t, const Configuration& eta) override;
  std::vector<double> series() const override { return counts_; }

 private:
  int n_ = 2;
  long long count_ = 0;
  std::vector<double> counts_;
};

/// Time average of every site's occupation over the window [from, to].
class OccupationTimeObserver final : public Observer {
 public:
  OccupationTimeObserver(double from, double to);

  std::string name() const override { return "occupation_time"; }
  void start(const Parameters& p, const Configuration& initial) override;
  void on_event(double t, BondEvent e, const Configuration& after) override;
  void on_grid(std::size_t, double, const Configuration&) override {}
  void finish(double horizon, const Configuration& eta) override;
  /// Per-site time averages, site x at index x-1.
  std::vector<double> series() const override;

 private:
  void settle(std::size_t x, double t, bool occupied);

  double from_;
  double to_;
  int n_ = 2;
  std::vector<double> since_;
  std::vector<double> occupied_time_;
};

}  // namespace slowsep::kmc
