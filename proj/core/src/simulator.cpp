#include "slowsep/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slowsep/rate_index.hpp"

namespace slowsep::kmc {

namespace {

void validate_grid(std::span<const double> grid, double horizon) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]) || grid[k] < 0.0 || grid[k] > horizon) {
      throw std::invalid_argument("grid time " + std::to_string(grid[k]) + " outside [0, T]");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw std::invalid_argument("grid times must be strictly increasing");
    }
  }
}

// Effective (un-accelerated) rate of one bond in the current configuration.
double effective_rate(const Parameters& p, const Configuration& eta, int bond) noexcept {
  if (bond == 0 || bond == p.n() - 1) return boundary_rate(p, eta, bond);
  const auto x = static_cast<std::size_t>(bond);
  return eta.occupied(x) != eta.occupied(x + 1) ? 1.0 : 0.0;
}

}  // namespace

TrajectoryRecord run_trajectory(const Parameters& p, const Configuration& init, double horizon,
                                std::span<const double> grid, std::span<Observer* const> observers,
                                RandomStream& rng, const RunOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon T must be positive");
  }
  validate_grid(grid, horizon);
  if (init.sites() != static_cast<std::size_t>(p.sites())) {
    throw std::invalid_argument("initial configuration has " + std::to_string(init.sites()) +
                                " sites, expected " + std::to_string(p.sites()));
  }

  TrajectoryRecord rec;
  rec.params = p;
  rec.horizon = horizon;
  rec.grid.assign(grid.begin(), grid.end());
  rec.seed = rng.master_seed();
  rec.stream = rng.stream();
  rec.initial = init;
  if (options.keep_snapshots) rec.snapshots.reserve(grid.size());
  if (options.keep_event_log) rec.events.emplace();

  const int n = p.n();
  Configuration eta = init;
  RateIndex index(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) index.update(static_cast<std::size_t>(b), effective_rate(p, eta, b));
  index.rebuild();

  for (auto* obs : observers) obs->start(p, eta);

  const double accel = p.acceleration();
  const std::size_t rebuild_every = std::max<std::size_t>(1, options.rebuild_interval);
  std::size_t next_grid = 0;
  double t = 0.0;
  std::size_t since_rebuild = 0;

  auto emit_grid_until = [&](double limit, bool inclusive) {
    while (next_grid < grid.size() &&
           (grid[next_grid] < limit || (inclusive && grid[next_grid] == limit))) {
      if (options.keep_snapshots) rec.snapshots.push_back(eta);
      for (auto* obs : observers) obs->on_grid(next_grid, grid[next_grid], eta);
      ++next_grid;
    }
  };

  auto refresh = [&](int bond) {
    if (bond >= 0 && bond < n) {
      index.update(static_cast<std::size_t>(bond), effective_rate(p, eta, bond));
    }
  };

  for (;;) {
    const double total = index.total();
    // Reservoir bonds always carry positive rate, so total > 0.
    const double next_t = t + rng.exponential(accel * total);
    emit_grid_until(std::min(next_t, horizon), next_t > horizon);
    if (next_t > horizon) break;

    std::size_t leaf = index.sample(rng.uniform() * total);
    while (index.rate(leaf) <= 0.0) leaf = index.sample(rng.uniform() * total);
    const int bond = static_cast<int>(leaf);

    apply_event_in_place(eta, BondEvent{bond});
    if (bond == 0 || bond == n - 1) {
      refresh(bond == 0 ? 0 : n - 1);
      refresh(bond == 0 ? 1 : n - 2);
      if (n == 2) refresh(1 - bond);
    } else {
      refresh(bond - 1);
      refresh(bond);
      refresh(bond + 1);
    }
    t = next_t;
    ++rec.event_count;
    if (rec.events) {
      rec.events->times.push_back(t);
      rec.events->bonds.push_back(static_cast<std::uint32_t>(bond));
    }
    for (auto* obs : observers) obs->on_event(t, BondEvent{bond}, eta);

    if (++since_rebuild >= rebuild_every) {
      since_rebuild = 0;
      const double drift = index.rebuild();
      if (drift > 1e-9 * std::max(1.0, index.total())) {
        throw std::runtime_error("rate index drifted by " + std::to_string(drift));
      }
      if (std::abs(index.total() - index.leaf_sum()) > 1e-9 * std::max(1.0, index.total())) {
        throw std::runtime_error("rate index corrupted: root disagrees with leaf sum");
      }
    }
  }
  emit_grid_until(horizon, true);

  for (auto* obs : observers) {
    obs->finish(horizon, eta);
    rec.observables[obs->name()] = obs->series();
  }
  return rec;
}

void replay(const TrajectoryRecord& record, std::span<Observer* const> observers) {
  if (!record.events) throw std::invalid_argument("trajectory record carries no event log");
  const auto& log = *record.events;
  const auto& grid = record.grid;
  Configuration eta = record.initial;
  for (auto* obs : observers) obs->start(record.params, eta);
  std::size_t next_grid = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    while (next_grid < grid.size() && grid[next_grid] < log.times[i]) {
      for (auto* obs : observers) obs->on_grid(next_grid, grid[next_grid], eta);
      ++next_grid;
    }
    const BondEvent e{static_cast<int>(log.bonds[i])};
    apply_event_in_place(eta, e);
    for (auto* obs : observers) obs->on_event(log.times[i], e, eta);
  }
  for (; next_grid < grid.size(); ++next_grid) {
    for (auto* obs : observers) obs->on_grid(next_grid, grid[next_grid], eta);
  }
  for (auto* obs : observers) obs->finish(record.horizon, eta);
}

ProfileEstimate empirical_density_profile(std::span<const TrajectoryRecord> records, double t) {
  if (records.empty()) throw std::invalid_argument("empirical_density_profile: empty record set");
  const auto& first = records.front();
  const auto it = std::find_if(first.grid.begin(), first.grid.end(),
                               [t](double g) { return std::abs(g - t) <= 1e-12 * std::max(1.0, t); });
  if (it == first.grid.end()) throw std::invalid_argument("time is not on the record grid");
  const auto k = static_cast<std::size_t>(it - first.grid.begin());
  const auto sites = static_cast<std::size_t>(first.params.sites());

  std::vector<double> sum(sites, 0.0);
  for (const auto& rec : records) {
    if (!(rec.params == first.params) || rec.grid != first.grid) {
      throw std::invalid_argument("records do not share parameters and grid");
    }
    if (rec.snapshots.size() != rec.grid.size()) {
      throw std::invalid_argument("record lacks snapshots");
    }
    const auto& eta = rec.snapshots[k];
    for (std::size_t x = 1; x <= sites; ++x) sum[x - 1] += eta.at(x);
  }
  const auto r = static_cast<double>(records.size());
  ProfileEstimate out;
  out.mean.resize(sites);
  out.std_error.resize(sites);
  for (std::size_t i = 0; i < sites; ++i) {
    const double m = sum[i] / r;
    out.mean[i] = m;
    // Occupations are 0/1, so the sample variance is m(1-m) r/(r-1).
    out.std_error[i] = records.size() > 1 ? std::sqrt(m * (1.0 - m) / (r - 1.0)) : 0.0;
  }
  return out;
}

void ParticleCountObserver::start(const Parameters& p, const Configuration& initial) {
  n_ = p.n();
  count_ = static_cast<long long>(initial.particle_count());
  counts_.clear();
}

void ParticleCountObserver::on_event(double, BondEvent e, const Configuration& after) {
  if (e.bond == 0) {
    count_ += after.occupied(1) ? 1 : -1;
  } else if (e.bond == n_ - 1) {
    count_ += after.occupied(static_cast<std::size_t>(n_ - 1)) ? 1 : -1;
  }
}

void ParticleCountObserver::on_grid(std::size_t, double, const Configuration&) {
  counts_.push_back(static_cast<double>(count_));
}

OccupationTimeObserver::OccupationTimeObserver(double from, double to) : from_(from), to_(to) {
  if (!(to > from) || from < 0.0) throw std::invalid_argument("occupation window must satisfy 0 <= from < to");
}

void OccupationTimeObserver::start(const Parameters& p, const Configuration&) {
  n_ = p.n();
  since_.assign(static_cast<std::size_t>(p.sites()), 0.0);
  occupied_time_.assign(static_cast<std::size_t>(p.sites()), 0.0);
}

void OccupationTimeObserver::settle(std::size_t x, double t, bool occupied) {
  if (occupied) {
    const double lo = std::max(since_[x - 1], from_);
    const double hi = std::min(t, to_);
    if (hi > lo) occupied_time_[x - 1] += hi - lo;
  }
  since_[x - 1] = t;
}

void OccupationTimeObserver::on_event(double t, BondEvent e, const Configuration& after) {
  if (e.bond == 0) {
    settle(1, t, !after.occupied(1));
  } else if (e.bond == n_ - 1) {
    const auto x = static_cast<std::size_t>(n_ - 1);
    settle(x, t, !after.occupied(x));
  } else {
    const auto x = static_cast<std::size_t>(e.bond);
    // Before the swap, site x held what site x+1 holds now.
    settle(x, t, after.occupied(x + 1));
    settle(x + 1, t, after.occupied(x));
  }
}

void OccupationTimeObserver::finish(double horizon, const Configuration& eta) {
  if (horizon < to_) throw std::invalid_argument("horizon ends before the occupation window");
  for (std::size_t x = 1; x <= since_.size(); ++x) settle(x, horizon, eta.occupied(x));
}

std::vector<double> OccupationTimeObserver::series() const {
  std::vector<double> avg(occupied_time_.size());
  for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = occupied_time_[i] / (to_ - from_);
  return avg;
}

}  // namespace slowsep::kmc
