#pragma once

// Trajectory export.
//
// CSV: header "replica,t,site,occupation", one row per (replica, grid time, site).
//
// Binary snapshot format, all fields little-endian:
//   magic        8 bytes  "SSEPSNAP"
//   version      u32      (currently 1)
//   n            u32      lattice scale, n-1 sites
//   theta        f64
//   grid_length  u32
//   replicas     u32
//   grid         f64[grid_length]
//   payload      replicas x grid_length packed configurations,
//                ceil((n-1)/8) bytes each, site x at bit (x-1) % 8 of byte (x-1) / 8
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "slowsep/simulator.hpp"

namespace slowsep::kmc {

inline constexpr std::uint32_t kSnapshotFormatVersion = 1;

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records);

void write_snapshot_binary(std::ostream& out, std::span<const TrajectoryRecord> records);

struct SnapshotArchive {
  std::uint32_t version = 0;
  int n = 0;
  double theta = 0.0;
  std::vector<double> grid;
  /// snapshots[replica][k]
  std::vector<std::vector<Configuration>> snapshots;
};

/// Throws std::runtime_error on a bad magic, unknown version or truncated input.
SnapshotArchive read_snapshot_binary(std::istream& in);

}  // namespace slowsep::kmc
