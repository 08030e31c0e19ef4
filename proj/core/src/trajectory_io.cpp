#include "slowsep/trajectory_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace slowsep::kmc {

namespace {

constexpr std::array<char, 8> kMagic{'S', 'S', 'E', 'P', 'S', 'N', 'A', 'P'};

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

template <class T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw std::runtime_error("snapshot archive truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void check_uniform(std::span<const TrajectoryRecord> records) {
  for (const auto& rec : records) {
    if (!(rec.params == records.front().params) || rec.grid != records.front().grid) {
      throw std::invalid_argument("records do not share parameters and grid");
    }
    if (rec.snapshots.size() != rec.grid.size()) {
      throw std::invalid_argument("record lacks snapshots");
    }
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records) {
  check_uniform(records);
  const auto old = out.precision(17);
  out << "replica,t,site,occupation\n";
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t k = 0; k < rec.grid.size(); ++k) {
      const auto& eta = rec.snapshots[k];
      for (std::size_t x = 1; x <= eta.sites(); ++x) {
        out << r << ',' << rec.grid[k] << ',' << x << ',' << eta.at(x) << '\n';
      }
    }
  }
  out.precision(old);
}

void write_snapshot_binary(std::ostream& out, std::span<const TrajectoryRecord> records) {
  if (records.empty()) throw std::invalid_argument("no records to write");
  check_uniform(records);
  const auto& first = records.front();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kSnapshotFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(first.params.n()));
  put<double>(out, first.params.theta());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(first.grid.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (double t : first.grid) put<double>(out, t);

  const auto sites = static_cast<std::size_t>(first.params.sites());
  std::vector<unsigned char> packed((sites + 7) / 8);
  for (const auto& rec : records) {
    for (const auto& eta : rec.snapshots) {
      std::fill(packed.begin(), packed.end(), 0);
      for (std::size_t x = 1; x <= sites; ++x) {
        if (eta.occupied(x)) packed[(x - 1) / 8] |= static_cast<unsigned char>(1u << ((x - 1) % 8));
      }
      out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    }
  }
}

SnapshotArchive read_snapshot_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a snapshot archive (bad magic)");
  }
  SnapshotArchive archive;
  archive.version = get<std::uint32_t>(in);
  if (archive.version != kSnapshotFormatVersion) {
    throw std::runtime_error("unsupported snapshot format version " + std::to_string(archive.version));
  }
  archive.n = static_cast<int>(get<std::uint32_t>(in));
  if (archive.n < 2) throw std::runtime_error("snapshot archive has invalid n");
  archive.theta = get<double>(in);
  const auto grid_length = get<std::uint32_t>(in);
  const auto replicas = get<std::uint32_t>(in);
  archive.grid.resize(grid_length);
  for (auto& t : archive.grid) t = get<double>(in);

  const auto sites = static_cast<std::size_t>(archive.n - 1);
  std::vector<unsigned char> packed((sites + 7) / 8);
  archive.snapshots.resize(replicas);
  for (auto& rep : archive.snapshots) {
    rep.reserve(grid_length);
    for (std::uint32_t k = 0; k < grid_length; ++k) {
      if (!in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()))) {
        throw std::runtime_error("snapshot archive truncated");
      }
      Configuration eta(sites);
      for (std::size_t x = 1; x <= sites; ++x) eta.set(x, (packed[(x - 1) / 8] >> ((x - 1) % 8)) & 1u);
      rep.push_back(std::move(eta));
    }
  }
  return archive;
}

}  // namespace slowsep::kmc
