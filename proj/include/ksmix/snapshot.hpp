#pragma once

// Binary snapshot format (little-endian):
//   "KSF1" | u32 rank | rank x u32 extents | row-major f64 values

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "ksmix/torus.hpp"

namespace ksmix {

class SnapshotError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, Truncated, ExtentMismatch };
  SnapshotError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Snapshot {
  std::vector<std::uint32_t> extents;
  std::vector<double> values;
};

void write_snapshot(const Snapshot& snap, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

void write_snapshot(const ScalarField& field, const std::filesystem::path& path);
/// Reads a scalar field; the extents must describe a valid square grid.
ScalarField read_field(const std::filesystem::path& path);
/// Reads d velocity components stored as one snapshot with extents (d, n, ..., n).
VectorField read_vector_field(const std::filesystem::path& path, const TorusGrid& grid);
void write_vector_field(const VectorField& u, const std::filesystem::path& path);

}  // namespace ksmix
