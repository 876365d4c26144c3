#include "ksmix/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace ksmix {
namespace {

constexpr char kMagic[4] = {'K', 'S', 'F', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint64_t get_le(const std::string& buf, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  return v;
}

Snapshot from_field(const ScalarField& f) {
  Snapshot s;
  s.extents.assign(static_cast<std::size_t>(f.grid.dim()), static_cast<std::uint32_t>(f.grid.n()));
  s.values.assign(f.values.begin(), f.values.end());
  return s;
}

}  // namespace

void write_snapshot(const Snapshot& snap, const std::filesystem::path& path) {
  std::size_t count = 1;
  for (auto e : snap.extents) count *= e;
  if (count != snap.values.size()) {
    throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                        "snapshot extents do not match value count");
  }
  std::string buf(kMagic, 4);
  put_u32(buf, static_cast<std::uint32_t>(snap.extents.size()));
  for (auto e : snap.extents) put_u32(buf, e);
  buf.reserve(buf.size() + 8 * count);
  for (double v : snap.values) put_f64(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw SnapshotError(SnapshotError::Kind::Io, "write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError(SnapshotError::Kind::Io, "cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw SnapshotError(SnapshotError::Kind::BadMagic,
                        path.string() + ": not a snapshot (bad magic bytes)");
  }
  if (buf.size() < 8) {
    throw SnapshotError(SnapshotError::Kind::Truncated, path.string() + ": truncated header");
  }
  const auto rank = static_cast<std::size_t>(get_le(buf, 4, 4));
  if (rank == 0 || rank > 8) {
    throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                        path.string() + ": unsupported rank " + std::to_string(rank));
  }
  std::size_t pos = 8;
  if (buf.size() < pos + 4 * rank) {
    throw SnapshotError(SnapshotError::Kind::Truncated, path.string() + ": truncated extents");
  }
  Snapshot s;
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i, pos += 4) {
    s.extents.push_back(static_cast<std::uint32_t>(get_le(buf, pos, 4)));
    count *= s.extents.back();
  }
  const std::size_t need = pos + 8 * count;
  if (buf.size() < need) {
    throw SnapshotError(SnapshotError::Kind::Truncated,
                        path.string() + ": truncated data (" + std::to_string(buf.size()) +
                            " bytes, expected " + std::to_string(need) + ")");
  }
  if (buf.size() > need) {
    throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                        path.string() + ": trailing bytes after declared extents");
  }
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i, pos += 8) {
    s.values[i] = std::bit_cast<double>(get_le(buf, pos, 8));
  }
  return s;
}

void write_snapshot(const ScalarField& field, const std::filesystem::path& path) {
  write_snapshot(from_field(field), path);
}

ScalarField read_field(const std::filesystem::path& path) {
  Snapshot s = read_snapshot(path);
  const auto d = s.extents.size();
  if (d != 2 && d != 3) {
    throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                        path.string() + ": scalar field must have rank 2 or 3");
  }
  for (auto e : s.extents) {
    if (e != s.extents.front()) {
      throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                          path.string() + ": extents must be equal along every axis");
    }
  }
  TorusGrid grid(static_cast<int>(d), static_cast<int>(s.extents.front()));
  return ScalarField(grid, AlignedVector<double>(s.values.begin(), s.values.end()));
}

VectorField read_vector_field(const std::filesystem::path& path, const TorusGrid& grid) {
  Snapshot s = read_snapshot(path);
  if (s.extents.size() != static_cast<std::size_t>(grid.dim()) + 1 ||
      s.extents.front() != static_cast<std::uint32_t>(grid.dim())) {
    throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                        path.string() + ": velocity snapshot must have extents (d, n, ..., n)");
  }
  for (std::size_t i = 1; i < s.extents.size(); ++i) {
    if (s.extents[i] != static_cast<std::uint32_t>(grid.n())) {
      throw SnapshotError(SnapshotError::Kind::ExtentMismatch,
                          path.string() + ": velocity extents do not match the grid");
    }
  }
  VectorField u;
  for (int j = 0; j < grid.dim(); ++j) {
    const auto first = s.values.begin() + static_cast<std::ptrdiff_t>(j * grid.size());
    u.emplace_back(grid, AlignedVector<double>(first, first + static_cast<std::ptrdiff_t>(grid.size())));
  }
  return u;
}

void write_vector_field(const VectorField& u, const std::filesystem::path& path) {
  const TorusGrid& g = u.front().grid;
  Snapshot s;
  s.extents.push_back(static_cast<std::uint32_t>(g.dim()));
  for (int j = 0; j < g.dim(); ++j) s.extents.push_back(static_cast<std::uint32_t>(g.n()));
  for (const auto& c : u) s.values.insert(s.values.end(), c.values.begin(), c.values.end());
  write_snapshot(s, path);
}

}  // namespace ksmix
