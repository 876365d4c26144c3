#include "ksmix/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "ksmix/kernels.hpp"
#include "ksmix/snapshot.hpp"

namespace ksmix {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

VectorField zeros(const TorusGrid& grid) {
  return VectorField(static_cast<std::size_t>(grid.dim()), ScalarField(grid));
}

void normalize(VectorField& u) {
  std::vector<std::span<const double>> parts;
  for (const auto& c : u) parts.emplace_back(c.values);
  const double peak = kernels::max_norm(parts);
  if (peak == 0.0) return;
  for (auto& c : u) {
    for (auto& v : c.values) v /= peak;
  }
}

// u_axis = sin(m x_coord + phase), other components zero.
VectorField shear(const TorusGrid& grid, int axis, int coord, int m, double phase) {
  VectorField u = zeros(grid);
  u[static_cast<std::size_t>(axis)] = ScalarField::sample(
      grid, [&](const std::array<double, 3>& x) { return std::sin(m * x[coord] + phase); });
  normalize(u);
  return u;
}

}  // namespace

std::string to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::Zero: return "zero";
    case FlowKind::Shear: return "shear";
    case FlowKind::RelaxedLinear: return "relaxed-linear";
    case FlowKind::AlternatingShear: return "alternating-shear";
    case FlowKind::FromFile: return "from-file";
  }
  return "unknown";
}

FlowKind parse_flow_kind(const std::string& name) {
  for (FlowKind k : {FlowKind::Zero, FlowKind::Shear, FlowKind::RelaxedLinear,
                     FlowKind::AlternatingShear, FlowKind::FromFile}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown flow kind '" + name + "'");
}

FlowSampler::FlowSampler(FlowSpec spec, const TorusGrid& grid) : spec_(std::move(spec)), grid_(grid) {
  if (spec_.amplitude < 0.0 || !std::isfinite(spec_.amplitude)) {
    throw std::invalid_argument("flow amplitude A must be finite and >= 0");
  }
  if (spec_.wavenumber < 1) throw std::invalid_argument("shear wavenumber must be >= 1");
  if (!(spec_.half_period > 0.0)) throw std::invalid_argument("alternation half-period must be > 0");

  switch (spec_.kind) {
    case FlowKind::Zero:
      fixed_ = zeros(grid_);
      break;
    case FlowKind::Shear:
      fixed_ = shear(grid_, 0, 1, spec_.wavenumber, 0.0);
      break;
    case FlowKind::RelaxedLinear: {
      fixed_ = zeros(grid_);
      double c = 1.0;
      for (auto& comp : fixed_) {
        for (auto& v : comp.values) v = c;
        c *= spec_.gamma;
      }
      normalize(fixed_);
      break;
    }
    case FlowKind::AlternatingShear:
      break;
    case FlowKind::FromFile: {
      fixed_ = read_vector_field(spec_.path, grid_);
      std::vector<std::span<const double>> parts;
      for (const auto& c : fixed_) parts.emplace_back(c.values);
      const double peak = kernels::max_norm(parts);
      const double div = divergence_check(fixed_);
      if (!(div <= 1e-10 * peak)) {
        throw std::invalid_argument("velocity field from " + spec_.path +
                                    " is not divergence-free (max |div u| = " +
                                    std::to_string(div) + ")");
      }
      normalize(fixed_);
      break;
    }
  }
}

std::size_t FlowSampler::segment(double t) const noexcept {
  if (stationary() || t <= 0.0) return 0;
  const double x = t / spec_.half_period;
  auto seg = static_cast<std::size_t>(std::floor(x));
  if ((static_cast<double>(seg) + 1.0) * spec_.half_period - t <= 1e-12 * spec_.half_period) ++seg;
  return seg;
}

double FlowSampler::segment_end(std::size_t seg) const noexcept {
  if (stationary()) return std::numeric_limits<double>::infinity();
  return (static_cast<double>(seg) + 1.0) * spec_.half_period;
}

double FlowSampler::phase(std::size_t seg) const noexcept {
  const std::uint64_t bits = splitmix64(spec_.seed ^ splitmix64(static_cast<std::uint64_t>(seg)));
  return kTwoPi * static_cast<double>(bits >> 11) * 0x1.0p-53;
}

VectorField FlowSampler::velocity(std::size_t seg) const {
  if (stationary()) return fixed_;
  const int d = grid_.dim();
  const int axis = static_cast<int>(seg % static_cast<std::size_t>(d));
  return shear(grid_, axis, (axis + 1) % d, spec_.wavenumber, phase(seg));
}

FlowSampler make_flow(const FlowSpec& spec, const TorusGrid& grid) { return FlowSampler(spec, grid); }

double divergence_check(const VectorField& u) {
  if (u.empty()) return 0.0;
  const TorusGrid& g = u.front().grid;
  const auto& mt = modes(g);
  SpectralField div(g);
  for (int j = 0; j < g.dim(); ++j) {
    const SpectralField c = forward_transform(u[static_cast<std::size_t>(j)]);
    kernels::sub_divergence(div.coeffs, c.coeffs, mt.k[static_cast<std::size_t>(j)]);
  }
  for (std::size_t i = 0; i < div.coeffs.size(); ++i) {
    if (mt.nyquist[i]) div.coeffs[i] = Complex{};
  }
  return kernels::max_abs(inverse_transform(div).values);
}

}  // namespace ksmix
