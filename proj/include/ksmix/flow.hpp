#pragma once

// Incompressible velocity fields u(x) (piecewise constant in time for the
// alternating family). Fields are normalized to max_x |u(x)| = 1; the
// amplitude A is carried separately.

#include <cstdint>
#include <limits>
#include <string>

#include "ksmix/torus.hpp"

namespace ksmix {

enum class FlowKind { Zero, Shear, RelaxedLinear, AlternatingShear, FromFile };

std::string to_string(FlowKind kind);
/// Accepts "zero", "shear", "relaxed-linear", "alternating-shear", "from-file".
FlowKind parse_flow_kind(const std::string& name);

struct FlowSpec {
  FlowKind kind = FlowKind::Zero;
  double amplitude = 0.0;                    // A >= 0
  int wavenumber = 1;                        // shear profile sin(m x)
  double gamma = 0.6180339887498949;         // relaxed-linear frequency ratio
  double half_period = 0.5;                  // alternating-shear switching time
  std::uint64_t seed = 0;                    // alternating-shear phase sequence
  std::string path;                          // from-file velocity snapshot
};

class FlowSampler {
 public:
  FlowSampler(FlowSpec spec, const TorusGrid& grid);

  const FlowSpec& spec() const noexcept { return spec_; }
  const TorusGrid& grid() const noexcept { return grid_; }
  double amplitude() const noexcept { return spec_.amplitude; }
  bool stationary() const noexcept { return spec_.kind != FlowKind::AlternatingShear; }

  /// Index of the constant-in-time segment containing t (0 for stationary flows).
  /// Times within 1e-12 of a switch belong to the following segment.
  std::size_t segment(double t) const noexcept;
  /// End time of a segment; +infinity for stationary flows.
  double segment_end(std::size_t seg) const noexcept;
  /// Normalized velocity on a segment.
  VectorField velocity(std::size_t seg) const;
  VectorField operator()(double t) const { return velocity(segment(t)); }

  /// Per-interval phase of the alternating family, uniform in [0, 2pi).
  double phase(std::size_t seg) const noexcept;

 private:
  FlowSpec spec_;
  TorusGrid grid_;
  VectorField fixed_;  // stationary kinds
};

/// Builds and validates a sampler. Throws std::invalid_argument for an
/// unknown kind or a from-file field that is not divergence-free.
FlowSampler make_flow(const FlowSpec& spec, const TorusGrid& grid);

/// max_x |div u| by spectral differentiation.
double divergence_check(const VectorField& u);

}  // namespace ksmix
