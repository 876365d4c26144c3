#pragma once

// Pseudospectral right-hand side and integrating-factor RK4 stepping for
//
//   d_t rho + A u.grad rho + (-Delta)^{alpha/2} rho + div(rho B(rho)) = 0.
//
// The linear multiplier sigma(k) is integrated exactly through exp(-sigma dt);
// advection and the aggregation flux are advanced by the classical four-stage
// rule on the transformed variable. Products are dealiased with the 2/3 rule.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ksmix/attract.hpp"
#include "ksmix/config.hpp"
#include "ksmix/diagnostics.hpp"
#include "ksmix/flow.hpp"
#include "ksmix/torus.hpp"

namespace ksmix {

struct Physics {
  double alpha = 0.0;
  double beta = 2.5;
  bool nonlinear = true;
  bool dissipation = true;
};

struct StepperState {
  explicit StepperState(SpectralField rho) : rho_hat(std::move(rho)) {}

  double t = 0.0;
  SpectralField rho_hat;
  double dt = 0.0;
  std::uint64_t steps = 0;
};

struct StepControl {
  double c_cfl = 0.4;
  double dt_max = 0.01;
};

/// c_cfl (2pi/n) / (A max|u| + max|B| + 1e-12), capped at dt_max.
double cfl_dt(double amplitude, double max_speed, double max_drift, const TorusGrid& grid,
              double c_cfl, double dt_max);
double cfl_dt(const VectorField& u, double amplitude, const VectorField& drift, const TorusGrid& grid,
              double c_cfl, double dt_max);

/// div(rho B(rho)) with dealiased products; exactly mean-free.
ScalarField nonlinear_term(const ScalarField& rho, const KernelSpec& spec);
/// A sum_j u_j d_j rho with dealiased products.
ScalarField advection_term(const ScalarField& rho, const VectorField& u, double amplitude);

class Integrator {
 public:
  Integrator(const TorusGrid& grid, const Physics& physics, FlowSampler flow);

  const TorusGrid& grid() const noexcept { return grid_; }
  const FlowSampler& flow() const noexcept { return flow_; }

  /// Nonlinear and advective tendency -(A u.grad rho + div(rho B)) in spectral
  /// space, dealiased, with the flow of the segment containing t.
  SpectralField tendency(const SpectralField& rho_hat, double t);

  /// One step of size state.dt on the flow segment containing state.t.
  void step(StepperState& state);

  /// One CFL-limited step: dt is chosen from the drift of the current state,
  /// then clipped so the step ends no later than t_end or the next flow switch.
  void step_adaptive(StepperState& state, const StepControl& control, double t_end);

  /// max_x |B| seen by the first stage of the most recent step.
  double last_drift_max() const noexcept { return drift_max_; }

 private:
  void evaluate(std::span<const Complex> rho_hat, std::size_t segment, std::span<Complex> out);
  void finish_step(StepperState& state, std::size_t segment, double dt);
  void prepare_segment(std::size_t segment);
  void prepare_decay(double dt);
  bool mt_zero(std::size_t i) const noexcept;

  TorusGrid grid_;
  Physics physics_;
  FlowSampler flow_;
  const ModeTable& modes_;
  double drift_order_ = 0.0;

  AlignedVector<double> sigma_;      // linear multiplier
  AlignedVector<double> drift_gain_; // |k|^{-(d+2-beta)} (0 at k = 0 and Nyquist)
  AlignedVector<double> decay_full_, decay_half_;
  double decay_dt_ = -1.0;

  std::optional<std::size_t> segment_;
  VectorField velocity_;
  std::vector<bool> velocity_active_;
  double speed_max_ = 0.0;

  // scratch
  AlignedVector<Complex> hat_dealiased_, hat_work_, k1_, k2_, k3_, k4_, stage_;
  AlignedVector<double> rho_phys_, flux_;
  std::vector<AlignedVector<double>> drift_;
  double drift_max_ = 0.0;
};

enum class Classification { ResolvedHorizon, BlowupSuspected, UnderResolved, NanAbort };

std::string to_string(Classification c);

inline constexpr double kBlowupFactor = 50.0;
inline constexpr double kTailThreshold = 1e-3;

struct SlopeCheck {
  bool evaluated = false;
  double C0 = 0.0;
  /// max over steps of (forward difference of max rho) - (bound at either end of the step)
  double worst_margin = 0.0;
  /// 10 x the sampling error of the grid maximum: |grad rho| at the sampled
  /// maximum times the largest transport speed A + max|B|, maximized over steps.
  double tolerance = 0.0;
  double worst_time = 0.0;
  std::size_t checked_steps = 0;
  bool passed() const { return !evaluated || worst_margin <= tolerance; }
};

struct OutcomeReport {
  Classification classification = Classification::ResolvedHorizon;
  double t_final = 0.0;
  double horizon = 0.0;
  double initial_linf = 0.0;
  double peak_linf = 0.0;
  double tail_fraction = 0.0;      // at stop
  double max_tail_fraction = 0.0;  // over the trajectory
  double min_value = 0.0;          // min over the trajectory of min_x rho
  std::uint64_t steps = 0;
  SlopeCheck slope;
};

struct RunResult {
  OutcomeReport report;
  std::vector<DiagnosticsRecord> records;
  std::optional<ScalarField> final_field;
};

using RecordSink = std::function<void(const DiagnosticsRecord&)>;
/// Receives the density at every record time.
using FieldSink = std::function<void(const ScalarField&)>;

struct RunSetup {
  Physics physics;
  FlowSpec flow;
  double horizon = 1.0;
  StepControl control;
  int record_every = 10;
  int diag_radius = 2;
  /// Stop early once the tail fraction exceeds this (classification
  /// under-resolved); <= 0 disables the early stop.
  double abort_tail_fraction = 0.0;
};

/// Integrates rho0 to the horizon or an early stop and classifies the outcome.
RunResult simulate(const ScalarField& rho0, const RunSetup& setup, const RecordSink& sink = {},
                   const FieldSink& field_sink = {});

RunSetup setup_from_config(const SimConfig& config);
RunResult run(const SimConfig& config, const RecordSink& sink = {});

/// Pure transport: dissipation and nonlinearity disabled.
RunResult transport_run(const FlowSpec& flow, const ScalarField& phi0, double horizon,
                        const StepControl& control, int record_every, int diag_radius,
                        const RecordSink& sink = {});

}  // namespace ksmix
