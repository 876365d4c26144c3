#include "ksmix/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ksmix/kernels.hpp"

namespace ksmix {
namespace {

void dealias(SpectralField& f) {
  const auto& mt = modes(f.grid);
  kernels::mask_copy(f.coeffs, f.coeffs, mt.dealias);
}

ScalarField dealiased_copy(const ScalarField& f) {
  SpectralField h = forward_transform(f);
  dealias(h);
  return inverse_transform(h);
}

double vector_max_norm(const VectorField& v) {
  if (v.empty()) return 0.0;
  std::vector<std::span<const double>> parts;
  for (const auto& c : v) parts.emplace_back(c.values);
  return kernels::max_norm(parts);
}

// grad rho at one grid point, evaluated directly from the coefficients.
std::array<double, 3> gradient_at(const SpectralField& rho_hat, std::size_t index) {
  const TorusGrid& g = rho_hat.grid;
  const auto& mt = modes(g);
  const auto x = g.point(index);
  const int n = g.n();
  const int d = g.dim();
  std::array<std::vector<Complex>, 3> phase;
  for (int j = 0; j < d; ++j) {
    phase[j].resize(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      const int k = m < n / 2 ? m : m - n;
      phase[j][m] = std::polar(1.0, k * x[j]);
    }
  }
  std::array<double, 3> grad{};
  for (std::size_t i = 0; i < rho_hat.coeffs.size(); ++i) {
    if (mt.nyquist[i] || mt.k2[i] == 0.0) continue;
    Complex e{1.0, 0.0};
    for (int j = 0; j < d; ++j) {
      const int k = static_cast<int>(mt.k[j][i]);
      e *= phase[j][static_cast<std::size_t>((k % n + n) % n)];
    }
    const Complex c = rho_hat.coeffs[i] * e;
    // i k c + conj for the mirrored half; weight carries the multiplicity.
    for (int j = 0; j < d; ++j) grad[j] += -mt.weight[i] * mt.k[j][i] * c.imag();
  }
  return grad;
}

double norm3(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace

double cfl_dt(double amplitude, double max_speed, double max_drift, const TorusGrid& grid,
              double c_cfl, double dt_max) {
  const double rate = amplitude * max_speed + max_drift + 1e-12;
  return std::min(dt_max, c_cfl * grid.spacing() / rate);
}

double cfl_dt(const VectorField& u, double amplitude, const VectorField& drift, const TorusGrid& grid,
              double c_cfl, double dt_max) {
  return cfl_dt(amplitude, vector_max_norm(u), vector_max_norm(drift), grid, c_cfl, dt_max);
}

ScalarField nonlinear_term(const ScalarField& rho, const KernelSpec& spec) {
  const TorusGrid& g = rho.grid;
  if (g.dim() != spec.dim()) {
    throw std::invalid_argument("nonlinear_term: kernel dimension does not match grid");
  }
  const auto& mt = modes(g);
  SpectralField rho_hat = forward_transform(rho);
  dealias(rho_hat);
  const ScalarField r = inverse_transform(rho_hat);
  const auto drift = attract_coefficients(rho_hat, spec.drift_order());
  SpectralField out(g);
  for (int j = 0; j < g.dim(); ++j) {
    const ScalarField b = inverse_transform(drift[j]);
    ScalarField prod(g);
    kernels::flux(prod.values, r.values, b.values, {}, 0.0);
    SpectralField p = forward_transform(prod);
    dealias(p);
    kernels::sub_divergence(out.coeffs, p.coeffs, mt.k[j]);
  }
  for (auto& c : out.coeffs) c = -c;
  return inverse_transform(out);
}

ScalarField advection_term(const ScalarField& rho, const VectorField& u, double amplitude) {
  const TorusGrid& g = rho.grid;
  if (static_cast<int>(u.size()) != g.dim()) {
    throw std::invalid_argument("advection_term: velocity has the wrong number of components");
  }
  ScalarField r = dealiased_copy(rho);
  ScalarField total(g);
  for (int j = 0; j < g.dim(); ++j) {
    const ScalarField dj = derivative(r, j);
    const ScalarField uj = dealiased_copy(u[j]);
    for (std::size_t i = 0; i < g.size(); ++i) total.values[i] += amplitude * uj.values[i] * dj.values[i];
  }
  return dealiased_copy(total);
}

// ---------------------------------------------------------------------------

Integrator::Integrator(const TorusGrid& grid, const Physics& physics, FlowSampler flow)
    : grid_(grid), physics_(physics), flow_(std::move(flow)), modes_(modes(grid)) {
  if (!(flow_.grid() == grid_)) throw std::invalid_argument("Integrator: flow grid does not match");
  const std::size_t ns = grid_.spectral_size();
  sigma_.assign(ns, 0.0);
  if (physics_.dissipation) {
    const Multiplier m = fractional_laplacian_symbol(physics_.alpha);
    for (std::size_t i = 0; i < ns; ++i) {
      if (mt_zero(i)) {
        sigma_[i] = m.zero_mode.real();
      } else {
        sigma_[i] = physics_.alpha == 0.0 ? 1.0 : std::pow(modes_.k2[i], 0.5 * physics_.alpha);
      }
    }
  }
  drift_gain_.assign(ns, 0.0);
  if (physics_.nonlinear) {
    const KernelSpec spec(grid_.dim(), physics_.beta);
    drift_order_ = spec.drift_order();
    for (std::size_t i = 0; i < ns; ++i) {
      if (modes_.k2[i] > 0.0 && !modes_.nyquist[i]) {
        drift_gain_[i] = std::pow(modes_.k2[i], -0.5 * drift_order_);
      }
    }
    drift_.assign(static_cast<std::size_t>(grid_.dim()), AlignedVector<double>(grid_.size()));
  }
  for (auto* v : {&hat_dealiased_, &hat_work_, &k1_, &k2_, &k3_, &k4_, &stage_}) v->assign(ns, Complex{});
  rho_phys_.assign(grid_.size(), 0.0);
  flux_.assign(grid_.size(), 0.0);
}

bool Integrator::mt_zero(std::size_t i) const noexcept { return modes_.k2[i] == 0.0; }

void Integrator::prepare_segment(std::size_t segment) {
  if (segment_ && *segment_ == segment) return;
  velocity_.clear();
  velocity_active_.assign(static_cast<std::size_t>(grid_.dim()), false);
  speed_max_ = 0.0;
  if (flow_.amplitude() != 0.0 && flow_.spec().kind != FlowKind::Zero) {
    velocity_ = flow_.velocity(segment);
    for (auto& c : velocity_) c = dealiased_copy(c);
    for (int j = 0; j < grid_.dim(); ++j) {
      velocity_active_[j] = kernels::max_abs(velocity_[j].values) > 0.0;
    }
    speed_max_ = vector_max_norm(velocity_);
  }
  segment_ = segment;
}

void Integrator::prepare_decay(double dt) {
  if (dt == decay_dt_) return;
  const std::size_t ns = grid_.spectral_size();
  decay_full_.resize(ns);
  decay_half_.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    decay_full_[i] = std::exp(-sigma_[i] * dt);
    decay_half_[i] = std::exp(-0.5 * sigma_[i] * dt);
  }
  decay_dt_ = dt;
}

void Integrator::evaluate(std::span<const Complex> rho_hat, std::size_t segment, std::span<Complex> out) {
  prepare_segment(segment);
  std::fill(out.begin(), out.end(), Complex{});
  const bool nonlinear = physics_.nonlinear;
  bool any_velocity = false;
  for (bool a : velocity_active_) any_velocity = any_velocity || a;
  if (!nonlinear && !any_velocity) {
    drift_max_ = 0.0;
    return;
  }

  kernels::mask_copy(hat_dealiased_, rho_hat, modes_.dealias);
  std::copy(hat_dealiased_.begin(), hat_dealiased_.end(), hat_work_.begin());
  inverse_transform(grid_, hat_work_, rho_phys_);

  if (nonlinear) {
    for (int j = 0; j < grid_.dim(); ++j) {
      kernels::scale_ik(hat_work_, hat_dealiased_, modes_.k[j], drift_gain_);
      inverse_transform(grid_, hat_work_, drift_[j]);
    }
    std::vector<std::span<const double>> parts(drift_.begin(), drift_.end());
    drift_max_ = kernels::max_norm(parts);
  } else {
    drift_max_ = 0.0;
  }

  const double amplitude = flow_.amplitude();
  for (int j = 0; j < grid_.dim(); ++j) {
    const bool moving = velocity_active_[j];
    if (!nonlinear && !moving) continue;
    std::span<const double> drift = nonlinear ? std::span<const double>(drift_[j]) : std::span<const double>{};
    std::span<const double> vel = moving ? std::span<const double>(velocity_[j].values) : std::span<const double>{};
    kernels::flux(flux_, rho_phys_, drift, vel, amplitude);
    forward_transform(grid_, flux_, hat_work_);
    kernels::mask_copy(hat_work_, hat_work_, modes_.dealias);
    kernels::sub_divergence(out, hat_work_, modes_.k[j]);
  }
}

SpectralField Integrator::tendency(const SpectralField& rho_hat, double t) {
  if (!(rho_hat.grid == grid_)) throw std::invalid_argument("tendency: grid mismatch");
  SpectralField out(grid_);
  evaluate(rho_hat.coeffs, flow_.segment(t), out.coeffs);
  return out;
}

void Integrator::finish_step(StepperState& state, std::size_t segment, double dt) {
  prepare_decay(dt);
  auto& rho = state.rho_hat.coeffs;
  const double h = dt;
  kernels::decay_axpy(stage_, decay_half_, rho, 0.5 * h, k1_);
  evaluate(stage_, segment, k2_);
  kernels::decay_combine(stage_, decay_half_, rho, 0.5 * h, {}, k2_);
  evaluate(stage_, segment, k3_);
  kernels::decay_combine(stage_, decay_full_, rho, h, decay_half_, k3_);
  evaluate(stage_, segment, k4_);
  kernels::rk4_finish(rho, decay_full_, decay_half_, rho, h, k1_, k2_, k3_, k4_);
  state.t += dt;
  state.dt = dt;
  ++state.steps;
}

void Integrator::step(StepperState& state) {
  if (!(state.dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const std::size_t seg = flow_.segment(state.t);
  evaluate(state.rho_hat.coeffs, seg, k1_);
  finish_step(state, seg, state.dt);
}

void Integrator::step_adaptive(StepperState& state, const StepControl& control, double t_end) {
  const std::size_t seg = flow_.segment(state.t);
  evaluate(state.rho_hat.coeffs, seg, k1_);
  double dt = cfl_dt(flow_.amplitude(), speed_max_, drift_max_, grid_, control.c_cfl, control.dt_max);
  const double end = std::min(t_end, flow_.segment_end(seg));
  bool land = false;
  if (state.t + dt >= end) {
    dt = end - state.t;
    land = true;
  }
  finish_step(state, seg, dt);
  if (land) state.t = end;
}

// ---------------------------------------------------------------------------

std::string to_string(Classification c) {
  switch (c) {
    case Classification::ResolvedHorizon: return "resolved-horizon";
    case Classification::BlowupSuspected: return "blowup-suspected";
    case Classification::UnderResolved: return "under-resolved";
    case Classification::NanAbort: return "nan-abort";
  }
  return "unknown";
}

namespace {

struct PeakSample {
  double value = 0.0;
  double tail = 0.0;
  std::size_t index = 0;
};

double slope_bound(double x, double C0) { return -x + C0 * x * x; }

}  // namespace

RunResult simulate(const ScalarField& rho0, const RunSetup& setup, const RecordSink& sink,
                   const FieldSink& field_sink) {
  const TorusGrid grid = rho0.grid;
  if (!rho0.all_finite()) throw std::invalid_argument("simulate: initial data is not finite");
  if (!(setup.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
  if (setup.record_every < 1) throw std::invalid_argument("simulate: record interval must be >= 1");

  Integrator integrator(grid, setup.physics, make_flow(setup.flow, grid));
  StepperState state(forward_transform(rho0));
  const double lap_exponent = setup.physics.beta - grid.dim();

  RunResult result;
  OutcomeReport& rep = result.report;
  rep.horizon = setup.horizon;
  rep.initial_linf = kernels::max_abs(rho0.values);
  rep.peak_linf = rep.initial_linf;
  rep.min_value = kernels::min_value(rho0.values);

  auto emit = [&](const DiagnosticsRecord& r, const ScalarField& field) {
    result.records.push_back(r);
    if (sink) sink(r);
    if (field_sink) field_sink(field);
  };

  DiagnosticsRecord first = make_record(0.0, state.rho_hat, rho0, lap_exponent, setup.diag_radius);
  rep.tail_fraction = first.tail_fraction;
  rep.max_tail_fraction = first.tail_fraction;
  emit(first, rho0);

  SlopeCheck& slope = rep.slope;
  const bool check_slope =
      setup.physics.nonlinear && setup.physics.dissipation && setup.physics.alpha == 0.0;
  if (check_slope) {
    slope.evaluated = true;
    slope.C0 = kernel_l1_norms(KernelSpec(grid.dim(), setup.physics.beta), grid).lap_l1;
    slope.worst_margin = -std::numeric_limits<double>::infinity();
  }
  double slope_error = 0.0;

  PeakSample prev{first.max_value, first.tail_fraction, first.max_index};
  double prev_transport = 0.0;
  if (check_slope) {
    const double speed = setup.flow.amplitude;
    prev_transport = norm3(gradient_at(state.rho_hat, prev.index)) *
                     (speed + vector_max_norm(attract_field(rho0, KernelSpec(grid.dim(), setup.physics.beta))));
  }

  ScalarField phys(grid);
  AlignedVector<Complex> work(grid.spectral_size());
  bool recorded_last = true;
  bool stopped = false;
  const double t_end = setup.horizon;
  const double eps = 1e-12 * std::max(1.0, t_end);

  while (state.t < t_end - eps) {
    const double t_prev = state.t;
    integrator.step_adaptive(state, setup.control, t_end);
    const double dt = state.t - t_prev;

    std::copy(state.rho_hat.coeffs.begin(), state.rho_hat.coeffs.end(), work.begin());
    inverse_transform(grid, work, phys.values);
    if (!phys.all_finite()) {
      rep.classification = Classification::NanAbort;
      stopped = true;
      break;
    }

    PeakSample cur;
    cur.index = kernels::argmax(phys.values);
    cur.value = phys.values[cur.index];
    cur.tail = tail_fraction(state.rho_hat);
    const double linf = kernels::max_abs(phys.values);
    rep.peak_linf = std::max(rep.peak_linf, linf);
    rep.min_value = std::min(rep.min_value, kernels::min_value(phys.values));
    rep.tail_fraction = cur.tail;
    rep.max_tail_fraction = std::max(rep.max_tail_fraction, cur.tail);

    if (check_slope) {
      const double transport = norm3(gradient_at(state.rho_hat, cur.index)) *
                               (setup.flow.amplitude + integrator.last_drift_max());
      if (prev.tail <= kTailThreshold && cur.tail <= kTailThreshold && dt > 0.0) {
        // The forward difference is a time average of the derivative, so it is
        // compared against the larger bound at the two ends of the step.
        const double diff = (cur.value - prev.value) / dt;
        const double bound = std::max(slope_bound(prev.value, slope.C0), slope_bound(cur.value, slope.C0));
        const double margin = diff - bound;
        slope_error = std::max(slope_error, std::max(transport, prev_transport));
        if (margin > slope.worst_margin) {
          slope.worst_margin = margin;
          slope.worst_time = t_prev;
        }
        ++slope.checked_steps;
      }
      prev_transport = transport;
    }
    prev = cur;

    recorded_last = false;
    if (state.steps % static_cast<std::uint64_t>(setup.record_every) == 0) {
      emit(make_record(state.t, state.rho_hat, phys, lap_exponent, setup.diag_radius), phys);
      recorded_last = true;
    }

    if (linf >= kBlowupFactor * rep.initial_linf && cur.tail > kTailThreshold) {
      rep.classification = Classification::BlowupSuspected;
      stopped = true;
      break;
    }
    if (setup.abort_tail_fraction > 0.0 && cur.tail > setup.abort_tail_fraction) {
      rep.classification = Classification::UnderResolved;
      stopped = true;
      break;
    }
    if (dt < 1e-12 * std::max(1.0, t_end)) {
      rep.classification = Classification::UnderResolved;
      stopped = true;
      break;
    }
  }

  rep.t_final = state.t;
  rep.steps = state.steps;
  if (!stopped) {
    rep.classification = rep.max_tail_fraction > kTailThreshold ? Classification::UnderResolved
                                                                 : Classification::ResolvedHorizon;
  }
  if (check_slope) {
    slope.tolerance = 10.0 * slope_error;
    if (slope.checked_steps == 0) slope.worst_margin = 0.0;
  }

  if (rep.classification != Classification::NanAbort) {
    if (!recorded_last) emit(make_record(state.t, state.rho_hat, phys, lap_exponent, setup.diag_radius), phys);
    result.final_field = phys;
  }
  return result;
}

RunSetup setup_from_config(const SimConfig& config) {
  RunSetup s;
  s.physics.alpha = config.alpha;
  s.physics.beta = config.beta;
  s.physics.nonlinear = !config.disable_nonlinear;
  s.physics.dissipation = !config.disable_dissipation;
  s.flow = config.flow;
  s.horizon = config.horizon;
  s.control.c_cfl = config.c_cfl;
  s.control.dt_max = config.dt_max;
  s.record_every = config.output.every;
  s.diag_radius = config.diag_radius;
  return s;
}

RunResult run(const SimConfig& config, const RecordSink& sink) {
  validate(config);
  const TorusGrid grid = config.grid();
  return simulate(build_initial_field(config.ic, grid), setup_from_config(config), sink);
}

RunResult transport_run(const FlowSpec& flow, const ScalarField& phi0, double horizon,
                        const StepControl& control, int record_every, int diag_radius,
                        const RecordSink& sink) {
  RunSetup s;
  s.physics.nonlinear = false;
  s.physics.dissipation = false;
  s.physics.beta = phi0.grid.dim() == 3 ? 2.5 : 2.0;
  s.flow = flow;
  s.horizon = horizon;
  s.control = control;
  s.record_every = record_every;
  s.diag_radius = diag_radius;
  return simulate(phi0, s, sink);
}

}  // namespace ksmix
