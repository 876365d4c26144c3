#include "ksmix/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ksmix/dynamics.hpp"
#include "ksmix/kernels.hpp"
#include "ksmix/log.hpp"

namespace ksmix {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool effectively_constant(double l2_meanfree, double mean) {
  return l2_meanfree == 0.0 || l2_meanfree <= 1e-13 * std::abs(mean);
}

double grad_sup(const SpectralField& rho_hat) {
  const auto& mt = modes(rho_hat.grid);
  SpectralField work(rho_hat.grid);
  AlignedVector<double> out(rho_hat.grid.size());
  double best = 0.0;
  for (int j = 0; j < rho_hat.grid.dim(); ++j) {
    kernels::scale_ik(work.coeffs, rho_hat.coeffs, mt.k[j], {});
    for (std::size_t i = 0; i < work.coeffs.size(); ++i) {
      if (mt.nyquist[i]) work.coeffs[i] = Complex{};
    }
    inverse_transform(rho_hat.grid, work.coeffs, out);
    best = std::max(best, kernels::max_abs(out));
  }
  return best;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) total += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return total;
}

}  // namespace

DiagnosticsRecord make_record(double t, const SpectralField& rho_hat, const ScalarField& rho,
                              double lap_exponent, int radius) {
  DiagnosticsRecord r;
  r.t = t;
  r.mean = rho_hat.coeffs[0].real();
  r.l1 = lp_norm(rho, 1.0);
  r.l2 = lp_norm(rho, 2.0);
  r.linf = kernels::max_abs(rho.values);
  r.min = kernels::min_value(rho.values);
  r.l2_meanfree = sobolev_norm(rho_hat, 0.0);
  r.neg_sobolev = sobolev_norm(rho_hat, lap_exponent);
  if (effectively_constant(r.l2_meanfree, r.mean)) {
    r.phi = kNaN;
    r.low_mode_fraction = kNaN;
  } else {
    const double e2 = r.l2_meanfree * r.l2_meanfree;
    r.phi = r.neg_sobolev * r.neg_sobolev / e2;
    const double low = low_mode_energy(rho_hat, radius) - r.mean * r.mean;
    r.low_mode_fraction = std::clamp(low / e2, 0.0, 1.0);
  }
  r.tail_fraction = tail_fraction(rho_hat);
  r.grad_sup = grad_sup(rho_hat);
  r.max_index = kernels::argmax(rho.values);
  r.max_value = rho.values[r.max_index];
  return r;
}

DiagnosticsRecord make_record(double t, const ScalarField& rho, double lap_exponent, int radius) {
  return make_record(t, forward_transform(rho), rho, lap_exponent, radius);
}

std::string format_record(const DiagnosticsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t,
                r.mean, r.l1, r.l2, r.linf, r.min, r.l2_meanfree, r.neg_sobolev, r.phi,
                r.low_mode_fraction, r.tail_fraction, r.grad_sup);
  return buf;
}

std::optional<double> phi(const SpectralField& rho_hat, double lap_exponent) {
  const double mean = rho_hat.coeffs[0].real();
  const double e = sobolev_norm(rho_hat, 0.0);
  if (effectively_constant(e, mean)) return std::nullopt;
  const double s = sobolev_norm(rho_hat, lap_exponent);
  return s * s / (e * e);
}

std::optional<double> phi(const ScalarField& rho, const KernelSpec& spec) {
  if (rho.grid.dim() != spec.dim()) throw std::invalid_argument("phi: kernel dimension does not match grid");
  return phi(forward_transform(rho), spec.lap_exponent());
}

double phi_threshold(int radius, double lap_exponent) {
  if (radius < 1) throw std::invalid_argument("phi_threshold: N must be >= 1");
  return 2.0 * std::pow(static_cast<double>(radius) * radius, lap_exponent);
}

double phi_threshold(int radius, const KernelSpec& spec) {
  return phi_threshold(radius, spec.lap_exponent());
}

double flagged_time_fraction(const std::vector<DiagnosticsRecord>& records, double threshold) {
  if (records.size() < 2) {
    if (records.empty()) return 0.0;
    return std::isfinite(records[0].phi) && records[0].phi >= threshold ? 1.0 : 0.0;
  }
  std::vector<double> t, flag;
  for (const auto& r : records) {
    t.push_back(r.t);
    flag.push_back(std::isfinite(r.phi) && r.phi >= threshold ? 1.0 : 0.0);
  }
  const double span = t.back() - t.front();
  return span > 0.0 ? trapezoid(t, flag) / span : flag.front();
}

double mean_phi(const std::vector<DiagnosticsRecord>& records) {
  double total = 0.0;
  double span = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    if (!std::isfinite(a.phi) || !std::isfinite(b.phi)) continue;
    const double h = b.t - a.t;
    total += 0.5 * h * (a.phi + b.phi);
    span += h;
  }
  if (span > 0.0) return total / span;
  for (const auto& r : records) {
    if (std::isfinite(r.phi)) return r.phi;
  }
  return kNaN;
}

namespace {

ScalarField normalized_meanfree(const ScalarField& f, bool& changed) {
  SpectralField h = forward_transform(f);
  const double mean = h.coeffs[0].real();
  const double norm = sobolev_norm(h, 0.0);
  if (norm == 0.0) throw std::invalid_argument("rage_average: initial field is constant");
  changed = std::abs(mean) > 1e-12 * norm || std::abs(norm - 1.0) > 1e-12;
  if (!changed) return f;
  h.coeffs[0] = Complex{};
  for (auto& c : h.coeffs) c /= norm;
  return inverse_transform(h);
}

}  // namespace

RageResult rage_average(const FlowSampler& flow, const ScalarField& phi0, int radius, double horizon,
                        const TransportControl& control) {
  if (!(flow.grid() == phi0.grid)) throw std::invalid_argument("rage_average: grid mismatch");
  if (radius < 1) throw std::invalid_argument("rage_average: N must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("rage_average: T must be positive");
  RageResult out;
  const ScalarField f = normalized_meanfree(phi0, out.normalized);
  if (out.normalized) warn("rage_average: initial field rescaled to mean zero and unit norm");

  Physics physics;
  physics.nonlinear = false;
  physics.dissipation = false;
  Integrator integrator(f.grid, physics, flow);
  StepperState state(forward_transform(f));
  std::vector<double> t{0.0};
  std::vector<double> e{low_mode_energy(state.rho_hat, radius)};
  out.initial = e.front();
  const StepControl sc{control.c_cfl, control.dt_max};
  while (state.t < horizon - 1e-12 * std::max(1.0, horizon)) {
    integrator.step_adaptive(state, sc, horizon);
    t.push_back(state.t);
    e.push_back(low_mode_energy(state.rho_hat, radius));
  }
  out.average = trapezoid(t, e) / t.back();
  out.final_energy = std::pow(sobolev_norm(state.rho_hat, 0.0), 2);
  out.samples = t.size();
  return out;
}

SemigroupReport semigroup_bound_check(const FlowSampler& flow, const ScalarField& f, int radius,
                                      const std::vector<double>& t_grid,
                                      const TransportControl& control) {
  if (!(flow.grid() == f.grid)) throw std::invalid_argument("semigroup_bound_check: grid mismatch");
  if (radius < 1) throw std::invalid_argument("semigroup_bound_check: N must be >= 1");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || (!t_grid.empty() && t_grid.front() < 0.0)) {
    throw std::invalid_argument("semigroup_bound_check: times must be sorted and nonnegative");
  }
  Physics physics;
  physics.nonlinear = false;
  physics.dissipation = false;
  Integrator integrator(f.grid, physics, flow);
  StepperState state(forward_transform(f));
  const double p0 = std::sqrt(low_mode_energy(state.rho_hat, radius));
  if (p0 <= 1e-13 * std::sqrt(kernels::weighted_energy(state.rho_hat.coeffs, modes(f.grid).weight))) {
    throw std::invalid_argument("semigroup_bound_check: P_N f is zero");
  }
  const double n2 = static_cast<double>(radius) * radius;
  const StepControl sc{control.c_cfl, control.dt_max};

  SemigroupReport rep;
  for (double target : t_grid) {
    while (state.t < target - 1e-12 * std::max(1.0, target)) integrator.step_adaptive(state, sc, target);
    const double pt = std::sqrt(low_mode_energy(state.rho_hat, radius));
    const double ratio = pt / (std::exp(n2 * target) * p0);
    rep.points.push_back({target, ratio});
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

MeanDecay mean_decay_residual(const std::vector<DiagnosticsRecord>& records, double alpha) {
  MeanDecay out;
  if (alpha != 0.0 || records.empty()) return out;
  out.applicable = true;
  const double m0 = records.front().mean;
  for (const auto& r : records) {
    out.residual = std::max(out.residual, std::abs(r.mean - std::exp(-(r.t - records.front().t)) * m0));
  }
  return out;
}

double gn_exponent(const KernelSpec& spec) {
  const double d = spec.dim();
  const double b = spec.beta();
  return (2.0 * d - b) / (3.0 * d - 2.0 * b);
}

double gn_ratio(const ScalarField& f, const KernelSpec& spec) {
  if (f.grid.dim() != spec.dim()) throw std::invalid_argument("gn_ratio: kernel dimension does not match grid");
  SpectralField h = forward_transform(f);
  h.coeffs[0] = Complex{};
  const ScalarField g = inverse_transform(h);
  const double sup = kernels::max_abs(g.values);
  if (sup == 0.0) throw std::invalid_argument("gn_ratio: field is constant");
  const double lap = spec.lap_exponent();
  const ScalarField half = inverse_transform(apply_multiplier(h, riesz_symbol(0.5 * lap)));
  const ScalarField full = inverse_transform(apply_multiplier(h, riesz_symbol(lap)));
  const double theta = gn_exponent(spec);
  const double denom = std::pow(lp_norm(full, 2.0), 1.0 - theta) * std::pow(sup, theta);
  return kernels::max_abs(half.values) / denom;
}

Certificate certificate(const ScalarField& rho0, const KernelSpec& spec, double C0) {
  if (rho0.grid.dim() != spec.dim()) {
    throw std::invalid_argument("certificate: kernel dimension does not match grid");
  }
  const double peak = kernels::max_abs(rho0.values);
  if (kernels::min_value(rho0.values) < -1e-12 * std::max(1.0, peak)) {
    throw std::invalid_argument("certificate: initial density must be nonnegative");
  }
  if (!(C0 > 0.0)) throw std::invalid_argument("certificate: C0 must be positive");
  Certificate c;
  const SpectralField h = forward_transform(rho0);
  c.C0 = C0;
  c.C_inf = peak;
  c.mean0 = h.coeffs[0].real();
  c.B0 = std::sqrt(kernels::weighted_energy(h.coeffs, modes(rho0.grid).weight));
  c.tau0 = 1.0 / (2.0 * c.C0 * c.C_inf);
  c.tau1 = std::min(c.tau0, 2.0 * std::log(2.0) / (c.C_inf + c.mean0));
  c.theta = gn_exponent(spec);
  return c;
}

Certificate certificate(const ScalarField& rho0, const KernelSpec& spec) {
  return certificate(rho0, spec, kernel_l1_norms(spec, rho0.grid).lap_l1);
}

GrowthReport grad_sup_track(const std::vector<DiagnosticsRecord>& records, double amplitude) {
  GrowthReport g;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const auto& r : records) {
    if (!(r.grad_sup > 0.0) || !std::isfinite(r.grad_sup)) continue;
    const double y = std::log(r.grad_sup);
    st += r.t;
    sy += y;
    stt += r.t * r.t;
    sty += r.t * y;
    ++g.samples;
  }
  const double n = static_cast<double>(g.samples);
  const double det = n * stt - st * st;
  if (g.samples >= 2 && det > 0.0) {
    g.rate = (n * sty - st * sy) / det;
    g.intercept = (sy - g.rate * st) / n;
  } else if (g.samples == 1) {
    g.intercept = sy;
  }
  g.rate_per_amplitude = amplitude > 0.0 ? g.rate / amplitude : kNaN;
  return g;
}

}  // namespace ksmix
