#pragma once

// Measurements on density fields and record streams: the mixing functional
// Phi, low-mode energy fractions, RAGE time averages, the projected transport
// semigroup bound, mean decay, the Gagliardo-Nirenberg ratio, derivative
// growth, and the local-existence certificate constants.
//
// Unspecified universal constants are fixed by convention: C = 1 in every
// Young-type bound, C = 2 for the projected semigroup bound.

#include <optional>
#include <string>
#include <vector>

#include "ksmix/attract.hpp"
#include "ksmix/flow.hpp"
#include "ksmix/torus.hpp"

namespace ksmix {

inline constexpr char kSeriesHeader[] =
    "t,mean,l1,l2,linf,min,l2_meanfree,neg_sobolev,phi,low_mode_fraction,tail_fraction,grad_sup";

/// One time sample. Norm conventions: l1/l2/linf are grid quadratures of the
/// physical norms; l2_meanfree and neg_sobolev are coefficient sums over k != 0.
struct DiagnosticsRecord {
  double t = 0.0;
  double mean = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double min = 0.0;
  double l2_meanfree = 0.0;
  double neg_sobolev = 0.0;        // ||Lambda^{beta-d} (rho - mean)||
  double phi = 0.0;                // NaN when rho is constant
  double low_mode_fraction = 0.0;  // ||P_N (rho - mean)||^2 / ||rho - mean||^2, NaN when constant
  double tail_fraction = 0.0;
  double grad_sup = 0.0;           // max_j ||d_j rho||_inf
  double max_value = 0.0;          // rho tilde = max_x rho
  std::size_t max_index = 0;       // first row-major index attaining it
};

/// Builds a record from a state given both representations.
DiagnosticsRecord make_record(double t, const SpectralField& rho_hat, const ScalarField& rho,
                              double lap_exponent, int radius);
DiagnosticsRecord make_record(double t, const ScalarField& rho, double lap_exponent, int radius);

std::string format_record(const DiagnosticsRecord& r);

/// Phi = ||Lambda^{beta-d}(rho - mean)||^2 / ||rho - mean||^2; empty for constant rho.
std::optional<double> phi(const ScalarField& rho, const KernelSpec& spec);
std::optional<double> phi(const SpectralField& rho_hat, double lap_exponent);

/// 2 lambda_N^{beta-d} with lambda_N = N^2.
double phi_threshold(int radius, const KernelSpec& spec);
double phi_threshold(int radius, double lap_exponent);

/// Time-weighted (trapezoid) fraction of the record span where phi >= threshold.
double flagged_time_fraction(const std::vector<DiagnosticsRecord>& records, double threshold);
/// Trapezoid time average of phi over the records (NaN entries skipped).
double mean_phi(const std::vector<DiagnosticsRecord>& records);

struct RageResult {
  double average = 0.0;         // (1/T) int_0^T ||P_N phi(t)||^2 dt
  double initial = 0.0;         // ||P_N phi_0||^2
  double final_energy = 0.0;    // ||phi(T)||^2 (conserved by transport)
  std::size_t samples = 0;
  bool normalized = false;      // input was rescaled / made mean-free
};

struct TransportControl {
  double c_cfl = 0.4;
  double dt_max = 0.01;
};

/// Transports phi0 under A u (no damping, no nonlinearity) and averages the
/// low-mode energy. phi0 is made mean-free with unit coefficient norm, with a
/// warning, when it is not already.
RageResult rage_average(const FlowSampler& flow, const ScalarField& phi0, int radius, double horizon,
                        const TransportControl& control = {});

struct SemigroupPoint {
  double t = 0.0;
  double ratio = 0.0;  // ||P_N f(t)|| / (e^{N^2 t} ||P_N f||)
};

struct SemigroupReport {
  std::vector<SemigroupPoint> points;
  double max_ratio = 0.0;
  double constant = 2.0;  // convention
  bool within_bound() const { return max_ratio <= constant; }
};

/// Evaluates the projected transport ratio at each time of t_grid (sorted, >= 0).
SemigroupReport semigroup_bound_check(const FlowSampler& flow, const ScalarField& f, int radius,
                                      const std::vector<double>& t_grid,
                                      const TransportControl& control = {});

struct MeanDecay {
  bool applicable = false;  // only for alpha = 0
  double residual = 0.0;    // max_t |mean(t) - e^{-t} mean(0)|
};

MeanDecay mean_decay_residual(const std::vector<DiagnosticsRecord>& records, double alpha);

/// ||Lambda^{(beta-d)/2} f||_inf / (||Lambda^{beta-d} f||^{1-theta} ||f||_inf^theta)
/// for mean-free f. Throws on a zero field.
double gn_ratio(const ScalarField& f, const KernelSpec& spec);
/// theta = (2d - beta) / (3d - 2 beta)
double gn_exponent(const KernelSpec& spec);

struct Certificate {
  double C0 = 0.0;     // ||Delta K||_{L1} with C = 1
  double C_inf = 0.0;  // ||rho0||_inf
  double B0 = 0.0;     // ||rho0|| in the coefficient convention (mean included)
  double mean0 = 0.0;
  double tau0 = 0.0;   // 1 / (2 C0 C_inf); the local existence time is treated as unbounded
  double tau1 = 0.0;   // min(tau0, 2 ln 2 / (C_inf + mean0))
  double theta = 0.0;
};

/// Throws std::invalid_argument for negative initial data.
Certificate certificate(const ScalarField& rho0, const KernelSpec& spec);
/// Same arithmetic with a known C0.
Certificate certificate(const ScalarField& rho0, const KernelSpec& spec, double C0);

struct GrowthReport {
  double rate = 0.0;       // least-squares slope of log grad_sup against t
  double intercept = 0.0;
  double rate_per_amplitude = 0.0;  // rate / A (NaN for A = 0)
  std::size_t samples = 0;
};

GrowthReport grad_sup_track(const std::vector<DiagnosticsRecord>& records, double amplitude);

}  // namespace ksmix
