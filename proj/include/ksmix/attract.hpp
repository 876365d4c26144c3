#pragma once

// The attractive drift B(rho) = grad K * rho on the torus, defined by its
// Fourier multiplier  Bhat(k) = i k |k|^{-(d+2-beta)} rhohat(k),  k != 0.
// The torus kernel is *defined* by this multiplier; no real-space
// periodization is attempted.

#include "ksmix/torus.hpp"

namespace ksmix {

class KernelSpec {
 public:
  /// Requires 2 <= beta < dim (weak singularity).
  KernelSpec(int dim, double beta);

  int dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }
  /// Order of the inverse fractional Laplacian inside B: d + 2 - beta.
  double drift_order() const noexcept { return dim_ + 2.0 - beta_; }
  /// Exponent of the Delta K multiplier: beta - d (negative).
  double lap_exponent() const noexcept { return beta_ - dim_; }

 private:
  int dim_;
  double beta_;
};

VectorField attract_field(const ScalarField& rho, const KernelSpec& spec);
/// Delta K * rho: multiplier -|k|^{beta-d}, zero mean.
ScalarField laplacian_kernel_conv(const ScalarField& rho, const KernelSpec& spec);

// Unchecked variants parameterized by the drift order s = d + 2 - beta.
std::vector<SpectralField> attract_coefficients(const SpectralField& rho_hat, double drift_order);
SpectralField laplacian_kernel_coefficients(const SpectralField& rho_hat, double lap_exponent);

/// grad K and Delta K sampled on `grid` from their multipliers.
VectorField grad_kernel_samples(const KernelSpec& spec, const TorusGrid& grid);
ScalarField lap_kernel_samples(const KernelSpec& spec, const TorusGrid& grid);

struct KernelNorms {
  double grad_l1 = 0.0;         // ||grad K||_{L1} on the fine grid
  double lap_l1 = 0.0;          // ||Delta K||_{L1} on the fine grid
  double grad_l1_coarse = 0.0;  // same quantities on the coarse grid
  double lap_l1_coarse = 0.0;
  int n_fine = 0;
  int n_coarse = 0;

  /// |fine - coarse| / fine
  double grad_sensitivity() const;
  double lap_sensitivity() const;
};

/// Quadrature of |grad K| and |Delta K| on a grid refined 2x over `grid`,
/// with the values at the simulation resolution reported for comparison.
KernelNorms kernel_l1_norms(const KernelSpec& spec, const TorusGrid& grid);

}  // namespace ksmix
