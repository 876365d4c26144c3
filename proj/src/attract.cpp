#include "ksmix/attract.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ksmix/kernels.hpp"

namespace ksmix {
namespace {

AlignedVector<double> power_table(const TorusGrid& grid, double exponent) {
  const auto& mt = modes(grid);
  AlignedVector<double> t(grid.spectral_size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (mt.k2[i] > 0.0 && !mt.nyquist[i]) t[i] = std::pow(mt.k2[i], 0.5 * exponent);
  }
  return t;
}

double l1(const ScalarField& f) { return lp_norm(f, 1.0); }

double l1_norm_of_vector(const VectorField& v) {
  const TorusGrid& g = v.front().grid;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (const auto& c : v) s += c.values[i] * c.values[i];
    total += std::sqrt(s);
  }
  return total * g.cell_volume();
}

}  // namespace

KernelSpec::KernelSpec(int dim, double beta) : dim_(dim), beta_(beta) {
  if (!(beta >= 2.0 && beta < dim)) {
    throw std::invalid_argument("weak-singularity regime violated: need 2 <= beta < d, got beta=" +
                                std::to_string(beta) + ", d=" + std::to_string(dim));
  }
}

std::vector<SpectralField> attract_coefficients(const SpectralField& rho_hat, double drift_order) {
  const auto& mt = modes(rho_hat.grid);
  const AlignedVector<double> g = power_table(rho_hat.grid, -drift_order);
  std::vector<SpectralField> out;
  for (int axis = 0; axis < rho_hat.grid.dim(); ++axis) {
    SpectralField b(rho_hat.grid);
    kernels::scale_ik(b.coeffs, rho_hat.coeffs, mt.k[axis], g);
    out.push_back(std::move(b));
  }
  return out;
}

SpectralField laplacian_kernel_coefficients(const SpectralField& rho_hat, double lap_exponent) {
  const AlignedVector<double> g = power_table(rho_hat.grid, lap_exponent);
  SpectralField out(rho_hat.grid);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = -g[i] * rho_hat.coeffs[i];
  return out;
}

VectorField attract_field(const ScalarField& rho, const KernelSpec& spec) {
  if (rho.grid.dim() != spec.dim()) {
    throw std::invalid_argument("attract_field: kernel dimension does not match grid");
  }
  VectorField out;
  for (const auto& c : attract_coefficients(forward_transform(rho), spec.drift_order())) {
    out.push_back(inverse_transform(c));
  }
  return out;
}

ScalarField laplacian_kernel_conv(const ScalarField& rho, const KernelSpec& spec) {
  if (rho.grid.dim() != spec.dim()) {
    throw std::invalid_argument("laplacian_kernel_conv: kernel dimension does not match grid");
  }
  return inverse_transform(laplacian_kernel_coefficients(forward_transform(rho), spec.lap_exponent()));
}

VectorField grad_kernel_samples(const KernelSpec& spec, const TorusGrid& grid) {
  // A unit coefficient at every mode, scaled by (2pi)^{-d} so that the grid
  // convolution sum_y K(x - y) rho(y) h^d reproduces the multiplier.
  SpectralField delta(grid);
  for (auto& c : delta.coeffs) c = Complex{1.0 / grid.volume(), 0.0};
  VectorField out;
  for (const auto& c : attract_coefficients(delta, spec.drift_order())) {
    out.push_back(inverse_transform(c));
  }
  return out;
}

ScalarField lap_kernel_samples(const KernelSpec& spec, const TorusGrid& grid) {
  SpectralField delta(grid);
  for (auto& c : delta.coeffs) c = Complex{1.0 / grid.volume(), 0.0};
  return inverse_transform(laplacian_kernel_coefficients(delta, spec.lap_exponent()));
}

double KernelNorms::grad_sensitivity() const {
  return std::abs(grad_l1 - grad_l1_coarse) / grad_l1;
}

double KernelNorms::lap_sensitivity() const { return std::abs(lap_l1 - lap_l1_coarse) / lap_l1; }

KernelNorms kernel_l1_norms(const KernelSpec& spec, const TorusGrid& grid) {
  if (grid.dim() != spec.dim()) {
    throw std::invalid_argument("kernel_l1_norms: kernel dimension does not match grid");
  }
  const TorusGrid fine(grid.dim(), 2 * grid.n());
  KernelNorms r;
  r.n_fine = fine.n();
  r.n_coarse = grid.n();
  r.grad_l1 = l1_norm_of_vector(grad_kernel_samples(spec, fine));
  r.lap_l1 = l1(lap_kernel_samples(spec, fine));
  r.grad_l1_coarse = l1_norm_of_vector(grad_kernel_samples(spec, grid));
  r.lap_l1_coarse = l1(lap_kernel_samples(spec, grid));
  return r;
}

}  // namespace ksmix
