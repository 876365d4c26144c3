#pragma once

// Uniform grids on the torus [0, 2pi)^d, real-to-complex Fourier transforms
// and the Fourier-multiplier operators built on them.
//
// Coefficient convention: fhat(k) = n^{-d} sum_x f(x) exp(-i k.x), so a
// constant field c has fhat(0) = c and cos(x1) has fhat(+-e1) = 1/2.
// Homogeneous Sobolev norms are coefficient sums over k != 0; the physical
// L2 norm differs from the coefficient l2 norm by a factor (2pi)^{d/2}.
//
// Spectral data is stored as the non-redundant half spectrum of a real
// field (last axis 0..n/2, FFTW r2c layout). Hermitian symmetry is therefore
// structural; SpectralField::at() reconstructs any full-spectrum coefficient.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ksmix/common.hpp"

namespace ksmix {

class TorusGrid {
 public:
  /// dim in {2, 3}; n even, n >= 8, and n = 2^a 3^b 5^c.
  TorusGrid(int dim, int n);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  /// Length of the last spectral axis (n/2 + 1).
  int half() const noexcept { return n_ / 2 + 1; }
  std::size_t size() const noexcept { return size_; }
  std::size_t spectral_size() const noexcept { return spectral_size_; }
  double spacing() const noexcept { return kTwoPi / n_; }
  double cell_volume() const noexcept;
  double volume() const noexcept;
  /// Largest |k_j| kept by the 2/3 dealiasing rule (modes with |k_j| > n/3 are removed).
  int dealias_cutoff() const noexcept { return n_ / 3; }
  /// Coordinates of the point with the given row-major index.
  std::array<double, 3> point(std::size_t index) const noexcept;

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_;
  int n_;
  std::size_t size_;
  std::size_t spectral_size_;
};

struct Wavevector {
  std::array<int, 3> k{};
  int dim = 0;

  double norm2() const noexcept;
  double norm() const noexcept;
  bool is_zero() const noexcept { return k[0] == 0 && k[1] == 0 && k[2] == 0; }
};

/// Per-grid tables describing every stored (half-spectrum) mode.
struct ModeTable {
  explicit ModeTable(const TorusGrid& g);

  TorusGrid grid;
  std::array<std::vector<double>, 3> k;  // wavenumber along each axis
  std::vector<double> k2;                // |k|^2
  std::vector<double> weight;            // multiplicity of the mode in the full spectrum (1 or 2)
  std::vector<unsigned char> nyquist;    // some |k_j| == n/2
  std::vector<unsigned char> dealias;    // all |k_j| <= n/3 (kept by the 2/3 rule)

  Wavevector wavevector(std::size_t index) const noexcept;
};

/// Cached, immutable mode table for the grid (thread-safe).
const ModeTable& modes(const TorusGrid& grid);

struct ScalarField {
  explicit ScalarField(const TorusGrid& g) : grid(g), values(g.size(), 0.0) {}
  ScalarField(const TorusGrid& g, AlignedVector<double> v);

  /// Samples fn at every grid point (coordinates in [0, 2pi)).
  static ScalarField sample(const TorusGrid& g,
                            const std::function<double(const std::array<double, 3>&)>& fn);

  double mean() const;
  bool all_finite() const;

  TorusGrid grid;
  AlignedVector<double> values;
};

struct SpectralField {
  explicit SpectralField(const TorusGrid& g) : grid(g), coeffs(g.spectral_size()) {}

  /// Coefficient of any wavevector with components in [-n/2, n/2), using
  /// conjugate symmetry for modes not stored in the half spectrum.
  Complex at(const Wavevector& k) const;
  /// Sets the coefficient of k (and implicitly its conjugate partner).
  void set(const Wavevector& k, Complex value);

  TorusGrid grid;
  AlignedVector<Complex> coeffs;
};

using VectorField = std::vector<ScalarField>;

/// Forward transform in the normalized convention above. Rejects non-finite input.
SpectralField forward_transform(const ScalarField& f);
ScalarField inverse_transform(const SpectralField& fhat);

// Buffer-level transforms for hot loops. `in` of the inverse is overwritten.
void forward_transform(const TorusGrid& grid, std::span<const double> in, std::span<Complex> out);
void inverse_transform(const TorusGrid& grid, std::span<Complex> in, std::span<double> out);

/// Scalar Fourier multiplier; the k = 0 value is given explicitly.
struct Multiplier {
  std::function<Complex(const Wavevector&)> symbol;
  Complex zero_mode{};
};

/// d-vector multiplier, component `axis` of the symbol at k.
struct VectorMultiplier {
  std::function<Complex(int axis, const Wavevector&)> symbol;
  Complex zero_mode{};
};

/// A multiplier evaluated on a particular grid.
struct MultiplierTable {
  TorusGrid grid;
  AlignedVector<Complex> values;
};

MultiplierTable tabulate(const Multiplier& m, const TorusGrid& grid);

/// Pointwise multiplication; the Nyquist modes of the result are zeroed.
SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m);
std::vector<SpectralField> apply_multiplier(const SpectralField& f, const VectorMultiplier& m);
/// Throws std::invalid_argument on grid mismatch.
SpectralField apply_multiplier(const SpectralField& f, const MultiplierTable& m);

/// |k|^s for k != 0, zero at k = 0.
Multiplier riesz_symbol(double s);
/// i k (gradient).
VectorMultiplier gradient_symbol();

/// (-Delta)^{alpha/2}: symbol |k|^alpha, with value 0 at k = 0 for alpha > 0
/// and 1 for alpha = 0 (so the alpha = 0 operator is the identity).
Multiplier fractional_laplacian_symbol(double alpha);
ScalarField frac_laplacian(const ScalarField& f, double alpha);

/// (sum_{k != 0} |k|^{2s} |fhat(k)|^2)^{1/2}
double sobolev_norm(const SpectralField& fhat, double s);
double sobolev_norm(const ScalarField& f, double s);

/// Keeps modes with Euclidean |k| <= radius. Warns when radius >= n/2.
SpectralField project_low_modes(const SpectralField& fhat, int radius);
ScalarField project_low_modes(const ScalarField& f, int radius);
/// ||P_N f||^2 in the coefficient convention (mean included when it is kept).
double low_mode_energy(const SpectralField& fhat, int radius);

/// Grid quadrature of the L^p norm, p in {1, 2, infinity}.
double lp_norm(const ScalarField& f, double p);

/// Spectral partial derivative along `axis` (Nyquist zeroed).
ScalarField derivative(const ScalarField& f, int axis);

/// Energy fraction of the mean-free part carried by modes with |k| > n/3.
double tail_fraction(const SpectralField& fhat);

}  // namespace ksmix
