#include "ksmix/torus.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include "ksmix/kernels.hpp"
#include "ksmix/log.hpp"

namespace ksmix {
namespace {

bool fft_friendly(int n) {
  for (int p : {2, 3, 5}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

int wavenumber(int index, int n) { return index < n / 2 ? index : index - n; }

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  Plans get(const TorusGrid& grid) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(grid.dim(), grid.n());
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::array<int, 3> dims{grid.n(), grid.n(), grid.n()};
    auto* real = fftw_alloc_real(grid.size());
    auto* spec = fftw_alloc_complex(grid.spectral_size());
    Plans p;
    p.forward = fftw_plan_dft_r2c(grid.dim(), dims.data(), real, spec, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r(grid.dim(), dims.data(), spec, real, FFTW_ESTIMATE);
    fftw_free(real);
    fftw_free(spec);
    if (p.forward == nullptr || p.backward == nullptr) {
      throw std::runtime_error("FFTW planning failed");
    }
    plans_.emplace(key, p);
    return p;
  }

 private:
  PlanCache() {
    fftw_init_threads();
    fftw_plan_with_nthreads(omp_get_max_threads());
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, Plans> plans_;
};

void zero_nyquist(SpectralField& f) {
  const auto& m = modes(f.grid);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    if (m.nyquist[i]) f.coeffs[i] = Complex{};
  }
}

// Stored half-spectrum index of k, or the index of -k when k itself is not
// stored. The flag reports whether the conjugate must be taken.
std::pair<std::size_t, bool> locate(const TorusGrid& grid, const Wavevector& wv) {
  const int n = grid.n();
  const int d = grid.dim();
  std::array<int, 3> k = wv.k;
  bool conj = false;
  const int last = k[d - 1];
  if (last < 0 && last != -n / 2) {
    for (int j = 0; j < d; ++j) k[j] = -k[j];
    conj = true;
  }
  std::size_t idx = 0;
  for (int j = 0; j < d - 1; ++j) {
    const int i = ((k[j] % n) + n) % n;
    idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
  }
  const int j_last = k[d - 1] == -n / 2 ? n / 2 : k[d - 1];
  idx = idx * static_cast<std::size_t>(grid.half()) + static_cast<std::size_t>(j_last);
  return {idx, conj};
}

void check_range(const TorusGrid& grid, const Wavevector& wv) {
  for (int j = 0; j < grid.dim(); ++j) {
    if (wv.k[j] < -grid.n() / 2 || wv.k[j] >= grid.n() / 2) {
      throw std::out_of_range("wavevector component outside [-n/2, n/2)");
    }
  }
}

}  // namespace

TorusGrid::TorusGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (n < 8 || n % 2 != 0 || !fft_friendly(n)) {
    throw std::invalid_argument("grid size must be even, >= 8 and of the form 2^a 3^b 5^c, got " +
                                std::to_string(n));
  }
  size_ = ipow(static_cast<std::size_t>(n), dim);
  spectral_size_ = ipow(static_cast<std::size_t>(n), dim - 1) * static_cast<std::size_t>(half());
}

double TorusGrid::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

double TorusGrid::volume() const noexcept { return std::pow(kTwoPi, dim_); }

std::array<double, 3> TorusGrid::point(std::size_t index) const noexcept {
  std::array<double, 3> x{};
  for (int j = dim_ - 1; j >= 0; --j) {
    x[j] = static_cast<double>(index % static_cast<std::size_t>(n_)) * spacing();
    index /= static_cast<std::size_t>(n_);
  }
  return x;
}

double Wavevector::norm2() const noexcept {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) s += static_cast<double>(k[j]) * k[j];
  return s;
}

double Wavevector::norm() const noexcept { return std::sqrt(norm2()); }

ModeTable::ModeTable(const TorusGrid& g) : grid(g) {
  const std::size_t m = g.spectral_size();
  for (int j = 0; j < g.dim(); ++j) k[j].assign(m, 0.0);
  k2.assign(m, 0.0);
  weight.assign(m, 2.0);
  nyquist.assign(m, 0);
  dealias.assign(m, 1);

  const int n = g.n();
  const int cutoff = g.dealias_cutoff();
  for (std::size_t idx = 0; idx < m; ++idx) {
    std::size_t rest = idx;
    const int j_last = static_cast<int>(rest % static_cast<std::size_t>(g.half()));
    rest /= static_cast<std::size_t>(g.half());
    std::array<int, 3> kv{};
    kv[g.dim() - 1] = j_last == n / 2 ? -n / 2 : j_last;
    for (int j = g.dim() - 2; j >= 0; --j) {
      kv[j] = wavenumber(static_cast<int>(rest % static_cast<std::size_t>(n)), n);
      rest /= static_cast<std::size_t>(n);
    }
    double s = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      k[j][idx] = kv[j];
      s += static_cast<double>(kv[j]) * kv[j];
      if (kv[j] == -n / 2) nyquist[idx] = 1;
      if (std::abs(kv[j]) > cutoff) dealias[idx] = 0;
    }
    k2[idx] = s;
    if (j_last == 0 || j_last == n / 2) weight[idx] = 1.0;
  }
}

Wavevector ModeTable::wavevector(std::size_t index) const noexcept {
  Wavevector w;
  w.dim = grid.dim();
  for (int j = 0; j < grid.dim(); ++j) w.k[j] = static_cast<int>(k[j][index]);
  return w;
}

const ModeTable& modes(const TorusGrid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<ModeTable>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[{grid.dim(), grid.n()}];
  if (!slot) slot = std::make_unique<ModeTable>(grid);
  return *slot;
}

ScalarField::ScalarField(const TorusGrid& g, AlignedVector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("field value count does not match grid size");
  }
}

ScalarField ScalarField::sample(const TorusGrid& g,
                                const std::function<double(const std::array<double, 3>&)>& fn) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = fn(g.point(i));
  return f;
}

double ScalarField::mean() const {
  return kernels::sum(values) / static_cast<double>(values.size());
}

bool ScalarField::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Complex SpectralField::at(const Wavevector& k) const {
  check_range(grid, k);
  const auto [idx, conj] = locate(grid, k);
  return conj ? std::conj(coeffs[idx]) : coeffs[idx];
}

void SpectralField::set(const Wavevector& k, Complex value) {
  check_range(grid, k);
  const auto [idx, conj] = locate(grid, k);
  coeffs[idx] = conj ? std::conj(value) : value;
  // Modes in the k_last = 0 and k_last = -n/2 planes store both partners.
  Wavevector neg = k;
  for (int j = 0; j < grid.dim(); ++j) {
    neg.k[j] = -k.k[j];
    if (neg.k[j] == grid.n() / 2) neg.k[j] = -grid.n() / 2;
  }
  const auto [nidx, nconj] = locate(grid, neg);
  if (nidx != idx && !nconj) coeffs[nidx] = std::conj(value);
}

void forward_transform(const TorusGrid& grid, std::span<const double> in, std::span<Complex> out) {
  const Plans plans = PlanCache::instance().get(grid);
  fftw_execute_dft_r2c(plans.forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double norm = 1.0 / static_cast<double>(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] *= norm;
}

void inverse_transform(const TorusGrid& grid, std::span<Complex> in, std::span<double> out) {
  const Plans plans = PlanCache::instance().get(grid);
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

SpectralField forward_transform(const ScalarField& f) {
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!std::isfinite(f.values[i])) {
      throw std::domain_error("forward_transform: non-finite value at index " + std::to_string(i));
    }
  }
  SpectralField out(f.grid);
  forward_transform(f.grid, f.values, out.coeffs);
  return out;
}

ScalarField inverse_transform(const SpectralField& fhat) {
  AlignedVector<Complex> work = fhat.coeffs;
  ScalarField out(fhat.grid);
  inverse_transform(fhat.grid, work, out.values);
  return out;
}

MultiplierTable tabulate(const Multiplier& m, const TorusGrid& grid) {
  const auto& mt = modes(grid);
  MultiplierTable table{grid, AlignedVector<Complex>(grid.spectral_size())};
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    const Wavevector k = mt.wavevector(i);
    table.values[i] = k.is_zero() ? m.zero_mode : m.symbol(k);
  }
  return table;
}

SpectralField apply_multiplier(const SpectralField& f, const MultiplierTable& m) {
  if (!(m.grid == f.grid)) {
    throw std::invalid_argument("apply_multiplier: multiplier grid does not match field grid");
  }
  SpectralField out(f.grid);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] = m.values[i] * f.coeffs[i];
  zero_nyquist(out);
  return out;
}

SpectralField apply_multiplier(const SpectralField& f, const Multiplier& m) {
  return apply_multiplier(f, tabulate(m, f.grid));
}

std::vector<SpectralField> apply_multiplier(const SpectralField& f, const VectorMultiplier& m) {
  std::vector<SpectralField> out;
  const auto& mt = modes(f.grid);
  for (int axis = 0; axis < f.grid.dim(); ++axis) {
    SpectralField c(f.grid);
    for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
      const Wavevector k = mt.wavevector(i);
      c.coeffs[i] = (k.is_zero() ? m.zero_mode : m.symbol(axis, k)) * f.coeffs[i];
    }
    zero_nyquist(c);
    out.push_back(std::move(c));
  }
  return out;
}

Multiplier riesz_symbol(double s) {
  return Multiplier{[s](const Wavevector& k) { return Complex{std::pow(k.norm2(), 0.5 * s), 0.0}; },
                    Complex{}};
}

VectorMultiplier gradient_symbol() {
  return VectorMultiplier{
      [](int axis, const Wavevector& k) { return Complex{0.0, static_cast<double>(k.k[axis])}; },
      Complex{}};
}

Multiplier fractional_laplacian_symbol(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("fractional order alpha must lie in [0, 2], got " +
                                std::to_string(alpha));
  }
  Multiplier m = riesz_symbol(alpha);
  if (alpha == 0.0) {
    m.symbol = [](const Wavevector&) { return Complex{1.0, 0.0}; };
    m.zero_mode = Complex{1.0, 0.0};
  }
  return m;
}

ScalarField frac_laplacian(const ScalarField& f, double alpha) {
  const Multiplier m = fractional_laplacian_symbol(alpha);
  if (alpha == 0.0) return f;
  return inverse_transform(apply_multiplier(forward_transform(f), m));
}

double sobolev_norm(const SpectralField& fhat, double s) {
  const auto& mt = modes(fhat.grid);
  double total = 0.0;
  for (std::size_t i = 0; i < fhat.coeffs.size(); ++i) {
    if (mt.k2[i] == 0.0) continue;
    total += mt.weight[i] * std::pow(mt.k2[i], s) * std::norm(fhat.coeffs[i]);
  }
  return std::sqrt(total);
}

double sobolev_norm(const ScalarField& f, double s) { return sobolev_norm(forward_transform(f), s); }

SpectralField project_low_modes(const SpectralField& fhat, int radius) {
  if (radius < 1) throw std::invalid_argument("projection radius must be >= 1");
  if (radius >= fhat.grid.n() / 2) {
    warn("project_low_modes: radius " + std::to_string(radius) +
         " >= n/2; projection acts as the identity on resolved modes");
  }
  const auto& mt = modes(fhat.grid);
  const double r2 = static_cast<double>(radius) * radius;
  SpectralField out(fhat.grid);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    out.coeffs[i] = mt.k2[i] <= r2 ? fhat.coeffs[i] : Complex{};
  }
  return out;
}

ScalarField project_low_modes(const ScalarField& f, int radius) {
  return inverse_transform(project_low_modes(forward_transform(f), radius));
}

double low_mode_energy(const SpectralField& fhat, int radius) {
  const auto& mt = modes(fhat.grid);
  const double r2 = static_cast<double>(radius) * radius;
  double total = 0.0;
  for (std::size_t i = 0; i < fhat.coeffs.size(); ++i) {
    if (mt.k2[i] <= r2) total += mt.weight[i] * std::norm(fhat.coeffs[i]);
  }
  return total;
}

double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p) && p > 0) return kernels::max_abs(f.values);
  if (p != 1.0 && p != 2.0) {
    throw std::invalid_argument("lp_norm supports p = 1, 2 or infinity");
  }
  const double s = kernels::sum_abs_pow(f.values, p) * f.grid.cell_volume();
  return p == 1.0 ? s : std::sqrt(s);
}

ScalarField derivative(const ScalarField& f, int axis) {
  const SpectralField fhat = forward_transform(f);
  const auto& mt = modes(f.grid);
  SpectralField d(f.grid);
  kernels::scale_ik(d.coeffs, fhat.coeffs, mt.k[axis], {});
  zero_nyquist(d);
  return inverse_transform(d);
}

double tail_fraction(const SpectralField& fhat) {
  const auto& mt = modes(fhat.grid);
  const double cut = static_cast<double>(fhat.grid.n()) / 3.0;
  const double cut2 = cut * cut;
  double tail = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < fhat.coeffs.size(); ++i) {
    if (mt.k2[i] == 0.0) continue;
    const double e = mt.weight[i] * std::norm(fhat.coeffs[i]);
    total += e;
    if (mt.k2[i] > cut2) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace ksmix
