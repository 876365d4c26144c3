#include "ksmix/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ksmix::kernels {
namespace {

using Index = std::ptrdiff_t;

constexpr Complex kI{0.0, 1.0};

Index block_count(std::size_t n) {
  return static_cast<Index>((n + kReductionBlock - 1) / kReductionBlock);
}

template <class BlockFn>
double blocked_sum(std::size_t n, BlockFn&& fn) {
  const Index blocks = block_count(n);
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    partial[static_cast<std::size_t>(b)] = fn(lo, hi);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

void mask_copy(std::span<Complex> out, std::span<const Complex> in,
               std::span<const unsigned char> mask) {
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = mask[i] ? in[i] : Complex{};
}

void scale(std::span<Complex> out, std::span<const Complex> in, std::span<const double> factor) {
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = factor[i] * in[i];
}

void scale_ik(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k,
              std::span<const double> factor) {
  const Index n = static_cast<Index>(out.size());
  if (factor.empty()) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) out[i] = kI * k[i] * in[i];
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) out[i] = kI * (k[i] * factor[i]) * in[i];
  }
}

void flux(std::span<double> out, std::span<const double> rho, std::span<const double> drift,
          std::span<const double> velocity, double amplitude) {
  const Index n = static_cast<Index>(out.size());
  const bool has_drift = !drift.empty();
  const bool has_velocity = !velocity.empty() && amplitude != 0.0;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    double v = has_drift ? drift[i] : 0.0;
    if (has_velocity) v += amplitude * velocity[i];
    out[i] = rho[i] * v;
  }
}

void sub_divergence(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k) {
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] -= kI * k[i] * in[i];
}

void decay_axpy(std::span<Complex> out, std::span<const double> decay, std::span<const Complex> a,
                double h, std::span<const Complex> b) {
  const Index n = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = decay[i] * (a[i] + h * b[i]);
}

void decay_combine(std::span<Complex> out, std::span<const double> decay_a,
                   std::span<const Complex> a, double h, std::span<const double> decay_b,
                   std::span<const Complex> b) {
  const Index n = static_cast<Index>(out.size());
  if (decay_b.empty()) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) out[i] = decay_a[i] * a[i] + h * b[i];
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) out[i] = decay_a[i] * a[i] + (h * decay_b[i]) * b[i];
  }
}

void rk4_finish(std::span<Complex> out, std::span<const double> full, std::span<const double> half,
                std::span<const Complex> rho, double h, std::span<const Complex> k1,
                std::span<const Complex> k2, std::span<const Complex> k3,
                std::span<const Complex> k4) {
  const Index n = static_cast<Index>(out.size());
  const double sixth = h / 6.0;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    out[i] = full[i] * rho[i] +
             sixth * (full[i] * k1[i] + 2.0 * half[i] * (k2[i] + k3[i]) + k4[i]);
  }
}

double max_abs(std::span<const double> values) {
  const Index n = static_cast<Index>(values.size());
  double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
  for (Index i = 0; i < n; ++i) best = std::max(best, std::abs(values[i]));
  return best;
}

std::size_t argmax(std::span<const double> values) {
  const Index blocks = block_count(values.size());
  std::vector<std::size_t> where(static_cast<std::size_t>(blocks), 0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(values.size(), lo + kReductionBlock);
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      if (values[i] > values[best]) best = i;
    }
    where[static_cast<std::size_t>(b)] = best;
  }
  std::size_t best = 0;
  for (std::size_t idx : where) {
    if (values[idx] > values[best]) best = idx;
  }
  return best;
}

double min_value(std::span<const double> values) {
  const Index n = static_cast<Index>(values.size());
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : best)
  for (Index i = 0; i < n; ++i) best = std::min(best, values[i]);
  return best;
}

double sum(std::span<const double> values) {
  return blocked_sum(values.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    return s;
  });
}

double sum_abs_pow(std::span<const double> values, double p) {
  return blocked_sum(values.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    if (p == 1.0) {
      for (std::size_t i = lo; i < hi; ++i) s += std::abs(values[i]);
    } else if (p == 2.0) {
      for (std::size_t i = lo; i < hi; ++i) s += values[i] * values[i];
    } else {
      for (std::size_t i = lo; i < hi; ++i) s += std::pow(std::abs(values[i]), p);
    }
    return s;
  });
}

double weighted_energy(std::span<const Complex> coeffs, std::span<const double> weight) {
  return blocked_sum(coeffs.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += weight[i] * std::norm(coeffs[i]);
    return s;
  });
}

double max_norm(std::span<const std::span<const double>> components) {
  if (components.empty()) return 0.0;
  const Index n = static_cast<Index>(components.front().size());
  double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& c : components) s += c[i] * c[i];
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

namespace serial {

void mask_copy(std::span<Complex> out, std::span<const Complex> in,
               std::span<const unsigned char> mask) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? in[i] : Complex{};
}

void scale(std::span<Complex> out, std::span<const Complex> in, std::span<const double> factor) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor[i] * in[i];
}

void scale_ik(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k,
              std::span<const double> factor) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = factor.empty() ? k[i] : k[i] * factor[i];
    out[i] = kI * w * in[i];
  }
}

void flux(std::span<double> out, std::span<const double> rho, std::span<const double> drift,
          std::span<const double> velocity, double amplitude) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = drift.empty() ? 0.0 : drift[i];
    if (!velocity.empty() && amplitude != 0.0) v += amplitude * velocity[i];
    out[i] = rho[i] * v;
  }
}

void sub_divergence(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= kI * k[i] * in[i];
}

void decay_axpy(std::span<Complex> out, std::span<const double> decay, std::span<const Complex> a,
                double h, std::span<const Complex> b) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = decay[i] * (a[i] + h * b[i]);
}

void decay_combine(std::span<Complex> out, std::span<const double> decay_a,
                   std::span<const Complex> a, double h, std::span<const double> decay_b,
                   std::span<const Complex> b) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double hb = decay_b.empty() ? h : h * decay_b[i];
    out[i] = decay_a[i] * a[i] + hb * b[i];
  }
}

void rk4_finish(std::span<Complex> out, std::span<const double> full, std::span<const double> half,
                std::span<const Complex> rho, double h, std::span<const Complex> k1,
                std::span<const Complex> k2, std::span<const Complex> k3,
                std::span<const Complex> k4) {
  const double sixth = h / 6.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = full[i] * rho[i] +
             sixth * (full[i] * k1[i] + 2.0 * half[i] * (k2[i] + k3[i]) + k4[i]);
  }
}

double max_abs(std::span<const double> values) {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::abs(v));
  return best;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double min_value(std::span<const double> values) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : values) best = std::min(best, v);
  return best;
}

double sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double sum_abs_pow(std::span<const double> values, double p) {
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return s;
}

double weighted_energy(std::span<const Complex> coeffs, std::span<const double> weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += weight[i] * std::norm(coeffs[i]);
  return s;
}

double max_norm(std::span<const std::span<const double>> components) {
  if (components.empty()) return 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < components.front().size(); ++i) {
    double s = 0.0;
    for (const auto& c : components) s += c[i] * c[i];
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

}  // namespace serial
}  // namespace ksmix::kernels
