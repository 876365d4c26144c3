#pragma once

// Data-parallel inner loops used by the spectral operators and the stepper.
//
// Every kernel exists twice: the OpenMP version in ksmix::kernels and a plain
// serial loop in ksmix::kernels::serial. The serial versions are the reference
// the unit tests compare against and the baseline for bench_kernels.
//
// Reductions are evaluated over fixed-size blocks whose partial results are
// combined in block order, so the parallel result is independent of the
// thread count (run outputs stay byte-identical between machines with
// different core counts).

#include <cstddef>
#include <span>

#include "ksmix/common.hpp"

namespace ksmix::kernels {

inline constexpr std::size_t kReductionBlock = 4096;

/// out[i] = mask[i] ? in[i] : 0
void mask_copy(std::span<Complex> out, std::span<const Complex> in,
               std::span<const unsigned char> mask);

/// out[i] = factor[i] * in[i]
void scale(std::span<Complex> out, std::span<const Complex> in, std::span<const double> factor);

/// out[i] = i * k[i] * factor[i] * in[i]   (one Cartesian derivative, optionally weighted)
void scale_ik(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k,
              std::span<const double> factor);

/// out[i] = rho[i] * (drift[i] + amplitude * velocity[i]); either of drift or
/// velocity may be empty, meaning identically zero.
void flux(std::span<double> out, std::span<const double> rho, std::span<const double> drift,
          std::span<const double> velocity, double amplitude);

/// out[i] -= i * k[i] * in[i]
void sub_divergence(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k);

/// out[i] = decay[i] * (a[i] + h * b[i])
void decay_axpy(std::span<Complex> out, std::span<const double> decay, std::span<const Complex> a,
                double h, std::span<const Complex> b);

/// out[i] = decay_a[i] * a[i] + h * decay_b[i] * b[i]   (empty decay_b means 1)
void decay_combine(std::span<Complex> out, std::span<const double> decay_a,
                   std::span<const Complex> a, double h, std::span<const double> decay_b,
                   std::span<const Complex> b);

/// Final integrating-factor RK4 update:
/// out = E*rho + h/6 * (E*k1 + 2*E2*(k2 + k3) + k4)
void rk4_finish(std::span<Complex> out, std::span<const double> full, std::span<const double> half,
                std::span<const Complex> rho, double h, std::span<const Complex> k1,
                std::span<const Complex> k2, std::span<const Complex> k3,
                std::span<const Complex> k4);

double max_abs(std::span<const double> values);
/// Index of the largest value; ties resolve to the first index.
std::size_t argmax(std::span<const double> values);
double min_value(std::span<const double> values);
double sum(std::span<const double> values);
double sum_abs_pow(std::span<const double> values, double p);
/// sum_i weight[i] * |c[i]|^2
double weighted_energy(std::span<const Complex> coeffs, std::span<const double> weight);
/// max over points of the Euclidean norm of a vector field given as components.
double max_norm(std::span<const std::span<const double>> components);

namespace serial {

void mask_copy(std::span<Complex> out, std::span<const Complex> in,
               std::span<const unsigned char> mask);
void scale(std::span<Complex> out, std::span<const Complex> in, std::span<const double> factor);
void scale_ik(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k,
              std::span<const double> factor);
void flux(std::span<double> out, std::span<const double> rho, std::span<const double> drift,
          std::span<const double> velocity, double amplitude);
void sub_divergence(std::span<Complex> out, std::span<const Complex> in, std::span<const double> k);
void decay_axpy(std::span<Complex> out, std::span<const double> decay, std::span<const Complex> a,
                double h, std::span<const Complex> b);
void decay_combine(std::span<Complex> out, std::span<const double> decay_a,
                   std::span<const Complex> a, double h, std::span<const double> decay_b,
                   std::span<const Complex> b);
void rk4_finish(std::span<Complex> out, std::span<const double> full, std::span<const double> half,
                std::span<const Complex> rho, double h, std::span<const Complex> k1,
                std::span<const Complex> k2, std::span<const Complex> k3,
                std::span<const Complex> k4);
double max_abs(std::span<const double> values);
std::size_t argmax(std::span<const double> values);
double min_value(std::span<const double> values);
double sum(std::span<const double> values);
double sum_abs_pow(std::span<const double> values, double p);
double weighted_energy(std::span<const Complex> coeffs, std::span<const double> weight);
double max_norm(std::span<const std::span<const double>> components);

}  // namespace serial
}  // namespace ksmix::kernels
