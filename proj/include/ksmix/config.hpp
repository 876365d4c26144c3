#pragma once

// Experiment description and its plain-text form.
//
// The config document is `key = value` lines with `#` comments. Keys are
// flat or dotted (`flow.seed`); an INI-style `[flow]` header prefixes the
// keys that follow it. Unknown keys are errors.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksmix/flow.hpp"
#include "ksmix/torus.hpp"

namespace ksmix {

enum class IcKind { GaussianBump, RandomBand, File };

std::string to_string(IcKind kind);

struct IcSpec {
  IcKind kind = IcKind::GaussianBump;
  double amplitude = 1.0;
  double width = 0.5;
  std::vector<double> center;  // empty: centre of the box
  std::optional<std::uint64_t> seed;
  int k_max = 4;
  double offset = 0.0;
  std::string path;
};

struct OutputSpec {
  std::string dir;  // empty: nothing written
  int every = 10;
  bool snapshots = false;
};

struct SimConfig {
  int dim = 3;
  int n = 32;
  double alpha = 0.0;
  double beta = 2.5;
  FlowSpec flow;  // flow.amplitude is A
  double horizon = 10.0;
  double dt_max = 0.01;
  double c_cfl = 0.4;
  IcSpec ic;
  bool disable_nonlinear = false;
  bool disable_dissipation = false;
  OutputSpec output;
  int diag_radius = 2;  // N for P_N, low_mode_fraction and the Phi threshold

  TorusGrid grid() const { return TorusGrid(dim, n); }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates. Throws ConfigError listing every problem found.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);

/// Checks every invariant, including pointwise nonnegativity of the initial
/// data when the nonlinear term is enabled. Throws ConfigError.
void validate(const SimConfig& config);

/// Round-trippable text form of a config.
std::string format_config(const SimConfig& config);

/// Initial density for the config's grid.
ScalarField build_initial_field(const IcSpec& ic, const TorusGrid& grid);

/// Periodized Gaussian amplitude * exp(-|x - c|^2 / (2 width^2)).
ScalarField gaussian_bump(const TorusGrid& grid, double amplitude, double width,
                          const std::vector<double>& center);

/// Mean-free random field with random coefficients on 0 < |k| <= k_max,
/// scaled so that max |f| = 1. Deterministic in the seed.
ScalarField random_band(const TorusGrid& grid, std::uint64_t seed, int k_max);

}  // namespace ksmix
