#include "ksmix/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ksmix/kernels.hpp"
#include "ksmix/snapshot.hpp"

namespace ksmix {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    out = false;
    return true;
  }
  return false;
}

IcKind parse_ic_kind(const std::string& name) {
  for (IcKind k : {IcKind::GaussianBump, IcKind::RandomBand, IcKind::File}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown initial condition '" + name + "'");
}

using Setter = std::function<void(SimConfig&, const std::string&)>;

struct ValueError {
  std::string message;
};

template <class T>
Setter number(T SimConfig::*field) {
  return [field](SimConfig& c, const std::string& v) {
    if (!parse_number(v, c.*field)) throw ValueError{"expected a number, got '" + v + "'"};
  };
}

template <class Fn>
Setter custom(Fn fn) {
  return [fn](SimConfig& c, const std::string& v) { fn(c, v); };
}

template <class T>
T as_number(const std::string& v) {
  T out{};
  if (!parse_number(v, out)) throw ValueError{"expected a number, got '" + v + "'"};
  return out;
}

bool as_bool(const std::string& v) {
  bool b = false;
  if (!parse_bool(v, b)) throw ValueError{"expected true/false, got '" + v + "'"};
  return b;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dim", number(&SimConfig::dim)},
      {"n", number(&SimConfig::n)},
      {"alpha", number(&SimConfig::alpha)},
      {"beta", number(&SimConfig::beta)},
      {"A", custom([](SimConfig& c, const std::string& v) { c.flow.amplitude = as_number<double>(v); })},
      {"T", number(&SimConfig::horizon)},
      {"dt_max", number(&SimConfig::dt_max)},
      {"c_cfl", number(&SimConfig::c_cfl)},
      {"flow", custom([](SimConfig& c, const std::string& v) {
         try {
           c.flow.kind = parse_flow_kind(v);
         } catch (const std::invalid_argument& e) {
           throw ValueError{e.what()};
         }
       })},
      {"flow.wavenumber",
       custom([](SimConfig& c, const std::string& v) { c.flow.wavenumber = as_number<int>(v); })},
      {"flow.gamma", custom([](SimConfig& c, const std::string& v) { c.flow.gamma = as_number<double>(v); })},
      {"flow.half_period",
       custom([](SimConfig& c, const std::string& v) { c.flow.half_period = as_number<double>(v); })},
      {"flow.seed",
       custom([](SimConfig& c, const std::string& v) { c.flow.seed = as_number<std::uint64_t>(v); })},
      {"flow.path", custom([](SimConfig& c, const std::string& v) { c.flow.path = v; })},
      {"ic", custom([](SimConfig& c, const std::string& v) {
         try {
           c.ic.kind = parse_ic_kind(v);
         } catch (const std::invalid_argument& e) {
           throw ValueError{e.what()};
         }
       })},
      {"ic.amplitude", custom([](SimConfig& c, const std::string& v) { c.ic.amplitude = as_number<double>(v); })},
      {"ic.width", custom([](SimConfig& c, const std::string& v) { c.ic.width = as_number<double>(v); })},
      {"ic.center", custom([](SimConfig& c, const std::string& v) {
         c.ic.center.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) c.ic.center.push_back(as_number<double>(trim(item)));
       })},
      {"ic.seed", custom([](SimConfig& c, const std::string& v) { c.ic.seed = as_number<std::uint64_t>(v); })},
      {"ic.k_max", custom([](SimConfig& c, const std::string& v) { c.ic.k_max = as_number<int>(v); })},
      {"ic.offset", custom([](SimConfig& c, const std::string& v) { c.ic.offset = as_number<double>(v); })},
      {"ic.path", custom([](SimConfig& c, const std::string& v) { c.ic.path = v; })},
      {"disable_nonlinear",
       custom([](SimConfig& c, const std::string& v) { c.disable_nonlinear = as_bool(v); })},
      {"disable_dissipation",
       custom([](SimConfig& c, const std::string& v) { c.disable_dissipation = as_bool(v); })},
      {"output.dir", custom([](SimConfig& c, const std::string& v) { c.output.dir = v; })},
      {"output.every", custom([](SimConfig& c, const std::string& v) { c.output.every = as_number<int>(v); })},
      {"output.snapshots",
       custom([](SimConfig& c, const std::string& v) { c.output.snapshots = as_bool(v); })},
      {"diag.N", custom([](SimConfig& c, const std::string& v) { c.diag_radius = as_number<int>(v); })},
  };
  return table;
}

std::vector<std::string> check(const SimConfig& c) {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& key, const std::string& what) {
    errors.push_back("key '" + key + "': " + what);
  };

  bool grid_ok = true;
  if (c.dim != 2 && c.dim != 3) {
    fail("dim", "must be 2 or 3");
    grid_ok = false;
  }
  try {
    (void)TorusGrid(c.dim == 2 || c.dim == 3 ? c.dim : 3, c.n);
  } catch (const std::invalid_argument&) {
    fail("n", "must be even, >= 8 and of the form 2^a 3^b 5^c");
    grid_ok = false;
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 2.0)) fail("alpha", "must lie in [0, 2]");
  if (!c.disable_nonlinear) {
    if (!(c.beta >= 2.0)) fail("beta", "must be >= 2");
    if (!(c.beta < c.dim)) fail("beta", "weak-singularity regime violated (need 2 <= beta < dim)");
  } else if (!std::isfinite(c.beta)) {
    fail("beta", "must be finite");
  }
  if (!(c.flow.amplitude >= 0.0) || !std::isfinite(c.flow.amplitude)) fail("A", "must be finite and >= 0");
  if (!(c.horizon > 0.0)) fail("T", "must be > 0");
  if (!(c.dt_max > 0.0)) fail("dt_max", "must be > 0");
  if (!(c.c_cfl > 0.0)) fail("c_cfl", "must be > 0");
  if (c.flow.wavenumber < 1) fail("flow.wavenumber", "must be >= 1");
  if (!(c.flow.half_period > 0.0)) fail("flow.half_period", "must be > 0");
  if (c.flow.kind == FlowKind::FromFile && c.flow.path.empty()) {
    fail("flow.path", "required for flow = from-file");
  }
  if (c.output.every < 1) fail("output.every", "must be >= 1");
  if (c.diag_radius < 1) fail("diag.N", "must be >= 1");

  const IcSpec& ic = c.ic;
  switch (ic.kind) {
    case IcKind::GaussianBump:
      if (!(ic.width > 0.0)) fail("ic.width", "must be > 0");
      if (!ic.center.empty() && ic.center.size() != static_cast<std::size_t>(c.dim)) {
        fail("ic.center", "must have dim components");
      }
      if (!c.disable_nonlinear && ic.amplitude < 0.0) {
        fail("ic.amplitude", "initial density must be nonnegative when the nonlinear term is enabled");
      }
      break;
    case IcKind::RandomBand:
      if (!ic.seed) fail("ic.seed", "required for ic = random-band (no default seed)");
      if (ic.k_max < 1) fail("ic.k_max", "must be >= 1");
      break;
    case IcKind::File:
      if (ic.path.empty()) fail("ic.path", "required for ic = file");
      break;
  }

  if (errors.empty() && grid_ok && !c.disable_nonlinear) {
    try {
      const ScalarField rho0 = build_initial_field(ic, c.grid());
      const double peak = kernels::max_abs(rho0.values);
      if (kernels::min_value(rho0.values) < -1e-12 * std::max(1.0, peak)) {
        fail("ic", "initial density must be nonnegative when the nonlinear term is enabled");
      }
    } catch (const std::exception& e) {
      fail("ic", e.what());
    }
  }
  return errors;
}

}  // namespace

std::string to_string(IcKind kind) {
  switch (kind) {
    case IcKind::GaussianBump: return "gaussian-bump";
    case IcKind::RandomBand: return "random-band";
    case IcKind::File: return "file";
  }
  return "unknown";
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration: " + join(errors, "; ")), errors_(std::move(errors)) {}

SimConfig parse_config(const std::string& text) {
  SimConfig config;
  std::vector<std::string> errors;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(line_no) + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (key == "flow.kind") key = "flow";
    if (key == "ic.kind") key = "ic";

    const auto it = setters().find(key);
    if (it == setters().end()) {
      errors.push_back("key '" + key + "': unknown key");
      continue;
    }
    if (!seen.insert(key).second) {
      errors.push_back("key '" + key + "': given more than once");
      continue;
    }
    try {
      it->second(config, value);
    } catch (const ValueError& e) {
      errors.push_back("key '" + key + "': " + e.message);
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  validate(config);
  return config;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const SimConfig& config) {
  auto errors = check(config);
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

std::string format_config(const SimConfig& c) {
  std::ostringstream out;
  out << "dim = " << c.dim << "\n"
      << "n = " << c.n << "\n"
      << "alpha = " << fmt_double(c.alpha) << "\n"
      << "beta = " << fmt_double(c.beta) << "\n"
      << "A = " << fmt_double(c.flow.amplitude) << "\n"
      << "T = " << fmt_double(c.horizon) << "\n"
      << "dt_max = " << fmt_double(c.dt_max) << "\n"
      << "c_cfl = " << fmt_double(c.c_cfl) << "\n"
      << "disable_nonlinear = " << (c.disable_nonlinear ? "true" : "false") << "\n"
      << "disable_dissipation = " << (c.disable_dissipation ? "true" : "false") << "\n"
      << "diag.N = " << c.diag_radius << "\n"
      << "\n[flow]\n"
      << "kind = " << to_string(c.flow.kind) << "\n"
      << "wavenumber = " << c.flow.wavenumber << "\n"
      << "gamma = " << fmt_double(c.flow.gamma) << "\n"
      << "half_period = " << fmt_double(c.flow.half_period) << "\n"
      << "seed = " << c.flow.seed << "\n";
  if (!c.flow.path.empty()) out << "path = " << c.flow.path << "\n";
  out << "\n[ic]\n"
      << "kind = " << to_string(c.ic.kind) << "\n"
      << "amplitude = " << fmt_double(c.ic.amplitude) << "\n"
      << "width = " << fmt_double(c.ic.width) << "\n";
  if (!c.ic.center.empty()) {
    std::vector<std::string> parts;
    for (double x : c.ic.center) parts.push_back(fmt_double(x));
    out << "center = " << join(parts, ",") << "\n";
  }
  if (c.ic.seed) out << "seed = " << *c.ic.seed << "\n";
  out << "k_max = " << c.ic.k_max << "\n"
      << "offset = " << fmt_double(c.ic.offset) << "\n";
  if (!c.ic.path.empty()) out << "path = " << c.ic.path << "\n";
  out << "\n[output]\n";
  if (!c.output.dir.empty()) out << "dir = " << c.output.dir << "\n";
  out << "every = " << c.output.every << "\n"
      << "snapshots = " << (c.output.snapshots ? "true" : "false") << "\n";
  return out.str();
}

ScalarField gaussian_bump(const TorusGrid& grid, double amplitude, double width,
                          const std::vector<double>& center) {
  const int d = grid.dim();
  const int n = grid.n();
  // Separable periodized profile: product over axes of sum over images.
  std::vector<std::vector<double>> axis(static_cast<std::size_t>(d), std::vector<double>(n));
  for (int j = 0; j < d; ++j) {
    const double c = center.empty() ? kPi : center[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) {
      const double x = i * grid.spacing();
      double s = 0.0;
      for (int m = -3; m <= 3; ++m) {
        const double r = x - c + m * kTwoPi;
        s += std::exp(-r * r / (2.0 * width * width));
      }
      axis[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = s;
    }
  }
  ScalarField f(grid);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    std::size_t rest = idx;
    double v = amplitude;
    for (int j = d - 1; j >= 0; --j) {
      v *= axis[static_cast<std::size_t>(j)][rest % static_cast<std::size_t>(n)];
      rest /= static_cast<std::size_t>(n);
    }
    f.values[idx] = v;
  }
  return f;
}

ScalarField random_band(const TorusGrid& grid, std::uint64_t seed, int k_max) {
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  const auto& mt = modes(grid);
  SpectralField fhat(grid);
  const double r2 = static_cast<double>(k_max) * k_max;
  // Modes are visited in storage order; set() keeps the self-conjugate planes Hermitian.
  for (std::size_t i = 0; i < fhat.coeffs.size(); ++i) {
    const Wavevector k = mt.wavevector(i);
    if (k.is_zero() || mt.k2[i] > r2 || mt.nyquist[i]) continue;
    const Complex c{uniform(), uniform()};
    fhat.set(k, c);
  }
  ScalarField f = inverse_transform(fhat);
  const double peak = kernels::max_abs(f.values);
  if (peak > 0.0) {
    for (auto& v : f.values) v /= peak;
  }
  return f;
}

ScalarField build_initial_field(const IcSpec& ic, const TorusGrid& grid) {
  switch (ic.kind) {
    case IcKind::GaussianBump:
      return gaussian_bump(grid, ic.amplitude, ic.width, ic.center);
    case IcKind::RandomBand: {
      if (!ic.seed) throw std::invalid_argument("random-band initial data requires a seed");
      ScalarField f = random_band(grid, *ic.seed, ic.k_max);
      for (auto& v : f.values) v = ic.offset + ic.amplitude * v;
      return f;
    }
    case IcKind::File: {
      ScalarField f = read_field(ic.path);
      if (!(f.grid == grid)) throw std::invalid_argument("initial data file does not match the grid");
      return f;
    }
  }
  throw std::invalid_argument("unknown initial condition kind");
}

}  // namespace ksmix
