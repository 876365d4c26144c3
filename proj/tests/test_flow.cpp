#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "ksmix/flow.hpp"
#include "ksmix/kernels.hpp"
#include "ksmix/snapshot.hpp"
#include "oracles.hpp"

using namespace ksmix;

namespace {

// max |div u| by direct DFT of each component.
double divergence_oracle(const VectorField& u) {
  const TorusGrid& g = u.front().grid;
  oracle::Spectrum div(g);
  for (int j = 0; j < g.dim(); ++j) {
    const oracle::Spectrum c = oracle::dft(u[static_cast<std::size_t>(j)]);
    oracle::for_each_mode(g, [&](const Wavevector& k) {
      if (k.k[0] == -g.n() / 2 || k.k[1] == -g.n() / 2 || k.k[2] == -g.n() / 2) return;
      div[k] += Complex{0.0, static_cast<double>(k.k[j])} * c[k];
    });
  }
  return oracle::max_abs(oracle::synthesize(div));
}

double peak(const VectorField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.front().values.size(); ++i) {
    double s = 0.0;
    for (const auto& c : u) s += c.values[i] * c.values[i];
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

FlowSpec spec_of(FlowKind kind, double A = 1.0) {
  FlowSpec s;
  s.kind = kind;
  s.amplitude = A;
  return s;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ksmix_test_flow_" + name);
}

}  // namespace

TEST_CASE("every flow kind is normalized and divergence-free") {
  for (int d : {2, 3}) {
    const TorusGrid g(d, 12);
    for (FlowKind kind : {FlowKind::Shear, FlowKind::RelaxedLinear, FlowKind::AlternatingShear}) {
      FlowSpec s = spec_of(kind, 3.0);
      s.wavenumber = 2;
      s.seed = 17;
      const FlowSampler f = make_flow(s, g);
      for (std::size_t seg = 0; seg < 4; ++seg) {
        const VectorField u = f.velocity(seg);
        REQUIRE(u.size() == static_cast<std::size_t>(d));
        CHECK(peak(u) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(divergence_check(u) <= 1e-10);
        CHECK(divergence_oracle(u) <= 1e-10);
      }
    }
  }
}

TEST_CASE("zero flow") {
  const TorusGrid g(3, 8);
  const FlowSampler f = make_flow(spec_of(FlowKind::Zero), g);
  CHECK(f.stationary());
  for (const auto& c : f(0.3)) CHECK(oracle::max_abs(c) == 0.0);
}

TEST_CASE("shear profile is sin(m y) along x") {
  const TorusGrid g(2, 16);
  FlowSpec s = spec_of(FlowKind::Shear);
  s.wavenumber = 3;
  const VectorField u = make_flow(s, g)(0.0);
  const ScalarField want = ScalarField::sample(g, [](const std::array<double, 3>& x) { return std::sin(3 * x[1]); });
  // The grid samples of sin(3y) peak below 1.
  const double scale = oracle::max_abs(want);
  for (std::size_t i = 0; i < want.values.size(); ++i) {
    CHECK(u[0].values[i] == doctest::Approx(want.values[i] / scale).epsilon(1e-14));
    CHECK(u[1].values[i] == 0.0);
  }
}

TEST_CASE("relaxed-linear flow is constant with component ratio gamma") {
  const TorusGrid g(3, 8);
  FlowSpec s = spec_of(FlowKind::RelaxedLinear);
  s.gamma = 0.5;
  const VectorField u = make_flow(s, g)(0.0);
  const double norm = std::sqrt(1.0 + 0.25 + 0.0625);
  CHECK(u[0].values[5] == doctest::Approx(1.0 / norm));
  CHECK(u[1].values[5] == doctest::Approx(0.5 / norm));
  CHECK(u[2].values[5] == doctest::Approx(0.25 / norm));
}

TEST_CASE("divergence check sees a compressible field") {
  const TorusGrid g(2, 16);
  VectorField u(2, ScalarField(g));
  u[0] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return std::sin(x[0]); });
  CHECK(divergence_check(u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(divergence_oracle(u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sum of shears stays divergence-free") {
  const TorusGrid g(3, 12);
  VectorField u(3, ScalarField(g));
  u[0] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return std::sin(2 * x[1]) + std::cos(x[2]); });
  u[1] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return std::cos(3 * x[2] + 0.4); });
  u[2] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return std::sin(x[0] - 0.1); });
  CHECK(divergence_check(u) <= 1e-12);
}

TEST_CASE("alternating shear segments and phases") {
  const TorusGrid g(3, 8);
  FlowSpec s = spec_of(FlowKind::AlternatingShear, 2.0);
  s.half_period = 0.25;
  s.seed = 5;
  const FlowSampler f = make_flow(s, g);
  CHECK_FALSE(f.stationary());
  CHECK(f.segment(0.0) == 0);
  CHECK(f.segment(0.1) == 0);
  CHECK(f.segment(0.25) == 1);
  CHECK(f.segment(0.25 - 1e-14) == 1);
  CHECK(f.segment(0.6) == 2);
  CHECK(f.segment_end(2) == doctest::Approx(0.75));

  // The active axis cycles and only that component is nonzero.
  for (std::size_t seg = 0; seg < 6; ++seg) {
    const VectorField u = f.velocity(seg);
    for (int j = 0; j < 3; ++j) {
      const bool active = j == static_cast<int>(seg % 3);
      CHECK((oracle::max_abs(u[static_cast<std::size_t>(j)]) > 0.5) == active);
    }
  }

  const FlowSampler same = make_flow(s, g);
  FlowSpec other = s;
  other.seed = 6;
  const FlowSampler diff = make_flow(other, g);
  int distinct = 0;
  for (std::size_t seg = 0; seg < 100; ++seg) {
    const double p = f.phase(seg);
    CHECK(p >= 0.0);
    CHECK(p < kTwoPi);
    CHECK(p == same.phase(seg));
    distinct += p != diff.phase(seg);
  }
  CHECK(distinct == 100);
}

TEST_CASE("stationary flows have a single infinite segment") {
  const FlowSampler f = make_flow(spec_of(FlowKind::Shear), TorusGrid(2, 8));
  CHECK(f.segment(123.0) == 0);
  CHECK(std::isinf(f.segment_end(0)));
}

TEST_CASE("invalid flow parameters") {
  const TorusGrid g(2, 8);
  FlowSpec s = spec_of(FlowKind::Shear, -1.0);
  CHECK_THROWS_AS(make_flow(s, g), std::invalid_argument);
  s.amplitude = NAN;
  CHECK_THROWS_AS(make_flow(s, g), std::invalid_argument);
  s = spec_of(FlowKind::Shear);
  s.wavenumber = 0;
  CHECK_THROWS_AS(make_flow(s, g), std::invalid_argument);
  s = spec_of(FlowKind::AlternatingShear);
  s.half_period = 0.0;
  CHECK_THROWS_AS(make_flow(s, g), std::invalid_argument);
}

TEST_CASE("flow kind names") {
  for (FlowKind k : {FlowKind::Zero, FlowKind::Shear, FlowKind::RelaxedLinear, FlowKind::AlternatingShear,
                     FlowKind::FromFile}) {
    CHECK(parse_flow_kind(to_string(k)) == k);
  }
  CHECK(to_string(FlowKind::AlternatingShear) == "alternating-shear");
  CHECK_THROWS_WITH_AS(parse_flow_kind("vortex"), "unknown flow kind 'vortex'", std::invalid_argument);
}

TEST_CASE("from-file velocity") {
  const TorusGrid g(2, 16);
  const auto path = temp_path("u.ksf");

  SUBCASE("divergence-free field is accepted and normalized") {
    VectorField u(2, ScalarField(g));
    u[0] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return 4.0 * std::cos(x[1]); });
    u[1] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return 3.0 * std::sin(x[0]); });
    write_vector_field(u, path);
    FlowSpec s = spec_of(FlowKind::FromFile);
    s.path = path.string();
    const VectorField v = make_flow(s, g)(0.0);
    CHECK(peak(v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(divergence_check(v) <= 1e-12);
  }

  SUBCASE("sawtooth compressible field is rejected") {
    VectorField u(2, ScalarField(g));
    u[0] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return x[0] - kPi; });
    CHECK(divergence_check(u) > 0.5);
    write_vector_field(u, path);
    FlowSpec s = spec_of(FlowKind::FromFile);
    s.path = path.string();
    CHECK_THROWS_WITH_AS(make_flow(s, g), doctest::Contains("not divergence-free"), std::invalid_argument);
  }

  SUBCASE("wrong grid is rejected") {
    VectorField u(2, ScalarField(TorusGrid(2, 8)));
    write_vector_field(u, path);
    FlowSpec s = spec_of(FlowKind::FromFile);
    s.path = path.string();
    CHECK_THROWS_AS(make_flow(s, g), SnapshotError);
  }

  std::filesystem::remove(path);
}
