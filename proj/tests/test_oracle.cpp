#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dubrovin/errors.hpp"
#include "dubrovin/flows.hpp"
#include "dubrovin/oracle.hpp"
#include "dubrovin/reconstruct.hpp"
#include "support.hpp"

using namespace dubrovin;
using namespace dubrovin::testing;
using Catch::Approx;

namespace {

double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

/// -2 sech^2(x - 4t - x0) on [0, period), a soliton of u_t - 6 u u_x + u_xxx = 0.
PeriodicField soliton(std::size_t n, double period, double x0, double t) {
  PeriodicField f{period, std::vector<double>(n), t};
  for (std::size_t i = 0; i < n; ++i) f.samples[i] = -2.0 * sech2(period * i / n - 4.0 * t - x0);
  return f;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("constants are fixed points and dt = 0 is the identity", "[oracle]") {
  const PeriodicField c{10.0, std::vector<double>(128, 0.7), 0.0};
  const auto out = kdv_step(c, 1e-3, 200);
  for (double v : out.samples) CHECK(v == Approx(0.7).epsilon(1e-13));
  CHECK(out.time == Approx(0.2));

  const auto s = soliton(256, 40.0, 20.0, 0.0);
  CHECK(kdv_step(s, 0.0, 100).samples == s.samples);
}

TEST_CASE("soliton travels at speed 4", "[oracle]") {
  const auto s = soliton(512, 40.0, 15.0, 0.0);
  const auto out = kdv_step(s, 1e-4, 5000);
  CHECK(sup_diff(out.samples, soliton(512, 40.0, 15.0, 0.5).samples) < 1e-8);
}

TEST_CASE("conserved quantities", "[oracle]") {
  const auto z = conserved(PeriodicField{1.0, std::vector<double>(64, 0.0), 0.0});
  CHECK(z.mass == 0.0);
  CHECK(z.momentum == 0.0);
  CHECK(z.energy == 0.0);

  PeriodicField sine{2.0 * kPi, std::vector<double>(128), 0.0};
  for (std::size_t i = 0; i < 128; ++i) sine.samples[i] = std::sin(2.0 * kPi * i / 128.0);
  CHECK(conserved(sine).mass == Approx(0.0).margin(1e-14));
  CHECK(conserved(sine).momentum == Approx(kPi).epsilon(1e-13));

  const auto s = soliton(512, 40.0, 20.0, 0.0);
  const auto c0 = conserved(s);
  const auto c1 = conserved(kdv_step(s, 1e-4, 1000));
  CHECK(std::abs(c1.momentum - c0.momentum) < 1e-8 * std::abs(c0.momentum));
  CHECK(std::abs(c1.mass - c0.mass) < 1e-8 * std::abs(c0.mass));
  CHECK(std::abs(c1.energy - c0.energy) < 1e-8 * std::abs(c0.energy));
}

TEST_CASE("one-gap Dubrovin solution agrees with the spectral solver", "[oracle]") {
  const auto gs = g1();
  const std::size_t n = 256;
  const double period = x_period(*gs);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = period * i / n;
  const auto g = grid(half_pi(gs), xs, {0.0, 0.02}, 1e-12);
  const auto f = potential(g);
  PeriodicField init{period, std::vector<double>(n), 0.0};
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    init.samples[i] = f.u[f.index(i, 0)];
    target[i] = f.u[f.index(i, 1)];
  }
  CHECK(sup_diff(kdv_step(init, 1e-5, 2000).samples, target) < 1e-9);
}

TEST_CASE("invalid inputs", "[oracle]") {
  CHECK_THROWS_AS((PeriodicField{1.0, std::vector<double>(100), 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PeriodicField{1.0, std::vector<double>(32), 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PeriodicField{-1.0, std::vector<double>(64), 0.0}.validate()), ConfigError);
  const auto s = soliton(256, 40.0, 20.0, 0.0);
  CHECK_THROWS(kdv_step(s, 2.0 * kdv_dt_limit(s), 1));
}

TEST_CASE("KdV residual of field grids", "[oracle][residual]") {
  SECTION("constant field") {
    FieldGrid f;
    f.x_nodes = linspace(0.0, 1.0, 11);
    f.t_nodes = linspace(0.0, 0.1, 11);
    f.u.assign(121, 3.0);
    CHECK(residual(f).max_residual == 0.0);
    CHECK(residual(f, 2).max_residual == 0.0);
  }

  SECTION("empty gap set") {
    const auto e = empty_set(-0.5);
    const auto g = grid(DirichletAngles(e, {}), linspace(-1.0, 1.0, 21), linspace(-0.1, 0.1, 11), 1e-10);
    CHECK(residual(trace_derivatives(g)).max_residual == 0.0);
    CHECK(residual(potential(g)).max_residual == 0.0);
  }

  SECTION("one-gap Dubrovin grid") {
    const auto g = grid(half_pi(g1()), linspace(-1.0, 1.0, 201), linspace(-0.01, 0.01, 21), 1e-10);
    const auto r = residual(trace_derivatives(g));
    CHECK(r.used_trace);
    CHECK(r.max_residual < 1e-4 * std::max(1.0, r.u_sup));
    // Pure finite differences in x are much less accurate but still consistent.
    const auto rp = residual(potential(g));
    CHECK_FALSE(rp.used_trace);
    CHECK(rp.max_residual < 1e-1);
  }

  SECTION("nonuniform nodes are rejected") {
    FieldGrid f;
    f.x_nodes = {0.0, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7};
    f.t_nodes = linspace(0.0, 0.1, 7);
    f.u.assign(49, 0.0);
    CHECK_THROWS(residual(f));
  }
}
