#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dubrovin/errors.hpp"
#include "dubrovin/flows.hpp"
#include "support.hpp"

using namespace dubrovin;
using namespace dubrovin::testing;
using Catch::Approx;

namespace {

/// Classical fixed-step RK4 on the t-field.
std::vector<double> rk4_t(const DirichletAngles& p, double t, std::size_t steps) {
  std::vector<double> y(p.phi().begin(), p.phi().end());
  const double h = t / static_cast<double>(steps);
  const auto f = [&](const std::vector<double>& v) { return xi(p.with_phi(v)); };
  const auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  for (std::size_t n = 0; n < steps; ++n) {
    const auto k1 = f(y);
    const auto k2 = f(axpy(y, 0.5 * h, k1));
    const auto k3 = f(axpy(y, 0.5 * h, k2));
    const auto k4 = f(axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return y;
}

}  // namespace

TEST_CASE("zero-length flows return the point", "[flows]") {
  const auto p = half_pi(g2());
  CHECK(metric(flow_x(p, 0.0, 1e-10), p) == 0.0);
  CHECK(metric(flow_t(p, 0.0, 1e-10), p) == 0.0);
}

TEST_CASE("x-flow is a semigroup and reversible", "[flows][property]") {
  const double tol = 1e-10;
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 20; ++s) {
    const auto gs = random_gapset(rng, 1 + s % 3);
    const auto p = at(gs, random_phi(rng, gs->size()));
    const double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0);
    CHECK(metric(flow_x(flow_x(p, a, tol), b, tol), flow_x(p, a + b, tol)) <= 2.0 * tol);
    CHECK(metric(flow_x(flow_x(p, a, tol), -a, tol), p) <= 2.0 * tol);
  }
}

TEST_CASE("one-gap x-flow is periodic with the quadrature period", "[flows]") {
  const auto a = g1();
  const double period = x_period(*a);
  const auto p = half_pi(a);
  const auto q = flow_x(p, period, 1e-12);
  CHECK(q.phi(0) == Approx(0.5 * kPi + 2.0 * kPi).margin(1e-9));
  CHECK(q_field(q, 1) == Approx(q_field(p, 1)).margin(1e-9));
  // Independent period: the trapezoid rule converges spectrally, so doubling agrees.
  CHECK(x_period(*a, 1024) == Approx(period).epsilon(1e-13));
  CHECK_THROWS(x_period(*g2()));
}

TEST_CASE("one-gap t-flow is a reparametrised x-flow", "[flows]") {
  // For E = 0 and gap (1, 2), Q1 + 2 mu = 3 identically, so Xi = 6 Psi.
  const auto p = half_pi(g1());
  CHECK(metric(flow_t(p, 0.1, 1e-12), flow_x(p, 0.6, 1e-12)) < 1e-10);
}

TEST_CASE("t-flow matches a fixed-step RK4 oracle", "[flows]") {
  const auto p = half_pi(g2());
  const auto adaptive = flow_t(p, 0.01, 1e-12);
  const auto oracle = rk4_t(p, 0.01, 1000);
  CHECK(metric(*g2(), adaptive.phi(), oracle) < 1e-8);
}

TEST_CASE("flows commute", "[flows]") {
  const double tol = 1e-10;
  const auto p = half_pi(g2());
  const auto xt = flow_t(flow_x(p, 1.0, tol), 0.1, tol);
  const auto tx = flow_x(flow_t(p, 0.1, tol), 1.0, tol);
  CHECK(metric(xt, tx) < 10.0 * tol);
}

TEST_CASE("integration error scales with the tolerance", "[flows][integrator]") {
  const auto p = half_pi(g2());
  const auto ref = flow_x(p, 2.0, 1e-13);
  double prev = 0.0;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    const double err = metric(flow_x(p, 2.0, tol), ref);
    CHECK(err < 10.0 * tol);
    if (prev > 0.0) CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("lattices", "[flows]") {
  const double tol = 1e-10;
  const auto p = half_pi(g2());

  SECTION("single node") {
    const auto g = grid(p, {0.0}, {0.0}, tol);
    REQUIRE(g.points.size() == 1);
    CHECK(g.points[0] == std::vector<double>(p.phi().begin(), p.phi().end()));
  }

  SECTION("t = 0 row equals repeated x-flow") {
    const auto xs = linspace(-1.0, 1.0, 5);
    const auto g = grid(p, xs, {0.0}, tol);
    auto q = p;
    for (std::size_t i = 3; i < xs.size(); ++i) {
      q = flow_x(q, xs[i] - xs[i - 1], tol);
      CHECK(metric(*g2(), g.phi(i, 0), q.phi()) < 2.0 * tol);
    }
  }

  SECTION("output does not depend on the thread count") {
    const auto xs = linspace(-1.0, 1.0, 9), ts = linspace(-0.1, 0.1, 5);
    const auto a = grid(p, xs, ts, tol, 1);
    const auto b = grid(p, xs, ts, tol, 4);
    CHECK(a.points == b.points);
  }

  SECTION("invalid node lists are config errors") {
    CHECK_THROWS_AS(grid(p, {1.0, 2.0}, {0.0}, tol), ConfigError);
    CHECK_THROWS_AS(grid(p, {0.0, -1.0}, {0.0}, tol), ConfigError);
    CHECK_THROWS_AS(grid(p, {0.0}, {}, tol), ConfigError);
  }
}

TEST_CASE("gap-edge crossings", "[flows]") {
  const auto a = g1();
  const auto p = half_pi(a);

  SECTION("first crossing is at the lower edge with rate 2") {
    const auto r = crossing_report(p, 20.0, 1e-12);
    REQUIRE(!r.crossings.empty());
    const Crossing& c = r.crossings.front();
    CHECK(c.k == 1);
    CHECK(c.rate == Approx(2.0).margin(1e-8));
    // Time to reach pi from pi/2 is the integral of dphi / Psi.
    const auto q = flow_x(p, c.x, 1e-12);
    CHECK(q.phi(0) == Approx(kPi).margin(1e-9));
  }

  SECTION("crossings are separated by at least pi over the largest rate") {
    const auto r = crossing_report(p, 20.0, 1e-12);
    CHECK(r.crossings.size() == 15);
    CHECK(r.min_separation[0] >= kPi / r.max_psi[0]);
    for (std::size_t i = 1; i < r.crossings.size(); ++i) CHECK(r.crossings[i].x > r.crossings[i - 1].x);
    for (const auto& c : r.crossings) CHECK(c.rate >= 2.0 * std::sqrt(a->eta0(0)) * (1.0 - 1e-6));
  }

  SECTION("zero-length interval has no crossings") {
    CHECK(crossing_report(p, 0.0, 1e-12).crossings.empty());
  }
}
