#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>

#include "dubrovin/flows.hpp"
#include "dubrovin/reconstruct.hpp"
#include "support.hpp"

using namespace dubrovin;
using namespace dubrovin::testing;
using Catch::Approx;

TEST_CASE("potential from the trace formula", "[reconstruct]") {
  const auto a = g1();
  const auto g = grid(half_pi(a), {0.0}, {0.0}, 1e-10);
  CHECK(potential(g).u[0] == Approx(0.0).margin(1e-15));
  const auto h = grid(at(a, {0.0}), {0.0}, {0.0}, 1e-10);
  CHECK(potential(h).u[0] == Approx(-1.0).epsilon(1e-15));

  const auto e = empty_set(-0.75);
  const auto f = trace_derivatives(grid(DirichletAngles(e, {}), {-1.0, 0.0, 1.0}, {0.0}, 1e-10));
  for (std::size_t k = 0; k < f.u.size(); ++k) {
    CHECK(f.u[k] == -0.75);
    CHECK(f.d2u[k] == 0.0);
    CHECK(f.d4u[k] == 0.0);
  }
}

TEST_CASE("second derivative from the trace formula", "[reconstruct]") {
  const auto f = trace_derivatives(grid(half_pi(g1()), {0.0}, {0.0}, 1e-10));
  CHECK(f.d2u[0] == Approx(-1.0).epsilon(1e-14));
  CHECK(f.dxu[0] == Approx(std::sin(0.5 * kPi) * 2.0 * std::sqrt(1.5)).epsilon(1e-14));
}

TEST_CASE("trace derivatives close under finite differences", "[reconstruct]") {
  const std::array<double, 3> steps{1e-2, 5e-3, 2.5e-3};
  const auto r = trace_closure(half_pi(g1()), -5.0, 5.0, 201, steps, 1e-12);
  REQUIRE(r.levels.size() == 3);
  for (double s : r.slopes_d2) CHECK(s == Approx(2.0).margin(0.05));
  for (double s : r.slopes_d4) CHECK(s == Approx(2.0).margin(0.05));
  for (const auto& l : r.levels) CHECK(l.err_d2 < 10.0 * l.h * l.h);
}

TEST_CASE("diagonal Green's function", "[reconstruct]") {
  const auto p = half_pi(g1());
  CHECK(green_diag(p, -1.0) == Approx(2.5 / (2.0 * std::sqrt(6.0))).epsilon(1e-13));
  CHECK(green_diag(p, -1.0) == Approx(0.5103104).margin(1e-7));
  CHECK(green_diag(p, 1.5) == 0.0);
  CHECK(green_diag(p, 1.25) < 0.0);
  CHECK(green_diag(p, 1.25) == Approx(-0.25 / (2.0 * std::sqrt(1.25 * 0.25 * 0.75))).epsilon(1e-13));
  CHECK(std::abs(green_diag(p, std::complex<double>(-1.0, 0.0)).imag()) < 1e-15);
  CHECK_THROWS(green_diag(p, 0.5));
}

TEST_CASE("z-derivative of G at mu", "[reconstruct]") {
  const auto p = half_pi(g1());
  CHECK(green_dz_at_mu(p, 0) == Approx(0.5 * std::sqrt(1.0 / 0.375)).epsilon(1e-13));
  CHECK(green_dz_at_mu(p, 0) == Approx(0.8164966).margin(1e-7));

  const double h = 1e-5;
  const double fd = (green_diag(p, 1.5 + h) - green_diag(p, 1.5 - h)) / (2.0 * h);
  CHECK(fd == Approx(green_dz_at_mu(p, 0)).epsilon(1e-8));

  // Only mu matters: the lower half of the circle gives the same mu.
  CHECK(green_dz_at_mu(at(g1(), {-0.5 * kPi}), 0) == Approx(green_dz_at_mu(p, 0)).epsilon(1e-14));
}

TEST_CASE("z-derivative of G matches finite differences on random sets", "[reconstruct][property]") {
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 100; ++s) {
    const auto gs = random_gapset(rng, 1 + s % 4);
    const auto p = at(gs, random_interior_phi(rng, gs->size(), 0.1));
    const auto ms = mu_sigma(p);
    for (std::size_t j = 0; j < gs->size(); ++j) {
      const double h = 1e-6 * gs->gamma(j);
      const double fd = (green_diag(p, ms.mu[j] + h) - green_diag(p, ms.mu[j] - h)) / (2.0 * h);
      CHECK(fd == Approx(green_dz_at_mu(p, j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("Dubrovin identity at hand-evaluated points", "[reconstruct]") {
  const auto c = dmu_dt_check(half_pi(g1()));
  CHECK(c.chain[0] == Approx(-7.3484692).margin(1e-7));
  CHECK(c.formula[0] == Approx(-7.3484692).margin(1e-7));
  CHECK(c.residual[0] < 1e-14);

  // E = -3 with gap (1, 2) makes u + 2 mu vanish identically.
  const auto zero = std::make_shared<const GapSet>(-3.0, std::vector<Gap>{{1.0, 2.0}});
  const auto z = dmu_dt_check(half_pi(zero));
  CHECK(z.chain[0] == Approx(0.0).margin(1e-13));
  CHECK(z.formula[0] == Approx(0.0).margin(1e-13));
}

TEST_CASE("Dubrovin identity on random interior points", "[reconstruct][property]") {
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 500; ++s) {
    const auto gs = random_gapset(rng, 1 + s % 5, rng.uniform(-2.0, 0.5));
    const auto c = dmu_dt_check(at(gs, random_interior_phi(rng, gs->size(), 1e-3)));
    for (std::size_t j = 0; j < gs->size(); ++j) CHECK(c.residual[j] <= 1e-12 * gs->scale() * std::max(1.0, std::abs(c.chain[j])));
  }
  CHECK_THROWS(dmu_dt_check(at(g1(), {0.0})));
}
