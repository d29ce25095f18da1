#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dubrovin/torus.hpp"
#include "support.hpp"

using namespace dubrovin;
using namespace dubrovin::testing;
using Catch::Approx;

TEST_CASE("Dirichlet data from angles", "[torus]") {
  const auto a = g1();
  auto ms = mu_sigma(at(a, {0.0}));
  CHECK(ms.mu[0] == 2.0);
  CHECK(ms.sigma[0] == 0);
  ms = mu_sigma(at(a, {kPi}));
  CHECK(ms.mu[0] == Approx(1.0).margin(1e-15));
  CHECK(ms.sigma[0] == 0);
  ms = mu_sigma(at(a, {0.5 * kPi}));
  CHECK(ms.mu[0] == Approx(1.5).epsilon(1e-15));
  CHECK(ms.sigma[0] == 1);
  CHECK(sigma_of(-0.5 * kPi) == -1);
  CHECK(sigma_of(2.0 * kPi) == 0);
  CHECK(sigma_of(-kPi) == 0);
}

TEST_CASE("points reject a dimension mismatch", "[torus]") {
  CHECK_THROWS(DirichletAngles(g2(), {0.0}));
  CHECK_THROWS(DirichletAngles(g1(), {std::nan("")}));
}

TEST_CASE("weighted metric", "[torus]") {
  const auto p = half_pi(g1());
  CHECK(metric(p, p) == 0.0);
  CHECK(metric(p, at(g1(), {0.5 * kPi + 0.1})) == Approx(0.1).epsilon(1e-12));
  CHECK(metric(half_pi(g2()), at(g2(), {0.5 * kPi, 0.5 * kPi + 0.2})) == Approx(std::sqrt(0.5) * 0.2).epsilon(1e-12));
  CHECK(metric(half_pi(g2()), at(g2(), {0.5 * kPi, 0.5 * kPi + 0.2})) == Approx(0.1414214).margin(1e-7));
  // Angles are compared on the circle.
  CHECK(metric(at(g1(), {0.1}), at(g1(), {0.1 + 2.0 * kPi})) == Approx(0.0).margin(1e-15));
}

TEST_CASE("metric is a metric on the torus", "[torus][property]") {
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 500; ++s) {
    const auto gs = random_gapset(rng, 1 + s % 5);
    const auto a = random_phi(rng, gs->size()), b = random_phi(rng, gs->size()), c = random_phi(rng, gs->size());
    const double ab = metric(*gs, a, b), bc = metric(*gs, b, c), ac = metric(*gs, a, c);
    CHECK(ab == Approx(metric(*gs, b, a)).margin(1e-15));
    CHECK(ac <= ab + bc + 1e-14);
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("trace quantities Q_k", "[torus]") {
  const auto a = g1();
  const auto p = half_pi(a);
  CHECK(q_field(p, 1) == Approx(0.0).margin(1e-15));
  CHECK(q_field(p, 2) == Approx(0.5).epsilon(1e-14));
  CHECK(q_field(p, 3) == Approx(2.25).epsilon(1e-14));
  CHECK(q_field(at(a, {0.0}), 1) == Approx(-1.0).epsilon(1e-15));
  const auto e = empty_set();
  for (int k = 1; k <= 3; ++k) CHECK(q_field(DirichletAngles(e, {}), k) == 0.0);
}

TEST_CASE("translation field Psi", "[torus]") {
  CHECK(psi(half_pi(g1()))[0] == Approx(2.0 * std::sqrt(1.5)).epsilon(1e-14));
  CHECK(psi(half_pi(g1()))[0] == Approx(2.4494897).margin(1e-7));
  CHECK(psi(at(g1(), {0.0}))[0] == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  // 2 sqrt(1.5 * 2.5 * 3 / 2.75^2); the closed form is the independent oracle.
  const double psi_g2 = 2.0 * std::sqrt(1.5 * 7.5 / 7.5625);
  CHECK(psi(half_pi(g2()))[0] == Approx(psi_g2).epsilon(1e-14));
  CHECK(psi(half_pi(g2()))[0] == Approx(2.4393469).margin(1e-7));
}

TEST_CASE("KdV field Xi", "[torus]") {
  CHECK(xi(half_pi(g1()))[0] == Approx(2.0 * 3.0 * 2.0 * std::sqrt(1.5)).epsilon(1e-14));
  CHECK(xi(half_pi(g1()))[0] == Approx(14.6969385).margin(1e-7));
  CHECK(xi(at(g1(), {0.0}))[0] == Approx(16.9705627).margin(1e-7));

  // With E = -3 and one gap (1, 2), Q1 + 2 mu = E + lo + hi = 0 everywhere.
  const auto zero = std::make_shared<const GapSet>(-3.0, std::vector<Gap>{{1.0, 2.0}});
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 20; ++s) CHECK(xi(at(zero, random_phi(rng, 1)))[0] == Approx(0.0).margin(1e-13));
}

TEST_CASE("fields are positive and 2 pi periodic", "[torus][property]") {
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 300; ++s) {
    const auto gs = random_gapset(rng, 1 + s % 6);
    const auto phi = random_phi(rng, gs->size());
    auto shifted = phi;
    shifted[s % gs->size()] += 2.0 * kPi;
    const auto a = psi(at(gs, phi)), b = psi(at(gs, shifted));
    const auto xa = xi(at(gs, phi)), xb = xi(at(gs, shifted));
    for (std::size_t j = 0; j < gs->size(); ++j) {
      CHECK(a[j] > 0.0);
      CHECK(a[j] == Approx(b[j]).epsilon(1e-12));
      CHECK(xa[j] == Approx(xb[j]).epsilon(1e-12).margin(1e-12));
    }
  }
}

TEST_CASE("Lipschitz majorants dominate sampled difference quotients", "[torus][property]") {
  CHECK(lipschitz_bounds(*empty_set()).L_psi == 0.0);
  CHECK(lipschitz_bounds(*empty_set()).L_xi == 0.0);

  SplitMix64 rng(kSeed);
  for (const auto& gs : {g1(), g2()}) {
    const LipschitzBounds lb = lipschitz_bounds(*gs);
    REQUIRE(std::isfinite(lb.L_psi));
    REQUIRE(lb.L_psi > 0.0);
    double worst_psi = 0.0, worst_xi = 0.0;
    for (int s = 0; s < 1000; ++s) {
      const auto a = random_phi(rng, gs->size());
      auto b = a;
      const double scale = s % 2 == 0 ? 1e-3 : 1.0;
      for (double& v : b) v += scale * rng.uniform(-1.0, 1.0);
      const double d = metric(*gs, a, b);
      if (d == 0.0) continue;
      const auto pa = psi(at(gs, a)), pb = psi(at(gs, b));
      const auto xa = xi(at(gs, a)), xb = xi(at(gs, b));
      std::vector<double> dp(gs->size()), dx(gs->size());
      for (std::size_t j = 0; j < gs->size(); ++j) {
        dp[j] = pa[j] - pb[j];
        dx[j] = xa[j] - xb[j];
      }
      worst_psi = std::max(worst_psi, weighted_sup(*gs, dp) / d);
      worst_xi = std::max(worst_xi, weighted_sup(*gs, dx) / d);
    }
    CHECK(worst_psi <= lb.L_psi);
    CHECK(worst_xi <= lb.L_xi);
  }
}

TEST_CASE("Lipschitz majorant grows under energy scaling", "[torus]") {
  const GapSet a(0.0, {{1.0, 2.0}, {4.0, 4.5}});
  const GapSet b(0.0, {{2.0, 4.0}, {8.0, 9.0}});
  CHECK(lipschitz_bounds(b).L_xi >= lipschitz_bounds(a).L_xi);
}

TEST_CASE("lifted truncation fields", "[torus]") {
  const auto b = g2();
  const auto p = half_pi(b);

  const LiftedFields full = lift_fields(*b, 2, p);
  CHECK(full.psi == psi(p));
  CHECK(full.xi == xi(p));

  const LiftedFields one = lift_fields(*b, 1, p);
  const double mu1 = mu_of(b->gap(0), p.phi(0));
  CHECK(one.psi[0] == Approx(2.0 * std::sqrt(mu1)).epsilon(1e-14));
  // The dropped gap is driven by the full field with the kept gap active.
  CHECK(one.psi[1] == Approx(psi(p)[1]).epsilon(1e-14));
  // Q1 of the truncation ignores the dropped gap.
  const double q1 = 1.0 + 2.0 - 2.0 * mu1;
  const double mu2 = mu_of(b->gap(1), p.phi(1));
  CHECK(one.xi[1] == Approx(2.0 * (q1 + 2.0 * mu2) * one.psi[1]).epsilon(1e-14));
}

TEST_CASE("Q_k continuity modulus", "[torus][property]") {
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 200; ++s) {
    const auto gs = random_gapset(rng, 1 + s % 4);
    const auto a = random_phi(rng, gs->size()), b = random_phi(rng, gs->size());
    const double d = metric(*gs, a, b);
    for (int k = 1; k <= 3; ++k)
      CHECK(std::abs(q_field(at(gs, a), k) - q_field(at(gs, b), k)) <= q_modulus(*gs, k) * d + 1e-12);
  }
}
