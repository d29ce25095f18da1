#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dubrovin/errors.hpp"
#include "dubrovin/gapset.hpp"
#include "support.hpp"

using namespace dubrovin;
using namespace dubrovin::testing;
using Catch::Approx;

TEST_CASE("gap geometry of the one- and two-gap sets", "[gapset]") {
  const auto a = g1();
  CHECK(a->gamma(0) == 1.0);
  CHECK(a->eta0(0) == 1.0);
  CHECK(c_constant(*a, 0) == Approx(std::sqrt(2.0)).epsilon(1e-14));

  const auto b = g2();
  CHECK(b->eta(0, 1) == 2.0);
  CHECK(c_constant(*b, 0) == Approx(std::sqrt(2.0) * std::sqrt(1.25)).epsilon(1e-14));
  CHECK(c_constant(*b, 0) == Approx(1.5811388).margin(1e-7));

  CHECK(geometry(*empty_set()).empty());
}

TEST_CASE("gap sets reject malformed input", "[gapset]") {
  CHECK_THROWS_AS(GapSet(0.0, {{2.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(GapSet(0.0, {{-1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(GapSet(0.0, {{1.0, 2.0}, {1.5, 3.0}}), ConfigError);
  CHECK_THROWS_AS(GapSet(0.0, {{1.0, 2.0}, {2.0, 3.0}}), ConfigError);
  CHECK_THROWS_AS(GapSet(0.0, {{1.0, std::nan("")}}), ConfigError);
  CHECK_NOTHROW(GapSet(0.0, {{1.0, 2.0}, {2.1, 3.0}}));
}

TEST_CASE("Craig sums of the one-gap set and the empty set", "[gapset]") {
  const CraigReport r = craig_check(*g1());
  CHECK(std::isfinite(r.sum_gamma));
  CHECK(std::isfinite(r.sup_weighted_c));
  CHECK(r.trace_sum == Approx(2.0).epsilon(1e-15));
  CHECK(r.craig1_ok);
  CHECK(r.craig2_ok);
  CHECK(r.trace_ok);

  const CraigReport e = craig_check(*empty_set());
  CHECK(e.sum_gamma == 0.0);
  CHECK(e.sum_sqrt_gamma == 0.0);
  CHECK(e.sup_gamma_c == 0.0);
  CHECK(e.sup_cross_sum == 0.0);
  CHECK(e.trace_sum == 0.0);
}

TEST_CASE("geometric family has summable square-root gap lengths", "[gapset]") {
  const GapSet gs = make_geometric_family(6);
  const CraigReport r = craig_check(gs);
  CHECK(r.sum_sqrt_gamma == Approx(1.0 - std::pow(2.0, -6)).epsilon(1e-14));
  CHECK(r.sum_sqrt_gamma <= 1.0);
  for (std::size_t j = 0; j < gs.size(); ++j) CHECK(gs.eta0(j) == Approx(static_cast<double>(j + 1)));
}

TEST_CASE("threshold flags follow the finite sums", "[gapset]") {
  const GapSet gs = make_power_family(4096, 1.0);
  const CraigReport r = craig_check(gs, 100.0);
  CHECK(r.sum_sqrt_gamma > 100.0);
  CHECK_FALSE(r.craig2_ok);
  CHECK(r.craig1_ok);

  // The strengthened set implies the first.
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 50; ++s) {
    const auto g = random_gapset(rng, 1 + s % 6);
    const CraigReport c = craig_check(*g, rng.uniform(0.5, 20.0));
    if (c.craig2_ok) CHECK(c.craig1_ok);
  }
}

TEST_CASE("spectrum measure and Carleson homogeneity", "[gapset]") {
  CHECK(spectrum_measure(*g1(), 0.0, 2.0) == Approx(1.0));
  CHECK(carleson_check(*g1(), 0.5, 64).ok);
  CHECK(carleson_check(*empty_set(), 1.0, 64).ok);

  const GapSet wide(0.0, {{1.0, 100.0}});
  CHECK(spectrum_measure(wide, 0.0, 2.0) == Approx(1.0));
  const CarlesonReport r = carleson_check(wide, 0.5, 64);
  CHECK(r.worst_ratio <= 1.0 + 1e-12);
  CHECK_THROWS(carleson_check(wide, 1.5, 64));

  // A short band between two long gaps is thin at scale 1.
  const GapSet thin(0.0, {{1.0, 100.0}, {100.001, 200.0}});
  const CarlesonReport t = carleson_check(thin, 0.5, 64);
  CHECK_FALSE(t.ok);
  CHECK(t.worst_ratio < 0.01);
}

TEST_CASE("spectrum measure is additive", "[gapset][property]") {
  SplitMix64 rng(kSeed);
  for (int s = 0; s < 200; ++s) {
    const auto gs = random_gapset(rng, 4);
    const double a = rng.uniform(-1.0, 10.0), b = a + rng.uniform(0.0, 5.0), c = b + rng.uniform(0.0, 5.0);
    CHECK(spectrum_measure(*gs, a, c) ==
          Approx(spectrum_measure(*gs, a, b) + spectrum_measure(*gs, b, c)).margin(1e-12));
    CHECK(spectrum_measure(*gs, a, c) <= c - a + 1e-12);
  }
}

TEST_CASE("truncation keeps the largest gaps", "[gapset]") {
  const auto b = g2();
  const Truncation one = truncate(*b, 1);
  CHECK(one.gapset == GapSet(0.0, {{1.0, 2.0}}));
  CHECK(one.kept == std::vector<std::size_t>{0});
  CHECK(truncate(*b, 2).gapset == *b);
  CHECK(truncate(*b, 0).gapset.empty());
  CHECK_THROWS(truncate(*b, 3));

  const GapSet geo = make_geometric_family(8);
  const auto mask = kept_mask(truncate(geo, 3));
  CHECK(mask == std::vector<bool>{true, true, true, false, false, false, false, false});
}

TEST_CASE("quasi-periodic checker", "[gapset][qp]") {
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));

  SECTION("strictly majorised gap lengths pass the gamma bound") {
    const QPGapFamily fam = make_qp_family({golden}, 0.1, 2.0, 1e-3, 1.0, 12);
    CHECK(fam.labels.size() == 12);
    CHECK(qp_family_check(fam, {}).gamma_ok);
  }

  SECTION("an explicit violation of the eta_{m,0} upper bound is reported") {
    QPGapFamily fam;
    fam.omega = {golden};
    fam.a0 = 0.1;
    fam.b0 = 2.0;
    fam.epsilon = 1e-3;
    fam.kappa0 = 1.0;
    QPConstants k;
    k.c = 1.0;
    fam.labels.push_back({{1}, 1e-4, k.c * 1.0 + 1.0});
    const QPReport r = qp_family_check(fam, k);
    CHECK_FALSE(r.eta_m0_ok);
    REQUIRE(r.first_violation.has_value());
    CHECK(r.first_violation->find("eta_{m,0}") != std::string::npos);
  }

  SECTION("golden-ratio labels up to |m| = 8 have empty R_m") {
    const QPGapFamily fam = make_qp_family({golden}, 0.1, 2.0, 1e-3, 1.0, 8);
    const QPReport r = qp_family_check(fam, {});
    for (const auto& l : r.labels) CHECK(l.r_m == 0);
    CHECK(r.r_m_ok);
  }

  SECTION("shipped constants accept the golden family") {
    const QPGapFamily fam = make_qp_family({golden}, 0.1, 2.0, 1e-3, 1.0, 12);
    const QPReport r = qp_family_check(fam, QPConstants{1.0, 1.0, 1.0, 26.0, 1.0, 12.0});
    CHECK(r.ok());
    const CraigReport c = craig_check(fam.to_gapset(), 100.0);
    CHECK(c.craig2_ok);
    CHECK(c.trace_ok);
  }

  SECTION("bad parameters are config errors") {
    CHECK_THROWS_AS(make_qp_family({}, 0.1, 2.0, 1e-3, 1.0, 4), ConfigError);
    CHECK_THROWS_AS(make_qp_family({golden}, 0.1, 2.0, 1e-3, 1.0, 0), ConfigError);
  }
}
