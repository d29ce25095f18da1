#pragma once

#include <memory>
#include <numbers>
#include <vector>

#include "dubrovin/gapset.hpp"
#include "dubrovin/rng.hpp"
#include "dubrovin/torus.hpp"

namespace dubrovin::testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr std::uint64_t kSeed = 20240601;

inline std::shared_ptr<const GapSet> g1() {
  return std::make_shared<const GapSet>(0.0, std::vector<Gap>{{1.0, 2.0}});
}

inline std::shared_ptr<const GapSet> g2() {
  return std::make_shared<const GapSet>(0.0, std::vector<Gap>{{1.0, 2.0}, {4.0, 4.5}});
}

inline std::shared_ptr<const GapSet> empty_set(double base = 0.0) {
  return std::make_shared<const GapSet>(base, std::vector<Gap>{});
}

inline DirichletAngles at(const std::shared_ptr<const GapSet>& gs, std::vector<double> phi) {
  return {gs, std::move(phi)};
}

inline DirichletAngles half_pi(const std::shared_ptr<const GapSet>& gs) {
  return {gs, std::vector<double>(gs->size(), 0.5 * kPi)};
}

/// Random gap set with n gaps above E = `base`, separated by at least `sep`.
inline std::shared_ptr<const GapSet> random_gapset(SplitMix64& rng, std::size_t n, double base = 0.0,
                                                   double sep = 0.3) {
  std::vector<Gap> gaps;
  double e = base + rng.uniform(0.2, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double len = rng.uniform(0.05, 1.0);
    gaps.push_back({e, e + len});
    e += len + sep + rng.uniform(0.0, 1.5);
  }
  return std::make_shared<const GapSet>(base, std::move(gaps));
}

/// Angles away from pi Z so that every mu is interior.
inline std::vector<double> random_interior_phi(SplitMix64& rng, std::size_t n, double margin = 1e-2) {
  std::vector<double> phi(n);
  for (double& v : phi) {
    v = rng.uniform(margin, kPi - margin);
    if (rng.uniform() < 0.5) v = -v;
  }
  return phi;
}

inline std::vector<double> random_phi(SplitMix64& rng, std::size_t n) {
  std::vector<double> phi(n);
  for (double& v : phi) v = rng.uniform(-kPi, kPi);
  return phi;
}

}  // namespace dubrovin::testing
