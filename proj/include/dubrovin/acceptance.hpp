#pragma once

// The acceptance suite: one check per criterion, shared by `dubrovin verify`
// and the acceptance test binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "dubrovin/abel.hpp"
#include "dubrovin/approx.hpp"
#include "dubrovin/flows.hpp"
#include "dubrovin/gapset.hpp"
#include "dubrovin/oracle.hpp"
#include "dubrovin/reconstruct.hpp"
#include "dubrovin/rng.hpp"
#include "dubrovin/torus.hpp"

namespace dubrovin::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  ///< runtime budget in seconds
};

struct Inputs {
  std::shared_ptr<const GapSet> g1 = std::make_shared<const GapSet>(0.0, std::vector<Gap>{{1.0, 2.0}});
  std::shared_ptr<const GapSet> g2 = std::make_shared<const GapSet>(0.0, std::vector<Gap>{{1.0, 2.0}, {4.0, 4.5}});
  std::uint64_t seed = 20240601;
};

namespace detail {

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline std::vector<double> half_pi(const GapSet& gs) { return std::vector<double>(gs.size(), 0.5 * std::numbers::pi); }

inline Result closure(const Inputs& in, int id, bool fourth) {
  Result r{id, fourth ? "Fourth-order trace closure" : "Second-order trace closure", false, {}, 0.0, 10.0};
  const std::vector<double> steps{1e-2, 5e-3, 2.5e-3};
  const auto rep = trace_closure(DirichletAngles(in.g2, half_pi(*in.g2)), -5.0, 5.0, 501, steps, 1e-12);
  const double bound = fourth ? 1e-2 : 1e-3;
  const auto& slopes = fourth ? rep.slopes_d4 : rep.slopes_d2;
  const double err = fourth ? rep.levels[0].err_d4 : rep.levels[0].err_d2;
  const bool slopes_ok = std::all_of(slopes.begin(), slopes.end(), [](double s) { return s >= 1.8 && s <= 2.2; });
  r.passed = err < bound && slopes_ok;
  r.detail = fmt("max error %.3e at h=1e-2 (bound %.0e); at h=5e-3 %.3e, h=2.5e-3 %.3e; slopes %.3f, %.3f", err, bound,
                 fourth ? rep.levels[1].err_d4 : rep.levels[1].err_d2,
                 fourth ? rep.levels[2].err_d4 : rep.levels[2].err_d2, slopes[0], slopes[1]);
  return r;
}

}  // namespace detail

inline Result dubrovin_identity(const Inputs& in) {
  Result r{1, "Dubrovin time-derivative identity", false, {}, 0.0, 1.0};
  SplitMix64 rng(in.seed);
  double worst = 0.0;
  for (const auto& gs : {in.g1, in.g2}) {
    for (int s = 0; s < 1000; ++s) {
      std::vector<double> phi(gs->size());
      for (double& v : phi) {
        // Angles bounded away from pi Z keep every mu interior.
        v = rng.uniform(1e-3, std::numbers::pi - 1e-3);
        if (rng.uniform() < 0.5) v = -v;
      }
      const auto c = dmu_dt_check(DirichletAngles(gs, phi));
      for (double x : c.residual) worst = std::max(worst, x);
    }
  }
  r.passed = worst < 1e-12;
  r.detail = detail::fmt("max residual %.3e over 2000 points (bound 1e-12)", worst);
  return r;
}

inline Result trace_second(const Inputs& in) { return detail::closure(in, 2, false); }
inline Result trace_fourth(const Inputs& in) { return detail::closure(in, 3, true); }

inline Result kdv_residual(const Inputs& in) {
  Result r{4, "KdV residual of Dubrovin grids", true, {}, 0.0, 60.0};
  for (const auto& gs : {in.g1, in.g2}) {
    const auto g = grid(DirichletAngles(gs, detail::half_pi(*gs)), linspace(-5.0, 5.0, 1001),
                        linspace(-0.05, 0.05, 101), 1e-10);
    const auto rep = residual(trace_derivatives(g));
    const double bound = 1e-4 * std::max(1.0, rep.u_sup);
    r.passed = r.passed && rep.max_residual < bound;
    r.detail += detail::fmt("%sN=%zu: %.3e (bound %.2e)", r.detail.empty() ? "" : "; ", gs->size(),
                            rep.max_residual, bound);
  }
  return r;
}

inline Result commutation(const Inputs& in) {
  Result r{5, "Flow commutation", false, {}, 0.0, 5.0};
  const double tol = 1e-10;
  const DirichletAngles p(in.g2, detail::half_pi(*in.g2));
  const auto xt = flow_t(flow_x(p, 1.0, tol), 0.1, tol);
  const auto tx = flow_x(flow_t(p, 0.1, tol), 1.0, tol);
  const double d = metric(xt, tx);
  r.passed = d < 10.0 * tol;
  r.detail = detail::fmt("metric discrepancy %.3e (bound %.0e)", d, 10.0 * tol);
  return r;
}

inline Result oracle_equivalence(const Inputs& in) {
  Result r{6, "Pseudo-spectral oracle equivalence", false, {}, 0.0, 120.0};
  const std::size_t n = 512;
  const double period = x_period(*in.g1);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = period * static_cast<double>(i) / static_cast<double>(n);
  const auto g = grid(DirichletAngles(in.g1, detail::half_pi(*in.g1)), xs, {0.0, 0.05}, 1e-12);
  const auto f = potential(g);
  PeriodicField init{period, {}, 0.0};
  for (std::size_t i = 0; i < n; ++i) init.samples.push_back(f.u[f.index(i, 0)]);
  const auto out = kdv_step(init, 1e-5, 5000);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(out.samples[i] - f.u[f.index(i, 1)]));
  r.passed = d < 1e-3;
  r.detail = detail::fmt("L-inf difference %.3e at t=0.05 (bound 1e-3)", d);
  return r;
}

inline Result abel_linearization(const Inputs& in) {
  Result r{7, "Abel-map linearization", false, {}, 0.0, 60.0};
  const HarmonicBasis basis(in.g2);
  const DirichletAngles p(in.g2, detail::half_pi(*in.g2));
  double res[2];
  const double tols[2] = {1e-8, 1e-10};
  for (int k = 0; k < 2; ++k)
    res[k] = linearization_fit(basis, grid(p, linspace(0.0, 1.0, 21), linspace(0.0, 0.1, 11), tols[k])).max_residual;
  const double ratio = res[0] / res[1];
  r.passed = res[1] < 1e-6 && ratio >= 10.0;
  r.detail = detail::fmt("fit residual %.3e at tol 1e-10 (bound 1e-6), %.3e at tol 1e-8, ratio %.1f (need >= 10)",
                         res[1], res[0], ratio);
  return r;
}

inline Result harmonic_basis(const Inputs& in) {
  Result r{8, "Harmonic basis periods", true, {}, 0.0, 1.0};
  for (const auto& gs : {in.g1, in.g2}) {
    const HarmonicBasis b(gs, 64);
    const auto n = static_cast<Eigen::Index>(gs->size());
    const double res = (b.period_matrix(64) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    const double diff = (b.period_matrix(128) - b.period_matrix(64)).cwiseAbs().maxCoeff();
    r.passed = r.passed && res < 1e-10 && diff < 1e-12;
    r.detail += detail::fmt("%sN=%zu: residual %.2e, order-128 change %.2e", r.detail.empty() ? "" : "; ",
                            gs->size(), res, diff);
  }
  return r;
}

inline Result truncation_stability(const Inputs&) {
  Result r{9, "Truncation stability and convergence", false, {}, 0.0, 120.0};
  const auto gs = std::make_shared<const GapSet>(make_geometric_family(8));
  const auto table = approximant_sweep(gs, {2, 3, 4, 5, 6}, detail::half_pi(*gs), Window{}, 1e-10);
  bool stable = true, bounded = true;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& row : table.rows) {
    stable = stable && row.stability_ok;
    bounded = bounded && row.bound_ok;
    worst_ratio = std::min(worst_ratio, row.stability_worst_ratio);
  }
  r.passed = stable && bounded && table.strictly_decreasing;
  std::string ds;
  for (const auto& row : table.rows) ds += detail::fmt("%s%.2e", ds.empty() ? "" : ",", row.d_n);
  r.detail = detail::fmt("D_N = [%s]; decreasing %s; stability bound slack >= %.1fx; K_N bounds %s", ds.c_str(),
                         table.strictly_decreasing ? "yes" : "no", worst_ratio, bounded ? "hold" : "violated");
  return r;
}

inline Result non_pausing(const Inputs& in) {
  Result r{10, "Transversal gap-edge crossings", false, {}, 0.0, 5.0};
  const DirichletAngles p(in.g1, detail::half_pi(*in.g1));
  const auto rep = crossing_report(p, 20.0, 1e-12);
  const GapSet& gs = *in.g1;
  bool rates_ok = !rep.crossings.empty();
  double worst_lower = 0.0;
  for (const auto& c : rep.crossings) {
    const double floor = 2.0 * std::sqrt(gs.eta0(c.j)) * (1.0 - 1e-6);
    if (c.rate < floor) rates_ok = false;
    if (c.k % 2 != 0) worst_lower = std::max(worst_lower, std::abs(c.rate - 2.0));
  }
  bool separated = true;
  for (std::size_t j = 0; j < gs.size(); ++j)
    if (rep.min_separation[j] < std::numbers::pi / rep.max_psi[j] * (1.0 - 1e-9)) separated = false;
  r.passed = rates_ok && worst_lower < 1e-8 && separated;
  r.detail = detail::fmt("%zu crossings on [0,20]; |rate - 2| at lower edge <= %.2e; min separation %.4f vs pi/max Psi %.4f",
                         rep.crossings.size(), worst_lower, rep.min_separation[0], std::numbers::pi / rep.max_psi[0]);
  return r;
}

inline Result family_checkers(const Inputs&) {
  Result r{11, "Quasi-periodic and divergent family checkers", false, {}, 0.0, 1.0};
  const double threshold = 100.0;
  const QPGapFamily fam = make_qp_family({0.5 * (1.0 + std::sqrt(5.0))}, 0.1, 2.0, 1e-3, 1.0, 12);
  const QPReport qr = qp_family_check(fam, QPConstants{1.0, 1.0, 1.0, 26.0, 1.0, 12.0});
  const CraigReport qc = craig_check(fam.to_gapset(), threshold);
  const bool qp_ok = qr.gamma_ok && qc.craig2_ok && qc.trace_ok;
  double prev = 0.0;
  bool growing = true;
  double last = 0.0;
  for (std::size_t n : {256u, 1024u, 4096u}) {
    last = craig_check(make_power_family(n, 1.0)).sum_sqrt_gamma;
    if (!(last > 1.5 * prev)) growing = false;
    prev = last;
  }
  const bool diverges = growing && last > threshold;
  r.passed = qp_ok && diverges;
  r.detail = detail::fmt("QP family (%zu labels): gamma %s, sum gamma^1/2 %.3e, trace sum %.3e; "
                         "gamma_j=1/j at N=4096: sum gamma^1/2 %.1f vs threshold %.0f (%s)",
                         fam.labels.size(), qr.gamma_ok ? "ok" : "fails", qc.sum_sqrt_gamma, qc.trace_sum, last,
                         threshold, diverges ? "exceeds, growing" : "does not exceed");
  return r;
}

struct Criterion {
  int id;
  bool quick;  ///< part of the fast subset (budget <= 5 s)
  std::function<Result(const Inputs&)> run;
};

[[nodiscard]] inline std::vector<Criterion> criteria() {
  return {{1, true, dubrovin_identity},    {2, false, trace_second},       {3, false, trace_fourth},
          {4, false, kdv_residual},        {5, true, commutation},         {6, false, oracle_equivalence},
          {7, false, abel_linearization},  {8, true, harmonic_basis},      {9, false, truncation_stability},
          {10, true, non_pausing},         {11, true, family_checkers}};
}

/// Runs one criterion, timing it; exceptions become failures. A criterion
/// that exceeds its runtime budget fails.
[[nodiscard]] inline Result run(const Criterion& c, const Inputs& in) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  try {
    r = c.run(in);
  } catch (const std::exception& e) {
    r.id = c.id;
    r.name = "criterion " + std::to_string(c.id);
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget > 0.0 && r.seconds > r.budget) {
    r.passed = false;
    r.detail += detail::fmt(" [over runtime budget %.0f s]", r.budget);
  }
  return r;
}

[[nodiscard]] inline std::string format_line(const Result& r) {
  return detail::fmt("[%s] %2d %-46s %s (%.2f s)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                     r.seconds);
}

}  // namespace dubrovin::acceptance
