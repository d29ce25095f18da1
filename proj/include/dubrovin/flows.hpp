#pragma once

// Integration of the commuting flows d/dx phi = Psi(phi) and d/dt phi = Xi(phi)
// on the torus: single flows, (x, t) lattices, and gap-edge crossing reports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dubrovin/errors.hpp"
#include "dubrovin/integrator.hpp"
#include "dubrovin/torus.hpp"

namespace dubrovin {

enum class Flow { x, t };

[[nodiscard]] inline std::vector<double> metric_weights(const GapSet& gs) {
  std::vector<double> w(gs.size());
  for (std::size_t j = 0; j < gs.size(); ++j) w[j] = std::sqrt(gs.gamma(j));
  return w;
}

[[nodiscard]] inline auto make_integrator(const FieldModel& model, Flow flow, double tol) {
  auto field = [&model, flow](std::span<const double> y, std::span<double> dy) {
    if (flow == Flow::x)
      model.psi(y, dy);
    else
      model.xi(y, dy);
  };
  return DormandPrince<decltype(field)>(field, metric_weights(model.gapset()), tol);
}

/// Flows `phi` by `ds` along one field of `model`. For the x-flow with ds > 0,
/// every accepted step must increase every lifted angle (Psi > 0); a violation
/// is reported as a NumericalError.
inline void flow_in_place(const FieldModel& model, Flow flow, std::vector<double>& phi, double ds, double tol,
                          StepStats* stats = nullptr) {
  if (ds == 0.0 || phi.empty()) return;
  auto rk = make_integrator(model, flow, tol);
  if (flow == Flow::x) {
    const double dir = ds > 0.0 ? 1.0 : -1.0;
    rk.integrate(phi, 0.0, ds, [dir](const StepRecord& r) {
      for (std::size_t j = 0; j < r.y0.size(); ++j)
        if (!(dir * (r.y1[j] - r.y0[j]) > 0.0)) throw NumericalError("flow_x: lifted angle failed to advance");
    });
  } else {
    rk.integrate(phi, 0.0, ds);
  }
  if (stats) *stats += rk.stats();
}

[[nodiscard]] inline DirichletAngles flow_x(const DirichletAngles& p, double dx, double tol,
                                            StepStats* stats = nullptr) {
  std::vector<double> phi(p.phi().begin(), p.phi().end());
  flow_in_place(FieldModel(p.gapset()), Flow::x, phi, dx, tol, stats);
  return p.with_phi(std::move(phi));
}

[[nodiscard]] inline DirichletAngles flow_t(const DirichletAngles& p, double dt, double tol,
                                            StepStats* stats = nullptr) {
  std::vector<double> phi(p.phi().begin(), p.phi().end());
  flow_in_place(FieldModel(p.gapset()), Flow::t, phi, dt, tol, stats);
  return p.with_phi(std::move(phi));
}

/// A point together with its (x, t) position and accumulated step statistics.
struct FlowState {
  double x = 0.0;
  double t = 0.0;
  DirichletAngles point;
  double tol = 1e-10;
  StepStats stats;

  void advance_x(double dx) {
    point = flow_x(point, dx, tol, &stats);
    x += dx;
  }
  void advance_t(double dt) {
    point = flow_t(point, dt, tol, &stats);
    t += dt;
  }
};

// ---------------------------------------------------------------------------
// Lattices.

struct TrajectoryGrid {
  std::shared_ptr<const GapSet> gapset;
  std::vector<double> x_nodes;
  std::vector<double> t_nodes;
  std::vector<std::vector<double>> points;  ///< row-major: points[i * nt + j] at (x_i, t_j)
  double tol = 0.0;
  StepStats stats;

  [[nodiscard]] std::size_t nx() const { return x_nodes.size(); }
  [[nodiscard]] std::size_t nt() const { return t_nodes.size(); }
  [[nodiscard]] std::span<const double> phi(std::size_t i, std::size_t j) const { return points[i * nt() + j]; }
  [[nodiscard]] DirichletAngles at(std::size_t i, std::size_t j) const {
    const auto v = phi(i, j);
    return {gapset, std::vector<double>(v.begin(), v.end())};
  }
};

[[nodiscard]] inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

namespace detail {

inline std::size_t zero_index(std::span<const double> nodes, const char* name) {
  if (nodes.empty()) throw ConfigError(std::string("grid: ") + name + " is empty");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw ConfigError(std::string("grid: ") + name + " must be strictly ascending");
  const auto it = std::find(nodes.begin(), nodes.end(), 0.0);
  if (it == nodes.end()) throw ConfigError(std::string("grid: ") + name + " must contain 0");
  return static_cast<std::size_t>(it - nodes.begin());
}

/// Integrates node to node outward from nodes[k0] = 0, writing into out[i].
template <class Sink>
void sweep_nodes(const FieldModel& model, Flow flow, std::span<const double> nodes, std::size_t k0,
                 const std::vector<double>& start, double tol, StepStats& stats, Sink&& out) {
  out(k0, start);
  for (int dir : {1, -1}) {
    auto rk = make_integrator(model, flow, tol);
    std::vector<double> y = start;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(k0) + dir;
         i >= 0 && i < static_cast<std::ptrdiff_t>(nodes.size()); i += dir) {
      rk.integrate(y, nodes[i - dir], nodes[i]);
      out(static_cast<std::size_t>(i), y);
    }
    stats += rk.stats();
  }
}

}  // namespace detail

/// Integrates in t along x = 0 first, then in x along every t node. Columns
/// are distributed over `threads` workers; each column is computed by one
/// worker in a fixed order, so the output does not depend on scheduling.
[[nodiscard]] inline TrajectoryGrid grid(const FieldModel& model, std::shared_ptr<const GapSet> gs,
                                         const std::vector<double>& phi0, std::vector<double> x_nodes,
                                         std::vector<double> t_nodes, double tol, unsigned threads = 0) {
  if (phi0.size() != model.size()) throw ConfigError("grid: initial point has wrong dimension");
  const std::size_t ix0 = detail::zero_index(x_nodes, "x_nodes");
  const std::size_t it0 = detail::zero_index(t_nodes, "t_nodes");
  TrajectoryGrid g;
  g.gapset = std::move(gs);
  g.x_nodes = std::move(x_nodes);
  g.t_nodes = std::move(t_nodes);
  g.tol = tol;
  const std::size_t nx = g.nx(), nt = g.nt();
  g.points.assign(nx * nt, {});

  std::vector<std::vector<double>> spine(nt);
  detail::sweep_nodes(model, Flow::t, g.t_nodes, it0, phi0, tol, g.stats,
                      [&](std::size_t j, const std::vector<double>& y) { spine[j] = y; });

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, nt));
  std::vector<StepStats> column_stats(nt);
  std::vector<std::exception_ptr> errors(threads);
  const auto work = [&](unsigned w) {
    try {
      for (std::size_t j = w; j < nt; j += threads)
        detail::sweep_nodes(model, Flow::x, g.x_nodes, ix0, spine[j], tol, column_stats[j],
                            [&](std::size_t i, const std::vector<double>& y) { g.points[i * nt + j] = y; });
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& s : column_stats) g.stats += s;
  return g;
}

[[nodiscard]] inline TrajectoryGrid grid(const DirichletAngles& p0, std::vector<double> x_nodes,
                                         std::vector<double> t_nodes, double tol, unsigned threads = 0) {
  const FieldModel model(p0.gapset());
  return grid(model, p0.gapset_ptr(), std::vector<double>(p0.phi().begin(), p0.phi().end()), std::move(x_nodes),
              std::move(t_nodes), tol, threads);
}

// ---------------------------------------------------------------------------
// Gap-edge crossings.

struct Crossing {
  std::size_t j = 0;
  double x = 0.0;
  double rate = 0.0;  ///< Psi_j at the crossing
  long k = 0;         ///< phi_j = k pi there
};

struct CrossingReport {
  std::vector<Crossing> crossings;
  std::vector<double> min_separation;  ///< per gap; +inf with fewer than two crossings
  std::vector<double> max_psi;         ///< per gap, over accepted steps
  StepStats stats;
};

/// Locates every x in [0, x_max] with phi_j(x) in pi Z. Candidates come from
/// the Hermite interpolant of each accepted step and are refined by Newton
/// iteration on re-integrated values (dphi_j/dx = Psi_j > 0) to 1e-10 in x.
[[nodiscard]] inline CrossingReport crossing_report(const DirichletAngles& p0, double x_max, double tol) {
  const FieldModel model(p0.gapset());
  const std::size_t n = p0.size();
  CrossingReport rep;
  rep.min_separation.assign(n, std::numeric_limits<double>::infinity());
  rep.max_psi.assign(n, 0.0);
  if (!(x_max > 0.0) || n == 0) return rep;

  constexpr double pi = std::numbers::pi;
  std::vector<double> psi_buf(n);
  const auto refine = [&](const StepRecord& r, std::size_t j, double target) {
    double lo = r.s0, hi = r.s1;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (r.interpolate(j, mid) < target ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    std::vector<double> y;
    for (int it = 0; it < 20; ++it) {
      y.assign(r.y0.begin(), r.y0.end());
      auto rk = make_integrator(model, Flow::x, tol);
      rk.integrate(y, r.s0, x);
      rep.stats += rk.stats();
      model.psi(y, psi_buf);
      const double step = (y[j] - target) / psi_buf[j];
      x = std::clamp(x - step, r.s0, r.s1);
      if (std::abs(step) < 1e-11) break;
    }
    y.assign(r.y0.begin(), r.y0.end());
    auto rk = make_integrator(model, Flow::x, tol);
    rk.integrate(y, r.s0, x);
    model.psi(y, psi_buf);
    return std::pair{x, psi_buf[j]};
  };

  std::vector<double> y(p0.phi().begin(), p0.phi().end());
  for (std::size_t j = 0; j < n; ++j) {
    if (std::remainder(y[j], pi) == 0.0) {
      model.psi(y, psi_buf);
      rep.crossings.push_back({j, 0.0, psi_buf[j], std::lround(y[j] / pi)});
    }
  }
  auto rk = make_integrator(model, Flow::x, tol);
  rk.integrate(y, 0.0, x_max, [&](const StepRecord& r) {
    for (std::size_t j = 0; j < n; ++j) {
      rep.max_psi[j] = std::max({rep.max_psi[j], r.f0[j], r.f1[j]});
      const long k_first = static_cast<long>(std::floor(r.y0[j] / pi)) + 1;
      const long k_last = static_cast<long>(std::floor(r.y1[j] / pi));
      for (long k = k_first; k <= k_last; ++k) {
        const auto [x, rate] = refine(r, j, static_cast<double>(k) * pi);
        rep.crossings.push_back({j, x, rate, k});
      }
    }
  });
  rep.stats += rk.stats();
  std::stable_sort(rep.crossings.begin(), rep.crossings.end(),
                   [](const Crossing& a, const Crossing& b) { return a.x < b.x; });
  std::vector<double> last(n, std::numeric_limits<double>::quiet_NaN());
  for (const Crossing& c : rep.crossings) {
    if (!std::isnan(last[c.j])) rep.min_separation[c.j] = std::min(rep.min_separation[c.j], c.x - last[c.j]);
    last[c.j] = c.x;
  }
  return rep;
}

/// x-period of a one-gap potential: the integral of dphi / Psi(phi) over a
/// full turn, by the trapezoidal rule (spectrally accurate for periodic data).
[[nodiscard]] inline double x_period(const GapSet& gs, std::size_t nodes = 512) {
  if (gs.size() != 1) throw std::invalid_argument("x_period: defined for one-gap sets only");
  const FieldModel model(gs);
  double s = 0.0;
  std::vector<double> phi(1), out(1);
  for (std::size_t i = 0; i < nodes; ++i) {
    phi[0] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nodes);
    model.psi(phi, out);
    s += 1.0 / out[0];
  }
  return s * 2.0 * std::numbers::pi / static_cast<double>(nodes);
}

}  // namespace dubrovin
