#pragma once

// Convergence of finite-gap approximants: trajectories of the lifted fields
// of truncations against the largest model, with the a priori stability
// constants, and C^0/C^2/C^4 distances of the reconstructed potentials.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dubrovin/flows.hpp"
#include "dubrovin/reconstruct.hpp"
#include "dubrovin/torus.hpp"

namespace dubrovin {

struct Window {
  double x_lo = -1.0, x_hi = 1.0;
  double t_lo = -0.1, t_hi = 0.1;
  std::size_t nx = 21, nt = 11;
};

/// Stability constants of the truncation to the N largest gaps, all with
/// respect to the full gap set:
///   C_psi = (1/L_psi) sup_j gamma_j^{1/2} min(2pi, 2(C_j - C_{j,N})),
///   K_N   = (8/L) sup_j gamma_j^{1/2} min(2pi, max(2(C_j - C_{j,N}), 2(D_j C_j - D_{j,N} C_{j,N}))),
/// with D_{j,N} = 2 sum_{l kept} gamma_l + 4 eta_{j,0} + 6|E| and L = max(L_psi, L_xi).
struct TruncationConstants {
  std::size_t n = 0;
  double c_psi = 0.0;
  double k_n = 0.0;
};

[[nodiscard]] inline TruncationConstants truncation_constants(const GapSet& gs, std::size_t n,
                                                              const LipschitzBounds& lb) {
  const auto mask = kept_mask(truncate(gs, n));
  const double big_l = std::max(lb.L_psi, lb.L_xi);
  double sum_all = 0.0, sum_kept = 0.0;
  for (std::size_t j = 0; j < gs.size(); ++j) {
    sum_all += gs.gamma(j);
    if (mask[j]) sum_kept += gs.gamma(j);
  }
  const double base = 6.0 * std::abs(gs.base_energy());
  double sup_psi = 0.0, sup_k = 0.0;
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const double cj = c_constant(gs, j);
    const double cjn = c_constant(gs, j, [&](std::size_t l) { return static_cast<bool>(mask[l]); });
    const double dj = 2.0 * sum_all + 4.0 * gs.eta0(j) + base;
    const double djn = 2.0 * sum_kept + 4.0 * gs.eta0(j) + base;
    const double w = std::sqrt(gs.gamma(j));
    const double dpsi = 2.0 * (cj - cjn);
    sup_psi = std::max(sup_psi, w * std::min(2.0 * std::numbers::pi, dpsi));
    sup_k = std::max(sup_k, w * std::min(2.0 * std::numbers::pi, std::max(dpsi, 2.0 * (dj * cj - djn * cjn))));
  }
  TruncationConstants tc;
  tc.n = n;
  tc.c_psi = lb.L_psi > 0.0 ? sup_psi / lb.L_psi : 0.0;
  tc.k_n = big_l > 0.0 ? 8.0 * sup_k / big_l : 0.0;
  return tc;
}

struct SweepRow {
  std::size_t n = 0;
  double d_n = 0.0;             ///< sup over the window of metric(phi~^N, phi^full)
  double k_n = 0.0;
  double log_bound_corner = 0.0;  ///< log(K_N) + m (max|x| + max|t|)
  bool bound_ok = true;           ///< D_N <= K_N e^{m(|x|+|t|)} at the corner
  double c_psi = 0.0;
  double stability_worst_ratio = std::numeric_limits<double>::infinity();  ///< min bound/measured on t = 0
  bool stability_ok = true;  ///< measured <= 2(|dphi(0)| + C_psi) e^{m_x |x|} on t = 0
};

struct SweepTable {
  std::size_t full_n = 0;
  double L_psi = 0.0, L_xi = 0.0;
  double m = 0.0;    ///< 2 max(L_psi, L_xi) ln 2
  double m_x = 0.0;  ///< 2 L_psi ln 2
  std::vector<SweepRow> rows;
  bool strictly_decreasing = true;
  StepStats stats;
};

namespace detail {
inline double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }
}  // namespace detail

/// For every N in `n_list`, integrates the lifted fields of the N-gap
/// truncation over the window from the same initial point as the full model
/// (all gaps of gs, or the `full_n` largest) and compares.
[[nodiscard]] inline SweepTable approximant_sweep(const std::shared_ptr<const GapSet>& gs,
                                                  const std::vector<std::size_t>& n_list,
                                                  const std::vector<double>& phi0, const Window& w, double tol,
                                                  std::size_t full_n = 0) {
  if (full_n == 0) full_n = gs->size();
  if (full_n > gs->size()) throw std::invalid_argument("approximant_sweep: full model exceeds gap count");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] > full_n) throw std::invalid_argument("approximant_sweep: N exceeds the full model");
    if (k > 0 && n_list[k] <= n_list[k - 1]) throw std::invalid_argument("approximant_sweep: N list must ascend");
  }
  if (phi0.size() != gs->size()) throw std::invalid_argument("approximant_sweep: initial point has wrong dimension");

  SweepTable table;
  table.full_n = full_n;
  const LipschitzBounds lb = lipschitz_bounds(*gs);
  table.L_psi = lb.L_psi;
  table.L_xi = lb.L_xi;
  table.m = 2.0 * std::max(lb.L_psi, lb.L_xi) * std::numbers::ln2;
  table.m_x = 2.0 * lb.L_psi * std::numbers::ln2;

  std::vector<double> xs = linspace(w.x_lo, w.x_hi, w.nx);
  std::vector<double> ts = linspace(w.t_lo, w.t_hi, w.nt);
  // The lattice has to contain the origin.
  for (auto* nodes : {&xs, &ts})
    if (std::find(nodes->begin(), nodes->end(), 0.0) == nodes->end()) {
      nodes->push_back(0.0);
      std::sort(nodes->begin(), nodes->end());
    }

  const FieldModel full = lifted_model(*gs, full_n);
  const TrajectoryGrid ref = grid(full, gs, phi0, xs, ts, tol);
  table.stats += ref.stats;
  const double corner = std::max(std::abs(xs.front()), std::abs(xs.back())) +
                        std::max(std::abs(ts.front()), std::abs(ts.back()));
  const std::size_t t_zero = static_cast<std::size_t>(std::find(ts.begin(), ts.end(), 0.0) - ts.begin());

  for (std::size_t n : n_list) {
    const FieldModel model = lifted_model(*gs, n);
    const TrajectoryGrid g = grid(model, gs, phi0, xs, ts, tol);
    table.stats += g.stats;
    const TruncationConstants tc = truncation_constants(*gs, n, lb);
    SweepRow row;
    row.n = n;
    row.k_n = tc.k_n;
    row.c_psi = tc.c_psi;
    for (std::size_t k = 0; k < g.points.size(); ++k) row.d_n = std::max(row.d_n, metric(*gs, g.points[k], ref.points[k]));
    row.log_bound_corner = detail::log_or_neg_inf(tc.k_n) + table.m * corner;
    row.bound_ok = n == full_n ? row.d_n == 0.0 : detail::log_or_neg_inf(row.d_n) <= row.log_bound_corner;
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const double measured = metric(*gs, g.phi(i, t_zero), ref.phi(i, t_zero));
      const double bound = 2.0 * tc.c_psi * std::exp(table.m_x * std::abs(xs[i]));
      if (measured > 0.0) row.stability_worst_ratio = std::min(row.stability_worst_ratio, bound / measured);
      if (measured > bound) row.stability_ok = false;
    }
    table.rows.push_back(row);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k)
    if (!(table.rows[k].d_n < table.rows[k - 1].d_n)) table.strictly_decreasing = false;
  return table;
}

struct C4Row {
  std::size_t n = 0;
  double c0 = 0.0;  ///< sup |u_N - u_N'| for the next N' in the list
  double c2 = 0.0;  ///< same for u_xx
  double c4 = 0.0;  ///< same for u_xxxx
};

struct C4Table {
  std::vector<C4Row> rows;
  bool nonincreasing = true;  ///< every column nonincreasing in N
};

/// Distances between the trace-reconstructed potentials (and their second and
/// fourth x-derivatives) of successive truncations on the x-window at t = 0.
/// The last row compares the last N with itself and is zero.
[[nodiscard]] inline C4Table c4_convergence(const std::shared_ptr<const GapSet>& gs,
                                            const std::vector<std::size_t>& n_list, const std::vector<double>& phi0,
                                            double x_lo, double x_hi, std::size_t nx, double tol) {
  if (n_list.empty()) return {};
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] > gs->size()) throw std::invalid_argument("c4_convergence: N exceeds gap count");
    if (k > 0 && n_list[k] <= n_list[k - 1]) throw std::invalid_argument("c4_convergence: N list must ascend");
  }
  std::vector<double> xs = linspace(x_lo, x_hi, nx);
  if (std::find(xs.begin(), xs.end(), 0.0) == xs.end()) {
    xs.push_back(0.0);
    std::sort(xs.begin(), xs.end());
  }
  std::vector<FieldGrid> fields;
  for (std::size_t n : n_list) {
    const FieldModel model = lifted_model(*gs, n);
    fields.push_back(trace_derivatives(model, grid(model, gs, phi0, xs, {0.0}, tol)));
  }
  C4Table table;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    C4Row row{n_list[k], 0.0, 0.0, 0.0};
    if (k + 1 < n_list.size()) {
      const FieldGrid& a = fields[k];
      const FieldGrid& b = fields[k + 1];
      for (std::size_t i = 0; i < a.u.size(); ++i) {
        row.c0 = std::max(row.c0, std::abs(a.u[i] - b.u[i]));
        row.c2 = std::max(row.c2, std::abs(a.d2u[i] - b.d2u[i]));
        row.c4 = std::max(row.c4, std::abs(a.d4u[i] - b.d4u[i]));
      }
    }
    table.rows.push_back(row);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const C4Row& p = table.rows[k - 1];
    const C4Row& r = table.rows[k];
    if (r.c0 > p.c0 || r.c2 > p.c2 || r.c4 > p.c4) table.nonincreasing = false;
  }
  return table;
}

}  // namespace dubrovin
