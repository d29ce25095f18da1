#pragma once

// Potentials from torus trajectories via the trace formulas, the diagonal
// Green's function, and the Dubrovin time-derivative identity.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dubrovin/errors.hpp"
#include "dubrovin/flows.hpp"
#include "dubrovin/torus.hpp"

namespace dubrovin {

/// u and its trace-derived x-derivatives sampled on an (x, t) lattice,
/// row-major like TrajectoryGrid.
struct FieldGrid {
  std::vector<double> x_nodes;
  std::vector<double> t_nodes;
  std::vector<double> u;
  std::vector<double> dxu;  ///< empty unless trace derivatives were attached
  std::vector<double> d2u;
  std::vector<double> d4u;
  double fd_step = 0.0;

  [[nodiscard]] std::size_t nx() const { return x_nodes.size(); }
  [[nodiscard]] std::size_t nt() const { return t_nodes.size(); }
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const { return i * nt() + j; }
  [[nodiscard]] bool has_trace() const { return !d2u.empty(); }
};

struct TraceValues {
  double u = 0.0;
  double dxu = 0.0;
  double d2u = 0.0;
  double d4u = 0.0;
};

/// u = Q1, u_x = sum gamma_j sin(phi_j) Psi_j, u_xx = 2(u^2 - Q2),
/// u_xxxx = 16/3 (Q3 + 3/2 u u_xx + 15/16 u_x^2 - u^3).
[[nodiscard]] inline TraceValues trace_values(const FieldModel& model, std::span<const double> phi) {
  std::vector<double> mu(phi.size());
  model.mus(phi, mu);
  TraceValues v;
  v.u = model.q(mu, 1);
  v.dxu = model.dx_q1(phi);
  v.d2u = 2.0 * (v.u * v.u - model.q(mu, 2));
  v.d4u = 16.0 / 3.0 * (model.q(mu, 3) + 1.5 * v.u * v.d2u + 15.0 / 16.0 * v.dxu * v.dxu - v.u * v.u * v.u);
  return v;
}

[[nodiscard]] inline FieldGrid potential(const FieldModel& model, const TrajectoryGrid& g) {
  FieldGrid f;
  f.x_nodes = g.x_nodes;
  f.t_nodes = g.t_nodes;
  f.u.resize(g.points.size());
  std::vector<double> mu;
  for (std::size_t k = 0; k < g.points.size(); ++k) {
    mu.resize(g.points[k].size());
    model.mus(g.points[k], mu);
    f.u[k] = model.q(mu, 1);
  }
  return f;
}

[[nodiscard]] inline FieldGrid potential(const TrajectoryGrid& g) { return potential(FieldModel(*g.gapset), g); }

[[nodiscard]] inline FieldGrid trace_derivatives(const FieldModel& model, const TrajectoryGrid& g) {
  FieldGrid f;
  f.x_nodes = g.x_nodes;
  f.t_nodes = g.t_nodes;
  const std::size_t n = g.points.size();
  f.u.resize(n);
  f.dxu.resize(n);
  f.d2u.resize(n);
  f.d4u.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const TraceValues v = trace_values(model, g.points[k]);
    f.u[k] = v.u;
    f.dxu[k] = v.dxu;
    f.d2u[k] = v.d2u;
    f.d4u[k] = v.d4u;
  }
  return f;
}

[[nodiscard]] inline FieldGrid trace_derivatives(const TrajectoryGrid& g) {
  return trace_derivatives(FieldModel(*g.gapset), g);
}

// ---------------------------------------------------------------------------
// Diagonal Green's function.

/// Distance from z to S = [E, inf) minus the open gaps.
[[nodiscard]] inline double distance_to_spectrum(const GapSet& gs, std::complex<double> z) {
  const double x = z.real();
  double dx = 0.0;
  if (x < gs.base_energy()) {
    dx = gs.base_energy() - x;
  } else {
    for (const Gap& g : gs.gaps())
      if (x > g.lo && x < g.hi) dx = std::min(x - g.lo, g.hi - x);
  }
  return std::hypot(dx, z.imag());
}

/// G(x,x;z) = 1/2 (E - z)^{-1/2} prod_l (mu_l - z) / ((E_l^- - z)^{1/2} (E_l^+ - z)^{1/2}),
/// every square root principal. The branch is positive for real z < E and
/// has sign(z - mu_j) inside gap j. Real z is taken on the upper rim.
[[nodiscard]] inline std::complex<double> green_diag(const DirichletAngles& p, std::complex<double> z) {
  const GapSet& gs = p.gapset();
  if (distance_to_spectrum(gs, z) < 1e-9 * gs.scale())
    throw std::invalid_argument("green_diag: z lies on or too near the spectrum");
  using C = std::complex<double>;
  const auto ms = mu_sigma(p);
  C g = 0.5 / std::sqrt(C(gs.base_energy()) - z);
  for (std::size_t l = 0; l < gs.size(); ++l) {
    const Gap& gap = gs.gap(l);
    g *= (ms.mu[l] - z) / (std::sqrt(C(gap.lo) - z) * std::sqrt(C(gap.hi) - z));
  }
  return g;
}

[[nodiscard]] inline double green_diag(const DirichletAngles& p, double z) {
  return green_diag(p, std::complex<double>(z, 0.0)).real();
}

namespace detail {
inline void require_interior(const DirichletAngles& p, std::size_t j, double mu, const char* who) {
  const Gap& g = p.gapset().gap(j);
  const double margin = 1e-8 * g.length();
  if (mu - g.lo < margin || g.hi - mu < margin)
    throw std::invalid_argument(std::string(who) + ": mu_" + std::to_string(j) + " is at a gap edge");
}
}  // namespace detail

/// dG/dz at z = mu_j:
/// -1/2 (E - mu_j)^{-1/2} ((E_j^- - mu_j)(E_j^+ - mu_j))^{-1/2} prod_{l != j} (mu_l - mu_j) / ((E_l^- - mu_j)(E_l^+ - mu_j))^{1/2}.
[[nodiscard]] inline double green_dz_at_mu(const DirichletAngles& p, std::size_t j) {
  const GapSet& gs = p.gapset();
  const auto ms = mu_sigma(p);
  const double mj = ms.mu[j];
  detail::require_interior(p, j, mj, "green_dz_at_mu");
  using C = std::complex<double>;
  const C z(mj, 0.0);
  C d = -0.5 / std::sqrt(C(gs.base_energy()) - z);
  d /= std::sqrt(C(gs.gap(j).lo) - z) * std::sqrt(C(gs.gap(j).hi) - z);
  for (std::size_t l = 0; l < gs.size(); ++l) {
    if (l == j) continue;
    d *= (ms.mu[l] - z) / (std::sqrt(C(gs.gap(l).lo) - z) * std::sqrt(C(gs.gap(l).hi) - z));
  }
  return d.real();
}

struct DubrovinCheck {
  std::vector<double> chain;     ///< dmu_j/dt = dmu_j/dphi_j * Xi_j
  std::vector<double> formula;   ///< closed form in u and mu
  std::vector<double> residual;  ///< |chain - formula|
};

/// Compares dmu_j/dt obtained from Xi by the chain rule with
/// -4 sigma_j (u + 2 mu_j) ((E - mu_j)(E_j^- - mu_j)(E_j^+ - mu_j)
///     prod_{l != j} (E_l^- - mu_j)(E_l^+ - mu_j) / (mu_l - mu_j)^2)^{1/2}.
[[nodiscard]] inline DubrovinCheck dmu_dt_check(const DirichletAngles& p) {
  const GapSet& gs = p.gapset();
  const auto ms = mu_sigma(p);
  for (std::size_t j = 0; j < p.size(); ++j) detail::require_interior(p, j, ms.mu[j], "dmu_dt_check");
  const auto x = xi(p);
  const double u = q_field(p, 1);
  DubrovinCheck c;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const Gap& g = gs.gap(j);
    const double mj = ms.mu[j];
    c.chain.push_back(-0.5 * g.length() * std::sin(p.phi(j)) * x[j]);
    // The own-gap factors in angle form avoid cancellation near the edges.
    const double ch = std::cos(0.5 * p.phi(j)), sh = std::sin(0.5 * p.phi(j));
    double prod = (gs.base_energy() - mj) * (-g.length() * ch * ch) * (g.length() * sh * sh);
    for (std::size_t l = 0; l < p.size(); ++l) {
      if (l == j) continue;
      const double d = ms.mu[l] - mj;
      prod *= (gs.gap(l).lo - mj) * (gs.gap(l).hi - mj) / (d * d);
    }
    c.formula.push_back(-4.0 * ms.sigma[j] * (u + 2.0 * mj) * std::sqrt(prod));
    c.residual.push_back(std::abs(c.chain.back() - c.formula.back()));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Finite-difference closure of the trace formulas.

struct ClosureLevel {
  double h = 0.0;
  double err_d2 = 0.0;  ///< max |u_xx(trace) - FD2(u)|
  double err_d4 = 0.0;  ///< max |u_xxxx(trace) - FD2(u_xx(trace))|
};

struct ClosureReport {
  std::vector<ClosureLevel> levels;
  std::vector<double> slopes_d2;  ///< log2 of successive error ratios
  std::vector<double> slopes_d4;
  StepStats stats;
};

/// On the x-line through `p0` (t = 0), compares trace-derived u_xx and u_xxxx
/// with the second-order central difference of u and u_xx, evaluated at the
/// nodes linspace(x_lo, x_hi, n_nodes), for each step h in `steps`. Each node
/// spacing must be an integer multiple of every h.
[[nodiscard]] inline ClosureReport trace_closure(const DirichletAngles& p0, double x_lo, double x_hi,
                                                 std::size_t n_nodes, std::span<const double> steps, double tol) {
  if (n_nodes < 2 || !(x_hi > x_lo)) throw std::invalid_argument("trace_closure: need an interval with >= 2 nodes");
  const FieldModel model(p0.gapset());
  const double spacing = (x_hi - x_lo) / static_cast<double>(n_nodes - 1);
  ClosureReport rep;
  for (double h : steps) {
    const double ratio = spacing / h;
    const long stride = std::lround(ratio);
    if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
      throw std::invalid_argument("trace_closure: node spacing is not a multiple of h");
    const double klo = x_lo / h, khi = x_hi / h;
    const long k0 = std::lround(klo), k1 = std::lround(khi);
    if (std::abs(klo - k0) > 1e-9 * std::max(1.0, std::abs(klo)) ||
        std::abs(khi - k1) > 1e-9 * std::max(1.0, std::abs(khi)))
      throw std::invalid_argument("trace_closure: interval ends are not multiples of h");
    if (k0 > 0 || k1 < 0) throw std::invalid_argument("trace_closure: interval must contain 0");
    std::vector<double> xs;
    for (long k = k0 - 1; k <= k1 + 1; ++k) xs.push_back(static_cast<double>(k) * h);
    const TrajectoryGrid g = grid(model, p0.gapset_ptr(), {p0.phi().begin(), p0.phi().end()}, xs, {0.0}, tol, 1);
    rep.stats += g.stats;
    const FieldGrid f = trace_derivatives(model, g);
    ClosureLevel lvl{h, 0.0, 0.0};
    for (std::size_t i = 1; i + 1 < xs.size(); i += static_cast<std::size_t>(stride)) {
      const double fd_u = (f.u[i + 1] - 2.0 * f.u[i] + f.u[i - 1]) / (h * h);
      const double fd_d2 = (f.d2u[i + 1] - 2.0 * f.d2u[i] + f.d2u[i - 1]) / (h * h);
      lvl.err_d2 = std::max(lvl.err_d2, std::abs(f.d2u[i] - fd_u));
      lvl.err_d4 = std::max(lvl.err_d4, std::abs(f.d4u[i] - fd_d2));
    }
    rep.levels.push_back(lvl);
  }
  for (std::size_t k = 1; k < rep.levels.size(); ++k) {
    const double r = rep.levels[k - 1].h / rep.levels[k].h;
    rep.slopes_d2.push_back(std::log(rep.levels[k - 1].err_d2 / rep.levels[k].err_d2) / std::log(r));
    rep.slopes_d4.push_back(std::log(rep.levels[k - 1].err_d4 / rep.levels[k].err_d4) / std::log(r));
  }
  return rep;
}

}  // namespace dubrovin
