#pragma once

// Harmonic measures xi_j of finite gap sets through the differentials
// P_j(t) dt / sqrt(-R(t)), the Abel map into the character torus, and the
// affine fit of the lifted Abel map along both flows.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dubrovin/errors.hpp"
#include "dubrovin/flows.hpp"
#include "dubrovin/quadrature.hpp"
#include "dubrovin/torus.hpp"

namespace dubrovin {

/// Coefficients of P_j in the scaled variable s = (t - shift) / scale, chosen
/// so that the periods s_k * int_{gap k} P_j / sqrt(-R) equal delta_{jk},
/// with R(t) = (t - E) prod_l (t - E_l^-)(t - E_l^+) and s_k = (-1)^k. The
/// alternating sign is the boundary-value branch of sqrt(R) on gap k.
class HarmonicBasis {
 public:
  HarmonicBasis(std::shared_ptr<const GapSet> gs, std::size_t quad_order = 64)
      : gs_(std::move(gs)), rule_(quad_order) {
    if (!gs_) throw std::invalid_argument("HarmonicBasis: null gap set");
    const std::size_t n = gs_->size();
    shift_ = 0.5 * (gs_->base_energy() + gs_->top());
    scale_ = std::max(0.5 * (gs_->top() - gs_->base_energy()), 1e-300);
    if (n == 0) return;
    const Eigen::MatrixXd m = monomial_periods(rule_);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    condition_ = sv(0) / sv(sv.size() - 1);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    coeffs_ = lu.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    residual_ = (period_matrix(rule_) - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)))
                    .cwiseAbs()
                    .maxCoeff();
    if (!std::isfinite(residual_) || residual_ > 1e-8)
      throw NumericalError("HarmonicBasis: period system is singular (residual " + std::to_string(residual_) + ")");
  }

  [[nodiscard]] const GapSet& gapset() const { return *gs_; }
  [[nodiscard]] const std::shared_ptr<const GapSet>& gapset_ptr() const { return gs_; }
  [[nodiscard]] std::size_t size() const { return gs_->size(); }
  [[nodiscard]] std::size_t quad_order() const { return rule_.order(); }
  [[nodiscard]] const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  [[nodiscard]] double condition() const { return condition_; }
  [[nodiscard]] double residual() const { return residual_; }
  [[nodiscard]] double shift() const { return shift_; }
  [[nodiscard]] double scale() const { return scale_; }

  [[nodiscard]] static double branch_sign(std::size_t k) { return k % 2 == 0 ? 1.0 : -1.0; }

  template <class T>
  [[nodiscard]] T poly(std::size_t j, T t) const {
    const T s = (t - shift_) / scale_;
    T acc = T(0);
    for (Eigen::Index i = coeffs_.cols() - 1; i >= 0; --i) acc = acc * s + coeffs_(static_cast<Eigen::Index>(j), i);
    return acc;
  }

  /// Matrix of s_k * int_{gap k} P_j / sqrt(-R) computed with a rule of the given order.
  [[nodiscard]] Eigen::MatrixXd period_matrix(std::size_t order) const { return period_matrix(GaussLegendre(order)); }

  /// xi_j(z) for real z in the closure of gap k.
  [[nodiscard]] double xi_eval(std::size_t j, double z) const {
    const auto k = gap_of(z);
    if (!k) throw std::invalid_argument("xi_eval: z lies outside every gap closure");
    return xi_eval(j, *k, z);
  }

  [[nodiscard]] double xi_eval(std::size_t j, std::size_t k, double z) const {
    const Gap& g = gs_->gap(k);
    const double base = k > j ? 1.0 : 0.0;
    if (z <= g.lo) return base;
    const double m = 0.5 * (g.lo + g.hi), h = 0.5 * g.length();
    const double theta = std::asin(std::clamp((z - m) / h, -1.0, 1.0));
    const double part = rule_.integrate(
        [&](double th) { return poly(j, m + h * std::sin(th)) / std::sqrt(rho(k, m + h * std::sin(th))); },
        -0.5 * std::numbers::pi, theta);
    return base + branch_sign(k) * part;
  }

  /// xi_j off the real axis (Im z > 0): (-1)^N Im F(z) with
  /// F(z) = int_E^z P_j(s) ds / sqrt(R(s)), principal square roots factor by
  /// factor, along the path E -> E + iH -> Re z + iH -> z.
  [[nodiscard]] double xi_complex(std::size_t j, std::complex<double> z) const {
    using C = std::complex<double>;
    if (!(z.imag() > 0.0)) throw std::invalid_argument("xi_complex: z must lie in the upper half-plane");
    const std::size_t n = gs_->size();
    const double e = gs_->base_energy();
    const double big_h = std::max({1.0, 2.0 * z.imag(), 0.5 * gs_->scale()});
    const auto edges = [&](C s) {
      C d = 1.0;
      for (const Gap& g : gs_->gaps()) d *= std::sqrt(s - g.lo) * std::sqrt(s - g.hi);
      return d;
    };
    const C root_ih = std::sqrt(C(0.0, big_h));
    // First leg s = E + iH tau^2 removes the endpoint singularity at E.
    C f = rule_.integrate(
        [&](double tau) {
          const C s(e, big_h * tau * tau);
          return C(2.0 * root_ih * poly(j, s) / edges(s));
        },
        0.0, 1.0);
    const auto integrand = [&](C s) { return poly(j, s) / (std::sqrt(s - e) * edges(s)); };
    const double x = z.real();
    const double len = std::abs(x - e);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / (0.5 * big_h))));
    for (int p = 0; p < pieces; ++p) {
      const double a = e + (x - e) * p / pieces, b = e + (x - e) * (p + 1) / pieces;
      f += rule_.integrate([&](double u) { return integrand(C(u, big_h)); }, a, b);
    }
    for (double v = big_h; v > z.imag();) {
      const double next = std::max(z.imag(), 0.5 * v);
      f += C(0.0, 1.0) * rule_.integrate([&](double w) { return integrand(C(x, w)); }, v, next);
      v = next;
    }
    return (n % 2 == 0 ? 1.0 : -1.0) * f.imag();
  }

  [[nodiscard]] std::optional<std::size_t> gap_of(double z) const {
    for (std::size_t k = 0; k < gs_->size(); ++k)
      if (z >= gs_->gap(k).lo && z <= gs_->gap(k).hi) return k;
    return std::nullopt;
  }

 private:
  // rho_k(t) = (t - E) prod_{l != k} (t - E_l^-)(t - E_l^+), positive on gap k.
  [[nodiscard]] double rho(std::size_t k, double t) const {
    double r = t - gs_->base_energy();
    for (std::size_t l = 0; l < gs_->size(); ++l)
      if (l != k) r *= (t - gs_->gap(l).lo) * (t - gs_->gap(l).hi);
    return r;
  }

  // On gap k, t = m + h sin(theta) turns dt / sqrt(-R) into dtheta / sqrt(rho_k).
  template <class F>
  [[nodiscard]] double gap_integral(const GaussLegendre& rule, std::size_t k, F&& f) const {
    const Gap& g = gs_->gap(k);
    const double m = 0.5 * (g.lo + g.hi), h = 0.5 * g.length();
    return rule.integrate(
        [&](double th) {
          const double t = m + h * std::sin(th);
          return f(t) / std::sqrt(rho(k, t));
        },
        -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
  }

  [[nodiscard]] Eigen::MatrixXd monomial_periods(const GaussLegendre& rule) const {
    const auto n = static_cast<Eigen::Index>(gs_->size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i)
        m(i, k) = branch_sign(static_cast<std::size_t>(k)) *
                  gap_integral(rule, static_cast<std::size_t>(k),
                               [&](double t) { return std::pow((t - shift_) / scale_, static_cast<double>(i)); });
    return m;
  }

  [[nodiscard]] Eigen::MatrixXd period_matrix(const GaussLegendre& rule) const {
    const auto n = static_cast<Eigen::Index>(gs_->size());
    Eigen::MatrixXd p(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        p(j, k) = branch_sign(static_cast<std::size_t>(k)) *
                  gap_integral(rule, static_cast<std::size_t>(k),
                               [&](double t) { return poly(static_cast<std::size_t>(j), t); });
    return p;
  }

  std::shared_ptr<const GapSet> gs_;
  GaussLegendre rule_;
  Eigen::MatrixXd coeffs_;
  double shift_ = 0.0;
  double scale_ = 1.0;
  double condition_ = 1.0;
  double residual_ = 0.0;
};

/// A point of the character torus, angles mod 2 pi.
struct Character {
  std::vector<double> alpha;
};

/// Lifted Abel map: A_j = pi sum_k [ +-(xi_j(mu_k) - xi_j(E_k^-)) - 2 delta_jk floor(phi_k / 2pi) ],
/// with + for phi_k mod 2pi in [0, pi] and - otherwise. Reduced mod 2pi it
/// equals pi sum_k sigma_k (xi_j(mu_k) - xi_j(E_k^-)); the lift is continuous
/// in the lifted angles.
[[nodiscard]] inline std::vector<double> abel_lifted(const HarmonicBasis& b, std::span<const double> phi) {
  const GapSet& gs = b.gapset();
  const std::size_t n = gs.size();
  if (phi.size() != n) throw std::invalid_argument("abel: dimension mismatch");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> a(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double cycles = std::floor(phi[k] / two_pi);
    const double psi = phi[k] - two_pi * cycles;
    const double sign = psi <= std::numbers::pi ? 1.0 : -1.0;
    const double mu = mu_of(gs.gap(k), phi[k]);
    for (std::size_t j = 0; j < n; ++j) {
      const double inc = b.xi_eval(j, k, mu) - b.xi_eval(j, k, gs.gap(k).lo);
      a[j] += sign * inc - (j == k ? 2.0 * cycles : 0.0);
    }
  }
  for (double& v : a) v *= std::numbers::pi;
  return a;
}

/// A_j = pi sum_k sigma_k (xi_j(mu_k) - xi_j(E_k^-)) mod 2pi, with sigma_k = 0
/// at gap edges. At phi_k in 2pi Z this edge convention differs by pi in
/// component k from the continuous value that abel_lifted takes there.
[[nodiscard]] inline Character abel(const HarmonicBasis& b, const DirichletAngles& p) {
  if (p.gapset() != b.gapset()) throw std::invalid_argument("abel: point lives on a different torus");
  const GapSet& gs = b.gapset();
  const std::size_t n = gs.size();
  const auto ms = mu_sigma(p);
  Character c{std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    if (ms.sigma[k] == 0) continue;
    for (std::size_t j = 0; j < n; ++j)
      c.alpha[j] += ms.sigma[k] * (b.xi_eval(j, k, ms.mu[k]) - b.xi_eval(j, k, gs.gap(k).lo));
  }
  for (double& v : c.alpha) {
    v = std::fmod(std::numbers::pi * v, 2.0 * std::numbers::pi);
    if (v < 0.0) v += 2.0 * std::numbers::pi;
  }
  return c;
}

/// d(a, b) = sum_j min(|a_j - b_j| reduced to [0, pi], gamma_j).
[[nodiscard]] inline double char_metric(const Character& a, const Character& b, const GapSet& gs) {
  if (a.alpha.size() != b.alpha.size() || a.alpha.size() != gs.size())
    throw std::invalid_argument("char_metric: size mismatch");
  double d = 0.0;
  for (std::size_t j = 0; j < gs.size(); ++j)
    d += std::min(std::abs(reduce_angle(a.alpha[j] - b.alpha[j])), gs.gamma(j));
  return d;
}

struct LinearFit {
  std::vector<double> offset;
  std::vector<double> delta;  ///< dA/dx
  std::vector<double> zeta;   ///< dA/dt
  double max_residual = 0.0;
};

/// Least-squares fit of every lifted A_j over the grid to a + delta x + zeta t.
[[nodiscard]] inline LinearFit linearization_fit(const HarmonicBasis& b, const TrajectoryGrid& g) {
  if (g.nx() < 3 || g.nt() < 3) throw std::invalid_argument("linearization_fit: need at least 3 nodes per axis");
  if (*g.gapset != b.gapset()) throw std::invalid_argument("linearization_fit: grid and basis disagree on the gap set");
  const std::size_t n = b.size();
  LinearFit fit;
  if (n == 0) return fit;
  const auto rows = static_cast<Eigen::Index>(g.points.size());
  Eigen::MatrixXd design(rows, 3);
  Eigen::MatrixXd values(rows, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.nt(); ++j) {
      const auto r = static_cast<Eigen::Index>(i * g.nt() + j);
      design(r, 0) = 1.0;
      design(r, 1) = g.x_nodes[i];
      design(r, 2) = g.t_nodes[j];
      const auto a = abel_lifted(b, g.phi(i, j));
      for (std::size_t q = 0; q < n; ++q) values(r, static_cast<Eigen::Index>(q)) = a[q];
    }
  }
  const Eigen::MatrixXd coef = design.colPivHouseholderQr().solve(values);
  fit.max_residual = (design * coef - values).cwiseAbs().maxCoeff();
  for (std::size_t q = 0; q < n; ++q) {
    fit.offset.push_back(coef(0, static_cast<Eigen::Index>(q)));
    fit.delta.push_back(coef(1, static_cast<Eigen::Index>(q)));
    fit.zeta.push_back(coef(2, static_cast<Eigen::Index>(q)));
  }
  return fit;
}

}  // namespace dubrovin
