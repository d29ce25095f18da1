#pragma once

// The isospectral torus of a finite gap set: angular Dirichlet data, the
// weighted sup metric, the symmetric functions Q_k, and the translation (Psi)
// and KdV (Xi) vector fields together with their truncated lifts.

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dubrovin/errors.hpp"
#include "dubrovin/gapset.hpp"

namespace dubrovin {

/// A point of D(S^N), stored as lifted angles in R.
class DirichletAngles {
 public:
  DirichletAngles(std::shared_ptr<const GapSet> gs, std::vector<double> phi) : gs_(std::move(gs)), phi_(std::move(phi)) {
    if (!gs_) throw std::invalid_argument("DirichletAngles: null gap set");
    if (phi_.size() != gs_->size()) throw ConfigError("DirichletAngles: angle count does not match gap count");
    for (double v : phi_)
      if (!std::isfinite(v)) throw ConfigError("DirichletAngles: non-finite angle");
  }

  [[nodiscard]] const GapSet& gapset() const { return *gs_; }
  [[nodiscard]] const std::shared_ptr<const GapSet>& gapset_ptr() const { return gs_; }
  [[nodiscard]] std::span<const double> phi() const { return phi_; }
  [[nodiscard]] double phi(std::size_t j) const { return phi_[j]; }
  [[nodiscard]] std::size_t size() const { return phi_.size(); }

  [[nodiscard]] DirichletAngles with_phi(std::vector<double> phi) const { return {gs_, std::move(phi)}; }

 private:
  std::shared_ptr<const GapSet> gs_;
  std::vector<double> phi_;
};

/// Angle reduced to (-pi, pi].
[[nodiscard]] inline double reduce_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

[[nodiscard]] inline double mu_of(const Gap& g, double phi) {
  const double c = std::cos(0.5 * phi);
  return g.lo + g.length() * c * c;
}

/// +1 on (0, pi), -1 on (-pi, 0), 0 on pi Z (mod 2 pi).
[[nodiscard]] inline int sigma_of(double phi) {
  const double r = reduce_angle(phi);
  if (r == 0.0 || r == std::numbers::pi) return 0;
  return r > 0.0 ? 1 : -1;
}

struct MuSigmaView {
  std::vector<double> mu;
  std::vector<int> sigma;
};

[[nodiscard]] inline MuSigmaView mu_sigma(const DirichletAngles& p) {
  MuSigmaView v;
  v.mu.resize(p.size());
  v.sigma.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    v.mu[j] = mu_of(p.gapset().gap(j), p.phi(j));
    v.sigma[j] = sigma_of(p.phi(j));
  }
  return v;
}

/// sup_j gamma_j^{1/2} |v_j|, the norm on tangent vectors and integrator errors.
[[nodiscard]] inline double weighted_sup(const GapSet& gs, std::span<const double> v) {
  double m = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) m = std::max(m, std::sqrt(gs.gamma(j)) * std::abs(v[j]));
  return m;
}

/// sup_j gamma_j^{1/2} times the shorter-arc distance between phi_j and phi~_j.
[[nodiscard]] inline double metric(const GapSet& gs, std::span<const double> a, std::span<const double> b) {
  if (a.size() != gs.size() || b.size() != gs.size()) throw std::invalid_argument("metric: size mismatch");
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    m = std::max(m, std::sqrt(gs.gamma(j)) * std::abs(reduce_angle(a[j] - b[j])));
  return m;
}

[[nodiscard]] inline double metric(const DirichletAngles& p, const DirichletAngles& q) {
  if (p.gapset() != q.gapset()) throw std::invalid_argument("metric: points live on different tori");
  return metric(p.gapset(), p.phi(), q.phi());
}

// ---------------------------------------------------------------------------
// Field evaluation. A FieldModel evaluates the fields of a gap set with only
// the `active` gaps contributing to Q_k and to the products in Psi; inactive
// gaps are the ones closed by a truncation, whose own angles are still driven.

class FieldModel {
 public:
  explicit FieldModel(const GapSet& gs) : gs_(&gs), active_(gs.size(), true) {}
  FieldModel(const GapSet& gs, std::vector<bool> active) : gs_(&gs), active_(std::move(active)) {
    if (active_.size() != gs.size()) throw std::invalid_argument("FieldModel: mask size mismatch");
  }

  [[nodiscard]] const GapSet& gapset() const { return *gs_; }
  [[nodiscard]] std::size_t size() const { return gs_->size(); }
  [[nodiscard]] bool active(std::size_t j) const { return active_[j]; }

  void mus(std::span<const double> phi, std::span<double> mu) const {
    for (std::size_t j = 0; j < phi.size(); ++j) mu[j] = mu_of(gs_->gap(j), phi[j]);
  }

  [[nodiscard]] double q(std::span<const double> mu, int k) const {
    double s = std::pow(gs_->base_energy(), k);
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (!active_[j]) continue;
      const Gap& g = gs_->gap(j);
      s += std::pow(g.lo, k) + std::pow(g.hi, k) - 2.0 * std::pow(mu[j], k);
    }
    return s;
  }

  /// Psi_j = 2 ((mu_j - E) prod_{l != j, active} (E_l^- - mu_j)(E_l^+ - mu_j) / (mu_l - mu_j)^2)^{1/2}.
  [[nodiscard]] double psi_component(std::span<const double> mu, std::size_t j) const {
    const double mj = mu[j];
    double prod = mj - gs_->base_energy();
    for (std::size_t l = 0; l < mu.size(); ++l) {
      if (l == j || !active_[l]) continue;
      const Gap& g = gs_->gap(l);
      const double d = mu[l] - mj;
      prod *= (g.lo - mj) * (g.hi - mj) / (d * d);
    }
    return 2.0 * std::sqrt(prod);
  }

  void psi(std::span<const double> phi, std::span<double> out) const {
    std::vector<double> mu(phi.size());
    mus(phi, mu);
    for (std::size_t j = 0; j < phi.size(); ++j) out[j] = psi_component(mu, j);
  }

  /// Xi_j = 2 (Q1 + 2 mu_j) Psi_j.
  void xi(std::span<const double> phi, std::span<double> out) const {
    std::vector<double> mu(phi.size());
    mus(phi, mu);
    const double q1 = q(mu, 1);
    for (std::size_t j = 0; j < phi.size(); ++j) out[j] = 2.0 * (q1 + 2.0 * mu[j]) * psi_component(mu, j);
  }

  /// d/dx (Q1 o phi) = sum_j gamma_j sin(phi_j) Psi_j over active gaps.
  [[nodiscard]] double dx_q1(std::span<const double> phi) const {
    std::vector<double> mu(phi.size());
    mus(phi, mu);
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j)
      if (active_[j]) s += gs_->gamma(j) * std::sin(phi[j]) * psi_component(mu, j);
    return s;
  }

 private:
  const GapSet* gs_;
  std::vector<bool> active_;
};

[[nodiscard]] inline double q_field(const DirichletAngles& p, int k) {
  if (k < 0) throw std::invalid_argument("q_field: k must be nonnegative");
  const FieldModel f(p.gapset());
  std::vector<double> mu(p.size());
  f.mus(p.phi(), mu);
  return f.q(mu, k);
}

[[nodiscard]] inline std::vector<double> psi(const DirichletAngles& p) {
  std::vector<double> out(p.size());
  FieldModel(p.gapset()).psi(p.phi(), out);
  return out;
}

[[nodiscard]] inline std::vector<double> xi(const DirichletAngles& p) {
  std::vector<double> out(p.size());
  FieldModel(p.gapset()).xi(p.phi(), out);
  return out;
}

/// Field model of the truncation to the N largest gaps, acting on the full torus.
[[nodiscard]] inline FieldModel lifted_model(const GapSet& gs, std::size_t n) {
  return {gs, kept_mask(truncate(gs, n))};
}

struct LiftedFields {
  std::vector<double> psi;
  std::vector<double> xi;
};

/// Psi~^N and Xi~^N at p: kept gaps follow the N-gap fields; a dropped gap j
/// uses Psi_j/Xi_j of the full set at pi(phi), where the other dropped gaps
/// are closed and contribute a factor 1 (and nothing to Q1).
[[nodiscard]] inline LiftedFields lift_fields(const GapSet& gs, std::size_t n, const DirichletAngles& p) {
  if (p.gapset() != gs) throw std::invalid_argument("lift_fields: point lives on a different torus");
  const FieldModel f = lifted_model(gs, n);
  LiftedFields out{std::vector<double>(p.size()), std::vector<double>(p.size())};
  f.psi(p.phi(), out.psi);
  f.xi(p.phi(), out.xi);
  return out;
}

// ---------------------------------------------------------------------------
// Lipschitz majorants with respect to the weighted sup metric.

struct LipschitzBounds {
  double L_psi = 0.0;
  double L_xi = 0.0;
};

/// Bounds from |dPsi_j/dphi_k| and |dXi_j/dphi_k| majorants, with
/// |Psi_j| <= 2 C_j and ||Q1||_inf <= |E| + sum gamma. A matrix B of partial
/// derivative bounds gives L = sup_j sum_k gamma_j^{1/2} gamma_k^{-1/2} B_jk.
[[nodiscard]] inline LipschitzBounds lipschitz_bounds(const GapSet& gs) {
  const std::size_t n = gs.size();
  LipschitzBounds lb;
  if (n == 0) return lb;
  const double base = std::abs(gs.base_energy());
  const double q1_sup = base + gs.total_gap_length();
  for (std::size_t j = 0; j < n; ++j) {
    const double gj = gs.gamma(j);
    const double e0 = gs.eta0(j);
    const double cj = c_constant(gs, j);
    const double z = q1_sup + 2.0 * (base + e0 + gj);
    double diag_sum = 1.0 / e0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == j) continue;
      const double e = gs.eta(j, l);
      diag_sum += gs.gamma(l) / (e * (e + gs.gamma(l)));
    }
    const double sgj = std::sqrt(gj);
    double row_psi = 0.5 * cj * gj * diag_sum;
    double row_xi = z * cj * gj * diag_sum;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double gk = gs.gamma(k);
      const double e = gs.eta(j, k);
      const double w = sgj / std::sqrt(gk);
      row_psi += w * cj * gk / e;
      row_xi += w * (z / e + 2.0) * 2.0 * cj * gk;
    }
    lb.L_psi = std::max(lb.L_psi, row_psi);
    lb.L_xi = std::max(lb.L_xi, row_xi);
  }
  return lb;
}

/// Continuity modulus of Q_k in the weighted metric:
/// M_k = sum_j k max(|E_j^-|, |E_j^+|)^{k-1} gamma_j^{1/2}.
[[nodiscard]] inline double q_modulus(const GapSet& gs, int k) {
  double m = 0.0;
  for (std::size_t j = 0; j < gs.size(); ++j) {
    const Gap& g = gs.gap(j);
    m += k * std::pow(std::max(std::abs(g.lo), std::abs(g.hi)), k - 1) * std::sqrt(gs.gamma(j));
  }
  return m;
}

}  // namespace dubrovin
