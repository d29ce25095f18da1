#pragma once

// Finite gap sets S^N = [E, inf) minus finitely many open gaps, their
// geometry constants, and checkers for the summability/separation
// conditions that make the Dirichlet flows Lipschitz.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dubrovin/errors.hpp"

namespace dubrovin {

struct Gap {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] constexpr double length() const { return hi - lo; }
  friend constexpr bool operator==(const Gap&, const Gap&) = default;
};

/// Distance between two disjoint closed intervals.
[[nodiscard]] inline double gap_distance(const Gap& a, const Gap& b) {
  return std::max(b.lo - a.hi, a.lo - b.hi);
}

/// Immutable spectrum S = [base_energy, inf) \ U (lo_j, hi_j).
///
/// Gaps are stored sorted by position. Construction rejects gaps that are
/// empty, touch the base energy, overlap, or sit closer than the separation
/// floor 1e-12 * max(1, |hi_N|).
class GapSet {
 public:
  GapSet() = default;

  GapSet(double base_energy, std::vector<Gap> gaps) : base_(base_energy), gaps_(std::move(gaps)) {
    if (!std::isfinite(base_)) throw ConfigError("gapset: base_energy must be finite");
    std::sort(gaps_.begin(), gaps_.end(), [](const Gap& a, const Gap& b) { return a.lo < b.lo; });
    for (std::size_t j = 0; j < gaps_.size(); ++j) {
      const Gap& g = gaps_[j];
      if (!std::isfinite(g.lo) || !std::isfinite(g.hi))
        throw ConfigError("gapset: gap " + std::to_string(j) + " has non-finite edges");
      if (!(g.lo < g.hi))
        throw ConfigError("gapset: gap " + std::to_string(j) + " must satisfy lo < hi");
      if (!(base_ < g.lo))
        throw ConfigError("gapset: gap " + std::to_string(j) + " must lie above base_energy");
    }
    if (!gaps_.empty()) {
      const double floor = 1e-12 * std::max(1.0, std::abs(gaps_.back().hi));
      for (std::size_t j = 0; j + 1 < gaps_.size(); ++j) {
        if (gaps_[j + 1].lo - gaps_[j].hi < floor)
          throw ConfigError("gapset: gaps " + std::to_string(j) + " and " + std::to_string(j + 1) +
                            " overlap or are closer than the separation floor");
      }
    }
  }

  [[nodiscard]] double base_energy() const { return base_; }
  [[nodiscard]] std::span<const Gap> gaps() const { return gaps_; }
  [[nodiscard]] const Gap& gap(std::size_t j) const { return gaps_[j]; }
  [[nodiscard]] std::size_t size() const { return gaps_.size(); }
  [[nodiscard]] bool empty() const { return gaps_.empty(); }

  [[nodiscard]] double gamma(std::size_t j) const { return gaps_[j].length(); }
  [[nodiscard]] double eta0(std::size_t j) const { return gaps_[j].lo - base_; }
  [[nodiscard]] double eta(std::size_t j, std::size_t l) const { return gap_distance(gaps_[j], gaps_[l]); }

  /// Upper edge of the last gap, or the base energy when there are no gaps.
  [[nodiscard]] double top() const { return gaps_.empty() ? base_ : gaps_.back().hi; }

  [[nodiscard]] double total_gap_length() const {
    double s = 0.0;
    for (const Gap& g : gaps_) s += g.length();
    return s;
  }

  /// Energy scale used for relative tolerances.
  [[nodiscard]] double scale() const { return std::max({1.0, std::abs(base_), std::abs(top())}); }

  friend bool operator==(const GapSet&, const GapSet&) = default;

 private:
  double base_ = 0.0;
  std::vector<Gap> gaps_;
};

/// C_j with the product restricted to gaps l where `include(l)` holds
/// (C_{j,N} when `include` selects the kept gaps of a truncation).
template <class Include>
[[nodiscard]] double c_constant(const GapSet& gs, std::size_t j, Include&& include) {
  double log_prod = 0.0;
  const double gj = gs.gamma(j);
  for (std::size_t l = 0; l < gs.size(); ++l) {
    if (l == j || !include(l)) continue;
    log_prod += std::log1p(gs.gamma(l) / gs.eta(j, l));
  }
  return std::sqrt(gs.eta0(j) + gj) * std::exp(0.5 * log_prod);
}

[[nodiscard]] inline double c_constant(const GapSet& gs, std::size_t j) {
  return c_constant(gs, j, [](std::size_t) { return true; });
}

struct GapGeometry {
  double gamma = 0.0;
  double eta0 = 0.0;
  std::vector<double> eta;  ///< eta[l] = distance to gap l; eta[j] = 0.
  double c = 0.0;
};

[[nodiscard]] inline std::vector<GapGeometry> geometry(const GapSet& gs) {
  std::vector<GapGeometry> table(gs.size());
  for (std::size_t j = 0; j < gs.size(); ++j) {
    GapGeometry& row = table[j];
    row.gamma = gs.gamma(j);
    row.eta0 = gs.eta0(j);
    row.eta.assign(gs.size(), 0.0);
    for (std::size_t l = 0; l < gs.size(); ++l)
      if (l != j) row.eta[l] = gs.eta(j, l);
    row.c = c_constant(gs, j);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Craig-type and trace conditions.

struct CraigReport {
  // First set: sum gamma, sup gamma C, sup gamma^{1/2} C / eta0,
  // sup_j sum_{l != j} gamma_j^{1/2} gamma_l^{1/2} / eta_{jl} C_j.
  double sum_gamma = 0.0;
  double sup_gamma_c = 0.0;
  double sup_sqrt_gamma_c_over_eta0 = 0.0;
  double sup_cross_sum = 0.0;
  // Strengthened set: sum gamma^{1/2}, sup gamma^{1/2} (1+eta0)/eta0 C,
  // and the cross sums with exponent a in {1/2, 1} weighted by (1+eta0) C_j.
  double sum_sqrt_gamma = 0.0;
  double sup_weighted_c = 0.0;
  double sup_cross_half = 0.0;
  double sup_cross_one = 0.0;
  // sum (1 + eta0^2) gamma.
  double trace_sum = 0.0;

  double threshold = std::numeric_limits<double>::infinity();
  bool craig1_ok = true;
  bool craig2_ok = true;
  bool trace_ok = true;
};

/// Evaluates every left-hand side exactly. A flag is set when all of its
/// values are <= `threshold`; since the strengthened set implies the first,
/// craig1_ok is also set whenever craig2_ok is.
[[nodiscard]] inline CraigReport craig_check(const GapSet& gs,
                                             double threshold = std::numeric_limits<double>::infinity()) {
  CraigReport r;
  r.threshold = threshold;
  const std::size_t n = gs.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double gj = gs.gamma(j);
    const double sgj = std::sqrt(gj);
    const double e0 = gs.eta0(j);
    double log_prod = 0.0;
    double cross = 0.0;
    double cross_half = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == j) continue;
      const double gl = gs.gamma(l);
      const double e = gs.eta(j, l);
      log_prod += std::log1p(gl / e);
      const double q = sgj * std::sqrt(gl) / e;
      cross += q;
      cross_half += std::sqrt(q);
    }
    const double cj = std::sqrt(e0 + gj) * std::exp(0.5 * log_prod);

    r.sum_gamma += gj;
    r.sup_gamma_c = std::max(r.sup_gamma_c, gj * cj);
    r.sup_sqrt_gamma_c_over_eta0 = std::max(r.sup_sqrt_gamma_c_over_eta0, sgj / e0 * cj);
    r.sup_cross_sum = std::max(r.sup_cross_sum, cross * cj);

    r.sum_sqrt_gamma += sgj;
    r.sup_weighted_c = std::max(r.sup_weighted_c, sgj * (1.0 + e0) / e0 * cj);
    r.sup_cross_half = std::max(r.sup_cross_half, cross_half * (1.0 + e0) * cj);
    r.sup_cross_one = std::max(r.sup_cross_one, cross * (1.0 + e0) * cj);

    r.trace_sum += (1.0 + e0 * e0) * gj;
  }
  const auto within = [&](std::initializer_list<double> vs) {
    return std::all_of(vs.begin(), vs.end(), [&](double v) { return v <= threshold; });
  };
  r.craig2_ok = within({r.sum_sqrt_gamma, r.sup_weighted_c, r.sup_cross_half, r.sup_cross_one});
  r.craig1_ok = r.craig2_ok ||
                within({r.sum_gamma, r.sup_gamma_c, r.sup_sqrt_gamma_c_over_eta0, r.sup_cross_sum});
  r.trace_ok = within({r.trace_sum});
  return r;
}

// ---------------------------------------------------------------------------
// Carleson homogeneity (sampled).

/// Lebesgue measure of S intersected with [a, b].
[[nodiscard]] inline double spectrum_measure(const GapSet& gs, double a, double b) {
  const double lo = std::max(a, gs.base_energy());
  if (!(b > lo)) return 0.0;
  double m = b - lo;
  for (const Gap& g : gs.gaps()) {
    const double ol = std::max(lo, g.lo);
    const double oh = std::min(b, g.hi);
    if (oh > ol) m -= oh - ol;
  }
  return std::max(0.0, m);
}

struct CarlesonReport {
  bool ok = true;
  double tau = 0.0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  double worst_x0 = 0.0;
  double worst_eps = 0.0;
  std::size_t centers = 0;  ///< number of sampled x0 in S
  int levels = 0;           ///< eps in {2^0, ..., 2^-(levels-1)}
  double e_max = 0.0;       ///< right end of the sampled energy window
};

/// Checks |S cap [x0-eps, x0+eps]| >= tau*eps on a deterministic sample:
/// x0 ranges over E, every gap edge, and `sample_count` equispaced points of
/// S within [E, E_max] (E_max = last gap edge + 1); eps = 2^-k, k < levels.
/// A sampled sufficient test, not a proof.
[[nodiscard]] inline CarlesonReport carleson_check(const GapSet& gs, double tau, std::size_t sample_count,
                                                   int levels = 24) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("carleson_check: tau must lie in (0, 1]");
  CarlesonReport r;
  r.tau = tau;
  r.levels = levels;
  r.e_max = gs.top() + 1.0;

  std::vector<double> centers{gs.base_energy()};
  for (const Gap& g : gs.gaps()) {
    centers.push_back(g.lo);
    centers.push_back(g.hi);
  }
  const auto in_gap = [&](double x) {
    return std::any_of(gs.gaps().begin(), gs.gaps().end(), [&](const Gap& g) { return x > g.lo && x < g.hi; });
  };
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double x = gs.base_energy() +
                     (r.e_max - gs.base_energy()) * static_cast<double>(i) / std::max<std::size_t>(1, sample_count - 1);
    if (!in_gap(x)) centers.push_back(x);
  }
  r.centers = centers.size();
  for (double x0 : centers) {
    double eps = 1.0;
    for (int k = 0; k < levels; ++k, eps *= 0.5) {
      const double ratio = spectrum_measure(gs, x0 - eps, x0 + eps) / eps;
      if (ratio < r.worst_ratio) {
        r.worst_ratio = ratio;
        r.worst_x0 = x0;
        r.worst_eps = eps;
      }
    }
  }
  r.ok = r.worst_ratio >= tau;
  return r;
}

// ---------------------------------------------------------------------------
// Truncation S -> S^N.

struct Truncation {
  GapSet gapset;
  std::vector<std::size_t> kept;                        ///< new index -> old index
  std::vector<std::optional<std::size_t>> old_to_new;  ///< old index -> new index, if kept
};

/// Keeps the N largest gaps (ties broken by position), re-sorted by position.
[[nodiscard]] inline Truncation truncate(const GapSet& gs, std::size_t n) {
  if (n > gs.size()) throw std::invalid_argument("truncate: N exceeds gap count");
  std::vector<std::size_t> order(gs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gs.gamma(a) > gs.gamma(b); });
  order.resize(n);
  std::sort(order.begin(), order.end());

  Truncation t;
  t.kept = order;
  t.old_to_new.assign(gs.size(), std::nullopt);
  std::vector<Gap> gaps;
  gaps.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    gaps.push_back(gs.gap(order[k]));
    t.old_to_new[order[k]] = k;
  }
  t.gapset = GapSet(gs.base_energy(), std::move(gaps));
  return t;
}

/// Boolean mask over the gaps of `gs` selecting the ones kept by `t`.
[[nodiscard]] inline std::vector<bool> kept_mask(const Truncation& t) {
  std::vector<bool> mask(t.old_to_new.size(), false);
  for (std::size_t old : t.kept) mask[old] = true;
  return mask;
}

// ---------------------------------------------------------------------------
// Synthetic families.

/// gamma_j = 4^-j, gap j starts at distance j above E = 0 (j = 1..n).
[[nodiscard]] inline GapSet make_geometric_family(std::size_t n) {
  std::vector<Gap> gaps;
  for (std::size_t j = 1; j <= n; ++j) {
    const double lo = static_cast<double>(j);
    gaps.push_back({lo, lo + std::pow(4.0, -static_cast<double>(j))});
  }
  return GapSet(0.0, std::move(gaps));
}

/// gamma_j = j^-power, gap j starts at spacing * j above E = 0.
[[nodiscard]] inline GapSet make_power_family(std::size_t n, double power, double spacing = 2.0) {
  std::vector<Gap> gaps;
  for (std::size_t j = 1; j <= n; ++j) {
    const double lo = spacing * static_cast<double>(j);
    gaps.push_back({lo, lo + std::pow(static_cast<double>(j), -power)});
  }
  return GapSet(0.0, std::move(gaps));
}

// ---------------------------------------------------------------------------
// Quasi-periodic gap families labelled by m in Z^nu.

struct QPLabel {
  std::vector<int> m;
  double gamma = 0.0;
  double lo = 0.0;  ///< lower gap edge; eta_{m,0} = lo - base_energy
};

[[nodiscard]] inline int l1_norm(std::span<const int> m) {
  int s = 0;
  for (int v : m) s += std::abs(v);
  return s;
}

struct QPGapFamily {
  std::vector<double> omega;
  double a0 = 0.5;
  double b0 = 2.0;
  double epsilon = 1e-3;
  double kappa0 = 1.0;
  double base_energy = 0.0;
  std::vector<QPLabel> labels;

  [[nodiscard]] GapSet to_gapset() const {
    std::vector<Gap> gaps;
    gaps.reserve(labels.size());
    for (const QPLabel& l : labels) gaps.push_back({l.lo, l.lo + l.gamma});
    return GapSet(base_energy, std::move(gaps));
  }
};

[[nodiscard]] inline double dot(std::span<const int> m, std::span<const double> omega) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * omega[i];
  return s;
}

/// Synthetic family: gap m opens at rotation number |m.omega|, i.e. at energy
/// base + (pi m.omega)^2, with gamma_m = epsilon exp(-kappa0 |m|). Labels m and
/// -m name the same gap; the representative has its first nonzero entry
/// positive. Every stored label is checked against |m.omega| >= a0 |m|^-b0.
[[nodiscard]] inline QPGapFamily make_qp_family(std::vector<double> omega, double a0, double b0, double epsilon,
                                                double kappa0, int max_norm, double base_energy = 0.0) {
  const std::size_t nu = omega.size();
  if (nu == 0) throw ConfigError("qp family: omega must be nonempty");
  if (max_norm < 1) throw ConfigError("qp family: max_norm must be >= 1");
  QPGapFamily fam;
  fam.omega = std::move(omega);
  fam.a0 = a0;
  fam.b0 = b0;
  fam.epsilon = epsilon;
  fam.kappa0 = kappa0;
  fam.base_energy = base_energy;

  std::vector<int> m(nu, -max_norm);
  for (;;) {
    const int norm = l1_norm(m);
    const auto first = std::find_if(m.begin(), m.end(), [](int v) { return v != 0; });
    if (norm >= 1 && norm <= max_norm && first != m.end() && *first > 0) {
      const double rot = std::abs(dot(m, fam.omega));
      if (rot < a0 * std::pow(norm, -b0)) {
        std::ostringstream msg;
        msg << "qp family: Diophantine condition fails at label (";
        for (std::size_t i = 0; i < nu; ++i) msg << (i ? "," : "") << m[i];
        msg << ")";
        throw ConfigError(msg.str());
      }
      const double k = std::numbers::pi * rot;
      fam.labels.push_back({m, epsilon * std::exp(-kappa0 * norm), base_energy + k * k});
    }
    std::size_t i = 0;
    while (i < nu && m[i] == max_norm) m[i++] = -max_norm;
    if (i == nu) break;
    ++m[i];
  }
  std::sort(fam.labels.begin(), fam.labels.end(), [](const QPLabel& a, const QPLabel& b) { return a.lo < b.lo; });
  return fam;
}

/// Constants of the gap-bound inequalities; none is given explicitly for a
/// concrete frequency, so callers supply them.
struct QPConstants {
  double L = 1.0;  ///< threshold in R_m = {n : gamma_n > L eta_{n,m}^4}
  double a = 1.0;  ///< eta_{m,n} >= a |m|^-b
  double b = 1.0;
  double c = 1.0;  ///< eta_{m,0} <= c |m|^2
  double D = 1.0;  ///< |R_m| <= log2 log2 |m| + D
  double F = 1.0;  ///< C_m <= F exp(F log|m| log log|m|)
};

struct QPLabelReport {
  std::vector<int> m;
  double gamma = 0.0;
  double eta0 = 0.0;
  double c_m = 0.0;
  std::size_t r_m = 0;
};

struct QPReport {
  bool gamma_ok = true;     ///< gamma_m < 2 eps exp(-kappa0 |m| / 2)
  bool eta_mn_ok = true;    ///< eta_{m,n} >= a |m|^-b for |n| <= |m|
  bool eta_m0_ok = true;    ///< eta_{m,0} <= c |m|^2
  bool r_m_ok = true;       ///< |R_m| bound
  bool c_m_ok = true;       ///< subexponential C_m bound
  std::optional<std::string> first_violation;
  std::vector<QPLabelReport> labels;

  [[nodiscard]] bool ok() const { return gamma_ok && eta_mn_ok && eta_m0_ok && r_m_ok && c_m_ok; }
};

/// log2 log2 |m| and log|m| log log|m| are clamped at 0 for the labels
/// (|m| <= 2, resp. |m| < e) where they are negative or undefined.
[[nodiscard]] inline QPReport qp_family_check(const QPGapFamily& fam, const QPConstants& k) {
  QPReport r;
  const GapSet gs = fam.to_gapset();  // validates disjointness; same order as labels
  const std::size_t n = fam.labels.size();
  const auto label_str = [&](std::size_t i) {
    std::ostringstream s;
    s << "(";
    for (std::size_t q = 0; q < fam.labels[i].m.size(); ++q) s << (q ? "," : "") << fam.labels[i].m[q];
    s << ")";
    return s.str();
  };
  const auto fail = [&](bool& flag, const std::string& what, std::size_t i) {
    flag = false;
    if (!r.first_violation) r.first_violation = what + " at m=" + label_str(i);
  };

  for (std::size_t i = 0; i < n; ++i) {
    const QPLabel& lab = fam.labels[i];
    const double norm = l1_norm(lab.m);
    QPLabelReport row{lab.m, gs.gamma(i), gs.eta0(i), c_constant(gs, i), 0};

    if (!(row.gamma < 2.0 * fam.epsilon * std::exp(-0.5 * fam.kappa0 * norm))) fail(r.gamma_ok, "gamma bound", i);

    const double lower = k.a * std::pow(norm, -k.b);
    if (row.eta0 < lower) fail(r.eta_mn_ok, "eta_{m,n} lower bound (n=0)", i);
    for (std::size_t q = 0; q < n; ++q) {
      if (q == i || l1_norm(fam.labels[q].m) > norm) continue;
      if (gs.eta(i, q) < lower) {
        fail(r.eta_mn_ok, "eta_{m,n} lower bound", i);
        break;
      }
    }

    if (row.eta0 > k.c * norm * norm) fail(r.eta_m0_ok, "eta_{m,0} upper bound", i);

    for (std::size_t q = 0; q < n; ++q) {
      if (q == i) continue;
      const double e = gs.eta(q, i);
      if (gs.gamma(q) > k.L * e * e * e * e) ++row.r_m;
    }
    const double loglog2 = norm > 2.0 ? std::log2(std::log2(norm)) : 0.0;
    if (static_cast<double>(row.r_m) > loglog2 + k.D) fail(r.r_m_ok, "|R_m| bound", i);

    const double lognorm = std::log(norm);
    const double loglog = norm > std::numbers::e ? std::log(lognorm) : 0.0;
    if (row.c_m > k.F * std::exp(k.F * lognorm * loglog)) fail(r.c_m_ok, "C_m bound", i);

    r.labels.push_back(std::move(row));
  }
  return r;
}

}  // namespace dubrovin
