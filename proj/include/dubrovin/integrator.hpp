#pragma once

// Dormand-Prince 5(4) for autonomous systems y' = f(y), with PI step control
// in a weighted sup norm and cubic Hermite dense output per accepted step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dubrovin/errors.hpp"

namespace dubrovin {

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;

  StepStats& operator+=(const StepStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    evaluations += o.evaluations;
    return *this;
  }
};

/// One accepted step, enough to build the Hermite interpolant on [s0, s1].
struct StepRecord {
  double s0 = 0.0, s1 = 0.0;
  std::span<const double> y0, f0, y1, f1;

  [[nodiscard]] double interpolate(std::size_t j, double s) const {
    const double h = s1 - s0;
    const double th = (s - s0) / h;
    const double th2 = th * th, th3 = th2 * th;
    const double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + th;
    const double h01 = -2 * th3 + 3 * th2, h11 = th3 - th2;
    return h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j];
  }
};

/// `Field` is callable as field(std::span<const double> y, std::span<double> dy).
/// A step is accepted when its local error estimate e satisfies
/// sup_j w_j |e_j| <= tol, with weights w_j (gamma_j^{1/2} for the torus
/// metric). The tolerance is absolute since lifted angles grow without bound.
template <class Field>
class DormandPrince {
 public:
  DormandPrince(Field field, std::vector<double> weights, double tol)
      : field_(std::move(field)), w_(std::move(weights)), tol_(tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("integrator: tol must be positive");
    const std::size_t n = w_.size();
    for (auto& k : k_) k.assign(n, 0.0);
    ytmp_.assign(n, 0.0);
    ynew_.assign(n, 0.0);
  }

  [[nodiscard]] double tol() const { return tol_; }
  [[nodiscard]] const StepStats& stats() const { return stats_; }

  /// Advances y from s0 to s1 (either direction). `on_step(const StepRecord&)`
  /// sees every accepted step. The last successful step size is kept so that
  /// node-to-node calls continue smoothly.
  template <class Observer>
  void integrate(std::vector<double>& y, double s0, double s1, Observer&& on_step) {
    const std::size_t n = y.size();
    if (n != w_.size()) throw std::invalid_argument("integrator: state size mismatch");
    if (s1 == s0 || n == 0) return;
    const double dir = s1 > s0 ? 1.0 : -1.0;
    double s = s0;

    eval(y, k_[0]);
    if (h_ <= 0.0) h_ = initial_step(y, std::abs(s1 - s0));

    while (dir * (s1 - s) > 0.0) {
      double h = std::min(h_, std::abs(s1 - s));
      const bool last = h >= std::abs(s1 - s);
      if (!last && h < 1e-14 * std::max(1.0, std::abs(s)))
        throw NumericalError("integrator: step size underflow at s=" + std::to_string(s));

      const double err = attempt(y, dir * h);
      if (err <= 1.0) {
        const double s_new = last ? s1 : s + dir * h;
        StepRecord rec{s, s_new, y, k_[0], ynew_, k_[6]};
        on_step(static_cast<const StepRecord&>(rec));
        y.swap(ynew_);
        std::swap(k_[0], k_[6]);  // FSAL
        s = s_new;
        ++stats_.accepted;
        const double fac = err == 0.0 ? kMaxFac
                                      : std::clamp(0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev_, 0.4 / 5.0),
                                                   kMinFac, kMaxFac);
        err_prev_ = std::max(err, 1e-4);
        if (!last || fac < 1.0) h_ = h * fac;
      } else {
        ++stats_.rejected;
        h_ = h * std::max(kMinFac, 0.9 * std::pow(err, -1.0 / 5.0));
      }
    }
  }

  void integrate(std::vector<double>& y, double s0, double s1) {
    integrate(y, s0, s1, [](const StepRecord&) {});
  }

 private:
  static constexpr double kMinFac = 0.2;
  static constexpr double kMaxFac = 5.0;

  void eval(std::span<const double> y, std::vector<double>& dy) {
    field_(y, std::span<double>(dy));
    ++stats_.evaluations;
  }

  double initial_step(std::span<const double> y, double span) {
    double fmax = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) fmax = std::max(fmax, w_[j] * std::abs(k_[0][j]));
    const double h = fmax > 0.0 ? 0.01 * std::pow(tol_, 0.2) / fmax : span;
    return std::min(h, span);
  }

  // Dormand-Prince tableau; k_[6] ends up as f(y_new).
  double attempt(std::span<const double> y, double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    const std::size_t n = y.size();
    auto& k = k_;
    for (std::size_t j = 0; j < n; ++j) ytmp_[j] = y[j] + h * a21 * k[0][j];
    eval(ytmp_, k[1]);
    for (std::size_t j = 0; j < n; ++j) ytmp_[j] = y[j] + h * (a31 * k[0][j] + a32 * k[1][j]);
    eval(ytmp_, k[2]);
    for (std::size_t j = 0; j < n; ++j) ytmp_[j] = y[j] + h * (a41 * k[0][j] + a42 * k[1][j] + a43 * k[2][j]);
    eval(ytmp_, k[3]);
    for (std::size_t j = 0; j < n; ++j)
      ytmp_[j] = y[j] + h * (a51 * k[0][j] + a52 * k[1][j] + a53 * k[2][j] + a54 * k[3][j]);
    eval(ytmp_, k[4]);
    for (std::size_t j = 0; j < n; ++j)
      ytmp_[j] = y[j] + h * (a61 * k[0][j] + a62 * k[1][j] + a63 * k[2][j] + a64 * k[3][j] + a65 * k[4][j]);
    eval(ytmp_, k[5]);
    for (std::size_t j = 0; j < n; ++j)
      ynew_[j] = y[j] + h * (b1 * k[0][j] + b3 * k[2][j] + b4 * k[3][j] + b5 * k[4][j] + b6 * k[5][j]);
    eval(ynew_, k[6]);

    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = h * (e1 * k[0][j] + e3 * k[2][j] + e4 * k[3][j] + e5 * k[4][j] + e6 * k[5][j] + e7 * k[6][j]);
      err = std::max(err, w_[j] * std::abs(e) / tol_);
    }
    if (!std::isfinite(err)) err = 1e10;
    return err;
  }

  Field field_;
  std::vector<double> w_;
  double tol_;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
  std::array<std::vector<double>, 7> k_;
  std::vector<double> ytmp_, ynew_;
  StepStats stats_;
};

}  // namespace dubrovin
