#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_integration.h>

namespace dubrovin {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t n) {
    if (n == 0) throw std::invalid_argument("GaussLegendre: order must be positive");
    const std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
    if (!table) throw std::runtime_error("GaussLegendre: table allocation failed");
    nodes.resize(n);
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &nodes[i], &weights[i], table.get());
  }

  [[nodiscard]] std::size_t order() const { return nodes.size(); }

  /// Integral of f over [a, b]; f may return real or complex values.
  template <class F>
  [[nodiscard]] auto integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(c)) s{};
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(c + h * nodes[i]);
    return s * h;
  }
};

}  // namespace dubrovin
