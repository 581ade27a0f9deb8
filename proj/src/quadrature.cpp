#include "vms/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vms {

const std::array<QuadraturePoint, 7>& triangle_rule_deg5() {
  static const std::array<QuadraturePoint, 7> rule = [] {
    const double r15 = std::sqrt(15.0);
    const double a1 = (6.0 - r15) / 21.0;
    const double b1 = (9.0 + 2.0 * r15) / 21.0;
    const double a2 = (6.0 + r15) / 21.0;
    const double b2 = (9.0 - 2.0 * r15) / 21.0;
    const double w0 = 0.5 * 9.0 / 40.0;
    const double w1 = 0.5 * (155.0 - r15) / 1200.0;
    const double w2 = 0.5 * (155.0 + r15) / 1200.0;
    return std::array<QuadraturePoint, 7>{{
        {{1.0 / 3.0, 1.0 / 3.0}, w0},
        {{a1, a1}, w1},
        {{b1, a1}, w1},
        {{a1, b1}, w1},
        {{a2, a2}, w2},
        {{b2, a2}, w2},
        {{a2, b2}, w2},
    }};
  }();
  return rule;
}

const std::array<QuadraturePoint, 3>& triangle_rule_deg2() {
  static const std::array<QuadraturePoint, 3> rule{{
      {{0.5, 0.0}, 1.0 / 6.0},
      {{0.5, 0.5}, 1.0 / 6.0},
      {{0.0, 0.5}, 1.0 / 6.0},
  }};
  return rule;
}

namespace {

struct Sums {
  double value = 0.0;
  double magnitude = 0.0;
};

Sums composite_sums(const std::function<double(double, double)>& f, std::size_t k) {
  const auto& rule = triangle_rule_deg5();
  const double s = 1.0 / static_cast<double>(k);
  const double jac = s * s;  // each sub-triangle is the reference scaled by s
  Sums sums;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; i + j < k; ++j) {
      const double x0 = static_cast<double>(i) * s;
      const double y0 = static_cast<double>(j) * s;
      for (const auto& q : rule) {
        const double v = f(x0 + s * q.point.x, y0 + s * q.point.y);
        sums.value += jac * q.weight * v;
        sums.magnitude += jac * q.weight * std::abs(v);
      }
      if (i + j + 1 < k) {
        // inverted sub-triangle with right-angle vertex at (x0+s, y0+s)
        const double x1 = x0 + s;
        const double y1 = y0 + s;
        for (const auto& q : rule) {
          const double v = f(x1 - s * q.point.x, y1 - s * q.point.y);
          sums.value += jac * q.weight * v;
          sums.magnitude += jac * q.weight * std::abs(v);
        }
      }
    }
  }
  return sums;
}

}  // namespace

double integrate_reference_triangle(const std::function<double(double, double)>& f,
                                    std::size_t k) {
  if (k == 0) throw std::invalid_argument("subdivision count must be positive");
  return composite_sums(f, k).value;
}

AdaptiveResult integrate_reference_triangle_adaptive(
    const std::function<double(double, double)>& f, double rel_tol, std::size_t k0,
    std::size_t k_max) {
  if (k0 == 0 || k_max < k0) throw std::invalid_argument("invalid subdivision bounds");
  Sums prev = composite_sums(f, k0);
  std::size_t k = k0;
  while (2 * k <= k_max) {
    k *= 2;
    const Sums cur = composite_sums(f, k);
    const double scale = std::max(std::abs(cur.value), cur.magnitude);
    if (std::abs(cur.value - prev.value) <= rel_tol * scale) {
      return {cur.value, k, true};
    }
    prev = cur;
  }
  return {prev.value, k, false};
}

LineRule gauss_legendre_composite(std::size_t n, std::size_t panels) {
  if (n == 0 || panels == 0) throw std::invalid_argument("empty Gauss-Legendre rule");
  // Newton iteration on P_n at the Chebyshev-like initial guesses.
  std::vector<double> t(n), wt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    t[i] = x;
    wt[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }

  LineRule rule;
  rule.x.reserve(n * panels);
  rule.w.reserve(n * panels);
  const double width = 1.0 / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) * width;
    for (std::size_t i = 0; i < n; ++i) {
      rule.x.push_back(a + 0.5 * width * (1.0 - t[i]));
      rule.w.push_back(0.5 * width * wt[i]);
    }
  }
  return rule;
}

}  // namespace vms
