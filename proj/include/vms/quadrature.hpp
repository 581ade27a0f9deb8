#ifndef VMS_QUADRATURE_HPP
#define VMS_QUADRATURE_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "vms/geometry.hpp"

namespace vms {

struct QuadraturePoint {
  Point2 point;
  double weight;  // already scaled by the area of the integration domain
};

/// 7-point degree-5 rule on the reference triangle {x>0, y>0, x+y<1}.
const std::array<QuadraturePoint, 7>& triangle_rule_deg5();

/// 3-point edge-midpoint rule (degree 2) on the reference triangle.
const std::array<QuadraturePoint, 3>& triangle_rule_deg2();

/// Composite degree-5 rule on the reference triangle split into k*k congruent
/// sub-triangles.
double integrate_reference_triangle(const std::function<double(double, double)>& f,
                                    std::size_t k);

struct AdaptiveResult {
  double value = 0.0;
  std::size_t subdivisions = 0;
  bool converged = false;
};

/// Doubles k from k0 until the relative change drops below rel_tol (measured
/// against the integral of |f| so that vanishing integrals terminate), up to
/// k_max.
AdaptiveResult integrate_reference_triangle_adaptive(
    const std::function<double(double, double)>& f, double rel_tol = 1e-10,
    std::size_t k0 = 8, std::size_t k_max = 512);

/// Gauss-Legendre nodes and weights on [0,1], n points per panel, `panels`
/// equal panels.
struct LineRule {
  std::vector<double> x;
  std::vector<double> w;
};
LineRule gauss_legendre_composite(std::size_t n, std::size_t panels);

}  // namespace vms

#endif  // VMS_QUADRATURE_HPP
