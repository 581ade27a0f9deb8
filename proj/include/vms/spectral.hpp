#ifndef VMS_SPECTRAL_HPP
#define VMS_SPECTRAL_HPP

#include <cstddef>
#include <stdexcept>

#include "vms/geometry.hpp"

namespace vms {

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mode pair (j, s), both >= 1.
struct ModeIndex {
  int j = 1;
  int s = 1;
};

/// Element-constant advection a = (a1, a2), diffusivity mu > 0 and element side h > 0.
struct LocalAdvection {
  double a1 = 0.0;
  double a2 = 0.0;
  double mu = 1.0;
  double h = 1.0;

  double speed() const;
};

/// sin(pi * x) with exact zeros at integer x.
double sin_pi(double x);
double cos_pi(double x);

/// Dirichlet Laplace eigenfunction on a square cell of side h, evaluated at
/// coordinates measured from the cell's upper-right node, local in [-h,0]^2.
double w_square(ModeIndex m, double h, Point2 local);

/// (j pi / h)^2 + (s pi / h)^2
double sigma_square(ModeIndex m, double h);

/// Dirichlet Laplace eigenfunction on the reference triangle.
///   W_js(x,y) = sin(j pi x) sin(s pi y) - sin(s pi (1-x)) sin(j pi (1-y))
/// evaluated through sin(k pi (1-t)) = (-1)^(k+1) sin(k pi t).
double w_triangle_ref(ModeIndex m, Point2 p);

/// pi^2 (j^2 + s^2)
double sigma_triangle_ref(ModeIndex m);

/// Advection-diffusion eigenvalue mu (|a|^2 / (4 mu^2) + (j pi/h)^2 + (s pi/h)^2),
/// shared by square and triangle cells.
double lambda_ad(ModeIndex m, const LocalAdvection& la);

/// Maps a physical point of a structured A or B element to the reference
/// triangle (G_A or G_B).
Point2 to_reference(const Mesh& mesh, std::size_t e, Point2 p);

/// Advection-diffusion eigenfunction on a structured element:
///   exp(Pe1 (x - x0)/h + Pe2 (y - y0)/h) * W_js(G(x,y)),
/// where (x0, y0) is the lower-left corner of the element's cell and
/// Pe_i = h a_i / (2 mu). Throws SpectralError for general elements.
double eigenfunction_physical(const Mesh& mesh, std::size_t e, ModeIndex m,
                              const LocalAdvection& la, Point2 p);

/// Weight exp(-(a . x) / mu) at element-local coordinates x.
double weight_p(const LocalAdvection& la, Point2 local);

}  // namespace vms

#endif  // VMS_SPECTRAL_HPP
