#include "vms/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vms {

namespace {

void check_mode(ModeIndex m) {
  if (m.j < 1 || m.s < 1) {
    throw SpectralError("mode indices must be >= 1, got (" + std::to_string(m.j) + "," +
                        std::to_string(m.s) + ")");
  }
}

void check_local(const LocalAdvection& la) {
  if (!(la.mu > 0.0)) throw SpectralError("diffusivity must be positive");
  if (!(la.h > 0.0)) throw SpectralError("element size must be positive");
}

constexpr double kPi = std::numbers::pi;

}  // namespace

double LocalAdvection::speed() const { return std::hypot(a1, a2); }

double sin_pi(double x) {
  double r = std::fmod(x, 2.0);  // (-2, 2)
  if (r > 1.0) r -= 2.0;
  if (r <= -1.0) r += 2.0;  // (-1, 1]
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(kPi * r);
}

double cos_pi(double x) { return sin_pi(x + 0.5); }

double w_square(ModeIndex m, double h, Point2 local) {
  check_mode(m);
  if (!(h > 0.0)) throw SpectralError("element size must be positive");
  return sin_pi(m.j * local.x / h) * sin_pi(m.s * local.y / h);
}

double sigma_square(ModeIndex m, double h) {
  check_mode(m);
  if (!(h > 0.0)) throw SpectralError("element size must be positive");
  const double kj = m.j * kPi / h;
  const double ks = m.s * kPi / h;
  return kj * kj + ks * ks;
}

double w_triangle_ref(ModeIndex m, Point2 p) {
  check_mode(m);
  const double sign = ((m.j + m.s) % 2 == 0) ? 1.0 : -1.0;
  return sin_pi(m.j * p.x) * sin_pi(m.s * p.y) - sign * sin_pi(m.s * p.x) * sin_pi(m.j * p.y);
}

double sigma_triangle_ref(ModeIndex m) {
  check_mode(m);
  return kPi * kPi * (static_cast<double>(m.j) * m.j + static_cast<double>(m.s) * m.s);
}

double lambda_ad(ModeIndex m, const LocalAdvection& la) {
  check_local(la);
  const double a2 = la.a1 * la.a1 + la.a2 * la.a2;
  return la.mu * (a2 / (4.0 * la.mu * la.mu) + sigma_square(m, la.h));
}

namespace {

struct CellFrame {
  Point2 corner;  // right-angle vertex
  double h;
  Orientation orientation;
};

CellFrame cell_frame(const Mesh& mesh, std::size_t e) {
  const Orientation o = mesh.orientation(e);
  if (o == Orientation::General || !mesh.structured()) {
    throw SpectralError("element " + std::to_string(e) +
                        " is not a structured A/B triangle; eigen-pairs are unavailable");
  }
  return {mesh.node(mesh.element(e)[0]), mesh.structured()->h, o};
}

}  // namespace

Point2 to_reference(const Mesh& mesh, std::size_t e, Point2 p) {
  const CellFrame f = cell_frame(mesh, e);
  if (f.orientation == Orientation::A) {
    return {(p.x - f.corner.x) / f.h, (p.y - f.corner.y) / f.h};
  }
  return {(f.corner.x - p.x) / f.h, (f.corner.y - p.y) / f.h};
}

double eigenfunction_physical(const Mesh& mesh, std::size_t e, ModeIndex m,
                              const LocalAdvection& la, Point2 p) {
  check_local(la);
  const CellFrame f = cell_frame(mesh, e);
  const Point2 ref = to_reference(mesh, e, p);
  // lower-left corner of the cell
  const Point2 ll = f.orientation == Orientation::A
                        ? f.corner
                        : Point2{f.corner.x - f.h, f.corner.y - f.h};
  const double pe1 = la.h * la.a1 / (2.0 * la.mu);
  const double pe2 = la.h * la.a2 / (2.0 * la.mu);
  const double expo = pe1 * (p.x - ll.x) / f.h + pe2 * (p.y - ll.y) / f.h;
  return std::exp(expo) * w_triangle_ref(m, ref);
}

double weight_p(const LocalAdvection& la, Point2 local) {
  check_local(la);
  return std::exp(-(la.a1 * local.x + la.a2 * local.y) / la.mu);
}

}  // namespace vms
