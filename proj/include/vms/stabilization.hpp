#ifndef VMS_STABILIZATION_HPP
#define VMS_STABILIZATION_HPP

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vms/spectral.hpp"

namespace vms {

class StabilizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signed directional grid Peclet numbers Pe_i = h a_i / (2 mu).
struct PecletPair {
  double pe1 = 0.0;
  double pe2 = 0.0;

  double norm_squared() const { return pe1 * pe1 + pe2 * pe2; }
  double norm() const;
};

/// Number of modes kept in each index of the spectral series.
struct Truncation {
  int m1 = 40;
  int m2 = 40;
};

/// Largest |Pe_i| accepted by the spectral integrals.
inline constexpr double kMaxDirectionalPeclet = 60.0;

/// h^2 / (mu (Pe^2 + pi^2 (j^2 + s^2))), the inverse of the eigenvalue.
double beta(ModeIndex m, double h, double mu, double pe);

enum class IntegralSign { Minus, Plus };

/// I^-/+_js = int_T exp(-/+ (Pe1 (x-1) + Pe2 (y-1))) W_js(x,y), evaluated by
/// the adaptive composite triangle rule.
double integral_I(IntegralSign sign, ModeIndex m, PecletPair pe);

/// All unshifted integrals int_T exp(alpha x + beta y) W_js for 1 <= j,s <= m_max,
/// stored as exp(log_scale) * values(j-1, s-1). The inner y-integral is taken in
/// closed form and the outer one by composite Gauss-Legendre.
struct ScaledModeIntegrals {
  Eigen::MatrixXd values;
  double log_scale = 0.0;
};
ScaledModeIntegrals mode_integrals(double alpha, double beta, int m_max);

/// psi_{M1,M2}(Pe1,Pe2) = sum_{j<=M1, s<=M2} (pi^2 (j^2+s^2) + Pe^2)^-1 I^-_js I^+_js.
/// The product I^- I^+ is formed from unshifted integrals; diagonal modes
/// (j == s) vanish identically and are skipped.
double psi(PecletPair pe, Truncation tr = {});

/// 8 h^2 psi / mu
double tau_spectral(double h, double mu, PecletPair pe, Truncation tr = {});

/// P coth(P) - 1, with the series P^2/3 - P^4/45 near zero.
double phi(double p);

/// Generalized 1D coefficient (mu / |a|^2) phi(h |a| / (2 mu)); h^2 / (12 mu) at a = 0.
double tau_gen1d(double h, double mu, double a_norm);

/// ((4 mu / h^2)^2 + (2 |a| / h)^2)^(-1/2)
double tau_codina(double h, double mu, double a_norm);

/// Optimal 1D coefficient (mu / a^2) phi(h a / (2 mu)) for a signed 1D velocity.
double tau_1d(double h, double mu, double a);

struct Fig2Row {
  double p = 0.0;
  double phi_over_4p = 0.0;
  double curve_pe1 = 0.0;  // 8 P psi(P, 0)
  double curve_pe2 = 0.0;  // 8 P psi(0, P)
};

std::vector<Fig2Row> fig2_curves(std::span<const double> p_grid, Truncation tr = {});

/// CSV with header P,phi_over_4P,curve_Pe1,curve_Pe2 and 17 significant digits.
void write_fig2_csv(std::ostream& out, std::span<const Fig2Row> rows);

}  // namespace vms

#endif  // VMS_STABILIZATION_HPP
