#include "vms/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>

#include "vms/quadrature.hpp"

namespace vms {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kGaussPointsPerPanel = 20;

void check_peclet(PecletPair pe) {
  if (!std::isfinite(pe.pe1) || !std::isfinite(pe.pe2)) {
    throw StabilizationError("Peclet numbers must be finite");
  }
  if (std::abs(pe.pe1) > kMaxDirectionalPeclet || std::abs(pe.pe2) > kMaxDirectionalPeclet) {
    throw StabilizationError("directional Peclet number exceeds " +
                             std::to_string(kMaxDirectionalPeclet) +
                             "; exponential weights overflow, use the product form psi()");
  }
}

void check_truncation(Truncation tr) {
  if (tr.m1 < 1 || tr.m2 < 1) throw StabilizationError("truncation orders must be >= 1");
}

/// Trigonometric tables that do not depend on the exponent, reused across calls
/// with the same number of modes.
struct ModeBasis {
  int m_max = 0;
  LineRule rule;
  Eigen::MatrixXd weighted_sin_x;  // w_q sin(a pi x_q), a = 1..m_max
  Eigen::MatrixXd sin_1mx;         // sin(b pi (1 - x_q))
  Eigen::MatrixXd cos_1mx;         // cos(b pi (1 - x_q))

  explicit ModeBasis(int m) : m_max(m) {
    const std::size_t panels = std::max<std::size_t>(16, static_cast<std::size_t>(m + 1) / 2);
    rule = gauss_legendre_composite(kGaussPointsPerPanel, panels);
    const auto q = static_cast<Eigen::Index>(rule.x.size());
    weighted_sin_x.resize(m, q);
    sin_1mx.resize(m, q);
    cos_1mx.resize(m, q);
    for (Eigen::Index k = 0; k < q; ++k) {
      const double x = rule.x[static_cast<std::size_t>(k)];
      const double w = rule.w[static_cast<std::size_t>(k)];
      for (int a = 1; a <= m; ++a) {
        weighted_sin_x(a - 1, k) = w * sin_pi(a * x);
        sin_1mx(a - 1, k) = sin_pi(a * (1.0 - x));
        cos_1mx(a - 1, k) = cos_pi(a * (1.0 - x));
      }
    }
  }
};

const ModeBasis& basis_for(int m_max) {
  thread_local std::unique_ptr<ModeBasis> cache;
  if (!cache || cache->m_max != m_max) cache = std::make_unique<ModeBasis>(m_max);
  return *cache;
}

}  // namespace

double PecletPair::norm() const { return std::hypot(pe1, pe2); }

double beta(ModeIndex m, double h, double mu, double pe) {
  if (m.j < 1 || m.s < 1) throw StabilizationError("mode indices must be >= 1");
  if (!(h > 0.0) || !(mu > 0.0)) throw StabilizationError("h and mu must be positive");
  if (pe < 0.0) throw StabilizationError("element Peclet number must be non-negative");
  return h * h / (mu * (pe * pe + sigma_triangle_ref(m)));
}

double integral_I(IntegralSign sign, ModeIndex m, PecletPair pe) {
  check_peclet(pe);
  const double s = sign == IntegralSign::Plus ? 1.0 : -1.0;
  auto f = [&](double x, double y) {
    return std::exp(s * (pe.pe1 * (x - 1.0) + pe.pe2 * (y - 1.0))) * w_triangle_ref(m, {x, y});
  };
  return integrate_reference_triangle_adaptive(f, 1e-12, 8, 512).value;
}

ScaledModeIntegrals mode_integrals(double alpha, double beta_y, int m_max) {
  if (m_max < 1) throw StabilizationError("m_max must be >= 1");
  if (!std::isfinite(alpha) || !std::isfinite(beta_y)) {
    throw StabilizationError("exponent coefficients must be finite");
  }
  const ModeBasis& basis = basis_for(m_max);
  const double shift = std::max({0.0, alpha, beta_y});
  const auto q = static_cast<Eigen::Index>(basis.rule.x.size());

  // Inner integral S_b(t) = int_0^t e^{beta y} sin(b pi y) dy, closed form,
  // multiplied by the outer factor e^{alpha x - shift}, at t = 1 - x.
  Eigen::VectorXd e_outer(q), e_full(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const double x = basis.rule.x[static_cast<std::size_t>(k)];
    e_outer(k) = std::exp(alpha * x - shift);
    e_full(k) = std::exp(alpha * x + beta_y * (1.0 - x) - shift);
  }
  Eigen::MatrixXd inner(m_max, q);
  for (int b = 1; b <= m_max; ++b) {
    const double kb = b * kPi;
    const double denom = beta_y * beta_y + kb * kb;
    for (Eigen::Index k = 0; k < q; ++k) {
      inner(b - 1, k) =
          (e_full(k) * (beta_y * basis.sin_1mx(b - 1, k) - kb * basis.cos_1mx(b - 1, k)) +
           kb * e_outer(k)) /
          denom;
    }
  }
  // K(a, b) = int_T e^{alpha x + beta y} sin(a pi x) sin(b pi y)
  const Eigen::MatrixXd kmat = basis.weighted_sin_x * inner.transpose();

  ScaledModeIntegrals out;
  out.log_scale = shift;
  out.values.resize(m_max, m_max);
  for (int j = 1; j <= m_max; ++j) {
    for (int s = 1; s <= m_max; ++s) {
      const double sign = ((j + s) % 2 == 0) ? 1.0 : -1.0;
      out.values(j - 1, s - 1) =
          j == s ? 0.0 : kmat(j - 1, s - 1) - sign * kmat(s - 1, j - 1);
    }
  }
  return out;
}

double psi(PecletPair pe, Truncation tr) {
  check_peclet(pe);
  check_truncation(tr);
  const int m = std::max(tr.m1, tr.m2);
  const ScaledModeIntegrals plus = mode_integrals(pe.pe1, pe.pe2, m);
  const ScaledModeIntegrals minus = mode_integrals(-pe.pe1, -pe.pe2, m);
  const double pe2 = pe.norm_squared();
  double acc = 0.0;
  for (int j = 1; j <= tr.m1; ++j) {
    for (int s = 1; s <= tr.m2; ++s) {
      if (j == s) continue;
      const double w = 1.0 / (kPi * kPi * (static_cast<double>(j) * j + static_cast<double>(s) * s) + pe2);
      acc += w * plus.values(j - 1, s - 1) * minus.values(j - 1, s - 1);
    }
  }
  return acc * std::exp(plus.log_scale + minus.log_scale);
}

double tau_spectral(double h, double mu, PecletPair pe, Truncation tr) {
  if (!(h > 0.0) || !(mu > 0.0)) throw StabilizationError("h and mu must be positive");
  return 8.0 * h * h / mu * psi(pe, tr);
}

double phi(double p) {
  const double a = std::abs(p);
  if (a < 1e-4) {
    const double p2 = p * p;
    return p2 / 3.0 - p2 * p2 / 45.0;
  }
  return a / std::tanh(a) - 1.0;
}

double tau_gen1d(double h, double mu, double a_norm) {
  if (!(h > 0.0) || !(mu > 0.0)) throw StabilizationError("h and mu must be positive");
  if (a_norm < 0.0) throw StabilizationError("speed must be non-negative");
  const double pe = h * a_norm / (2.0 * mu);
  if (pe < 1e-4) {
    // (mu/a^2) phi(Pe) = (h^2 / (4 mu)) (1/3 - Pe^2/45) without dividing by a^2
    return h * h / (4.0 * mu) * (1.0 / 3.0 - pe * pe / 45.0);
  }
  return mu / (a_norm * a_norm) * phi(pe);
}

double tau_codina(double h, double mu, double a_norm) {
  if (!(h > 0.0)) throw StabilizationError("h must be positive");
  if (mu < 0.0 || a_norm < 0.0) throw StabilizationError("mu and |a| must be non-negative");
  if (mu == 0.0 && a_norm == 0.0) {
    throw StabilizationError("Codina coefficient undefined for mu = 0 and |a| = 0");
  }
  const double diff = 4.0 * mu / (h * h);
  const double adv = 2.0 * a_norm / h;
  return 1.0 / std::sqrt(diff * diff + adv * adv);
}

double tau_1d(double h, double mu, double a) { return tau_gen1d(h, mu, std::abs(a)); }

std::vector<Fig2Row> fig2_curves(std::span<const double> p_grid, Truncation tr) {
  std::vector<Fig2Row> rows;
  rows.reserve(p_grid.size());
  for (double p : p_grid) {
    if (!(p > 0.0) || p > kMaxDirectionalPeclet) {
      throw StabilizationError("curve abscissae must lie in (0, 60]");
    }
    Fig2Row r;
    r.p = p;
    r.phi_over_4p = phi(p) / (4.0 * p);
    r.curve_pe1 = 8.0 * p * psi({p, 0.0}, tr);
    r.curve_pe2 = 8.0 * p * psi({0.0, p}, tr);
    rows.push_back(r);
  }
  return rows;
}

void write_fig2_csv(std::ostream& out, std::span<const Fig2Row> rows) {
  const auto old = out.precision(17);
  out << "P,phi_over_4P,curve_Pe1,curve_Pe2\n";
  for (const Fig2Row& r : rows) {
    out << r.p << ',' << r.phi_over_4p << ',' << r.curve_pe1 << ',' << r.curve_pe2 << '\n';
  }
  out.precision(old);
}

}  // namespace vms
