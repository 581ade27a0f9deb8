#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "vms/coeff_table.hpp"
#include "vms/fem.hpp"
#include "vms/quadrature.hpp"

using namespace vms;
using std::numbers::pi;

namespace {

double exact_u(double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }

Problem manufactured(TauProvider tau) {
  Problem p;
  p.mu = 1.0;
  p.velocity = VelocityField::constant(1.0, 1.0);
  p.source = [](double x, double y) {
    return pi * std::cos(pi * x) * std::sin(pi * y) + pi * std::sin(pi * x) * std::cos(pi * y) +
           2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
  };
  p.tau = std::move(tau);
  return p;
}

// L2 error of the P1 field against exact_u with the 7-point rule per element
double l2_exact_error(const Mesh& m, const std::vector<double>& u) {
  double sum = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const Element& el = m.element(e);
    const Point2 a = m.node(el[0]), b = m.node(el[1]), c = m.node(el[2]);
    const double area2 = std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    for (const QuadraturePoint& q : triangle_rule_deg5()) {
      const double r = q.point.x, s = q.point.y;
      const double x = a.x + r * (b.x - a.x) + s * (c.x - a.x);
      const double y = a.y + r * (b.y - a.y) + s * (c.y - a.y);
      const double uh = (1 - r - s) * u[el[0]] + r * u[el[1]] + s * u[el[2]];
      sum += q.weight * area2 * std::pow(uh - exact_u(x, y), 2);
    }
  }
  return std::sqrt(sum);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("element Peclet numbers") {
  const Mesh m = build_structured_mesh(1, 1, 81, 81);
  const ElementMetrics em = element_metrics(m, 0);
  const double a = 800 * std::sqrt(2.0), alpha = 4 * pi / 10;
  const ElementPeclets p = element_peclets(em, {a * std::cos(alpha), a * std::sin(alpha)}, 1.0);
  CHECK(p.pe == doctest::Approx(7.0711).epsilon(1e-4));
  CHECK(p.pe1 == doctest::Approx(2.18508).epsilon(1e-5));
  CHECK(p.pe2 == doctest::Approx(6.72499).epsilon(1e-5));
  const ElementPeclets q = element_peclets(em, {-a, 0.0}, 1.0);
  CHECK(q.pe1 == doctest::Approx(-7.0711).epsilon(1e-4));
  CHECK(q.pe2 == 0.0);
  const ElementPeclets z = element_peclets(em, {0.0, 0.0}, 1.0);
  CHECK(z.pe == 0.0);
}

TEST_CASE("rotational velocity preset") {
  const Point2 a = rotational_velocity({1.0, 0.5});
  CHECK(a.x == doctest::Approx(0.0));
  CHECK(a.y == doctest::Approx(1.0));
  const Point2 b = rotational_velocity({0.005, 0.0});
  CHECK(b.x == doctest::Approx(0.05));
  CHECK(b.y == doctest::Approx(-0.0495));
}

TEST_CASE("pure diffusion assembles mu times the symmetric stiffness matrix") {
  const Mesh m = build_structured_mesh(1, 1, 6, 6);
  const auto zero = [](double, double) { return 0.0; };
  const auto k1 = assemble(m, 1.0, VelocityField::constant(0, 0), zero, TauProvider::none()).matrix.to_dense();
  const auto k2 = assemble(m, 2.5, VelocityField::constant(0, 0), zero, TauProvider::none()).matrix.to_dense();
  CHECK(max_abs(k1 - k1.transpose()) < 1e-12);
  CHECK(max_abs(k2 - 2.5 * k1) < 1e-12);
  CHECK(max_abs(k1.rowwise().sum()) < 1e-12);
}

TEST_CASE("single reference triangle matches hand-assembled matrices") {
  const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {1, 1, 1});
  const auto zero = [](double, double) { return 0.0; };
  const LinearSystem sys =
      assemble(m, 1.0, VelocityField::constant(1, 0), zero, TauProvider::none(), kDiffusion | kAdvection);
  Eigen::Matrix3d expected;
  // stiffness: gradients (-1,-1), (1,0), (0,1) on area 1/2
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  // advection (a . grad phi_j, phi_i) = (a . grad phi_j) |K| / 3
  for (int i = 0; i < 3; ++i) {
    expected(i, 0) += -1.0 / 6;
    expected(i, 1) += 1.0 / 6;
  }
  CHECK(max_abs(sys.matrix.to_dense() - expected) < 1e-14);
  CHECK(sys.rhs.norm() == 0.0);

  const auto one = [](double, double) { return 1.0; };
  const LinearSystem src = assemble(m, 1.0, VelocityField::constant(1, 0), one, TauProvider::none(), kSource);
  for (int i = 0; i < 3; ++i) CHECK(src.rhs[i] == doctest::Approx(1.0 / 6));
}

TEST_CASE("Galerkin advection block is skew-symmetric on interior nodes") {
  const Mesh m = build_structured_mesh(1, 1, 9, 9);
  const auto zero = [](double, double) { return 0.0; };
  const auto c = assemble(m, 1.0, VelocityField::constant(0.6, -1.3), zero, TauProvider::none(), kAdvection)
                     .matrix.to_dense();
  double worst = 0.0;
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    for (std::size_t j = 0; j < m.num_nodes(); ++j)
      if (!m.is_boundary(i) && !m.is_boundary(j)) worst = std::max(worst, std::abs(c(i, j) + c(j, i)));
  CHECK(worst < 1e-12);
}

TEST_CASE("stabilization block is positive semidefinite") {
  const Mesh m = build_structured_mesh(1, 1, 9, 9);
  const auto zero = [](double, double) { return 0.0; };
  const auto s = assemble(m, 0.01, VelocityField::rotational(), zero, TauProvider::codina(), kStabilization)
                     .matrix.to_dense();
  CHECK(max_abs(s - s.transpose()) < 1e-14);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd x(m.num_nodes());
    for (auto& v : x) v = n(rng);
    CHECK(x.dot(s * x) >= -1e-12);
  }
}

TEST_CASE("tau providers") {
  const Mesh m = build_structured_mesh(1, 1, 81, 81);
  const ElementMetrics em = element_metrics(m, 0);
  const Point2 a{800.0, 800.0};
  CHECK(TauProvider::gen1d()(em, a, 1.0) == doctest::Approx(4.74302969794e-6).epsilon(1e-10));
  CHECK(TauProvider::codina()(em, a, 1.0) == doctest::Approx(5.46984407823e-6).epsilon(1e-10));
  CHECK(TauProvider::none()(em, a, 1.0) == 0.0);
  const PecletPair pe{5.0, 5.0};
  CHECK(TauProvider::spectral_direct()(em, a, 1.0) == doctest::Approx(tau_spectral(em.h, 1.0, pe)));
  auto table = std::make_shared<const StabTable>(build_table({4, 6, 4, 6}, 0.5, {40, 40}));
  CHECK(TauProvider::spectral_table(table)(em, a, 1.0) == doctest::Approx(tau_spectral(em.h, 1.0, pe)).epsilon(1e-14));
  CHECK(TauProvider::spectral_table(table).name() == "spectral");
  CHECK(TauProvider::spectral_direct().name() == "spectral-direct");
  CHECK_THROWS(TauProvider::spectral_table(nullptr));
}

TEST_CASE("manufactured solution converges at second order for every provider") {
  const std::vector<TauProvider> providers{TauProvider::none(), TauProvider::gen1d(),
                                           TauProvider::codina(), TauProvider::spectral_direct()};
  for (const TauProvider& tau : providers) {
    const Problem p = manufactured(tau);
    const Mesh m1 = build_structured_mesh(1, 1, 21, 21), m2 = build_structured_mesh(1, 1, 41, 41);
    const double e1 = l2_exact_error(m1, solve_problem(m1, p).values);
    const double e2 = l2_exact_error(m2, solve_problem(m2, p).values);
    INFO(tau.name() << ": " << e1 << " -> " << e2);
    CHECK(std::log2(e1 / e2) >= 1.9);
  }
}

TEST_CASE("linear boundary data is reproduced exactly by pure diffusion") {
  const Mesh m = build_structured_mesh(1, 1, 11, 11);
  Problem p;
  p.velocity = VelocityField::constant(0, 0);
  p.source = [](double, double) { return 0.0; };
  p.boundary = [](double x, double) { return x; };
  p.tau = TauProvider::none();
  const SolutionField s = solve_problem(m, p);
  for (std::size_t i = 0; i < m.num_nodes(); ++i) CHECK(std::abs(s.values[i] - m.node(i).x) < 1e-10);
}

TEST_CASE("zero data gives the zero solution") {
  const Mesh m = build_structured_mesh(1, 1, 11, 11);
  Problem p;
  p.velocity = VelocityField::constant(3, 1);
  p.source = [](double, double) { return 0.0; };
  p.tau = TauProvider::codina();
  const SolutionField s = solve_problem(m, p);
  for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("Dirichlet application") {
  const Mesh m = build_structured_mesh(1, 1, 5, 5);
  const auto one = [](double, double) { return 1.0; };
  LinearSystem sys = assemble(m, 1.0, VelocityField::constant(1, 2), one, TauProvider::codina());
  const Eigen::VectorXd before = sys.rhs;
  apply_dirichlet(sys, m);
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    if (m.is_boundary(i)) {
      CHECK(sys.rhs[i] == 0.0);
      CHECK(sys.matrix.coeff(i, i) == 1.0);
    } else {
      CHECK(sys.rhs[i] == before[i]);
    }
  }
  LinearSystem bad = assemble(m, 1.0, VelocityField::constant(1, 2), one, TauProvider::codina());
  CHECK_THROWS_AS(apply_dirichlet(bad, m, {{12, 1.0}}), FemError);

  LinearSystem all = assemble(m, 1.0, VelocityField::constant(1, 2), one, TauProvider::codina());
  std::vector<double> vals(m.num_nodes());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>(i);
  constrain_nodes(all, std::vector<std::uint8_t>(m.num_nodes(), 1), vals);
  CHECK(max_abs(all.matrix.to_dense() - Eigen::MatrixXd::Identity(25, 25)) == 0.0);
  const SolutionField s = solve(all);
  for (std::size_t i = 0; i < vals.size(); ++i) CHECK(s.values[i] == doctest::Approx(vals[i]));
}

TEST_CASE("sparse solve agrees with a dense LU oracle") {
  const Mesh m = build_structured_mesh(1, 1, 5, 5);
  const auto f = [](double x, double y) { return 1.0 + x * y; };
  LinearSystem sys = assemble(m, 0.1, VelocityField::constant(2, -1), f, TauProvider::gen1d());
  apply_dirichlet(sys, m);
  const Eigen::VectorXd dense = sys.matrix.to_dense().partialPivLu().solve(sys.rhs);
  for (SolverKind kind : {SolverKind::Direct, SolverKind::Iterative}) {
    SolveOptions o;
    o.kind = kind;
    const SolutionField s = solve(sys, o);
    CHECK(s.residual <= 1e-10);
    for (std::size_t i = 0; i < m.num_nodes(); ++i) CHECK(std::abs(s.values[i] - dense[i]) < 1e-10);
  }
}

TEST_CASE("multigrid path meets the residual contract and matches the direct solve") {
  const Mesh m = build_structured_mesh(1, 0.5, 129, 65);
  Problem p;
  p.mu = 1e-3;
  p.velocity = VelocityField::rotational();
  p.source = [](double, double) { return 0.0; };
  p.boundary = [](double x, double y) { return (y == 0.0 && x <= 0.5) ? std::sin(2 * pi * x) : 0.0; };
  p.tau = TauProvider::codina();
  SolveOptions direct;
  direct.kind = SolverKind::Direct;
  const SolutionField ref = solve_problem(m, p, direct);
  SolveOptions mg;
  mg.direct_limit = 100;
  const SolutionField s = solve_problem(m, p, mg);
  CHECK(s.method == "bicgstab-multigrid");
  CHECK(s.residual <= 1e-10);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.num_nodes(); ++i) worst = std::max(worst, std::abs(s.values[i] - ref.values[i]));
  CHECK(worst < 1e-8);
}

TEST_CASE("table and direct spectral coefficients give nearly the same solution") {
  const Mesh m = build_structured_mesh(1, 1, 41, 41);
  auto table = std::make_shared<const StabTable>(build_table({-4, 4, -4, 4}, 0.125, {40, 40}));
  Problem p;
  p.velocity = VelocityField::polar(100 * std::sqrt(2.0), 1.25);
  p.source = [](double x, double y) { return std::sin(pi * x) * std::cos(pi * y); };
  p.tau = TauProvider::spectral_table(table);
  const std::vector<double> a = solve_problem(m, p).values;
  p.tau = TauProvider::spectral_direct();
  const std::vector<double> b = solve_problem(m, p).values;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("velocity file input") {
  const Mesh m = build_structured_mesh(1, 1, 2, 2);
  std::istringstream good("velocity 4\n1 0\n1 0\n0 1\n0 1\n");
  const VelocityField v = read_velocity(good);
  CHECK_NOTHROW(v.check_compatible(m));
  const Point2 a = v.element_velocity(m, 0);
  CHECK(a.x + a.y == doctest::Approx(1.0));
  std::istringstream shorter("velocity 3\n1 0\n1 0\n0 1\n");
  CHECK_THROWS_AS(read_velocity(shorter).check_compatible(m), FemError);
  std::istringstream malformed("velocity 2\n1 0\n1 x\n");
  CHECK_THROWS_AS(read_velocity(malformed), FemError);

  std::ostringstream out;
  write_velocity({{0.5, -0.25}, {1e-17, 3}}, out);
  std::istringstream back(out.str());
  const VelocityField w = read_velocity(back);
  CHECK(w.samples()[1].x == 1e-17);
  CHECK(w.samples()[0].y == -0.25);
}

TEST_CASE("solution export") {
  const Mesh m = build_structured_mesh(1, 1, 3, 3);
  std::vector<double> u(9, 0.125);
  std::ostringstream csv, vtk;
  write_solution_csv(m, u, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("x,y,u\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  write_solution_vtk(m, u, vtk);
  const std::string legacy = vtk.str();
  CHECK(legacy.find("POINT_DATA 9") != std::string::npos);
  CHECK(legacy.find("CELLS 8") != std::string::npos);
}
