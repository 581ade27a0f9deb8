#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "vms/analysis.hpp"
#include "vms/bench.hpp"

using namespace vms;
using std::numbers::pi;

namespace {

std::vector<double> sample(const Mesh& m, double (*f)(double, double)) {
  std::vector<double> u(m.num_nodes());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(m.node(i).x, m.node(i).y);
  return u;
}

double smooth(double x, double y) { return std::sin(pi * x) * std::cos(2 * y) + x * y; }

Problem manufactured() {
  Problem p;
  p.velocity = VelocityField::constant(2.0, 1.0);
  p.source = [](double x, double y) {
    const double u = std::sin(pi * x) * std::sin(pi * y);
    return 2.0 * pi * std::cos(pi * x) * std::sin(pi * y) + pi * std::sin(pi * x) * std::cos(pi * y) +
           2 * pi * pi * u;
  };
  p.tau = TauProvider::codina();
  return p;
}

double exact(double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }

}  // namespace

TEST_CASE("errors against an identical or shifted reference") {
  const auto m = std::make_shared<const Mesh>(build_structured_mesh(1, 1, 11, 11));
  const std::vector<double> u = sample(*m, smooth);
  const ReferenceSolution ref(m, u);
  CHECK(l2_error(*m, u, ref) < 1e-15);
  CHECK(linf_error(*m, u, ref) == 0.0);

  std::vector<double> shifted = u;
  for (double& v : shifted) v += 0.3;
  CHECK(l2_error(*m, shifted, ref) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(linf_error(*m, shifted, ref) == doctest::Approx(0.3).epsilon(1e-12));

  std::vector<double> bumped = u;
  bumped[60] += 1e-3;
  CHECK(linf_error(*m, bumped, ref) == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK_THROWS_AS(l2_error(*m, std::vector<double>(3), ref), AnalysisError);
}

TEST_CASE("discrete L2 error is a norm") {
  const auto m = std::make_shared<const Mesh>(build_structured_mesh(1, 0.5, 13, 7));
  const ReferenceSolution zero(m, std::vector<double>(m->num_nodes(), 0.0));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a(m->num_nodes()), b(m->num_nodes()), s(m->num_nodes()), c(m->num_nodes());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = n(rng);
      b[i] = n(rng);
      s[i] = a[i] + b[i];
      c[i] = -2.5 * a[i];
    }
    const double na = l2_error(*m, a, zero), nb = l2_error(*m, b, zero);
    CHECK(na >= 0.0);
    CHECK(l2_error(*m, s, zero) <= na + nb + 1e-12);
    CHECK(l2_error(*m, c, zero) == doctest::Approx(2.5 * na).epsilon(1e-12));
    CHECK(linf_error(*m, s, zero) <= linf_error(*m, a, zero) + linf_error(*m, b, zero) + 1e-12);
  }
}

TEST_CASE("nested refinement restricts exactly to coarse nodes") {
  const Mesh coarse = build_structured_mesh(1, 0.5, 9, 5);
  for (int factor : {2, 3, 8}) {
    const auto [fine, vel] = refine_problem_mesh(coarse, VelocityField::rotational(), factor);
    CHECK(fine.num_nodes() == (8 * factor + 1) * (4 * factor + 1));
    const ReferenceSolution ref(std::make_shared<const Mesh>(fine), sample(fine, smooth));
    for (std::size_t i = 0; i < coarse.num_nodes(); ++i) {
      const auto j = ref.node_at(coarse.node(i));
      REQUIRE(j.has_value());
      CHECK(std::hypot(fine.node(*j).x - coarse.node(i).x, fine.node(*j).y - coarse.node(i).y) < 1e-12);
      CHECK(ref.evaluate(coarse.node(i)) == smooth(coarse.node(i).x, coarse.node(i).y));
    }
  }
}

TEST_CASE("reference at factor 1 reproduces the coarse solution") {
  const Mesh m = build_structured_mesh(1, 1, 17, 17);
  const Problem p = manufactured();
  const SolutionField s = solve_problem(m, p);
  const ReferenceSolution ref = make_reference(m, p, 1);
  CHECK(l2_error(m, s.values, ref) < 1e-13);
  CHECK(linf_error(m, s.values, ref) < 1e-13);
}

TEST_CASE("references converge to the exact solution at second order") {
  const Mesh coarse = build_structured_mesh(1, 1, 11, 11);
  const Problem p = manufactured();
  // largest reference error at coarse nodes and coarse edge midpoints
  const auto error_of = [&](int factor) {
    const ReferenceSolution ref = make_reference(coarse, p, factor);
    double worst = 0.0;
    for (const Element& el : coarse.elements())
      for (int k = 0; k < 3; ++k) {
        const Point2 a = coarse.node(el[k]), b = coarse.node(el[(k + 1) % 3]);
        for (Point2 q : {a, Point2{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}})
          worst = std::max(worst, std::abs(ref.evaluate(q) - exact(q.x, q.y)));
      }
    return worst;
  };
  const double e2 = error_of(2), e4 = error_of(4);
  CHECK(e2 / e4 > 3.5);
  CHECK(e2 / e4 < 4.5);
}

TEST_CASE("general meshes: uniform-split references and barycentric lookup") {
  const CylinderFixture fx = make_cylinder_fixture();
  const VelocityField vel = VelocityField::nodal_samples(fx.velocity);
  const auto [fine, fine_vel] = refine_problem_mesh(fx.mesh, vel, 4);
  CHECK(fine.num_elements() == 16 * fx.mesh.num_elements());
  CHECK(fine_vel.samples().size() == fine.num_nodes());
  CHECK_THROWS_AS(refine_problem_mesh(fx.mesh, vel, 3), AnalysisError);

  const auto linear = [](double x, double y) { return 2 * x - 3 * y + 0.5; };
  std::vector<double> values(fine.num_nodes());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = linear(fine.node(i).x, fine.node(i).y);
  const ReferenceSolution ref(std::make_shared<const Mesh>(fine), values);
  for (std::size_t e = 0; e < fx.mesh.num_elements(); e += 37) {
    const Element& el = fx.mesh.element(e);
    const Point2 a = fx.mesh.node(el[0]), b = fx.mesh.node(el[1]), c = fx.mesh.node(el[2]);
    const Point2 q{0.2 * a.x + 0.3 * b.x + 0.5 * c.x, 0.2 * a.y + 0.3 * b.y + 0.5 * c.y};
    CHECK(ref.evaluate(q) == doctest::Approx(linear(q.x, q.y)).epsilon(1e-11));
  }
  const PointLocator loc(fine);
  CHECK_FALSE(loc.locate({0.0, 0.0}).has_value());  // inside the cylinder
  CHECK_FALSE(loc.locate({5.0, 0.0}).has_value());
}

TEST_CASE("error ratio sequence") {
  const auto r = error_ratio_sequence({5.080e-3, 1.717e-3, 4.83e-4});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(2.9586).epsilon(1e-4));
  CHECK(r[1] == doctest::Approx(3.5549).epsilon(1e-4));
  CHECK(error_ratio_sequence({2.0, 2.0})[0] == 1.0);
  CHECK(error_ratio_sequence({4.0, 2.0, 1.0}) == std::vector<double>{2.0, 2.0});
  CHECK_THROWS_AS(error_ratio_sequence({1.0}), AnalysisError);
  CHECK(std::isinf(error_ratio_sequence({1.0, 0.0})[0]));
}

TEST_CASE("rotational reference is insensitive to doubling the factor beyond 8") {
  const std::size_t n = 100;
  const Mesh coarse = build_structured_mesh(1, 0.5, 2 * n + 1, n + 1);
  Problem p{1e-3, VelocityField::rotational(), [](double, double) { return 1.0; }, nullptr,
            TauProvider::codina()};
  const SolutionField s = solve_problem(coarse, p);
  const double e8 = l2_error(coarse, s.values, make_reference(coarse, p, 8));
  const double e16 = l2_error(coarse, s.values, make_reference(coarse, p, 16));
  MESSAGE("codina L2 at N=100: factor 8 " << e8 << ", factor 16 " << e16);
  CHECK(std::abs(e8 - e16) / e16 < 0.05);
}
