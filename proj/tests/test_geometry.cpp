#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "vms/geometry.hpp"

using namespace vms;

namespace {

std::size_t boundary_count(const Mesh& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.num_nodes(); ++i) n += m.is_boundary(i) ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("structured mesh on a 2x2-cell grid") {
  const Mesh m = build_structured_mesh(1, 1, 3, 3);
  CHECK(m.num_nodes() == 9);
  CHECK(m.num_elements() == 8);
  CHECK(boundary_count(m) == 8);
  CHECK_FALSE(m.is_boundary(4));
  REQUIRE(m.structured());
  CHECK(m.structured()->h == doctest::Approx(0.5));
}

TEST_CASE("structured mesh with h = 1/80 has 6561 nodes and 12800 elements") {
  const Mesh m = build_structured_mesh(1, 1, 81, 81);
  CHECK(m.num_nodes() == 6561);
  CHECK(m.num_elements() == 12800);
  CHECK(m.structured()->h == doctest::Approx(1.0 / 80).epsilon(1e-15));
}

TEST_CASE("rectangular structured mesh element count matches cell enumeration") {
  const Mesh m = build_structured_mesh(1, 0.5, 101, 51);
  std::size_t cells = 0;
  for (std::size_t j = 0; j + 1 < 51; ++j)
    for (std::size_t i = 0; i + 1 < 101; ++i) ++cells;
  CHECK(m.num_elements() == 2 * cells);
  CHECK(m.num_elements() == 10000);
  CHECK(m.structured()->h == doctest::Approx(0.01));
}

TEST_CASE("structured mesh rejects invalid parameters") {
  CHECK_THROWS_AS(build_structured_mesh(1, 1, 1, 3), MeshError);
  CHECK_THROWS_AS(build_structured_mesh(0, 1, 3, 3), MeshError);
  CHECK_THROWS_AS(build_structured_mesh(1, -1, 3, 3), MeshError);
  CHECK_THROWS_AS(build_structured_mesh(1, 1, 11, 21), MeshError);  // non-square cells
}

TEST_CASE("structured elements carry A/B tags split by the cell anti-diagonal") {
  const Mesh m = build_structured_mesh(2, 1, 9, 5);
  const double h = m.structured()->h;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const Orientation o = m.orientation(e);
    REQUIRE((o == Orientation::A || o == Orientation::B));
    CHECK((o == Orientation::A) == (e % 2 == 0));
    const ElementMetrics em = element_metrics(m, e);
    const double u = std::fmod(em.barycenter.x, h) / h;
    const double v = std::fmod(em.barycenter.y, h) / h;
    CHECK((u + v < 1.0) == (o == Orientation::A));
    CHECK(m.signed_area(e) > 0.0);
  }
}

TEST_CASE("structured mesh invariants: area sum, boundary flags, shared edges") {
  const double l1 = 1.0, l2 = 0.5;
  const Mesh m = build_structured_mesh(l1, l2, 41, 21);
  double area = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    area += m.signed_area(e);
    const ElementMetrics em = element_metrics(m, e);
    CHECK(em.h * em.h == doctest::Approx(2.0 * em.area).epsilon(1e-14));
  }
  CHECK(std::abs(area - l1 * l2) <= 1e-12 * l1 * l2);

  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    const Point2 p = m.node(i);
    const bool on = p.x == 0.0 || p.y == 0.0 || p.x == l1 || p.y == l2;
    CHECK(on == m.is_boundary(i));
  }

  std::map<std::pair<std::size_t, std::size_t>, int> edges;
  for (const auto& el : m.elements()) {
    for (int k = 0; k < 3; ++k) {
      const auto a = el[k], b = el[(k + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [edge, count] : edges) {
    const bool boundary_edge = m.is_boundary(edge.first) && m.is_boundary(edge.second) &&
                               (m.node(edge.first).x == m.node(edge.second).x ||
                                m.node(edge.first).y == m.node(edge.second).y) &&
                               (m.node(edge.first).x == 0.0 || m.node(edge.first).x == l1 ||
                                m.node(edge.first).y == 0.0 || m.node(edge.first).y == l2) &&
                               count == 1;
    CHECK((count == 2 || boundary_edge));
  }
}

TEST_CASE("import of a single reference triangle") {
  std::istringstream in("nodes 3\n0 0 1\n1 0 1\n0 1 1\nelements 1\n0 1 2\n");
  const Mesh m = import_mesh(in);
  CHECK(m.num_elements() == 1);
  CHECK(m.signed_area(0) == doctest::Approx(0.5));
  CHECK(m.orientation(0) == Orientation::General);
  CHECK_FALSE(m.structured());
}

TEST_CASE("import reports errors with line numbers") {
  SUBCASE("node index out of range") {
    std::istringstream in("nodes 4\n0 0 1\n1 0 1\n0 1 1\n1 1 1\nelements 1\n0 1 99\n");
    try {
      import_mesh(in);
      FAIL("expected an error");
    } catch (const MeshError& e) {
      CHECK(std::string(e.what()).find("node index out of range (line 7)") != std::string::npos);
    }
  }
  SUBCASE("malformed line") {
    std::istringstream in("nodes 2\n0 0 1\n1 zero 1\n");
    CHECK_THROWS_WITH_AS(import_mesh(in), doctest::Contains("(line 3)"), MeshError);
  }
  SUBCASE("zero-area element") {
    std::istringstream in("nodes 3\n0 0 1\n1 0 1\n2 0 1\nelements 1\n0 1 2\n");
    CHECK_THROWS_WITH_AS(import_mesh(in), doctest::Contains("(line 6)"), MeshError);
  }
  SUBCASE("clockwise element") {
    std::istringstream in("nodes 3\n0 0 1\n1 0 1\n0 1 1\nelements 1\n0 2 1\n");
    CHECK_THROWS_AS(import_mesh(in), MeshError);
  }
  SUBCASE("bad boundary flag") {
    std::istringstream in("nodes 1\n0 0 2\nelements 0\n");
    CHECK_THROWS_AS(import_mesh(in), MeshError);
  }
}

TEST_CASE("exported structured mesh re-imports bit-identically") {
  const Mesh m = build_structured_mesh(1, 1, 7, 7);
  std::ostringstream out;
  export_mesh(m, out);
  std::istringstream in(out.str());
  const Mesh r = import_mesh(in);
  REQUIRE(r.num_nodes() == m.num_nodes());
  REQUIRE(r.num_elements() == m.num_elements());
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    CHECK(r.node(i).x == m.node(i).x);
    CHECK(r.node(i).y == m.node(i).y);
    CHECK(r.is_boundary(i) == m.is_boundary(i));
  }
  for (std::size_t e = 0; e < m.num_elements(); ++e) CHECK(r.element(e) == m.element(e));
  std::ostringstream again;
  export_mesh(r, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("element metrics") {
  SUBCASE("unit reference triangle") {
    const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {1, 1, 1});
    const ElementMetrics em = element_metrics(m, 0);
    CHECK(em.area == doctest::Approx(0.5));
    CHECK(em.h == doctest::Approx(1.0));
    CHECK(em.barycenter.x == doctest::Approx(1.0 / 3));
    CHECK(em.barycenter.y == doctest::Approx(1.0 / 3));
    CHECK(em.orientation == Orientation::General);
  }
  SUBCASE("structured h = 1/80") {
    const Mesh m = build_structured_mesh(1, 1, 81, 81);
    const ElementMetrics em = element_metrics(m, 123);
    CHECK(em.area == doctest::Approx(1.0 / 12800).epsilon(1e-12));
    CHECK(em.h == doctest::Approx(1.0 / 80).epsilon(1e-14));
  }
  SUBCASE("irregular triangle uses sqrt(2 area)") {
    const Mesh m({{0, 0}, {2, 0}, {0, 1}}, {{0, 1, 2}}, {1, 1, 1});
    const ElementMetrics em = element_metrics(m, 0);
    CHECK(em.area == doctest::Approx(1.0));
    CHECK(em.h == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("index check") {
    const Mesh m = build_structured_mesh(1, 1, 3, 3);
    CHECK_THROWS(element_metrics(m, 8));
  }
}

TEST_CASE("uniform refinement splits each triangle into four") {
  const Mesh m = build_structured_mesh(1, 1, 4, 4);
  const RefinedMesh r = refine_uniform(m);
  CHECK(r.mesh.num_elements() == 4 * m.num_elements());
  CHECK(r.mesh.num_nodes() == build_structured_mesh(1, 1, 7, 7).num_nodes());
  double area = 0.0;
  for (std::size_t e = 0; e < r.mesh.num_elements(); ++e) area += r.mesh.signed_area(e);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i < r.mesh.num_nodes(); ++i) {
    const Point2 p = r.mesh.node(i);
    CHECK(r.mesh.is_boundary(i) == (p.x == 0.0 || p.y == 0.0 || p.x == 1.0 || p.y == 1.0));
  }
  for (std::size_t k = 0; k < r.midpoint_parents.size(); ++k) {
    const auto [a, b] = r.midpoint_parents[k];
    const Point2 mid = r.mesh.node(m.num_nodes() + k);
    CHECK(mid.x == doctest::Approx(0.5 * (m.node(a).x + m.node(b).x)));
    CHECK(mid.y == doctest::Approx(0.5 * (m.node(a).y + m.node(b).y)));
  }
}
