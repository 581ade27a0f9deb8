#include "vms/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

namespace vms {

Mesh::Mesh(std::vector<Point2> nodes, std::vector<Element> elements,
           std::vector<std::uint8_t> boundary, std::vector<Orientation> orientation,
           std::optional<StructuredInfo> structured)
    : nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      boundary_(std::move(boundary)),
      orientation_(std::move(orientation)),
      structured_(structured) {
  if (boundary_.size() != nodes_.size()) {
    throw MeshError("boundary flag count does not match node count");
  }
  if (orientation_.empty()) {
    orientation_.assign(elements_.size(), Orientation::General);
  }
  if (orientation_.size() != elements_.size()) {
    throw MeshError("orientation count does not match element count");
  }
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    for (std::size_t v : elements_[e]) {
      if (v >= nodes_.size()) {
        throw MeshError("element " + std::to_string(e) + ": node index out of range");
      }
    }
    if (!(signed_area(e) > 0.0)) {
      throw MeshError("element " + std::to_string(e) + " has non-positive area");
    }
  }
}

double Mesh::signed_area(std::size_t e) const {
  const Element& el = elements_[e];
  const Point2& a = nodes_[el[0]];
  const Point2& b = nodes_[el[1]];
  const Point2& c = nodes_[el[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Mesh build_structured_mesh(double l1, double l2, std::size_t n1, std::size_t n2) {
  if (n1 < 2 || n2 < 2) {
    throw MeshError("structured mesh needs at least 2 nodes per direction");
  }
  if (!(l1 > 0.0) || !(l2 > 0.0)) {
    throw MeshError("structured mesh needs positive side lengths");
  }
  const double hx = l1 / static_cast<double>(n1 - 1);
  const double hy = l2 / static_cast<double>(n2 - 1);
  if (std::abs(hx - hy) > 1e-12 * hx) {
    throw MeshError("structured mesh cells must be square (isosceles right triangles)");
  }
  const double h = hx;

  std::vector<Point2> nodes;
  std::vector<std::uint8_t> boundary;
  nodes.reserve(n1 * n2);
  boundary.reserve(n1 * n2);
  for (std::size_t j = 0; j < n2; ++j) {
    // Last row/column pinned to the exact extent.
    const double y = (j + 1 == n2) ? l2 : static_cast<double>(j) * hy;
    for (std::size_t i = 0; i < n1; ++i) {
      const double x = (i + 1 == n1) ? l1 : static_cast<double>(i) * hx;
      nodes.push_back({x, y});
      boundary.push_back(i == 0 || j == 0 || i + 1 == n1 || j + 1 == n2);
    }
  }

  std::vector<Element> elements;
  std::vector<Orientation> orientation;
  elements.reserve(2 * (n1 - 1) * (n2 - 1));
  orientation.reserve(2 * (n1 - 1) * (n2 - 1));
  for (std::size_t j = 0; j + 1 < n2; ++j) {
    for (std::size_t i = 0; i + 1 < n1; ++i) {
      const std::size_t ll = j * n1 + i;
      const std::size_t lr = ll + 1;
      const std::size_t ul = ll + n1;
      const std::size_t ur = ul + 1;
      elements.push_back({ll, lr, ul});
      orientation.push_back(Orientation::A);
      elements.push_back({ur, ul, lr});
      orientation.push_back(Orientation::B);
    }
  }
  return Mesh(std::move(nodes), std::move(elements), std::move(boundary),
              std::move(orientation), StructuredInfo{n1, n2, h, {0.0, 0.0}});
}

namespace {

[[noreturn]] void parse_fail(const std::string& what, std::size_t line) {
  throw MeshError(what + " (line " + std::to_string(line) + ")");
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::size_t read_header(std::istream& in, const char* keyword, std::size_t& line_no) {
  std::string line;
  if (!next_content_line(in, line, line_no)) {
    parse_fail(std::string("missing '") + keyword + "' header", line_no + 1);
  }
  std::istringstream ss(line);
  std::string key;
  long long count = -1;
  std::string extra;
  if (!(ss >> key >> count) || key != keyword || count < 0 || (ss >> extra)) {
    parse_fail(std::string("expected '") + keyword + " <count>'", line_no);
  }
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh import_mesh(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;

  const std::size_t n = read_header(in, "nodes", line_no);
  std::vector<Point2> nodes(n);
  std::vector<std::uint8_t> boundary(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_content_line(in, line, line_no)) parse_fail("unexpected end of node list", line_no + 1);
    std::istringstream ss(line);
    double x = 0, y = 0;
    int b = -1;
    std::string extra;
    if (!(ss >> x >> y >> b) || (ss >> extra)) parse_fail("malformed node line", line_no);
    if (b != 0 && b != 1) parse_fail("boundary flag must be 0 or 1", line_no);
    if (!std::isfinite(x) || !std::isfinite(y)) parse_fail("non-finite coordinate", line_no);
    nodes[i] = {x, y};
    boundary[i] = static_cast<std::uint8_t>(b);
  }

  const std::size_t m = read_header(in, "elements", line_no);
  std::vector<Element> elements(m);
  for (std::size_t e = 0; e < m; ++e) {
    if (!next_content_line(in, line, line_no)) parse_fail("unexpected end of element list", line_no + 1);
    std::istringstream ss(line);
    long long v[3];
    std::string extra;
    if (!(ss >> v[0] >> v[1] >> v[2]) || (ss >> extra)) parse_fail("malformed element line", line_no);
    for (int k = 0; k < 3; ++k) {
      if (v[k] < 0 || static_cast<std::size_t>(v[k]) >= n) parse_fail("node index out of range", line_no);
      elements[e][k] = static_cast<std::size_t>(v[k]);
    }
    const Point2& a = nodes[elements[e][0]];
    const Point2& b = nodes[elements[e][1]];
    const Point2& c = nodes[elements[e][2]];
    const double area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (!(area2 > 0.0)) parse_fail("zero or negative element area", line_no);
  }
  if (next_content_line(in, line, line_no)) parse_fail("trailing content", line_no);

  return Mesh(std::move(nodes), std::move(elements), std::move(boundary));
}

Mesh import_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return import_mesh(in);
}

void export_mesh(const Mesh& mesh, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "nodes " << mesh.num_nodes() << '\n';
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const Point2& p = mesh.node(i);
    out << p.x << ' ' << p.y << ' ' << (mesh.is_boundary(i) ? 1 : 0) << '\n';
  }
  out << "elements " << mesh.num_elements() << '\n';
  for (const Element& el : mesh.elements()) {
    out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
  }
  out.precision(old_precision);
}

ElementMetrics element_metrics(const Mesh& mesh, std::size_t e) {
  if (e >= mesh.num_elements()) throw MeshError("element index out of range");
  const Element& el = mesh.element(e);
  const Point2& a = mesh.node(el[0]);
  const Point2& b = mesh.node(el[1]);
  const Point2& c = mesh.node(el[2]);

  ElementMetrics m;
  m.barycenter = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
  m.area = std::abs(mesh.signed_area(e));
  m.orientation = mesh.orientation(e);
  if (mesh.structured() && m.orientation != Orientation::General) {
    m.h = mesh.structured()->h;
  } else {
    m.h = std::sqrt(2.0 * m.area);
  }
  return m;
}

RefinedMesh refine_uniform(const Mesh& mesh) {
  std::vector<Point2> nodes = mesh.nodes();
  std::vector<std::uint8_t> boundary = mesh.boundary_flags();

  // edge (lo,hi) -> (midpoint index, number of incident elements)
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, int>> edges;
  std::vector<std::array<std::size_t, 2>> parents;
  auto midpoint = [&](std::size_t a, std::size_t b) {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = edges.try_emplace({key.first, key.second}, 0, 0);
    if (inserted) {
      it->second.first = nodes.size();
      const Point2& p = mesh.node(a);
      const Point2& q = mesh.node(b);
      nodes.push_back({0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
      boundary.push_back(0);
      parents.push_back({key.first, key.second});
    }
    ++it->second.second;
    return it->second.first;
  };

  std::vector<Element> elements;
  elements.reserve(4 * mesh.num_elements());
  for (const Element& el : mesh.elements()) {
    const std::size_t m01 = midpoint(el[0], el[1]);
    const std::size_t m12 = midpoint(el[1], el[2]);
    const std::size_t m20 = midpoint(el[2], el[0]);
    elements.push_back({el[0], m01, m20});
    elements.push_back({m01, el[1], m12});
    elements.push_back({m20, m12, el[2]});
    elements.push_back({m01, m12, m20});
  }
  for (const auto& [key, value] : edges) {
    if (value.second == 1) boundary[value.first] = 1;
  }
  return {Mesh(std::move(nodes), std::move(elements), std::move(boundary)), std::move(parents)};
}

}  // namespace vms
