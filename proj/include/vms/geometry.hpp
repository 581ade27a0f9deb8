#ifndef VMS_GEOMETRY_HPP
#define VMS_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vms {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Orientation of a structured element inside its grid cell.
/// A lies below the cell anti-diagonal, B above it. Imported elements are General.
enum class Orientation : std::uint8_t { A, B, General };

using Element = std::array<std::size_t, 3>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StructuredInfo {
  std::size_t nx = 0;  // nodes along x
  std::size_t ny = 0;  // nodes along y
  double h = 0.0;      // cell side
  Point2 origin;
};

/// Immutable triangular mesh.
///
/// Elements are counterclockwise. For structured meshes the first vertex of
/// every element is its right-angle vertex, and the vertex order matches the
/// reference-triangle vertices (0,0), (1,0), (0,1) under the element map.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point2> nodes, std::vector<Element> elements,
       std::vector<std::uint8_t> boundary,
       std::vector<Orientation> orientation = {},
       std::optional<StructuredInfo> structured = std::nullopt);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  const Point2& node(std::size_t i) const { return nodes_.at(i); }
  const Element& element(std::size_t e) const { return elements_.at(e); }
  bool is_boundary(std::size_t i) const { return boundary_.at(i) != 0; }
  Orientation orientation(std::size_t e) const { return orientation_.at(e); }

  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<std::uint8_t>& boundary_flags() const { return boundary_; }
  const std::optional<StructuredInfo>& structured() const { return structured_; }

  /// Signed area of element e (positive for counterclockwise ordering).
  double signed_area(std::size_t e) const;

 private:
  std::vector<Point2> nodes_;
  std::vector<Element> elements_;
  std::vector<std::uint8_t> boundary_;
  std::vector<Orientation> orientation_;
  std::optional<StructuredInfo> structured_;
};

struct ElementMetrics {
  Point2 barycenter;
  double area = 0.0;
  double h = 0.0;  // side of the structured cell, sqrt(2*area) otherwise
  Orientation orientation = Orientation::General;
};

/// Uniform grid over [0,l1]x[0,l2] with n1 x n2 nodes, each square cell split
/// into one A and one B triangle. Nodes are numbered row-major with x fastest;
/// elements per cell, A then B.
Mesh build_structured_mesh(double l1, double l2, std::size_t n1, std::size_t n2);

/// Reads the whitespace-separated text format:
///   nodes <n>      then n lines "x y b"
///   elements <m>   then m lines "i j k"   (0-based, counterclockwise)
Mesh import_mesh(std::istream& in);
Mesh import_mesh_file(const std::string& path);

/// Writes the same format with round-trip precision.
void export_mesh(const Mesh& mesh, std::ostream& out);

ElementMetrics element_metrics(const Mesh& mesh, std::size_t e);

struct RefinedMesh {
  Mesh mesh;
  /// Endpoints of the coarse edge that produced node num_coarse_nodes + k.
  std::vector<std::array<std::size_t, 2>> midpoint_parents;
};

/// Splits every triangle into four through its edge midpoints. Original nodes
/// keep their indices; a midpoint is a boundary node iff its edge belongs to a
/// single element. Orientation information is dropped.
RefinedMesh refine_uniform(const Mesh& mesh);

}  // namespace vms

#endif  // VMS_GEOMETRY_HPP
