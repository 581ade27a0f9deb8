#ifndef VMS_ANALYSIS_HPP
#define VMS_ANALYSIS_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vms/fem.hpp"
#include "vms/geometry.hpp"

namespace vms {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finds the element containing a point: index arithmetic on structured
/// meshes, a uniform bucket grid otherwise.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// Element containing p (closure, tolerance relative to element size).
  std::optional<std::size_t> locate(Point2 p) const;
  /// Barycentric coordinates of p in element e.
  std::array<double, 3> barycentric(std::size_t e, Point2 p) const;

 private:
  const Mesh* mesh_;
  bool structured_ = false;
  double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
  std::size_t bx_ = 0, by_ = 0;
  std::vector<std::size_t> bucket_start_;
  std::vector<std::size_t> bucket_items_;
};

/// Fine-grid solution used as the error reference.
class ReferenceSolution {
 public:
  ReferenceSolution(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  const std::vector<double>& values() const { return values_; }
  double residual = 0.0;

  /// Index of the fine node at p, if one lies within tol (absolute).
  std::optional<std::size_t> node_at(Point2 p, double tol = 1e-12) const;
  /// Nodal value when p is a fine node, barycentric interpolation otherwise.
  double evaluate(Point2 p) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> values_;
  std::unique_ptr<PointLocator> locator_;
};

/// sqrt(sum_K |K|/3 sum_{edge midpoints} (u_h - u_ref)^2) over the coarse mesh.
double l2_error(const Mesh& coarse, const std::vector<double>& u, const ReferenceSolution& ref);
/// max over coarse nodes of |u_h - u_ref|.
double linf_error(const Mesh& coarse, const std::vector<double>& u, const ReferenceSolution& ref);

/// Solves the same problem on a mesh refined by `factor` (structured meshes:
/// any integer >= 1, nested; imported meshes: a power of two via uniform
/// splitting). Nodal velocity samples are carried over by P1 interpolation.
ReferenceSolution make_reference(const Mesh& coarse, const Problem& problem, int factor,
                                 const SolveOptions& opts = {});

/// Refined mesh used by make_reference, with the velocity mapped onto it.
std::pair<Mesh, VelocityField> refine_problem_mesh(const Mesh& coarse, const VelocityField& vel,
                                                   int factor);

/// Successive ratios e[k] / e[k+1].
std::vector<double> error_ratio_sequence(const std::vector<double>& errors);

}  // namespace vms

#endif  // VMS_ANALYSIS_HPP
