#ifndef VMS_FEM_HPP
#define VMS_FEM_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vms/coeff_table.hpp"
#include "vms/geometry.hpp"
#include "vms/stabilization.hpp"

namespace vms {

class FemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// a = (-2(y - 0.5), 2(x - 0.5)), and (-0.1(y - 0.5), 0.1(x - 0.5)) inside the disc
/// sqrt(x^2+y^2) < 0.01.
Point2 rotational_velocity(Point2 p);

/// Advection velocity, evaluated as one constant vector per element.
class VelocityField {
 public:
  enum class Kind { Constant, Rotational, NodalSamples };

  static VelocityField constant(double a1, double a2);
  /// magnitude * (cos alpha, sin alpha)
  static VelocityField polar(double magnitude, double alpha);
  static VelocityField rotational();
  static VelocityField nodal_samples(std::vector<Point2> samples);

  Kind kind() const { return kind_; }
  const std::vector<Point2>& samples() const { return samples_; }

  /// Constant and rotational fields at the barycenter; nodal samples averaged
  /// over the element vertices.
  Point2 element_velocity(const Mesh& mesh, std::size_t e) const;

  /// Throws FemError when nodal samples do not match the mesh.
  void check_compatible(const Mesh& mesh) const;

 private:
  Kind kind_ = Kind::Constant;
  Point2 value_;
  std::vector<Point2> samples_;
};

/// Format: "velocity <n>" then n lines "ax ay".
VelocityField read_velocity(std::istream& in);
VelocityField read_velocity_file(const std::string& path);
void write_velocity(const std::vector<Point2>& samples, std::ostream& out);

struct ElementPeclets {
  double pe1 = 0.0;
  double pe2 = 0.0;
  double pe = 0.0;
};

/// Pe_i = h_K a_i / (2 mu), Pe = h_K |a| / (2 mu).
ElementPeclets element_peclets(const ElementMetrics& em, Point2 a, double mu);

enum class TauKind { SpectralTable, SpectralDirect, Gen1d, Codina, None };

std::string to_string(TauKind kind);

/// Element stabilization coefficient tau_K(h_K, a_K, mu).
class TauProvider {
 public:
  static TauProvider none();
  static TauProvider gen1d();
  static TauProvider codina();
  static TauProvider spectral_table(std::shared_ptr<const StabTable> table);
  static TauProvider spectral_direct(Truncation tr = {});

  TauKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  const std::shared_ptr<const StabTable>& table() const { return table_; }
  Truncation truncation() const { return truncation_; }

  double operator()(const ElementMetrics& em, Point2 a, double mu) const;

 private:
  TauKind kind_ = TauKind::None;
  std::shared_ptr<const StabTable> table_;
  Truncation truncation_;
};

using ScalarField = std::function<double(double x, double y)>;

/// Row-compressed sparse matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  /// Entry (i, j), zero when not stored.
  double coeff(std::size_t i, std::size_t j) const;
  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  Eigen::MatrixXd to_dense() const;
};

/// Sparsity pattern of P1 couplings on the mesh, all values zero.
CsrMatrix p1_pattern(const Mesh& mesh);

struct LinearSystem {
  CsrMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<std::uint8_t> dirichlet_mask;
  std::vector<double> dirichlet_values;
};

/// Selects the bilinear and source terms that assemble() adds.
enum AssemblyTerms : unsigned {
  kDiffusion = 1u,
  kAdvection = 2u,
  kStabilization = 4u,
  kSource = 8u,
  kAllTerms = 15u,
};

/// mu (grad U, grad V) + (a_K . grad U, V) + sum_K tau_K (a_K . grad U, a_K . grad V)_K
/// and (f, V) + sum_K tau_K (f, a_K . grad V)_K with the edge-midpoint rule.
LinearSystem assemble(const Mesh& mesh, double mu, const VelocityField& vel,
                      const ScalarField& f, const TauProvider& tau,
                      unsigned terms = kAllTerms);

/// Tau values per element, in element order.
std::vector<double> element_taus(const Mesh& mesh, double mu, const VelocityField& vel,
                                 const TauProvider& tau);

/// Imposes U = values[node] on the listed nodes (all must be boundary nodes) and
/// U = 0 on every other boundary node. Constrained rows become identity rows and
/// constrained columns are eliminated into the right-hand side.
void apply_dirichlet(LinearSystem& sys, const Mesh& mesh,
                     const std::map<std::size_t, double>& values = {});
/// U = g(x, y) on every boundary node.
void apply_dirichlet(LinearSystem& sys, const Mesh& mesh, const ScalarField& g);
/// Constrains an arbitrary node set, without the boundary check.
void constrain_nodes(LinearSystem& sys, const std::vector<std::uint8_t>& mask,
                     const std::vector<double>& values);

struct SolutionField {
  std::vector<double> values;
  double residual = 0.0;  // ||A x - b|| / ||b||
  int iterations = 0;
  std::string method;
};

enum class SolverKind { Auto, Direct, Iterative };

struct SolveOptions {
  SolverKind kind = SolverKind::Auto;
  double tolerance = 1e-10;  // residual contract
  int max_iterations = 2000;
  std::size_t direct_limit = 60000;  // Auto: sparse LU up to this many unknowns
};

double relative_residual(const CsrMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

SolutionField solve(const LinearSystem& sys, const SolveOptions& opts = {});

struct Problem {
  double mu = 1.0;
  VelocityField velocity;
  ScalarField source;
  ScalarField boundary;  // empty: homogeneous
  TauProvider tau;
};

LinearSystem assemble_problem(const Mesh& mesh, const Problem& problem);

/// Assembles and solves; large structured meshes use multigrid-preconditioned
/// BiCGSTAB over the nested hierarchy of coarser grids.
SolutionField solve_problem(const Mesh& mesh, const Problem& problem, const SolveOptions& opts = {});

/// CSV "x,y,u" per node.
void write_solution_csv(const Mesh& mesh, const std::vector<double>& u, std::ostream& out);
/// Legacy VTK unstructured grid with point data u.
void write_solution_vtk(const Mesh& mesh, const std::vector<double>& u, std::ostream& out);

}  // namespace vms

#endif  // VMS_FEM_HPP
