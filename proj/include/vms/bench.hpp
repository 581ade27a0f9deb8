#ifndef VMS_BENCH_HPP
#define VMS_BENCH_HPP

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vms/analysis.hpp"
#include "vms/coeff_table.hpp"
#include "vms/fem.hpp"

namespace vms {

/// Extremes of the element Peclet numbers over a mesh.
struct PecletStats {
  double pe_max = 0.0;
  double pe1_min = 0.0;
  double pe1_max = 0.0;
  double pe2_min = 0.0;
  double pe2_max = 0.0;
};

PecletStats peclet_statistics(const Mesh& mesh, const VelocityField& vel, double mu);

/// max(0, max u - max u_ref) + max(0, min u_ref - min u): spread beyond the reference range.
double overshoot_indicator(const std::vector<double>& u, const std::vector<double>& ref);

struct ProviderResult {
  std::string tau_kind;
  double l2 = 0.0;
  double linf = 0.0;
  double overshoot = 0.0;
  double residual = 0.0;
  double runtime_s = 0.0;
  std::vector<double> solution;
};

struct BenchReport {
  std::string benchmark;
  std::string case_label;
  std::size_t n = 0;
  PecletStats peclet;
  std::vector<ProviderResult> results;
  std::size_t reference_nodes = 0;
  double reference_runtime_s = 0.0;

  const ProviderResult& result(const std::string& tau_kind) const;
};

struct BenchOptions {
  std::shared_ptr<const StabTable> table;  // empty: default_table()
  int reference_factor = 8;
  bool include_galerkin = false;
  bool seed_free = false;  // report zero timings
  bool keep_solutions = false;
  SolveOptions solve;
};

/// psi over [-8, 8]^2 with step 0.125 and M1 = M2 = 40, built once per process.
std::shared_ptr<const StabTable> default_table();

/// Constant velocity 800 sqrt(2) (cos a, sin a), a = n pi / 10, mu = 1,
/// f = sin(pi x) cos(pi y) on the unit square with n_nodes per side.
std::vector<BenchReport> bench_constant(const std::vector<int>& n_values, std::size_t n_nodes = 81,
                                        const BenchOptions& opts = {});

/// Rotational velocity on [0,1]x[0,1/2], mu = 1e-3, f = 1, square cells of
/// side 1/(2N). All runs share one reference at reference_factor * max(N).
std::vector<BenchReport> bench_rotational(const std::vector<std::size_t>& ns,
                                          const BenchOptions& opts = {});

struct ExternalInputs {
  std::string mesh_path;
  std::string velocity_path;
  double mu = 1e-3;
  ScalarField source;  // empty: f = 1
  /// Optional reference given as a mesh file plus a nodal "x,y,u" CSV.
  std::string reference_mesh_path;
  std::string reference_values_path;
};

BenchReport bench_external(const ExternalInputs& in, const BenchOptions& opts = {});

/// Channel around a cylinder of radius 0.05 at the origin, box [-0.15,0.45]x[-0.15,0.15]:
/// an O-grid blended from the circle to a square, plus a wake block.
struct CylinderFixture {
  Mesh mesh;
  std::vector<Point2> velocity;
};

/// Potential flow with free-stream speed u_inf past the cylinder.
CylinderFixture make_cylinder_fixture(double u_inf = 0.16);

/// Reads the "x,y,u" CSV written by write_solution_csv; values in row order.
std::vector<double> read_solution_csv(std::istream& in);

nlohmann::json to_json(const BenchReport& report);
nlohmann::json to_json(const std::vector<BenchReport>& reports);
void print_table(const std::vector<BenchReport>& reports, std::ostream& out);

}  // namespace vms

#endif  // VMS_BENCH_HPP
