#include "vms/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

namespace vms {

Point2 rotational_velocity(Point2 p) {
  const double scale = std::hypot(p.x, p.y) < 0.01 ? 0.1 : 2.0;
  return {-scale * (p.y - 0.5), scale * (p.x - 0.5)};
}

VelocityField VelocityField::constant(double a1, double a2) {
  VelocityField v;
  v.kind_ = Kind::Constant;
  v.value_ = {a1, a2};
  return v;
}

VelocityField VelocityField::polar(double magnitude, double alpha) {
  return constant(magnitude * std::cos(alpha), magnitude * std::sin(alpha));
}

VelocityField VelocityField::rotational() {
  VelocityField v;
  v.kind_ = Kind::Rotational;
  return v;
}

VelocityField VelocityField::nodal_samples(std::vector<Point2> samples) {
  for (const auto& s : samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw FemError("velocity sample is not finite");
  }
  VelocityField v;
  v.kind_ = Kind::NodalSamples;
  v.samples_ = std::move(samples);
  return v;
}

void VelocityField::check_compatible(const Mesh& mesh) const {
  if (kind_ == Kind::NodalSamples && samples_.size() != mesh.num_nodes()) {
    throw FemError("velocity has " + std::to_string(samples_.size()) + " samples but mesh has " +
                   std::to_string(mesh.num_nodes()) + " nodes");
  }
}

Point2 VelocityField::element_velocity(const Mesh& mesh, std::size_t e) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Rotational:
      return rotational_velocity(element_metrics(mesh, e).barycenter);
    case Kind::NodalSamples: {
      const auto& el = mesh.element(e);
      Point2 a;
      for (std::size_t v : el) {
        a.x += samples_.at(v).x;
        a.y += samples_.at(v).y;
      }
      return {a.x / 3.0, a.y / 3.0};
    }
  }
  return value_;
}

VelocityField read_velocity(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw FemError("velocity file is empty");
  std::istringstream head(line);
  std::string word;
  long long n = -1;
  if (!(head >> word >> n) || word != "velocity" || n < 0) {
    throw FemError("expected 'velocity <n>' (line " + std::to_string(line_no) + ")");
  }
  std::vector<Point2> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    if (!next_line()) throw FemError("velocity file truncated (line " + std::to_string(line_no + 1) + ")");
    std::istringstream ls(line);
    Point2 a;
    std::string extra;
    if (!(ls >> a.x >> a.y) || (ls >> extra)) {
      throw FemError("malformed velocity line (line " + std::to_string(line_no) + ")");
    }
    samples.push_back(a);
  }
  if (next_line()) throw FemError("trailing content (line " + std::to_string(line_no) + ")");
  return VelocityField::nodal_samples(std::move(samples));
}

VelocityField read_velocity_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FemError("cannot open velocity file '" + path + "'");
  return read_velocity(in);
}

void write_velocity(const std::vector<Point2>& samples, std::ostream& out) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "velocity " << samples.size() << '\n';
  for (const auto& a : samples) out << a.x << ' ' << a.y << '\n';
  out.precision(old);
}

ElementPeclets element_peclets(const ElementMetrics& em, Point2 a, double mu) {
  if (!(mu > 0.0)) throw FemError("diffusivity must be positive");
  const double s = em.h / (2.0 * mu);
  return {s * a.x, s * a.y, s * std::hypot(a.x, a.y)};
}

std::string to_string(TauKind kind) {
  switch (kind) {
    case TauKind::SpectralTable: return "spectral";
    case TauKind::SpectralDirect: return "spectral-direct";
    case TauKind::Gen1d: return "gen1d";
    case TauKind::Codina: return "codina";
    case TauKind::None: return "none";
  }
  return "none";
}

TauProvider TauProvider::none() { return {}; }

TauProvider TauProvider::gen1d() {
  TauProvider t;
  t.kind_ = TauKind::Gen1d;
  return t;
}

TauProvider TauProvider::codina() {
  TauProvider t;
  t.kind_ = TauKind::Codina;
  return t;
}

TauProvider TauProvider::spectral_table(std::shared_ptr<const StabTable> table) {
  if (!table) throw FemError("spectral provider requires a table");
  TauProvider t;
  t.kind_ = TauKind::SpectralTable;
  t.truncation_ = table->truncation();
  t.table_ = std::move(table);
  return t;
}

TauProvider TauProvider::spectral_direct(Truncation tr) {
  TauProvider t;
  t.kind_ = TauKind::SpectralDirect;
  t.truncation_ = tr;
  return t;
}

double TauProvider::operator()(const ElementMetrics& em, Point2 a, double mu) const {
  const double speed = std::hypot(a.x, a.y);
  switch (kind_) {
    case TauKind::None:
      return 0.0;
    case TauKind::Gen1d:
      return tau_gen1d(em.h, mu, speed);
    case TauKind::Codina:
      return tau_codina(em.h, mu, speed);
    case TauKind::SpectralTable: {
      const auto pe = element_peclets(em, a, mu);
      return 8.0 * em.h * em.h * table_->query({pe.pe1, pe.pe2}) / mu;
    }
    case TauKind::SpectralDirect: {
      const auto pe = element_peclets(em, a, mu);
      return tau_spectral(em.h, mu, {pe.pe1, pe.pe2}, truncation_);
    }
  }
  return 0.0;
}

double CsrMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto begin = col.begin() + row_ptr[i];
  const auto end = col.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, static_cast<int>(j));
  if (it == end || *it != static_cast<int>(j)) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

void CsrMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[static_cast<Eigen::Index>(i)] = s;
  }
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(rows);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d(static_cast<Eigen::Index>(i), col[k]) += val[k];
  }
  return d;
}

CsrMatrix p1_pattern(const Mesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  if (n >= static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw FemError("mesh too large for 32-bit sparse indices");
  }
  std::vector<int> count(n + 1, 0);
  for (const auto& el : mesh.elements()) {
    for (std::size_t v : el) count[v + 1] += 3;
  }
  for (std::size_t i = 0; i < n; ++i) count[i + 1] += count[i];
  std::vector<int> cols(static_cast<std::size_t>(count[n]));
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (const auto& el : mesh.elements()) {
    for (std::size_t a : el) {
      for (std::size_t b : el) cols[static_cast<std::size_t>(fill[a]++)] = static_cast<int>(b);
    }
  }
  CsrMatrix m;
  m.rows = n;
  m.row_ptr.assign(n + 1, 0);
  std::vector<int> out;
  out.reserve(cols.size() / 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto b = cols.begin() + count[i];
    auto e = cols.begin() + count[i + 1];
    std::sort(b, e);
    e = std::unique(b, e);
    if (b == e) {
      // isolated node keeps its diagonal
      out.push_back(static_cast<int>(i));
    } else {
      out.insert(out.end(), b, e);
    }
    m.row_ptr[i + 1] = static_cast<int>(out.size());
  }
  m.col = std::move(out);
  m.val.assign(m.col.size(), 0.0);
  return m;
}

namespace {

struct LocalP1 {
  double area;
  double gx[3];
  double gy[3];
};

LocalP1 local_p1(const Mesh& mesh, std::size_t e) {
  const auto& el = mesh.element(e);
  const Point2& p0 = mesh.node(el[0]);
  const Point2& p1 = mesh.node(el[1]);
  const Point2& p2 = mesh.node(el[2]);
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  if (!(det > 0.0)) throw FemError("singular element " + std::to_string(e));
  LocalP1 l;
  l.area = 0.5 * det;
  l.gx[0] = (p1.y - p2.y) / det;
  l.gy[0] = (p2.x - p1.x) / det;
  l.gx[1] = (p2.y - p0.y) / det;
  l.gy[1] = (p0.x - p2.x) / det;
  l.gx[2] = (p0.y - p1.y) / det;
  l.gy[2] = (p1.x - p0.x) / det;
  return l;
}

int find_entry(const CsrMatrix& m, std::size_t i, std::size_t j) {
  const auto begin = m.col.begin() + m.row_ptr[i];
  const auto end = m.col.begin() + m.row_ptr[i + 1];
  const auto it = std::lower_bound(begin, end, static_cast<int>(j));
  return static_cast<int>(it - m.col.begin());
}

// Consecutive elements often share (h, a_K); reuse the last tau in that case.
class TauCache {
 public:
  TauCache(const TauProvider& tau, double mu) : tau_(tau), mu_(mu) {}
  double operator()(const ElementMetrics& em, Point2 a) {
    if (!valid_ || em.h != h_ || a.x != a_.x || a.y != a_.y) {
      value_ = tau_(em, a, mu_);
      h_ = em.h;
      a_ = a;
      valid_ = true;
    }
    return value_;
  }

 private:
  const TauProvider& tau_;
  double mu_;
  bool valid_ = false;
  double h_ = 0.0;
  Point2 a_;
  double value_ = 0.0;
};

}  // namespace

std::vector<double> element_taus(const Mesh& mesh, double mu, const VelocityField& vel,
                                 const TauProvider& tau) {
  vel.check_compatible(mesh);
  TauCache cache(tau, mu);
  std::vector<double> out(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    out[e] = cache(element_metrics(mesh, e), vel.element_velocity(mesh, e));
  }
  return out;
}

LinearSystem assemble(const Mesh& mesh, double mu, const VelocityField& vel, const ScalarField& f,
                      const TauProvider& tau, unsigned terms) {
  if (!(mu > 0.0)) throw FemError("diffusivity must be positive");
  vel.check_compatible(mesh);
  LinearSystem sys;
  sys.matrix = p1_pattern(mesh);
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.dirichlet_mask.assign(mesh.num_nodes(), 0);
  sys.dirichlet_values.assign(mesh.num_nodes(), 0.0);
  const bool need_source = (terms & kSource) && f;
  const bool need_tau = (terms & kStabilization) || need_source;
  TauCache cache(tau, mu);

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    const LocalP1 l = local_p1(mesh, e);
    const Point2 a = vel.element_velocity(mesh, e);
    double t = 0.0;
    if (need_tau && tau.kind() != TauKind::None) t = cache(element_metrics(mesh, e), a);
    double adv[3];
    for (int i = 0; i < 3; ++i) adv[i] = a.x * l.gx[i] + a.y * l.gy[i];

    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        if (terms & kDiffusion) v += mu * l.area * (l.gx[i] * l.gx[j] + l.gy[i] * l.gy[j]);
        if (terms & kAdvection) v += adv[j] * l.area / 3.0;
        if (terms & kStabilization) v += t * l.area * adv[j] * adv[i];
        if (v != 0.0) sys.matrix.val[static_cast<std::size_t>(find_entry(sys.matrix, el[i], el[j]))] += v;
      }
    }

    if (need_source) {
      const Point2& p0 = mesh.node(el[0]);
      const Point2& p1 = mesh.node(el[1]);
      const Point2& p2 = mesh.node(el[2]);
      // f at the midpoints of the edges opposite vertex 0, 1, 2
      const double m0 = f(0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y));
      const double m1 = f(0.5 * (p0.x + p2.x), 0.5 * (p0.y + p2.y));
      const double m2 = f(0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y));
      const double w = l.area / 3.0;
      const double galerkin[3] = {0.5 * w * (m1 + m2), 0.5 * w * (m0 + m2), 0.5 * w * (m0 + m1)};
      const double total = w * (m0 + m1 + m2);
      for (int i = 0; i < 3; ++i) {
        sys.rhs[static_cast<Eigen::Index>(el[i])] += galerkin[i] + t * adv[i] * total;
      }
    }
  }
  return sys;
}

void constrain_nodes(LinearSystem& sys, const std::vector<std::uint8_t>& mask,
                     const std::vector<double>& values) {
  auto& m = sys.matrix;
  if (mask.size() != m.rows || values.size() != m.rows) {
    throw FemError("constraint vectors do not match system size");
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (mask[i]) {
      sys.dirichlet_mask[i] = 1;
      sys.dirichlet_values[i] = values[i];
    }
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (sys.dirichlet_mask[i]) {
      for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
        m.val[k] = (static_cast<std::size_t>(m.col[k]) == i) ? 1.0 : 0.0;
      }
      sys.rhs[static_cast<Eigen::Index>(i)] = sys.dirichlet_values[i];
      continue;
    }
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      const auto c = static_cast<std::size_t>(m.col[k]);
      if (sys.dirichlet_mask[c] && m.val[k] != 0.0) {
        sys.rhs[static_cast<Eigen::Index>(i)] -= m.val[k] * sys.dirichlet_values[c];
        m.val[k] = 0.0;
      }
    }
  }
}

void apply_dirichlet(LinearSystem& sys, const Mesh& mesh, const std::map<std::size_t, double>& values) {
  std::vector<std::uint8_t> mask(mesh.num_nodes(), 0);
  std::vector<double> vals(mesh.num_nodes(), 0.0);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) mask[i] = mesh.is_boundary(i) ? 1 : 0;
  for (const auto& [node, v] : values) {
    if (node >= mesh.num_nodes()) throw FemError("Dirichlet node " + std::to_string(node) + " out of range");
    if (!mesh.is_boundary(node)) {
      throw FemError("Dirichlet value given for non-boundary node " + std::to_string(node));
    }
    vals[node] = v;
  }
  constrain_nodes(sys, mask, vals);
}

void apply_dirichlet(LinearSystem& sys, const Mesh& mesh, const ScalarField& g) {
  std::vector<std::uint8_t> mask(mesh.num_nodes(), 0);
  std::vector<double> vals(mesh.num_nodes(), 0.0);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.is_boundary(i)) {
      mask[i] = 1;
      if (g) vals[i] = g(mesh.node(i).x, mesh.node(i).y);
    }
  }
  constrain_nodes(sys, mask, vals);
}

double relative_residual(const CsrMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  Eigen::VectorXd ax;
  a.multiply(x, ax);
  const double nb = b.norm();
  const double nr = (ax - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

SpMat to_eigen(const CsrMatrix& m) {
  const auto n = static_cast<int>(m.rows);
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view(
      n, n, static_cast<int>(m.nnz()), m.row_ptr.data(), m.col.data(), m.val.data());
  SpMat a(view);
  a.makeCompressed();
  return a;
}

class DirectSolver {
 public:
  explicit DirectSolver(const CsrMatrix& m) : a_(to_eigen(m)) {
    lu_.analyzePattern(a_);
    lu_.factorize(a_);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorization failed", INFINITY);
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return lu_.solve(b); }

 private:
  SpMat a_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

/// Right-preconditioned BiCGSTAB on the true residual norm; precond(r) returns M^-1 r.
template <class Precond>
int bicgstab(const CsrMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x, Precond&& precond,
             double tol, int max_iter) {
  const double nb = b.norm();
  if (nb == 0.0) {
    x.setZero();
    return 0;
  }
  Eigen::VectorXd r, ax;
  a.multiply(x, ax);
  r = b - ax;
  Eigen::VectorXd rhat = r;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd s, t, phat, shat;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double rho_new = rhat.dot(r);
    if (rho_new == 0.0) {
      rhat = r;  // restart on breakdown
      p.setZero();
      v.setZero();
      rho = alpha = omega = 1.0;
      continue;
    }
    const double beta_k = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    p = r + beta_k * (p - omega * v);
    phat = precond(p);
    a.multiply(phat, v);
    alpha = rho / rhat.dot(v);
    s = r - alpha * v;
    if (s.norm() <= tol * nb) {
      x += alpha * phat;
      return it;
    }
    shat = precond(s);
    a.multiply(shat, t);
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    x += alpha * phat + omega * shat;
    r = s - omega * t;
    if (r.norm() <= tol * nb) return it;
    if (omega == 0.0) {
      rhat = r;
      p.setZero();
      v.setZero();
      rho = alpha = omega = 1.0;
    }
  }
  return -1;
}

SolutionField finish(const LinearSystem& sys, Eigen::VectorXd x, int iterations, std::string method,
                     double tol) {
  SolutionField out;
  out.residual = relative_residual(sys.matrix, x, sys.rhs);
  out.iterations = iterations;
  out.method = std::move(method);
  if (!x.allFinite()) throw SolverError(out.method + " produced non-finite values", out.residual);
  if (!(out.residual <= tol)) {
    std::ostringstream msg;
    msg << out.method << " did not reach the residual contract: " << out.residual << " > " << tol;
    throw SolverError(msg.str(), out.residual);
  }
  out.values.assign(x.data(), x.data() + x.size());
  return out;
}

SolutionField solve_direct(const LinearSystem& sys, double tol) {
  DirectSolver lu(sys.matrix);
  Eigen::VectorXd x = lu.solve(sys.rhs);
  int refinements = 0;
  // iterative refinement guards the residual contract on poorly scaled systems
  while (relative_residual(sys.matrix, x, sys.rhs) > 0.01 * tol && refinements < 3) {
    Eigen::VectorXd ax;
    sys.matrix.multiply(x, ax);
    x += lu.solve(sys.rhs - ax);
    ++refinements;
  }
  return finish(sys, std::move(x), refinements, "sparse-lu", tol);
}

SolutionField solve_iterative(const LinearSystem& sys, const SolveOptions& opts) {
  Eigen::IncompleteLUT<double, int> ilu;
  ilu.setDroptol(1e-4);
  ilu.setFillfactor(10);
  const SpMat a = to_eigen(sys.matrix);
  ilu.compute(a);
  if (ilu.info() != Eigen::Success) throw SolverError("ILUT factorization failed", INFINITY);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.rhs.size());
  const int it = bicgstab(
      sys.matrix, sys.rhs, x, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return ilu.solve(r); },
      0.1 * opts.tolerance, opts.max_iterations);
  return finish(sys, std::move(x), it, "bicgstab-ilut", opts.tolerance);
}

// Geometric multigrid V-cycle on nested structured grids, each level halving the
// cell counts. Coarse operators are rediscretized with the Codina coefficient,
// which stays well defined at the large coarse-grid Peclet numbers.
class StructuredMultigrid {
 public:
  StructuredMultigrid(const Mesh& fine, const Problem& problem, const LinearSystem& fine_sys)
      : fine_(&fine_sys.matrix) {
    const auto& info = *fine.structured();
    std::size_t cx = info.nx - 1, cy = info.ny - 1;
    levels_.push_back(Level{info.nx, info.ny, {}, {}, fine_sys.dirichlet_mask});
    levels_.back().diag = diagonal_positions(fine_sys.matrix);
    VelocityField vel = problem.velocity;
    while (cx % 2 == 0 && cy % 2 == 0 && (cx / 2 + 1) * (cy / 2 + 1) >= kCoarsest) {
      const std::size_t fnx = cx + 1;
      cx /= 2;
      cy /= 2;
      const Mesh coarse = build_structured_mesh(info.h * static_cast<double>(info.nx - 1),
                                                info.h * static_cast<double>(info.ny - 1), cx + 1, cy + 1);
      if (vel.kind() == VelocityField::Kind::NodalSamples) {
        std::vector<Point2> inj((cx + 1) * (cy + 1));
        for (std::size_t j = 0; j <= cy; ++j) {
          for (std::size_t i = 0; i <= cx; ++i) inj[j * (cx + 1) + i] = vel.samples()[2 * j * fnx + 2 * i];
        }
        vel = VelocityField::nodal_samples(std::move(inj));
      }
      LinearSystem cs = assemble(coarse, problem.mu, vel, nullptr, TauProvider::codina(),
                                 kDiffusion | kAdvection | kStabilization);
      apply_dirichlet(cs, coarse);
      Level lv{cx + 1, cy + 1, std::move(cs.matrix), {}, coarse.boundary_flags()};
      lv.diag = diagonal_positions(lv.a);
      levels_.push_back(std::move(lv));
    }
    if (levels_.size() < 2) throw FemError("grid too small for multigrid");
    coarse_lu_ = std::make_unique<DirectSolver>(levels_.back().a);
    x_.resize(levels_.size());
    b_.resize(levels_.size());
    r_.resize(levels_.size());
  }

  std::size_t num_levels() const { return levels_.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& r) {
    b_[0] = r;
    vcycle(0);
    return x_[0];
  }

 private:
  static constexpr std::size_t kCoarsest = 1000;

  struct Level {
    std::size_t nx, ny;
    CsrMatrix a;
    std::vector<int> diag;
    std::vector<std::uint8_t> constrained;
  };

  static std::vector<int> diagonal_positions(const CsrMatrix& m) {
    std::vector<int> d(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
      d[i] = find_entry(m, i, i);
      if (d[i] >= m.row_ptr[i + 1] || static_cast<std::size_t>(m.col[d[i]]) != i || m.val[d[i]] == 0.0) {
        throw FemError("zero diagonal in multigrid level");
      }
    }
    return d;
  }

  const CsrMatrix& matrix(std::size_t l) const { return l == 0 ? *fine_ : levels_[l].a; }

  void gauss_seidel(std::size_t l, bool forward) {
    const CsrMatrix& a = matrix(l);
    const auto& diag = levels_[l].diag;
    Eigen::VectorXd& x = x_[l];
    const Eigen::VectorXd& b = b_[l];
    const auto n = static_cast<std::ptrdiff_t>(a.rows);
    for (std::ptrdiff_t q = 0; q < n; ++q) {
      const std::size_t i = static_cast<std::size_t>(forward ? q : n - 1 - q);
      double s = b[static_cast<Eigen::Index>(i)];
      for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
        if (k != diag[i]) s -= a.val[k] * x[a.col[k]];
      }
      x[static_cast<Eigen::Index>(i)] = s / a.val[diag[i]];
    }
  }

  // Calls fn(fine_index, coarse_index, weight) for the P1 interpolation weights.
  template <class Fn>
  void for_each_parent(std::size_t l, Fn&& fn) const {
    const std::size_t fnx = levels_[l].nx, fny = levels_[l].ny, cnx = levels_[l + 1].nx;
    for (std::size_t fj = 0; fj < fny; ++fj) {
      for (std::size_t fi = 0; fi < fnx; ++fi) {
        const std::size_t f = fj * fnx + fi, ci = fi / 2, cj = fj / 2;
        const std::size_t c = cj * cnx + ci;
        const bool ox = fi % 2 != 0, oy = fj % 2 != 0;
        if (!ox && !oy) {
          fn(f, c, 1.0);
        } else if (ox && !oy) {
          fn(f, c, 0.5);
          fn(f, c + 1, 0.5);
        } else if (!ox && oy) {
          fn(f, c, 0.5);
          fn(f, c + cnx, 0.5);
        } else {
          // cell centre lies on the anti-diagonal shared by the A and B triangles
          fn(f, c + 1, 0.5);
          fn(f, c + cnx, 0.5);
        }
      }
    }
  }

  void vcycle(std::size_t l) {
    if (l + 1 == levels_.size()) {
      x_[l] = coarse_lu_->solve(b_[l]);
      return;
    }
    x_[l] = Eigen::VectorXd::Zero(b_[l].size());
    gauss_seidel(l, true);
    gauss_seidel(l, false);
    matrix(l).multiply(x_[l], r_[l]);
    r_[l] = b_[l] - r_[l];
    const std::size_t cn = levels_[l + 1].nx * levels_[l + 1].ny;
    b_[l + 1] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cn));
    for_each_parent(l, [&](std::size_t f, std::size_t c, double w) {
      b_[l + 1][static_cast<Eigen::Index>(c)] += w * r_[l][static_cast<Eigen::Index>(f)];
    });
    const auto& mask = levels_[l + 1].constrained;
    for (std::size_t i = 0; i < cn; ++i) {
      if (mask[i]) b_[l + 1][static_cast<Eigen::Index>(i)] = 0.0;
    }
    vcycle(l + 1);
    for_each_parent(l, [&](std::size_t f, std::size_t c, double w) {
      x_[l][static_cast<Eigen::Index>(f)] += w * x_[l + 1][static_cast<Eigen::Index>(c)];
    });
    gauss_seidel(l, true);
    gauss_seidel(l, false);
  }

  const CsrMatrix* fine_;
  std::vector<Level> levels_;
  std::unique_ptr<DirectSolver> coarse_lu_;
  std::vector<Eigen::VectorXd> x_, b_, r_;
};

bool multigrid_applicable(const Mesh& mesh) {
  const auto& s = mesh.structured();
  return s && s->origin.x == 0.0 && s->origin.y == 0.0 && (s->nx - 1) % 2 == 0 && (s->ny - 1) % 2 == 0;
}

}  // namespace

SolutionField solve(const LinearSystem& sys, const SolveOptions& opts) {
  if (sys.matrix.rows != static_cast<std::size_t>(sys.rhs.size())) {
    throw FemError("matrix and right-hand side sizes differ");
  }
  SolverKind kind = opts.kind;
  if (kind == SolverKind::Auto) {
    kind = sys.matrix.rows <= opts.direct_limit ? SolverKind::Direct : SolverKind::Iterative;
  }
  return kind == SolverKind::Direct ? solve_direct(sys, opts.tolerance) : solve_iterative(sys, opts);
}

}  // namespace vms

namespace vms {

LinearSystem assemble_problem(const Mesh& mesh, const Problem& problem) {
  LinearSystem sys = assemble(mesh, problem.mu, problem.velocity, problem.source, problem.tau);
  apply_dirichlet(sys, mesh, problem.boundary);
  return sys;
}

SolutionField solve_problem(const Mesh& mesh, const Problem& problem, const SolveOptions& opts) {
  const LinearSystem sys = assemble_problem(mesh, problem);
  if (opts.kind == SolverKind::Auto && sys.matrix.rows > opts.direct_limit && multigrid_applicable(mesh)) {
    StructuredMultigrid mg(mesh, problem, sys);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.rhs.size());
    const int it = bicgstab(
        sys.matrix, sys.rhs, x, [&](const Eigen::VectorXd& r) { return mg.apply(r); },
        0.1 * opts.tolerance, opts.max_iterations);
    return finish(sys, std::move(x), it, "bicgstab-multigrid", opts.tolerance);
  }
  return solve(sys, opts);
}

void write_solution_csv(const Mesh& mesh, const std::vector<double>& u, std::ostream& out) {
  if (u.size() != mesh.num_nodes()) throw FemError("solution length does not match mesh");
  const auto old = out.precision(17);
  out << "x,y,u\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    out << mesh.node(i).x << ',' << mesh.node(i).y << ',' << u[i] << '\n';
  }
  out.precision(old);
}

void write_solution_vtk(const Mesh& mesh, const std::vector<double>& u, std::ostream& out) {
  if (u.size() != mesh.num_nodes()) throw FemError("solution length does not match mesh");
  const auto old = out.precision(17);
  out << "# vtk DataFile Version 3.0\nadvection-diffusion solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes()) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
  for (const auto& el : mesh.elements()) out << "3 " << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
  out << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << "5\n";
  out << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : u) out << v << '\n';
  out.precision(old);
}

}  // namespace vms
