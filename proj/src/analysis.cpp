#include "vms/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vms {

namespace {

constexpr double kInsideTol = 1e-10;

}  // namespace

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.num_elements() == 0) throw AnalysisError("cannot locate points on an empty mesh");
  if (const auto& s = mesh.structured()) {
    structured_ = true;
    x0_ = s->origin.x;
    y0_ = s->origin.y;
    cell_ = s->h;
    bx_ = s->nx - 1;
    by_ = s->ny - 1;
    return;
  }
  double xmin = INFINITY, ymin = INFINITY, xmax = -INFINITY, ymax = -INFINITY;
  for (const auto& p : mesh.nodes()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double area = std::max((xmax - xmin) * (ymax - ymin), 1e-300);
  cell_ = std::sqrt(area / static_cast<double>(mesh.num_elements()));
  x0_ = xmin;
  y0_ = ymin;
  bx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((xmax - xmin) / cell_)));
  by_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((ymax - ymin) / cell_)));

  auto range = [&](std::size_t e, std::size_t& i0, std::size_t& i1, std::size_t& j0, std::size_t& j1) {
    const auto& el = mesh.element(e);
    double ax = INFINITY, bx = -INFINITY, ay = INFINITY, by = -INFINITY;
    for (std::size_t v : el) {
      ax = std::min(ax, mesh.node(v).x);
      bx = std::max(bx, mesh.node(v).x);
      ay = std::min(ay, mesh.node(v).y);
      by = std::max(by, mesh.node(v).y);
    }
    auto clampi = [](double t, std::size_t n) {
      return static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(n - 1)));
    };
    i0 = clampi((ax - x0_) / cell_, bx_);
    i1 = clampi((bx - x0_) / cell_, bx_);
    j0 = clampi((ay - y0_) / cell_, by_);
    j1 = clampi((by - y0_) / cell_, by_);
  };
  std::vector<std::size_t> count(bx_ * by_ + 1, 0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    std::size_t i0, i1, j0, j1;
    range(e, i0, i1, j0, j1);
    for (std::size_t j = j0; j <= j1; ++j)
      for (std::size_t i = i0; i <= i1; ++i) ++count[j * bx_ + i + 1];
  }
  for (std::size_t k = 0; k < bx_ * by_; ++k) count[k + 1] += count[k];
  bucket_start_ = count;
  bucket_items_.resize(count.back());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    std::size_t i0, i1, j0, j1;
    range(e, i0, i1, j0, j1);
    for (std::size_t j = j0; j <= j1; ++j)
      for (std::size_t i = i0; i <= i1; ++i) bucket_items_[count[j * bx_ + i]++] = e;
  }
}

std::array<double, 3> PointLocator::barycentric(std::size_t e, Point2 p) const {
  const auto& el = mesh_->element(e);
  const Point2& a = mesh_->node(el[0]);
  const Point2& b = mesh_->node(el[1]);
  const Point2& c = mesh_->node(el[2]);
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
  const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

std::optional<std::size_t> PointLocator::locate(Point2 p) const {
  auto inside = [&](std::size_t e) {
    const auto l = barycentric(e, p);
    return l[0] >= -kInsideTol && l[1] >= -kInsideTol && l[2] >= -kInsideTol;
  };
  const double fx = (p.x - x0_) / cell_;
  const double fy = (p.y - y0_) / cell_;
  if (!std::isfinite(fx) || !std::isfinite(fy)) return std::nullopt;
  const double slack = 1e-9;
  if (fx < -slack || fy < -slack || fx > static_cast<double>(bx_) + slack ||
      fy > static_cast<double>(by_) + slack) {
    return std::nullopt;
  }
  const auto i = static_cast<std::size_t>(std::clamp(std::floor(fx), 0.0, static_cast<double>(bx_ - 1)));
  const auto j = static_cast<std::size_t>(std::clamp(std::floor(fy), 0.0, static_cast<double>(by_ - 1)));
  if (structured_) {
    const double u = fx - static_cast<double>(i), v = fy - static_cast<double>(j);
    const std::size_t cell = j * bx_ + i;
    return u + v <= 1.0 ? 2 * cell : 2 * cell + 1;
  }
  for (std::size_t k = bucket_start_[j * bx_ + i]; k < bucket_start_[j * bx_ + i + 1]; ++k) {
    if (inside(bucket_items_[k])) return bucket_items_[k];
  }
  return std::nullopt;
}

ReferenceSolution::ReferenceSolution(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw AnalysisError("reference mesh missing");
  if (values_.size() != mesh_->num_nodes()) throw AnalysisError("reference values do not match mesh");
  locator_ = std::make_unique<PointLocator>(*mesh_);
}

std::optional<std::size_t> ReferenceSolution::node_at(Point2 p, double tol) const {
  const auto e = locator_->locate(p);
  if (!e) return std::nullopt;
  for (std::size_t v : mesh_->element(*e)) {
    const Point2& q = mesh_->node(v);
    if (std::abs(q.x - p.x) <= tol && std::abs(q.y - p.y) <= tol) return v;
  }
  return std::nullopt;
}

double ReferenceSolution::evaluate(Point2 p) const {
  const auto e = locator_->locate(p);
  if (!e) {
    throw AnalysisError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ") is outside the reference mesh");
  }
  const auto& el = mesh_->element(*e);
  for (std::size_t v : el) {
    const Point2& q = mesh_->node(v);
    if (q.x == p.x && q.y == p.y) return values_[v];
  }
  const auto l = locator_->barycentric(*e, p);
  return l[0] * values_[el[0]] + l[1] * values_[el[1]] + l[2] * values_[el[2]];
}

double l2_error(const Mesh& coarse, const std::vector<double>& u, const ReferenceSolution& ref) {
  if (u.size() != coarse.num_nodes()) throw AnalysisError("solution length does not match mesh");
  double sum = 0.0;
  for (std::size_t e = 0; e < coarse.num_elements(); ++e) {
    const auto& el = coarse.element(e);
    double local = 0.0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = el[k], b = el[(k + 1) % 3];
      const Point2 m{0.5 * (coarse.node(a).x + coarse.node(b).x), 0.5 * (coarse.node(a).y + coarse.node(b).y)};
      const double d = 0.5 * (u[a] + u[b]) - ref.evaluate(m);
      local += d * d;
    }
    sum += coarse.signed_area(e) / 3.0 * local;
  }
  return std::sqrt(sum);
}

double linf_error(const Mesh& coarse, const std::vector<double>& u, const ReferenceSolution& ref) {
  if (u.size() != coarse.num_nodes()) throw AnalysisError("solution length does not match mesh");
  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.num_nodes(); ++i) {
    worst = std::max(worst, std::abs(u[i] - ref.evaluate(coarse.node(i))));
  }
  return worst;
}

std::pair<Mesh, VelocityField> refine_problem_mesh(const Mesh& coarse, const VelocityField& vel,
                                                   int factor) {
  if (factor < 1) throw AnalysisError("refinement factor must be >= 1");
  vel.check_compatible(coarse);
  if (factor == 1) return {coarse, vel};
  if (const auto& s = coarse.structured()) {
    if (s->origin.x != 0.0 || s->origin.y != 0.0) throw AnalysisError("structured mesh must start at the origin");
    const auto f = static_cast<std::size_t>(factor);
    Mesh fine = build_structured_mesh(s->h * static_cast<double>(s->nx - 1), s->h * static_cast<double>(s->ny - 1),
                                      (s->nx - 1) * f + 1, (s->ny - 1) * f + 1);
    if (vel.kind() != VelocityField::Kind::NodalSamples) return {std::move(fine), vel};
    PointLocator loc(coarse);
    std::vector<Point2> samples(fine.num_nodes());
    for (std::size_t i = 0; i < fine.num_nodes(); ++i) {
      const auto e = loc.locate(fine.node(i));
      if (!e) throw AnalysisError("refined node outside coarse mesh");
      const auto l = loc.barycentric(*e, fine.node(i));
      const auto& el = coarse.element(*e);
      for (int k = 0; k < 3; ++k) {
        samples[i].x += l[k] * vel.samples()[el[k]].x;
        samples[i].y += l[k] * vel.samples()[el[k]].y;
      }
    }
    return {std::move(fine), VelocityField::nodal_samples(std::move(samples))};
  }
  if ((factor & (factor - 1)) != 0) {
    throw AnalysisError("imported meshes refine by powers of two only");
  }
  Mesh mesh = coarse;
  VelocityField v = vel;
  for (int f = factor; f > 1; f /= 2) {
    RefinedMesh r = refine_uniform(mesh);
    if (v.kind() == VelocityField::Kind::NodalSamples) {
      std::vector<Point2> samples = v.samples();
      for (const auto& par : r.midpoint_parents) {
        const Point2& a = samples[par[0]];
        const Point2& b = samples[par[1]];
        samples.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      }
      v = VelocityField::nodal_samples(std::move(samples));
    }
    mesh = std::move(r.mesh);
  }
  return {std::move(mesh), std::move(v)};
}

ReferenceSolution make_reference(const Mesh& coarse, const Problem& problem, int factor,
                                 const SolveOptions& opts) {
  auto [fine, vel] = refine_problem_mesh(coarse, problem.velocity, factor);
  Problem p = problem;
  p.velocity = std::move(vel);
  auto mesh = std::make_shared<const Mesh>(std::move(fine));
  SolutionField s = solve_problem(*mesh, p, opts);
  ReferenceSolution ref(mesh, std::move(s.values));
  ref.residual = s.residual;
  return ref;
}

std::vector<double> error_ratio_sequence(const std::vector<double>& errors) {
  if (errors.size() < 2) throw AnalysisError("need at least two errors for a ratio sequence");
  std::vector<double> r;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    r.push_back(errors[k + 1] != 0.0 ? errors[k] / errors[k + 1] : std::numeric_limits<double>::infinity());
  }
  return r;
}

}  // namespace vms
