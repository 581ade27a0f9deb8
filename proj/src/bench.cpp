#include "vms/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const StabTable> table_or_default(const BenchOptions& opts) {
  return opts.table ? opts.table : default_table();
}

std::vector<TauProvider> providers(const BenchOptions& opts, bool with_gen1d) {
  std::vector<TauProvider> out{TauProvider::spectral_table(table_or_default(opts))};
  if (with_gen1d) out.push_back(TauProvider::gen1d());
  out.push_back(TauProvider::codina());
  if (opts.include_galerkin) out.push_back(TauProvider::none());
  return out;
}

void run_providers(BenchReport& report, const Mesh& mesh, const Problem& base,
                   const std::vector<TauProvider>& taus, const ReferenceSolution& ref,
                   const BenchOptions& opts) {
  for (const auto& tau : taus) {
    const auto t0 = Clock::now();
    Problem p = base;
    p.tau = tau;
    SolutionField s = solve_problem(mesh, p, opts.solve);
    ProviderResult r;
    r.tau_kind = tau.name();
    r.residual = s.residual;
    r.l2 = l2_error(mesh, s.values, ref);
    r.linf = linf_error(mesh, s.values, ref);
    r.overshoot = overshoot_indicator(s.values, ref.values());
    r.runtime_s = opts.seed_free ? 0.0 : seconds_since(t0);
    if (opts.keep_solutions) r.solution = std::move(s.values);
    report.results.push_back(std::move(r));
  }
}

}  // namespace

PecletStats peclet_statistics(const Mesh& mesh, const VelocityField& vel, double mu) {
  vel.check_compatible(mesh);
  PecletStats s;
  s.pe1_min = s.pe2_min = INFINITY;
  s.pe1_max = s.pe2_max = -INFINITY;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto pe = element_peclets(element_metrics(mesh, e), vel.element_velocity(mesh, e), mu);
    s.pe_max = std::max(s.pe_max, pe.pe);
    s.pe1_min = std::min(s.pe1_min, pe.pe1);
    s.pe1_max = std::max(s.pe1_max, pe.pe1);
    s.pe2_min = std::min(s.pe2_min, pe.pe2);
    s.pe2_max = std::max(s.pe2_max, pe.pe2);
  }
  return s;
}

double overshoot_indicator(const std::vector<double>& u, const std::vector<double>& ref) {
  if (u.empty() || ref.empty()) return 0.0;
  const auto [umin, umax] = std::minmax_element(u.begin(), u.end());
  const auto [rmin, rmax] = std::minmax_element(ref.begin(), ref.end());
  return std::max(0.0, *umax - *rmax) + std::max(0.0, *rmin - *umin);
}

const ProviderResult& BenchReport::result(const std::string& tau_kind) const {
  for (const auto& r : results) {
    if (r.tau_kind == tau_kind) return r;
  }
  throw std::out_of_range("no result for provider '" + tau_kind + "'");
}

std::shared_ptr<const StabTable> default_table() {
  static std::mutex m;
  static std::shared_ptr<const StabTable> table;
  std::lock_guard lock(m);
  if (!table) table = std::make_shared<const StabTable>(build_table({}, 0.125, {}));
  return table;
}

std::vector<BenchReport> bench_constant(const std::vector<int>& n_values, std::size_t n_nodes,
                                        const BenchOptions& opts) {
  for (int n : n_values) {
    if (n < 0 || n > 18 || n % 2 != 0) throw std::invalid_argument("direction index must be in {0,2,...,18}");
  }
  const Mesh mesh = build_structured_mesh(1.0, 1.0, n_nodes, n_nodes);
  const double speed = 800.0 * std::numbers::sqrt2;
  const ScalarField f = [](double x, double y) {
    return std::sin(std::numbers::pi * x) * std::cos(std::numbers::pi * y);
  };
  const auto taus = providers(opts, true);
  std::vector<BenchReport> out;
  for (int n : n_values) {
    const double alpha = n * std::numbers::pi / 10.0;
    Problem base{1.0, VelocityField::polar(speed, alpha), f, nullptr, taus.front()};
    BenchReport report;
    report.benchmark = "constant";
    report.case_label = "n=" + std::to_string(n);
    report.n = n_nodes;
    report.peclet = peclet_statistics(mesh, base.velocity, base.mu);
    const auto t0 = Clock::now();
    const ReferenceSolution ref = make_reference(mesh, base, opts.reference_factor, opts.solve);
    report.reference_runtime_s = opts.seed_free ? 0.0 : seconds_since(t0);
    report.reference_nodes = ref.mesh().num_nodes();
    run_providers(report, mesh, base, taus, ref, opts);
    out.push_back(std::move(report));
  }
  return out;
}

std::vector<BenchReport> bench_rotational(const std::vector<std::size_t>& ns, const BenchOptions& opts) {
  if (ns.empty()) throw std::invalid_argument("no grid sizes given");
  for (std::size_t n : ns) {
    if (n < 1) throw std::invalid_argument("grid size must be positive");
  }
  const ScalarField f = [](double, double) { return 1.0; };
  const auto taus = providers(opts, false);
  Problem base{1e-3, VelocityField::rotational(), f, nullptr, taus.front()};

  const std::size_t n_ref = *std::max_element(ns.begin(), ns.end()) * static_cast<std::size_t>(opts.reference_factor);
  const auto t0 = Clock::now();
  const Mesh unit = build_structured_mesh(1.0, 0.5, 3, 2);
  const ReferenceSolution ref = make_reference(unit, base, static_cast<int>(n_ref), opts.solve);
  const double ref_time = opts.seed_free ? 0.0 : seconds_since(t0);

  std::vector<BenchReport> out;
  for (std::size_t n : ns) {
    const Mesh mesh = build_structured_mesh(1.0, 0.5, 2 * n + 1, n + 1);
    BenchReport report;
    report.benchmark = "rotational";
    report.case_label = "N=" + std::to_string(n);
    report.n = n;
    report.peclet = peclet_statistics(mesh, base.velocity, base.mu);
    report.reference_nodes = ref.mesh().num_nodes();
    report.reference_runtime_s = ref_time;
    run_providers(report, mesh, base, taus, ref, opts);
    out.push_back(std::move(report));
  }
  return out;
}

std::vector<double> read_solution_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("solution file is empty");
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y, u;
    if (!(ls >> x >> y >> u)) throw std::runtime_error("malformed solution line (line " + std::to_string(line_no) + ")");
    values.push_back(u);
  }
  return values;
}

BenchReport bench_external(const ExternalInputs& in, const BenchOptions& opts) {
  const Mesh mesh = import_mesh_file(in.mesh_path);
  const VelocityField vel = read_velocity_file(in.velocity_path);
  vel.check_compatible(mesh);
  const ScalarField f = in.source ? in.source : ScalarField([](double, double) { return 1.0; });
  const auto taus = providers(opts, false);
  Problem base{in.mu, vel, f, nullptr, taus.front()};

  BenchReport report;
  report.benchmark = "external";
  report.case_label = in.mesh_path.substr(in.mesh_path.find_last_of('/') + 1);
  report.n = mesh.num_nodes();
  report.peclet = peclet_statistics(mesh, vel, in.mu);

  const auto t0 = Clock::now();
  std::optional<ReferenceSolution> ref;
  if (!in.reference_mesh_path.empty()) {
    auto rmesh = std::make_shared<const Mesh>(import_mesh_file(in.reference_mesh_path));
    std::ifstream vin(in.reference_values_path);
    if (!vin) throw std::runtime_error("cannot open reference values '" + in.reference_values_path + "'");
    ref.emplace(rmesh, read_solution_csv(vin));
  } else {
    ref.emplace(make_reference(mesh, base, opts.reference_factor, opts.solve));
  }
  report.reference_runtime_s = opts.seed_free ? 0.0 : seconds_since(t0);
  report.reference_nodes = ref->mesh().num_nodes();
  run_providers(report, mesh, base, taus, *ref, opts);
  return report;
}

CylinderFixture make_cylinder_fixture(double u_inf) {
  constexpr double kR = 0.05, kB = 0.15, kL = 0.45;
  constexpr std::size_t kSide = 12, kRings = 8, kWake = 24;
  constexpr std::size_t kPerim = 4 * kSide;

  std::vector<Point2> nodes;
  std::vector<std::uint8_t> boundary;
  // ring m, perimeter index k (counterclockwise from (B,-B) up the right side)
  auto square_point = [&](std::size_t k) -> Point2 {
    const std::size_t side = k / kSide;
    const double t = static_cast<double>(k % kSide) / kSide;
    switch (side) {
      case 0: return {kB, -kB + 2 * kB * t};
      case 1: return {kB - 2 * kB * t, kB};
      case 2: return {-kB, kB - 2 * kB * t};
      default: return {-kB + 2 * kB * t, -kB};
    }
  };
  auto ring_index = [&](std::size_t m, std::size_t k) { return m * kPerim + (k % kPerim); };
  for (std::size_t m = 0; m <= kRings; ++m) {
    const double t = static_cast<double>(m) / kRings;
    const double g = std::expm1(1.5 * t) / std::expm1(1.5);
    for (std::size_t k = 0; k < kPerim; ++k) {
      const Point2 s = square_point(k);
      const double th = std::atan2(s.y, s.x);
      const Point2 c{kR * std::cos(th), kR * std::sin(th)};
      nodes.push_back({c.x + g * (s.x - c.x), c.y + g * (s.y - c.y)});
      const bool interface = m == kRings && k > 0 && k < kSide;
      boundary.push_back((m == 0 || m == kRings) && !interface ? 1 : 0);
    }
  }
  // wake block columns c = 1..kWake at x = B + c dx, rows matching the right side
  const double dx = (kL - kB) / kWake;
  auto wake_index = [&](std::size_t c, std::size_t r) -> std::size_t {
    if (c == 0) return ring_index(kRings, r);  // r = kSide is the corner (B,B)
    return (kRings + 1) * kPerim + (c - 1) * (kSide + 1) + r;
  };
  for (std::size_t c = 1; c <= kWake; ++c) {
    for (std::size_t r = 0; r <= kSide; ++r) {
      nodes.push_back({kB + dx * static_cast<double>(c), -kB + 2 * kB * static_cast<double>(r) / kSide});
      boundary.push_back(r == 0 || r == kSide || c == kWake ? 1 : 0);
    }
  }

  std::vector<Element> elements;
  auto add_quad = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d, bool flip) {
    // quad a-b-c-d in either orientation; fix each triangle to counterclockwise
    auto push = [&](std::size_t p, std::size_t q, std::size_t r) {
      const Point2 &P = nodes[p], &Q = nodes[q], &R = nodes[r];
      const double area = (Q.x - P.x) * (R.y - P.y) - (R.x - P.x) * (Q.y - P.y);
      elements.push_back(area > 0 ? Element{p, q, r} : Element{p, r, q});
    };
    if (flip) {
      push(a, b, c);
      push(a, c, d);
    } else {
      push(a, b, d);
      push(b, c, d);
    }
  };
  for (std::size_t m = 0; m < kRings; ++m) {
    for (std::size_t k = 0; k < kPerim; ++k) {
      add_quad(ring_index(m, k), ring_index(m, k + 1), ring_index(m + 1, k + 1), ring_index(m + 1, k),
               (m + k) % 2 == 0);
    }
  }
  for (std::size_t c = 0; c < kWake; ++c) {
    for (std::size_t r = 0; r < kSide; ++r) {
      add_quad(wake_index(c, r), wake_index(c + 1, r), wake_index(c + 1, r + 1), wake_index(c, r + 1),
               (c + r) % 2 == 0);
    }
  }

  std::vector<Point2> vel(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes[i].x, y = nodes[i].y;
    const double r2 = x * x + y * y, r4 = r2 * r2;
    vel[i] = {u_inf * (1.0 - kR * kR * (x * x - y * y) / r4), -u_inf * 2.0 * kR * kR * x * y / r4};
  }
  return {Mesh(std::move(nodes), std::move(elements), std::move(boundary)), std::move(vel)};
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.results) {
    rows.push_back({{"benchmark", report.benchmark},
                    {"case", report.case_label},
                    {"n", report.n},
                    {"pe_max", report.peclet.pe_max},
                    {"pe1_range", {report.peclet.pe1_min, report.peclet.pe1_max}},
                    {"pe2_range", {report.peclet.pe2_min, report.peclet.pe2_max}},
                    {"l2", r.l2},
                    {"linf", r.linf},
                    {"overshoot", r.overshoot},
                    {"residual", r.residual},
                    {"tau_kind", r.tau_kind},
                    {"runtime_s", r.runtime_s},
                    {"reference_nodes", report.reference_nodes}});
  }
  return rows;
}

nlohmann::json to_json(const std::vector<BenchReport>& reports) {
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : reports) {
    for (auto& row : to_json(r)) all.push_back(std::move(row));
  }
  return all;
}

void print_table(const std::vector<BenchReport>& reports, std::ostream& out) {
  std::ostringstream os;
  os << std::left << std::setw(11) << "benchmark" << std::setw(10) << "case" << std::setw(17) << "tau"
     << std::right << std::setw(8) << "Pe-max" << std::setw(20) << "Pe1-range" << std::setw(20) << "Pe2-range"
     << std::setw(12) << "L2" << std::setw(12) << "Linf" << std::setw(11) << "overshoot" << '\n';
  for (const auto& rep : reports) {
    for (const auto& r : rep.results) {
      std::ostringstream pe1, pe2;
      pe1 << std::setprecision(3) << '(' << rep.peclet.pe1_min << ", " << rep.peclet.pe1_max << ')';
      pe2 << std::setprecision(3) << '(' << rep.peclet.pe2_min << ", " << rep.peclet.pe2_max << ')';
      os << std::left << std::setw(11) << rep.benchmark << std::setw(10) << rep.case_label << std::setw(17)
         << r.tau_kind << std::right << std::fixed << std::setprecision(2) << std::setw(8) << rep.peclet.pe_max
         << std::setw(20) << pe1.str() << std::setw(20) << pe2.str() << std::scientific << std::setprecision(3)
         << std::setw(12) << r.l2 << std::setw(12) << r.linf << std::setw(11) << r.overshoot
         << std::defaultfloat << '\n';
    }
  }
  out << os.str();
}

}  // namespace vms
