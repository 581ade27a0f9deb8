#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vms/analysis.hpp"
#include "vms/bench.hpp"
#include "vms/coeff_table.hpp"
#include "vms/fem.hpp"
#include "vms/geometry.hpp"
#include "vms/stabilization.hpp"

#ifndef VMS_DATA_DIR
#define VMS_DATA_DIR "data"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct ExitError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& msg) { throw ExitError{code, msg}; }

struct Common {
  std::string out;
  std::string json;
  std::string config;
  bool quiet = false;
  bool seed_free = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Primary output file");
  app->add_option("--json", c.json, "Write a JSON summary to this file");
  app->add_option("--config", c.config, "Flat key=value file; flags given on the command line take precedence");
  app->add_flag("--quiet", c.quiet, "Suppress the human-readable summary");
  app->add_flag("--seed-free", c.seed_free, "Deterministic output: omit timings");
}

template <class Fn>
auto io_step(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ExitError&) {
    throw;
  } catch (const std::exception& e) {
    fail(kExitIo, e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(kExitIo, "cannot open '" + path + "' for writing");
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) fail(kExitIo, "write to '" + path + "' failed");
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- table
struct TableArgs {
  Common common;
  double pe_max = 8.0;
  std::optional<double> pe1_min, pe1_max, pe2_min, pe2_max;
  double step = 0.125;
  int modes = 40;
  std::optional<int> m1, m2;
  unsigned threads = 0;
  std::string csv;
};

int run_table(const TableArgs& a) {
  vms::TableRange r{-a.pe_max, a.pe_max, -a.pe_max, a.pe_max};
  if (a.pe1_min) r.pe1_min = *a.pe1_min;
  if (a.pe1_max) r.pe1_max = *a.pe1_max;
  if (a.pe2_min) r.pe2_min = *a.pe2_min;
  if (a.pe2_max) r.pe2_max = *a.pe2_max;
  const vms::Truncation tr{a.m1.value_or(a.modes), a.m2.value_or(a.modes)};
  const std::string path = a.common.out.empty() ? "psi.vmst" : a.common.out;
  const auto t0 = std::chrono::steady_clock::now();
  vms::StabTable t;
  try {
    t = vms::build_table(r, a.step, tr, a.threads);
  } catch (const vms::TableBuildError& e) {
    fail(kExitNumeric, e.what());
  } catch (const vms::StabilizationError& e) {
    fail(kExitNumeric, e.what());
  } catch (const vms::TableError& e) {
    fail(kExitUsage, e.what());
  }
  const double secs = a.common.seed_free ? 0.0 : elapsed(t0);
  io_step([&] { vms::save_table(t, path); });
  if (!a.csv.empty()) {
    auto out = open_out(a.csv);
    vms::export_table_csv(t, out);
  }
  std::ostringstream crc;
  crc << "0x" << std::hex << std::setw(8) << std::setfill('0') << vms::table_checksum(t);
  if (!a.common.quiet) {
    std::cout << "table=" << path << "\nnodes=" << t.n1() << "x" << t.n2() << " (" << t.n1() * t.n2()
              << ")\nm1=" << tr.m1 << "\nm2=" << tr.m2 << "\nseconds=" << secs << "\nchecksum=" << crc.str() << '\n';
  }
  write_json(a.common.json, {{"table", path}, {"n1", t.n1()}, {"n2", t.n2()}, {"m1", tr.m1}, {"m2", tr.m2},
                             {"step", a.step}, {"seconds", secs}, {"checksum", crc.str()}});
  return kExitOk;
}

// ---------------------------------------------------------------- shared problem flags
struct ProblemArgs {
  double mu = 1.0;
  std::string tau = "spectral";
  std::string table;
  bool direct_psi = false;
  int modes = 40;
};

void add_tau_flags(CLI::App* app, ProblemArgs& p) {
  app->add_option("--mu", p.mu, "Diffusivity")->check(CLI::PositiveNumber);
  app->add_option("--tau", p.tau, "Stabilization coefficient")
      ->check(CLI::IsMember({"spectral", "gen1d", "codina", "none"}));
  app->add_option("--table", p.table, "psi table file for the spectral coefficient");
  app->add_flag("--direct-psi", p.direct_psi, "Evaluate psi directly instead of from a table");
  app->add_option("--modes", p.modes, "Truncation M1 = M2 for direct psi")->check(CLI::PositiveNumber);
}

vms::TauProvider make_tau(const ProblemArgs& p) {
  if (p.tau == "none") return vms::TauProvider::none();
  if (p.tau == "gen1d") return vms::TauProvider::gen1d();
  if (p.tau == "codina") return vms::TauProvider::codina();
  if (!p.table.empty()) {
    auto t = io_step([&] { return std::make_shared<const vms::StabTable>(vms::load_table(p.table)); });
    return vms::TauProvider::spectral_table(std::move(t));
  }
  if (p.direct_psi) return vms::TauProvider::spectral_direct({p.modes, p.modes});
  fail(kExitUsage, "spectral coefficient needs --table <file> or --direct-psi");
}

std::shared_ptr<const vms::StabTable> bench_table(const ProblemArgs& p) {
  if (p.table.empty()) return nullptr;
  return io_step([&] { return std::make_shared<const vms::StabTable>(vms::load_table(p.table)); });
}

// ---------------------------------------------------------------- solve
struct SolveArgs {
  Common common;
  ProblemArgs problem;
  std::string mesh;
  std::size_t nx = 41;
  std::optional<std::size_t> ny;
  double lx = 1.0;
  std::optional<double> ly;
  std::string velocity = "constant";
  double a1 = 1.0, a2 = 0.0;
  std::string velocity_file;
  std::string source = "one";
  double f_value = 1.0;
  std::string vtk;
};

int run_solve(const SolveArgs& a) {
  vms::Mesh mesh;
  if (!a.mesh.empty()) {
    mesh = io_step([&] { return vms::import_mesh_file(a.mesh); });
  } else {
    const std::size_t ny = a.ny.value_or(a.nx);
    const double ly = a.ly.value_or(a.lx * static_cast<double>(ny - 1) / static_cast<double>(a.nx - 1));
    try {
      mesh = vms::build_structured_mesh(a.lx, ly, a.nx, ny);
    } catch (const vms::MeshError& e) {
      fail(kExitUsage, e.what());
    }
  }
  vms::VelocityField vel;
  if (a.velocity == "constant") {
    vel = vms::VelocityField::constant(a.a1, a.a2);
  } else if (a.velocity == "rotational") {
    vel = vms::VelocityField::rotational();
  } else {
    if (a.velocity_file.empty()) fail(kExitUsage, "--velocity file needs --velocity-file");
    vel = io_step([&] { return vms::read_velocity_file(a.velocity_file); });
    try {
      vel.check_compatible(mesh);
    } catch (const vms::FemError& e) {
      fail(kExitIo, e.what());
    }
  }
  const double fv = a.f_value;
  vms::ScalarField f;
  if (a.source == "one") {
    f = [fv](double, double) { return fv; };
  } else if (a.source == "sincos") {
    f = [fv](double x, double y) { return fv * std::sin(std::numbers::pi * x) * std::cos(std::numbers::pi * y); };
  } else {
    f = [](double, double) { return 0.0; };
  }
  const vms::Problem problem{a.problem.mu, vel, f, nullptr, make_tau(a.problem)};
  const auto t0 = std::chrono::steady_clock::now();
  vms::SolutionField s;
  try {
    s = vms::solve_problem(mesh, problem);
  } catch (const vms::SolverError& e) {
    fail(kExitNumeric, e.what());
  } catch (const vms::StabilizationError& e) {
    fail(kExitNumeric, e.what());
  }
  const double secs = a.common.seed_free ? 0.0 : elapsed(t0);
  if (!a.common.out.empty()) {
    auto out = open_out(a.common.out);
    vms::write_solution_csv(mesh, s.values, out);
  }
  if (!a.vtk.empty()) {
    auto out = open_out(a.vtk);
    vms::write_solution_vtk(mesh, s.values, out);
  }
  const auto st = vms::peclet_statistics(mesh, vel, problem.mu);
  const auto [umin, umax] = std::minmax_element(s.values.begin(), s.values.end());
  if (!a.common.quiet) {
    std::cout << std::setprecision(6) << "nodes=" << mesh.num_nodes() << "\nelements=" << mesh.num_elements()
              << "\ntau=" << problem.tau.name() << "\nsolver=" << s.method << "\niterations=" << s.iterations
              << "\nresidual=" << s.residual << "\npe_max=" << st.pe_max << "\npe1_range=" << st.pe1_min << ","
              << st.pe1_max << "\npe2_range=" << st.pe2_min << "," << st.pe2_max << "\nu_min=" << *umin
              << "\nu_max=" << *umax << "\nseconds=" << secs << '\n';
  }
  write_json(a.common.json, {{"nodes", mesh.num_nodes()},
                             {"tau_kind", problem.tau.name()},
                             {"residual", s.residual},
                             {"pe_max", st.pe_max},
                             {"pe1_range", {st.pe1_min, st.pe1_max}},
                             {"pe2_range", {st.pe2_min, st.pe2_max}},
                             {"u_min", *umin},
                             {"u_max", *umax},
                             {"runtime_s", secs}});
  return kExitOk;
}

// ---------------------------------------------------------------- bench
struct BenchArgs {
  Common common;
  ProblemArgs problem;
  std::vector<int> directions{0, 2, 4, 6, 8, 10, 12, 14, 16, 18};
  std::size_t nodes = 81;
  std::vector<std::size_t> ns{50, 100, 200};
  int ref_factor = 8;
  bool galerkin = false;
  std::string mesh;
  std::string velocity;
  std::string ref_mesh;
  std::string ref_values;
  std::string write_fixture;
};

int emit_reports(const BenchArgs& a, const std::vector<vms::BenchReport>& reports) {
  const auto j = vms::to_json(reports);
  if (!a.common.out.empty()) write_json(a.common.out, j);
  write_json(a.common.json, j);
  if (!a.common.quiet) vms::print_table(reports, std::cout);
  return kExitOk;
}

vms::BenchOptions bench_options(const BenchArgs& a) {
  vms::BenchOptions o;
  o.table = bench_table(a.problem);
  o.reference_factor = a.ref_factor;
  o.include_galerkin = a.galerkin;
  o.seed_free = a.common.seed_free;
  return o;
}

template <class Fn>
auto numeric_step(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ExitError&) {
    throw;
  } catch (const vms::SolverError& e) {
    fail(kExitNumeric, e.what());
  } catch (const vms::TableBuildError& e) {
    fail(kExitNumeric, e.what());
  } catch (const vms::StabilizationError& e) {
    fail(kExitNumeric, e.what());
  } catch (const std::invalid_argument& e) {
    fail(kExitUsage, e.what());
  } catch (const vms::AnalysisError& e) {
    fail(kExitUsage, e.what());
  }
}

int run_bench_constant(const BenchArgs& a) {
  const auto opts = bench_options(a);
  return emit_reports(a, numeric_step([&] { return vms::bench_constant(a.directions, a.nodes, opts); }));
}

int run_bench_rotational(const BenchArgs& a) {
  const auto opts = bench_options(a);
  return emit_reports(a, numeric_step([&] { return vms::bench_rotational(a.ns, opts); }));
}

int run_bench_external(const BenchArgs& a) {
  std::string mesh = a.mesh, vel = a.velocity;
  if (!a.write_fixture.empty()) {
    io_step([&] {
      std::filesystem::create_directories(a.write_fixture);
      const auto fx = vms::make_cylinder_fixture();
      const std::string mp = a.write_fixture + "/cylinder.mesh", vp = a.write_fixture + "/cylinder.vel";
      std::ofstream mo(mp), vo(vp);
      if (!mo || !vo) throw std::runtime_error("cannot write fixture into '" + a.write_fixture + "'");
      vms::export_mesh(fx.mesh, mo);
      vms::write_velocity(fx.velocity, vo);
      if (mesh.empty()) mesh = mp;
      if (vel.empty()) vel = vp;
    });
  }
  if (mesh.empty()) mesh = std::string(VMS_DATA_DIR) + "/cylinder.mesh";
  if (vel.empty()) vel = std::string(VMS_DATA_DIR) + "/cylinder.vel";
  if (a.ref_mesh.empty() != a.ref_values.empty()) fail(kExitUsage, "--ref-mesh and --ref-values go together");
  vms::ExternalInputs in{mesh, vel, a.problem.mu, nullptr, a.ref_mesh, a.ref_values};
  const auto opts = bench_options(a);
  // loading problems surface as I/O failures, the rest as numeric ones
  io_step([&] {
    (void)vms::import_mesh_file(mesh);
    vms::read_velocity_file(vel).check_compatible(vms::import_mesh_file(mesh));
  });
  return emit_reports(a, {numeric_step([&] {
                        try {
                          return vms::bench_external(in, opts);
                        } catch (const vms::MeshError& e) {
                          fail(kExitIo, e.what());
                        } catch (const vms::FemError& e) {
                          fail(kExitIo, e.what());
                        }
                      })});
}

// ---------------------------------------------------------------- fig2
struct Fig2Args {
  Common common;
  double p_max = 30.0;
  std::optional<double> p_min;
  std::size_t steps = 300;
  int modes = 40;
};

int run_fig2(const Fig2Args& a) {
  if (a.steps < 1) fail(kExitUsage, "--steps must be positive");
  const double lo = a.p_min.value_or(a.p_max / static_cast<double>(a.steps));
  if (!(lo > 0.0) || lo > a.p_max || a.p_max > vms::kMaxDirectionalPeclet) {
    fail(kExitUsage, "curve abscissae must satisfy 0 < p-min <= p-max <= 60");
  }
  std::vector<double> grid(a.steps);
  for (std::size_t k = 0; k < a.steps; ++k) {
    grid[k] = a.steps == 1 ? a.p_max
                           : lo + (a.p_max - lo) * static_cast<double>(k) / static_cast<double>(a.steps - 1);
  }
  const auto rows = numeric_step([&] { return vms::fig2_curves(grid, {a.modes, a.modes}); });
  if (a.common.out.empty()) {
    vms::write_fig2_csv(std::cout, rows);
  } else {
    auto out = open_out(a.common.out);
    vms::write_fig2_csv(out, rows);
    if (!a.common.quiet) std::cout << "rows=" << rows.size() << "\nout=" << a.common.out << '\n';
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) j.push_back({{"P", r.p}, {"phi_over_4P", r.phi_over_4p}, {"curve_Pe1", r.curve_pe1}, {"curve_Pe2", r.curve_pe2}});
  write_json(a.common.json, j);
  return kExitOk;
}

// ---------------------------------------------------------------- config merging

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(kExitIo, "cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(kExitUsage, "config line " + std::to_string(n) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Appends config entries for options of the selected leaf command that were
// not given on the command line.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::string config;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") config = args[i + 1];
  }
  for (const auto& a : args) {
    if (a.rfind("--config=", 0) == 0) config = a.substr(9);
  }
  if (config.empty()) return args;
  CLI::App* leaf = &app;
  for (const auto& a : args) {
    for (CLI::App* sub : leaf->get_subcommands({})) {
      if (sub->get_name() == a) {
        leaf = sub;
        break;
      }
    }
  }
  auto given = [&](const std::string& key) {
    for (const auto& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : read_config(config)) {
    if (key == "config" || given(key)) continue;
    const CLI::Option* opt = leaf->get_option_no_throw("--" + key);
    if (!opt) fail(kExitUsage, "config key '" + key + "' is not an option of '" + leaf->get_name() + "'");
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") args.push_back("--" + key);
    } else {
      std::stringstream ss(value);
      std::string item;
      args.push_back("--" + key);
      while (ss >> item) args.push_back(item);
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral VMS stabilized advection-diffusion solver"};
  app.require_subcommand(1);

  TableArgs table;
  auto* t = app.add_subcommand("table", "Tabulate psi(Pe1, Pe2) and write the binary table");
  add_common(t, table.common);
  t->add_option("--pe-max", table.pe_max, "Symmetric range bound for both axes")->check(CLI::PositiveNumber);
  t->add_option("--pe1-min", table.pe1_min, "Lower Pe1 bound (overrides --pe-max)");
  t->add_option("--pe1-max", table.pe1_max, "Upper Pe1 bound (overrides --pe-max)");
  t->add_option("--pe2-min", table.pe2_min, "Lower Pe2 bound (overrides --pe-max)");
  t->add_option("--pe2-max", table.pe2_max, "Upper Pe2 bound (overrides --pe-max)");
  t->add_option("--step", table.step, "Grid spacing")->check(CLI::PositiveNumber);
  t->add_option("--modes", table.modes, "Truncation M1 = M2")->check(CLI::PositiveNumber);
  t->add_option("--m1", table.m1, "Truncation M1 (overrides --modes)")->check(CLI::PositiveNumber);
  t->add_option("--m2", table.m2, "Truncation M2 (overrides --modes)")->check(CLI::PositiveNumber);
  t->add_option("--threads", table.threads, "Worker threads (0 = all cores)");
  t->add_option("--csv", table.csv, "Also export the table as CSV");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve one stabilized advection-diffusion problem");
  add_common(s, solve.common);
  add_tau_flags(s, solve.problem);
  auto* mesh_opt = s->add_option("--mesh", solve.mesh, "Mesh file (otherwise a structured grid)");
  auto* nx_opt = s->add_option("--nx", solve.nx, "Structured grid nodes along x")->check(CLI::Range(2ul, 1ul << 20));
  auto* ny_opt = s->add_option("--ny", solve.ny, "Structured grid nodes along y")->check(CLI::Range(2ul, 1ul << 20));
  auto* lx_opt = s->add_option("--lx", solve.lx, "Structured domain width")->check(CLI::PositiveNumber);
  auto* ly_opt = s->add_option("--ly", solve.ly, "Structured domain height")->check(CLI::PositiveNumber);
  for (auto* o : {nx_opt, ny_opt, lx_opt, ly_opt}) mesh_opt->excludes(o);
  s->add_option("--velocity", solve.velocity, "Velocity kind")->check(CLI::IsMember({"constant", "rotational", "file"}));
  s->add_option("--a1", solve.a1, "Constant velocity, x component");
  s->add_option("--a2", solve.a2, "Constant velocity, y component");
  s->add_option("--velocity-file", solve.velocity_file, "Nodal velocity file");
  s->add_option("--source", solve.source, "Source term")->check(CLI::IsMember({"one", "sincos", "zero"}));
  s->add_option("--f-value", solve.f_value, "Source amplitude");
  s->add_option("--vtk", solve.vtk, "Also write a legacy VTK file");

  auto* b = app.add_subcommand("bench", "Run a benchmark");
  b->require_subcommand(1);
  BenchArgs bc, br, be;
  auto* bcs = b->add_subcommand("constant", "Constant-velocity direction sweep");
  add_common(bcs, bc.common);
  bcs->add_option("--table", bc.problem.table, "psi table file (default: built in memory)");
  bcs->add_option("--n", bc.directions, "Direction indices n (alpha = n pi / 10)");
  bcs->add_option("--nodes", bc.nodes, "Nodes per side")->check(CLI::Range(3ul, 100000ul));
  bcs->add_option("--ref-factor", bc.ref_factor, "Reference refinement factor")->check(CLI::Range(1, 64));
  bcs->add_flag("--galerkin", bc.galerkin, "Also run unstabilized Galerkin");
  auto* brs = b->add_subcommand("rotational", "Rotational-velocity benchmark");
  add_common(brs, br.common);
  brs->add_option("--table", br.problem.table, "psi table file (default: built in memory)");
  brs->add_option("--N", br.ns, "Grid sizes (cell side 1/(2N))")->check(CLI::Range(1ul, 100000ul));
  brs->add_option("--ref-factor", br.ref_factor, "Reference refinement factor")->check(CLI::Range(1, 64));
  brs->add_flag("--galerkin", br.galerkin, "Also run unstabilized Galerkin");
  auto* bes = b->add_subcommand("external", "Imported mesh and velocity benchmark");
  add_common(bes, be.common);
  be.problem.mu = 1e-3;
  bes->add_option("--mu", be.problem.mu, "Diffusivity")->check(CLI::PositiveNumber);
  bes->add_option("--table", be.problem.table, "psi table file (default: built in memory)");
  bes->add_option("--mesh", be.mesh, "Mesh file (default: bundled cylinder fixture)");
  bes->add_option("--velocity", be.velocity, "Nodal velocity file (default: bundled fixture)");
  bes->add_option("--ref-factor", be.ref_factor, "Reference refinement factor (power of two)")->check(CLI::Range(1, 64));
  bes->add_option("--ref-mesh", be.ref_mesh, "Reference mesh file");
  bes->add_option("--ref-values", be.ref_values, "Reference nodal values (x,y,u CSV)");
  bes->add_option("--write-fixture", be.write_fixture, "Write the cylinder fixture into this directory first");
  bes->add_flag("--galerkin", be.galerkin, "Also run unstabilized Galerkin");

  Fig2Args fig2;
  auto* f = app.add_subcommand("fig2", "Emit the 1D versus 2D coefficient comparison curves");
  add_common(f, fig2.common);
  f->add_option("--p-max", fig2.p_max, "Largest P")->check(CLI::PositiveNumber);
  f->add_option("--p-min", fig2.p_min, "Smallest P (default p-max / steps)")->check(CLI::PositiveNumber);
  f->add_option("--steps", fig2.steps, "Number of rows")->check(CLI::PositiveNumber);
  f->add_option("--modes", fig2.modes, "Truncation M1 = M2")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (t->parsed()) return run_table(table);
    if (s->parsed()) return run_solve(solve);
    if (bcs->parsed()) return run_bench_constant(bc);
    if (brs->parsed()) return run_bench_rotational(br);
    if (bes->parsed()) return run_bench_external(be);
    if (f->parsed()) return run_fig2(fig2);
    return kExitUsage;
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
