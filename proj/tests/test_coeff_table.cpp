#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "vms/coeff_table.hpp"

using namespace vms;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("vms_test_" + std::to_string(::getpid()) + "_" + name);
}

double max_relative_error(const StabTable& t, double lo, double hi, int count) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(lo, hi);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const PecletPair pe{u(rng), u(rng)};
    const double exact = psi(pe, t.truncation());
    worst = std::max(worst, std::abs(t.query(pe) - exact) / exact);
  }
  return worst;
}

}  // namespace

TEST_CASE("grid counts") {
  CHECK(grid_count(-1, 1, 1) == 3);
  CHECK(grid_count(-8, 8, 0.125) == 129);
  CHECK_THROWS_AS(grid_count(-1, 1, 0.3), TableError);
  CHECK_THROWS_AS(grid_count(-1, 1, 0.0), TableError);
  CHECK_THROWS_AS(grid_count(-1, 1, -0.5), TableError);
  CHECK_THROWS_AS(build_table({-70, 70, -1, 1}, 1.0, {4, 4}), TableError);
}

TEST_CASE("3x3 table centre equals direct psi") {
  const StabTable t = build_table({-1, 1, -1, 1}, 1.0, {40, 40});
  CHECK(t.n1() == 3);
  CHECK(t.n2() == 3);
  CHECK(t.values().size() == 9);
  CHECK(t.at(1, 1) == psi({0, 0}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(t.at(i, k) > 0.0);
      CHECK(t.at(i, k) == t.at(2 - i, 2 - k));
    }
}

TEST_CASE("queries at nodes return stored values exactly") {
  const StabTable t = build_table({1.5, 3.0, 6.0, 7.5}, 0.125, {40, 40});
  // nearest node to the n = 4 benchmark direction
  CHECK(t.query({2.25, 6.75}) == psi({2.25, 6.75}));
  for (std::size_t i = 0; i < t.n1(); i += 3)
    for (std::size_t k = 0; k < t.n2(); k += 2)
      CHECK(t.query({t.pe1_at(i), t.pe2_at(k)}) == t.at(i, k));
}

TEST_CASE("bilinear interpolation against a hand computation") {
  const StabTable t({0, 1, 0, 1}, 1.0, {4, 4}, {1.0, 2.0, 3.0, 5.0});
  // values: (0,0)=1 (0,1)=2 (1,0)=3 (1,1)=5
  const double x = 0.25, y = 0.5;
  const double expected = (1 - x) * (1 - y) * 1 + (1 - x) * y * 2 + x * (1 - y) * 3 + x * y * 5;
  CHECK(t.query({x, y}) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(t.contains({1.0, 0.0}));
  CHECK_FALSE(t.contains({1.0001, 0.0}));
  CHECK_THROWS_AS(StabTable({0, 1, 0, 1}, 1.0, {4, 4}, {1.0, 2.0, 3.0}), TableError);
}

TEST_CASE("queries outside the grid fall back to direct psi") {
  const StabTable t = build_table({-1, 1, -1, 1}, 0.5, {40, 40});
  for (PecletPair pe : {PecletPair{1.5, 0.2}, PecletPair{-3, -3}, PecletPair{0, 2.25}})
    CHECK(t.query(pe) == psi(pe, t.truncation()));
}

TEST_CASE("bilinear error bound and halving order") {
  const StabTable coarse = build_table({-4, 4, -4, 4}, 0.25, {40, 40});
  const StabTable fine = build_table({-4, 4, -4, 4}, 0.125, {40, 40});
  const double ec = max_relative_error(coarse, -4, 4, 1000);
  const double ef = max_relative_error(fine, -4, 4, 1000);
  MESSAGE("max relative error: step 0.25 " << ec << ", step 0.125 " << ef);
  CHECK(ef < 5e-4);
  CHECK(ec / ef >= 3.0);
  CHECK(ec / ef <= 5.0);
}

TEST_CASE("binary round trip is bit-exact") {
  const StabTable t = build_table({-2, 2, -1, 1}, 0.5, {12, 16});
  const fs::path p = temp_file("rt.vmst");
  save_table(t, p.string());
  const StabTable r = load_table(p.string());
  CHECK(r.n1() == t.n1());
  CHECK(r.n2() == t.n2());
  CHECK(r.step() == t.step());
  CHECK(r.truncation().m1 == 12);
  CHECK(r.truncation().m2 == 16);
  CHECK(r.range().pe2_min == -1.0);
  CHECK(r.values() == t.values());
  CHECK(serialize_table(r) == serialize_table(t));
  CHECK(table_checksum(r) == table_checksum(t));
  fs::remove(p);
}

TEST_CASE("corrupted tables are rejected") {
  const StabTable t = build_table({-1, 1, -1, 1}, 1.0, {6, 6});
  const std::vector<std::uint8_t> good = serialize_table(t);
  SUBCASE("flipped value byte") {
    auto bad = good;
    bad[good.size() - 20] ^= 0x01;
    CHECK_THROWS_WITH_AS(deserialize_table(bad), doctest::Contains("checksum"), TableFormatError);
  }
  SUBCASE("truncated") {
    auto bad = good;
    bad.resize(good.size() - 9);
    CHECK_THROWS_AS(deserialize_table(bad), TableFormatError);
  }
  SUBCASE("bad magic") {
    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_table(bad), TableFormatError);
  }
  SUBCASE("unknown version") {
    auto bad = good;
    bad[4] = 9;
    CHECK_THROWS_AS(deserialize_table(bad), TableFormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_table("/nonexistent/dir/table.vmst"), TableFormatError);
  }
}

TEST_CASE("CSV export") {
  const StabTable t = build_table({-1, 1, -1, 1}, 1.0, {8, 8});
  std::ostringstream out;
  export_table_csv(t, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "pe1,pe2,psi");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 9);
}

TEST_CASE("build is independent of the thread count") {
  const TableRange r{-2, 2, -2, 2};
  const StabTable a = build_table(r, 0.25, {20, 20}, 1);
  const StabTable b = build_table(r, 0.25, {20, 20}, 4);
  CHECK(serialize_table(a) == serialize_table(b));
}

TEST_CASE("build self-check rejects unconverged ranges") {
  CHECK_THROWS_AS(build_table({-32, 32, -32, 32}, 1.0, {40, 40}), TableBuildError);
}

TEST_CASE("concurrent queries match serial queries and are fast") {
  const StabTable t = build_table({-2, 2, -2, 2}, 0.25, {10, 10});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<PecletPair> pts(20000);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::vector<double> serial(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) serial[i] = t.query(pts[i]);

  std::vector<std::vector<double>> out(4, std::vector<double>(pts.size()));
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < 4; ++w)
      workers.emplace_back([&, w] {
        for (std::size_t i = 0; i < pts.size(); ++i) out[w][i] = t.query(pts[i]);
      });
  }
  for (const auto& o : out) CHECK(o == serial);

  const auto start = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (int rep = 0; rep < 50; ++rep)
    for (const auto& p : pts) sink += t.query(p);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(sink > 0.0);
  CHECK(seconds < 1.0);  // one million queries
}
