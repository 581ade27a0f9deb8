#include "vms/coeff_table.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <thread>

#include <zlib.h>

namespace vms {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr char kMagic[4] = {'V', 'M', 'S', 'T'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 5 * 8 + 4 * 4;
constexpr double kSnap = 1e-12;

void check_range(const TableRange& r) {
  for (double v : {r.pe1_min, r.pe1_max, r.pe2_min, r.pe2_max}) {
    if (!std::isfinite(v) || std::abs(v) > kMaxDirectionalPeclet) {
      throw TableError("table bounds must lie within [-60, 60]");
    }
  }
  if (!(r.pe1_max > r.pe1_min) || !(r.pe2_max > r.pe2_min)) {
    throw TableError("table bounds must satisfy min < max");
  }
}

}  // namespace

std::size_t grid_count(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw TableError("table step must be positive");
  const double cells = (hi - lo) / step;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 || rounded < 1.0) {
    throw TableError("table range is not an integral number of steps");
  }
  return static_cast<std::size_t>(rounded) + 1;
}

StabTable::StabTable(TableRange range, double step, Truncation tr, std::vector<double> values)
    : range_(range), step_(step), truncation_(tr), values_(std::move(values)) {
  check_range(range_);
  if (tr.m1 < 1 || tr.m2 < 1) throw TableError("truncation orders must be >= 1");
  n1_ = grid_count(range_.pe1_min, range_.pe1_max, step_);
  n2_ = grid_count(range_.pe2_min, range_.pe2_max, step_);
  if (values_.size() != n1_ * n2_) throw TableError("value count does not match grid size");
  for (double v : values_) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw TableError("table values must be finite and positive");
    }
  }
}

bool StabTable::contains(PecletPair pe) const {
  return pe.pe1 >= range_.pe1_min && pe.pe1 <= range_.pe1_max && pe.pe2 >= range_.pe2_min &&
         pe.pe2 <= range_.pe2_max;
}

namespace {

// Cell index and local coordinate in [0,1], snapped to exact nodes.
void locate(double value, double lo, double step, std::size_t n, std::size_t& idx, double& t) {
  double f = (value - lo) / step;
  double fl = std::floor(f);
  t = f - fl;
  if (t > 1.0 - kSnap) {
    fl += 1.0;
    t = 0.0;
  } else if (t < kSnap) {
    t = 0.0;
  }
  auto i = static_cast<std::size_t>(std::max(0.0, fl));
  if (i >= n - 1) {
    i = n - 2;
    t = 1.0;
  }
  idx = i;
}

}  // namespace

double StabTable::query(PecletPair pe) const {
  if (!contains(pe)) return psi(pe, truncation_);
  std::size_t i = 0, k = 0;
  double t = 0.0, u = 0.0;
  locate(pe.pe1, range_.pe1_min, step_, n1_, i, t);
  locate(pe.pe2, range_.pe2_min, step_, n2_, k, u);
  const double v00 = at(i, k);
  if (t == 0.0 && u == 0.0) return v00;
  const double v10 = at(i + 1, k);
  const double v01 = at(i, k + 1);
  const double v11 = at(i + 1, k + 1);
  return (1.0 - t) * (1.0 - u) * v00 + t * (1.0 - u) * v10 + (1.0 - t) * u * v01 +
         t * u * v11;
}

StabTable build_table(const TableRange& range, double step, Truncation tr, unsigned threads) {
  check_range(range);
  const std::size_t n1 = grid_count(range.pe1_min, range.pe1_max, step);
  const std::size_t n2 = grid_count(range.pe2_min, range.pe2_max, step);
  std::vector<double> values(n1 * n2);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n1));
  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    for (std::size_t i = next_row++; i < n1; i = next_row++) {
      const double pe1 = range.pe1_min + static_cast<double>(i) * step;
      for (std::size_t k = 0; k < n2; ++k) {
        const double pe2 = range.pe2_min + static_cast<double>(k) * step;
        values[i * n2 + k] = psi({pe1, pe2}, tr);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    if (!std::isfinite(values[idx]) || !(values[idx] > 0.0)) {
      const std::size_t i = idx / n2, k = idx % n2;
      throw TableBuildError("psi is not positive at (" +
                       std::to_string(range.pe1_min + static_cast<double>(i) * step) + ", " +
                       std::to_string(range.pe2_min + static_cast<double>(k) * step) +
                       "); the truncated series has not converged there, narrow the range "
                       "or raise the truncation");
    }
  }

  // value(P) = value(-P) wherever the mirrored node exists
  const bool mirrored = range.pe1_min == -range.pe1_max && range.pe2_min == -range.pe2_max;
  if (mirrored) {
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t k = 0; k < n2; ++k) {
        const double a = values[i * n2 + k];
        const double b = values[(n1 - 1 - i) * n2 + (n2 - 1 - k)];
        if (std::abs(a - b) > 1e-10 * std::max(std::abs(a), std::abs(b))) {
          throw TableBuildError("symmetry self-check failed: psi(P) != psi(-P) at (" +
                                std::to_string(range.pe1_min + static_cast<double>(i) * step) + ", " +
                                std::to_string(range.pe2_min + static_cast<double>(k) * step) +
                                "); the truncated series has not converged there, narrow the range "
                                "or raise the truncation");
        }
      }
    }
  }
  return StabTable(range, step, tr, std::move(values));
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(v);
}

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_table(const StabTable& t) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * t.values().size() + 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kVersion);
  put_f64(out, t.range().pe1_min);
  put_f64(out, t.range().pe1_max);
  put_f64(out, t.range().pe2_min);
  put_f64(out, t.range().pe2_max);
  put_f64(out, t.step());
  put_u32(out, static_cast<std::uint32_t>(t.truncation().m1));
  put_u32(out, static_cast<std::uint32_t>(t.truncation().m2));
  put_u32(out, static_cast<std::uint32_t>(t.n1()));
  put_u32(out, static_cast<std::uint32_t>(t.n2()));
  for (double v : t.values()) put_f64(out, v);
  put_u32(out, crc32_of(out.data(), out.size()));
  return out;
}

StabTable deserialize_table(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes + 4) throw TableFormatError("table file truncated (header)");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw TableFormatError("bad table magic");
  const std::uint8_t* p = bytes.data() + 4;
  const std::uint32_t version = get_u32(p);
  if (version != kVersion) {
    throw TableFormatError("unsupported table version " + std::to_string(version));
  }
  p += 4;
  TableRange r;
  r.pe1_min = get_f64(p);
  r.pe1_max = get_f64(p + 8);
  r.pe2_min = get_f64(p + 16);
  r.pe2_max = get_f64(p + 24);
  const double step = get_f64(p + 32);
  p += 40;
  Truncation tr{static_cast<int>(get_u32(p)), static_cast<int>(get_u32(p + 4))};
  const std::size_t n1 = get_u32(p + 8);
  const std::size_t n2 = get_u32(p + 12);
  p += 16;
  const std::size_t expected = kHeaderBytes + 8 * n1 * n2 + 4;
  if (bytes.size() < expected) throw TableFormatError("table file truncated (values)");
  if (bytes.size() > expected) throw TableFormatError("table file has trailing bytes");
  const std::uint32_t stored = get_u32(bytes.data() + expected - 4);
  if (stored != crc32_of(bytes.data(), expected - 4)) throw TableFormatError("table checksum mismatch");

  std::vector<double> values(n1 * n2);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_f64(p + 8 * i);
  StabTable t(r, step, tr, std::move(values));
  if (t.n1() != n1 || t.n2() != n2) throw TableError("table dimensions inconsistent with range");
  return t;
}

void save_table(const StabTable& table, const std::string& path) {
  const auto bytes = serialize_table(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TableFormatError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw TableFormatError("write to '" + path + "' failed");
}

StabTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableFormatError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_table(bytes);
}

void export_table_csv(const StabTable& t, std::ostream& out) {
  const auto old = out.precision(17);
  out << "pe1,pe2,psi\n";
  for (std::size_t i = 0; i < t.n1(); ++i) {
    for (std::size_t k = 0; k < t.n2(); ++k) {
      out << t.pe1_at(i) << ',' << t.pe2_at(k) << ',' << t.at(i, k) << '\n';
    }
  }
  out.precision(old);
}

std::uint32_t table_checksum(const StabTable& table) {
  const auto bytes = serialize_table(table);
  return get_u32(bytes.data() + bytes.size() - 4);
}

}  // namespace vms
