#ifndef VMS_COEFF_TABLE_HPP
#define VMS_COEFF_TABLE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vms/stabilization.hpp"

namespace vms {

class TableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, unwritable, truncated, or corrupted table file.
class TableFormatError : public TableError {
 public:
  using TableError::TableError;
};

/// Table build produced values that fail the positivity or symmetry self-check.
class TableBuildError : public TableError {
 public:
  using TableError::TableError;
};

struct TableRange {
  double pe1_min = -8.0;
  double pe1_max = 8.0;
  double pe2_min = -8.0;
  double pe2_max = 8.0;
};

/// Rectangular grid of psi samples over (Pe1, Pe2), row-major with Pe2 fastest.
class StabTable {
 public:
  StabTable() = default;
  StabTable(TableRange range, double step, Truncation tr, std::vector<double> values);

  const TableRange& range() const { return range_; }
  double step() const { return step_; }
  Truncation truncation() const { return truncation_; }
  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  const std::vector<double>& values() const { return values_; }

  double pe1_at(std::size_t i) const { return range_.pe1_min + static_cast<double>(i) * step_; }
  double pe2_at(std::size_t k) const { return range_.pe2_min + static_cast<double>(k) * step_; }
  double at(std::size_t i, std::size_t k) const { return values_[i * n2_ + k]; }

  bool contains(PecletPair pe) const;

  /// Bilinear interpolation inside the grid; direct psi with the table's
  /// truncation outside it.
  double query(PecletPair pe) const;

 private:
  TableRange range_;
  double step_ = 0.0;
  Truncation truncation_;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<double> values_;
};

/// Node count along one axis; throws unless (max - min) / step is integral.
std::size_t grid_count(double lo, double hi, double step);

/// Evaluates psi at every grid node, using up to `threads` workers
/// (0 = hardware concurrency). Contents do not depend on the thread count.
StabTable build_table(const TableRange& range, double step, Truncation tr,
                      unsigned threads = 0);

/// Binary layout (little-endian): "VMST", u32 version = 1, pe1_min, pe1_max,
/// pe2_min, pe2_max, step (f64), m1, m2, n1, n2 (u32), n1*n2 f64 values,
/// CRC32 of all preceding bytes.
void save_table(const StabTable& table, const std::string& path);
StabTable load_table(const std::string& path);
std::vector<std::uint8_t> serialize_table(const StabTable& table);
StabTable deserialize_table(const std::vector<std::uint8_t>& bytes);

/// CSV with header pe1,pe2,psi.
void export_table_csv(const StabTable& table, std::ostream& out);

std::uint32_t table_checksum(const StabTable& table);

}  // namespace vms

#endif  // VMS_COEFF_TABLE_HPP
