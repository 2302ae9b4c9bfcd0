#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kslab/params.hpp"

namespace kslab {

struct Snapshot {
  int dim = 1;
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> extents{1.0, 1.0, 1.0};
  double t = 0.0;
  std::string field;
  std::vector<double> values;
};

/// Writes `<stem>.f64` (raw little-endian float64, C order) and `<stem>.hdr`
/// (dim, cells, extents, time, field name as key: value lines).
void write_snapshot(const std::string& stem, const std::string& field,
                    std::span<const double> values, const Grid& grid, double t);

/// Reads a snapshot written by write_snapshot; `path` may be the stem or
/// either of the two file names.
Snapshot read_snapshot(const std::string& path);

/// Line-oriented "key: value" file.
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries);

/// %.17g formatting used across reports and summaries.
std::string format_double(double x);

}  // namespace kslab
