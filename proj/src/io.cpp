#include "kslab/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kslab/error.hpp"

namespace kslab {

namespace {

std::uint64_t to_little_endian(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    return __builtin_bswap64(x);
  }
}

std::string strip_extension(const std::string& path) {
  for (const char* ext : {".f64", ".hdr"}) {
    const std::string e(ext);
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
      return path.substr(0, path.size() - e.size());
  }
  return path;
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_snapshot(const std::string& stem, const std::string& field,
                    std::span<const double> values, const Grid& grid, double t) {
  if (values.size() != grid.size()) throw InputError("snapshot size does not match grid");
  ensure_parent(stem);
  {
    std::ofstream bin(stem + ".f64", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + stem + ".f64");
    for (double v : values) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  std::ofstream hdr(stem + ".hdr");
  if (!hdr) throw std::runtime_error("cannot write " + stem + ".hdr");
  hdr << "dim: " << grid.dim() << "\ncells:";
  for (int i = 0; i < grid.dim(); ++i) hdr << ' ' << grid.cells(i);
  hdr << "\nextents:";
  for (int i = 0; i < grid.dim(); ++i) hdr << ' ' << format_double(grid.extent(i));
  hdr << "\ntime: " << format_double(t) << "\nfield: " << field
      << "\ndtype: float64-le\norder: C\n";
}

Snapshot read_snapshot(const std::string& path) {
  const std::string stem = strip_extension(path);
  Snapshot s;
  std::ifstream hdr(stem + ".hdr");
  if (!hdr) throw InputError("cannot open " + stem + ".hdr");
  std::string line;
  while (std::getline(hdr, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::istringstream rest(line.substr(colon + 1));
    if (key == "dim") {
      rest >> s.dim;
    } else if (key == "cells") {
      for (int i = 0; i < s.dim; ++i) rest >> s.cells[i];
    } else if (key == "extents") {
      for (int i = 0; i < s.dim; ++i) rest >> s.extents[i];
    } else if (key == "time") {
      rest >> s.t;
    } else if (key == "field") {
      rest >> s.field;
    }
  }
  std::size_t count = 1;
  for (int i = 0; i < s.dim; ++i) count *= static_cast<std::size_t>(s.cells[i]);
  std::ifstream bin(stem + ".f64", std::ios::binary);
  if (!bin) throw InputError("cannot open " + stem + ".f64");
  s.values.resize(count);
  for (double& v : s.values) {
    std::uint64_t bits = 0;
    if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits))
      throw InputError(stem + ".f64 is shorter than its header says");
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  return s;
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (const auto& [k, v] : entries) os << k << ": " << v << '\n';
}

}  // namespace kslab
