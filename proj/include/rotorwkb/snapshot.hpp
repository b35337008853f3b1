#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rotorwkb/grid.hpp"

namespace rotorwkb {

/// RSFW1 field snapshot:
///
///   RSFW1\n
///   <dim> <N per axis> <L per axis> <eps> <t> [<tag>]\n
///   row-major little-endian float64 pairs (re, im)
///
/// Header numbers use the shortest decimal form that round-trips, so a
/// write/read cycle is bit-exact. Real fields (WKB components) are stored
/// with zero imaginary parts and a component tag such as "alpha" or "v1".
struct Snapshot {
  ComplexField field;
  double eps = 0.0;
  double t = 0.0;
  std::string tag;
};

class SnapshotFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_snapshot(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot(std::istream& in);
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace rotorwkb
