#include "rotorwkb/snapshot.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace rotorwkb {

namespace {

constexpr std::string_view kMagic = "RSFW1\n";

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw SnapshotFormatError("RSFW1: bad number '" + tok + "' in header");
  return v;
}

int parse_int(const std::string& tok) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw SnapshotFormatError("RSFW1: bad integer '" + tok + "' in header");
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  const auto& g = snap.field.grid;
  std::string header = std::to_string(g.dim);
  for (int a = 0; a < g.dim; ++a) header += " " + std::to_string(g.points[a]);
  for (int a = 0; a < g.dim; ++a) header += " " + format_double(g.half_extent[a]);
  header += " " + format_double(snap.eps) + " " + format_double(snap.t);
  if (!snap.tag.empty()) {
    if (snap.tag.find_first_of(" \n\t") != std::string::npos)
      throw std::invalid_argument("RSFW1 tag must not contain whitespace");
    header += " " + snap.tag;
  }
  out << kMagic << header << '\n';
  std::vector<std::uint64_t> raw(2 * snap.field.size());
  for (std::size_t i = 0; i < snap.field.size(); ++i) {
    raw[2 * i] = to_little(std::bit_cast<std::uint64_t>(snap.field.values[i].real()));
    raw[2 * i + 1] = to_little(std::bit_cast<std::uint64_t>(snap.field.values[i].imag()));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (!out) throw std::runtime_error("RSFW1: write failed");
}

Snapshot read_snapshot(std::istream& in) {
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) throw SnapshotFormatError("RSFW1: bad magic");
  std::string line;
  if (!std::getline(in, line)) throw SnapshotFormatError("RSFW1: missing header line");
  std::istringstream hs(line);
  std::vector<std::string> tok;
  for (std::string t; hs >> t;) tok.push_back(t);
  if (tok.empty()) throw SnapshotFormatError("RSFW1: empty header");

  Snapshot snap;
  GridSpec g;
  g.dim = parse_int(tok[0]);
  if (g.dim != 2 && g.dim != 3) throw SnapshotFormatError("RSFW1: dim must be 2 or 3");
  const std::size_t need = 1 + 2 * g.dim + 2;
  if (tok.size() != need && tok.size() != need + 1)
    throw SnapshotFormatError("RSFW1: header has " + std::to_string(tok.size()) + " fields");
  for (int a = 0; a < g.dim; ++a) {
    g.points[a] = parse_int(tok[1 + a]);
    g.half_extent[a] = parse_double(tok[1 + g.dim + a]);
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw SnapshotFormatError(std::string("RSFW1: ") + e.what());
  }
  snap.eps = parse_double(tok[1 + 2 * g.dim]);
  snap.t = parse_double(tok[2 + 2 * g.dim]);
  if (tok.size() == need + 1) snap.tag = tok.back();

  snap.field = ComplexField(g);
  std::vector<std::uint64_t> raw(2 * g.size());
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)))
    throw SnapshotFormatError("RSFW1: truncated payload");
  for (std::size_t i = 0; i < g.size(); ++i)
    snap.field.values[i] = cplx(std::bit_cast<double>(to_little(raw[2 * i])),
                                std::bit_cast<double>(to_little(raw[2 * i + 1])));
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshot(out, snap);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace rotorwkb
