#pragma once

// Persistent outputs: ledger CSV, legacy-VTK snapshots and raw binary
// checkpoints.
//
// Checkpoint layout (all little-endian):
//   8 bytes   magic "VESFLOW1"
//   int64     nx, ny
//   f64[nx*ny]        psi, row-major (index j*nx + i)
//   f64[(nx+1)*ny]    ux
//   f64[nx*(ny+1)]    uy
//   int64     step
//   f64       t
// The trailing (step, t) pair lets a restart continue the step count.

#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/simulation.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace vesflow {

inline constexpr std::string_view kLedgerHeader =
    "t,step,E_total,E_kin,E_willmore,E_penalty,area,mass_mean,u_l2,grad_u_l2,z_l2,grad_z_l2,psi_h1,psi_h3,residual";

inline constexpr std::array<char, 8> kCheckpointMagic{'V', 'E', 'S', 'F', 'L', 'O', 'W', '1'};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw IoError("ledger line " + std::to_string(line) + ": not a number '" + s + "'");
  return v;
}

inline std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace detail

inline std::string ledger_csv_row(const LedgerRow& r) {
  using detail::format_double;
  std::string s;
  s += format_double(r.t) + ',' + std::to_string(r.step);
  for (double v : {r.energy.total, r.energy.kinetic, r.energy.willmore, r.energy.penalty, r.energy.area, r.mass_mean,
                   r.u_l2, r.grad_u_l2, r.z_l2, r.grad_z_l2, r.psi_h1, r.psi_h3, r.residual})
    s += ',' + format_double(v);
  return s;
}

/// Appends ledger rows to a CSV file as they are produced.
class LedgerCsvWriter {
 public:
  explicit LedgerCsvWriter(const std::filesystem::path& path) : os_(detail::open_out(path)), path_(path) {
    os_ << kLedgerHeader << '\n';
    check();
  }
  void write(const LedgerRow& r) {
    os_ << ledger_csv_row(r) << '\n';
    check();
  }
  void flush() {
    os_.flush();
    check();
  }

 private:
  void check() const {
    if (!os_) throw IoError("write failed: " + path_.string());
  }
  std::ofstream os_;
  std::filesystem::path path_;
};

inline void write_ledger_csv(const DissipationLedger& ledger, const std::filesystem::path& path) {
  LedgerCsvWriter w(path);
  for (const LedgerRow& r : ledger.rows) w.write(r);
  w.flush();
}

/// Reads a ledger CSV written by write_ledger_csv. Only the columns of the
/// CSV contract are populated.
inline std::vector<LedgerRow> read_ledger_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLedgerHeader) throw IoError(path.string() + ": unexpected header");

  std::vector<LedgerRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 15) throw IoError("ledger line " + std::to_string(lineno) + ": expected 15 columns");
    std::vector<double> v;
    for (const std::string& c : cells) v.push_back(detail::parse_double(c, lineno));
    LedgerRow r;
    r.t = v[0];
    r.step = static_cast<long>(v[1]);
    r.energy.total = v[2];
    r.energy.kinetic = v[3];
    r.energy.willmore = v[4];
    r.energy.penalty = v[5];
    r.energy.area = v[6];
    r.mass_mean = v[7];
    r.u_l2 = v[8];
    r.grad_u_l2 = v[9];
    r.z_l2 = v[10];
    r.grad_z_l2 = v[11];
    r.psi_h1 = v[12];
    r.psi_h3 = v[13];
    r.residual = v[14];
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Legacy VTK

/// Structured-points snapshot: psi and z as cell scalars, u averaged to cell
/// centers as a cell vector field.
inline void write_snapshot(const SimState& s, const std::filesystem::path& path) {
  const Grid& g = s.psi.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  std::ofstream os = detail::open_out(path);
  os << "# vtk DataFile Version 3.0\n";
  os << "vesflow step " << s.step << " t " << detail::format_double(s.t) << '\n';
  os << "ASCII\n";
  os << "DATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << nx + 1 << ' ' << ny + 1 << " 1\n";
  os << "ORIGIN 0 0 0\n";
  os << "SPACING " << detail::format_double(g.hx()) << ' ' << detail::format_double(g.hy()) << " 1\n";
  os << "CELL_DATA " << nx * ny << '\n';
  auto scalars = [&](const char* name, const ScalarField& f) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values()) os << detail::format_double(v) << '\n';
  };
  scalars("psi", s.psi);
  scalars("z", s.z);
  os << "VECTORS u double\n";
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      os << detail::format_double(0.5 * (s.u.x(i, j) + s.u.x(i + 1, j))) << ' '
         << detail::format_double(0.5 * (s.u.y(i, j) + s.u.y(i, j + 1))) << " 0\n";
  if (!os) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Binary checkpoints

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(sizeof(T) == 8);
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get_le(std::istream& is, const std::string& what) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("checkpoint truncated while reading " + what);
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

struct Checkpoint {
  ScalarField psi;
  FaceVelocity u;
  long step = 0;
  double t = 0.0;
};

inline void write_checkpoint(const SimState& s, const std::filesystem::path& path) {
  std::ofstream os = detail::open_out(path, std::ios::out | std::ios::binary);
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::put_le<std::int64_t>(os, static_cast<std::int64_t>(s.psi.nx()));
  detail::put_le<std::int64_t>(os, static_cast<std::int64_t>(s.psi.ny()));
  for (double v : s.psi.values()) detail::put_le(os, v);
  for (double v : s.u.x_values()) detail::put_le(os, v);
  for (double v : s.u.y_values()) detail::put_le(os, v);
  detail::put_le<std::int64_t>(os, s.step);
  detail::put_le(os, s.t);
  if (!os) throw IoError("write failed: " + path.string());
}

/// Reads a checkpoint onto `grid`; the stored dimensions must match.
inline Checkpoint read_checkpoint(const std::filesystem::path& path, const GridPtr& grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kCheckpointMagic)
    throw IoError(path.string() + ": not a VESFLOW1 checkpoint");
  const auto nx = detail::get_le<std::int64_t>(is, "nx");
  const auto ny = detail::get_le<std::int64_t>(is, "ny");
  if (nx != static_cast<std::int64_t>(grid->nx()) || ny != static_cast<std::int64_t>(grid->ny()))
    throw IoError(path.string() + ": grid " + std::to_string(nx) + "x" + std::to_string(ny) + " does not match " +
                  std::to_string(grid->nx()) + "x" + std::to_string(grid->ny()));
  Checkpoint c{ScalarField(grid), FaceVelocity(grid), 0, 0.0};
  for (double& v : c.psi.values()) v = detail::get_le<double>(is, "psi");
  for (double& v : c.u.x_values()) v = detail::get_le<double>(is, "ux");
  for (double& v : c.u.y_values()) v = detail::get_le<double>(is, "uy");
  c.step = static_cast<long>(detail::get_le<std::int64_t>(is, "step"));
  c.t = detail::get_le<double>(is, "t");
  return c;
}

}  // namespace vesflow
