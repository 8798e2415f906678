#pragma once

#include <fftw3.h>

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace vesflow {

namespace detail {

// The FFTW planner is not thread-safe; execution of an existing plan on new
// arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(p);
    }
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

/// Uniform cell-centered mesh on [0, lx] x [0, ly] with homogeneous Neumann
/// walls. Cell (i, j) has center ((i + 1/2) hx, (j + 1/2) hy) and is stored
/// at linear index j * nx + i (rows run along x).
///
/// The grid owns the eigenvalue table of the mirrored 5-point Laplacian,
///   eig_lap(j, k) = -[(2/hx) sin(j pi / (2 nx))]^2 - [(2/hy) sin(k pi / (2 ny))]^2,
/// whose eigenvectors are the cell-centered cosines cos(j pi x / lx) cos(k pi y / ly),
/// together with the FFTW plans that map between the two bases.
///
/// Grids are shared by every field defined on them; always construct through
/// Grid::make.
class Grid {
  struct Token {};

 public:
  static std::shared_ptr<const Grid> make(std::size_t nx, std::size_t ny, double lx, double ly) {
    return std::make_shared<const Grid>(Token{}, nx, ny, lx, ly);
  }

  Grid(Token, std::size_t nx, std::size_t ny, double lx, double ly)
      : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
    if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx, ny must be >= 4");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
      throw std::invalid_argument("Grid: lx, ly must be positive and finite");
    hx_ = lx / static_cast<double>(nx);
    hy_ = ly / static_cast<double>(ny);

    eig_.resize(nx * ny);
    for (std::size_t k = 0; k < ny; ++k) {
      const double sy = (2.0 / hy_) * std::sin(static_cast<double>(k) * std::numbers::pi / (2.0 * ny));
      for (std::size_t j = 0; j < nx; ++j) {
        const double sx = (2.0 / hx_) * std::sin(static_cast<double>(j) * std::numbers::pi / (2.0 * nx));
        eig_[k * nx + j] = -(sx * sx) - (sy * sy);
      }
    }

    std::vector<double> a(nx * ny), b(nx * ny);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_.reset(fftw_plan_r2r_2d(static_cast<int>(ny), static_cast<int>(nx), a.data(), b.data(),
                                    FFTW_REDFT10, FFTW_REDFT10, flags));
    inverse_.reset(fftw_plan_r2r_2d(static_cast<int>(ny), static_cast<int>(nx), a.data(), b.data(),
                                    FFTW_REDFT01, FFTW_REDFT01, flags));
    if (!forward_ || !inverse_) throw std::runtime_error("Grid: FFTW planning failed");
  }

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  double cell_area() const noexcept { return hx_ * hy_; }
  double area() const noexcept { return lx_ * ly_; }

  double x(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * hx_; }
  double y(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * hy_; }

  /// Laplacian eigenvalue of cosine mode (j along x, k along y).
  double eig_lap(std::size_t j, std::size_t k) const noexcept { return eig_[k * nx_ + j]; }
  std::span<const double> eig_table() const noexcept { return eig_; }
  /// Most negative Laplacian eigenvalue.
  double eig_min() const noexcept { return eig_[size() - 1]; }

  /// Unnormalized FFTW transforms (REDFT10 / REDFT01 in both axes). `in` and
  /// `out` must both hold size() values and must not alias.
  void raw_forward(std::span<const double> in, std::span<double> out) const {
    fftw_execute_r2r(forward_.get(), const_cast<double*>(in.data()), out.data());
  }
  void raw_inverse(std::span<const double> in, std::span<double> out) const {
    fftw_execute_r2r(inverse_.get(), const_cast<double*>(in.data()), out.data());
  }

 private:
  std::size_t nx_, ny_;
  double lx_, ly_, hx_{}, hy_{};
  std::vector<double> eig_;
  detail::PlanHandle forward_;
  detail::PlanHandle inverse_;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace vesflow
