#pragma once

#include "vesflow/grid.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace vesflow {

namespace detail {
inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (a.get() != b.get()) throw std::invalid_argument("fields live on different grids");
}
}  // namespace detail

/// Cell-centered samples over a Grid. Index (i, j) -> j * nx + i.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid, double value = 0.0)
      : grid_(std::move(grid)), v_(grid_->size(), value) {}
  ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->size()) throw std::invalid_argument("ScalarField: size mismatch");
  }

  template <class Fn>
  static ScalarField from_function(GridPtr grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t j = 0; j < grid->ny(); ++j)
      for (std::size_t i = 0; i < grid->nx(); ++i) f(i, j) = fn(grid->x(i), grid->y(j));
    return f;
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t nx() const noexcept { return grid_->nx(); }
  std::size_t ny() const noexcept { return grid_->ny(); }
  std::size_t size() const noexcept { return v_.size(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return v_[j * grid_->nx() + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return v_[j * grid_->nx() + i]; }
  double& operator[](std::size_t k) noexcept { return v_[k]; }
  double operator[](std::size_t k) const noexcept { return v_[k]; }

  std::span<double> values() noexcept { return v_; }
  std::span<const double> values() const noexcept { return v_; }

  bool all_finite() const noexcept {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
  }

  ScalarField& operator+=(const ScalarField& o) {
    detail::require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    detail::require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  ScalarField& operator*=(double s) noexcept {
    for (double& x : v_) x *= s;
    return *this;
  }
  ScalarField& operator+=(double s) noexcept {
    for (double& x : v_) x += s;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator+(ScalarField a, double s) { return a += s; }
  friend ScalarField operator-(ScalarField a, double s) { return a += -s; }

  friend bool operator==(const ScalarField& a, const ScalarField& b) {
    return a.grid_.get() == b.grid_.get() && a.v_ == b.v_;
  }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

/// Staggered (MAC) face samples: x-components on the (nx+1) x ny vertical
/// faces, y-components on the nx x (ny+1) horizontal faces. Face (i, j) of
/// the x-family sits at x = i hx, y = (j + 1/2) hy; face (i, j) of the
/// y-family at x = (i + 1/2) hx, y = j hy. Faces with i = 0, nx (x-family)
/// or j = 0, ny (y-family) lie on the walls.
///
/// Used both for velocities and for face-centered fluxes (gradients, forces).
class FaceField {
 public:
  explicit FaceField(GridPtr grid)
      : grid_(std::move(grid)),
        ux_((grid_->nx() + 1) * grid_->ny(), 0.0),
        uy_(grid_->nx() * (grid_->ny() + 1), 0.0) {}

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t nx() const noexcept { return grid_->nx(); }
  std::size_t ny() const noexcept { return grid_->ny(); }

  double& x(std::size_t i, std::size_t j) noexcept { return ux_[j * (grid_->nx() + 1) + i]; }
  double x(std::size_t i, std::size_t j) const noexcept { return ux_[j * (grid_->nx() + 1) + i]; }
  double& y(std::size_t i, std::size_t j) noexcept { return uy_[j * grid_->nx() + i]; }
  double y(std::size_t i, std::size_t j) const noexcept { return uy_[j * grid_->nx() + i]; }

  std::span<double> x_values() noexcept { return ux_; }
  std::span<const double> x_values() const noexcept { return ux_; }
  std::span<double> y_values() noexcept { return uy_; }
  std::span<const double> y_values() const noexcept { return uy_; }

  bool all_finite() const noexcept {
    auto fin = [](double v) { return std::isfinite(v); };
    return std::all_of(ux_.begin(), ux_.end(), fin) && std::all_of(uy_.begin(), uy_.end(), fin);
  }

  /// Zero every wall face (no-slip / no normal flux).
  void zero_walls() noexcept {
    const std::size_t nx = grid_->nx(), ny = grid_->ny();
    for (std::size_t j = 0; j < ny; ++j) x(0, j) = x(nx, j) = 0.0;
    for (std::size_t i = 0; i < nx; ++i) y(i, 0) = y(i, ny) = 0.0;
  }
  bool walls_are_zero() const noexcept {
    const std::size_t nx = grid_->nx(), ny = grid_->ny();
    for (std::size_t j = 0; j < ny; ++j)
      if (x(0, j) != 0.0 || x(nx, j) != 0.0) return false;
    for (std::size_t i = 0; i < nx; ++i)
      if (y(i, 0) != 0.0 || y(i, ny) != 0.0) return false;
    return true;
  }

  FaceField& operator+=(const FaceField& o) {
    detail::require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < ux_.size(); ++k) ux_[k] += o.ux_[k];
    for (std::size_t k = 0; k < uy_.size(); ++k) uy_[k] += o.uy_[k];
    return *this;
  }
  FaceField& operator-=(const FaceField& o) {
    detail::require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < ux_.size(); ++k) ux_[k] -= o.ux_[k];
    for (std::size_t k = 0; k < uy_.size(); ++k) uy_[k] -= o.uy_[k];
    return *this;
  }
  FaceField& operator*=(double s) noexcept {
    for (double& v : ux_) v *= s;
    for (double& v : uy_) v *= s;
    return *this;
  }
  friend FaceField operator+(FaceField a, const FaceField& b) { return a += b; }
  friend FaceField operator-(FaceField a, const FaceField& b) { return a -= b; }
  friend FaceField operator*(double s, FaceField a) { return a *= s; }

  friend bool operator==(const FaceField& a, const FaceField& b) {
    return a.grid_.get() == b.grid_.get() && a.ux_ == b.ux_ && a.uy_ == b.uy_;
  }

 private:
  GridPtr grid_;
  std::vector<double> ux_;
  std::vector<double> uy_;
};

/// A velocity is a FaceField that keeps its wall faces at zero.
using FaceVelocity = FaceField;

/// Coefficients in the cell-centered cosine basis. Mode (j, k) -> k * nx + j;
/// the field is recovered as sum_{j,k} a_{jk} c_j c_k cos(j pi x/lx) cos(k pi y/ly)
/// with c_0 = 1 and c_m = 2 otherwise, so a_{00} is the field mean.
class Spectrum {
 public:
  explicit Spectrum(GridPtr grid) : grid_(std::move(grid)), a_(grid_->size(), 0.0) {}

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  double& operator()(std::size_t j, std::size_t k) noexcept { return a_[k * grid_->nx() + j]; }
  double operator()(std::size_t j, std::size_t k) const noexcept { return a_[k * grid_->nx() + j]; }
  double& operator[](std::size_t m) noexcept { return a_[m]; }
  double operator[](std::size_t m) const noexcept { return a_[m]; }
  std::size_t size() const noexcept { return a_.size(); }
  std::span<double> values() noexcept { return a_; }
  std::span<const double> values() const noexcept { return a_; }

 private:
  GridPtr grid_;
  std::vector<double> a_;
};

}  // namespace vesflow
