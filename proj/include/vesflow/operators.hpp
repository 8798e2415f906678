#pragma once

// Neumann-compatible finite-difference calculus on the cell-centered grid.
//
// Conventions:
//  * Scalars are mirrored across walls (ghost = adjacent interior value), so
//    every face gradient on a wall is zero and laplacian = divergence o gradient
//    holds exactly.
//  * Integrals are midpoint sums with weight hx*hy per cell and per face.
//  * Reductions run in a fixed serial order.

#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vesflow {

inline ScalarField laplacian(const ScalarField& f) {
  const Grid& g = f.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  ScalarField out(f.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double c = f(i, j);
      const double w = i > 0 ? f(i - 1, j) : c;
      const double e = i + 1 < nx ? f(i + 1, j) : c;
      const double s = j > 0 ? f(i, j - 1) : c;
      const double n = j + 1 < ny ? f(i, j + 1) : c;
      out(i, j) = (w - 2.0 * c + e) * ihx2 + (s - 2.0 * c + n) * ihy2;
    }
  }
  return out;
}

/// Mirror reflection at each stage realizes both d_n f = 0 and d_n lap f = 0.
inline ScalarField bilaplacian(const ScalarField& f) { return laplacian(laplacian(f)); }

inline Spectrum dct_forward(const ScalarField& f) {
  const Grid& g = f.grid();
  Spectrum s(f.grid_ptr());
  g.raw_forward(f.values(), s.values());
  const double scale = 1.0 / (4.0 * static_cast<double>(g.nx()) * static_cast<double>(g.ny()));
  for (double& a : s.values()) a *= scale;
  return s;
}

inline ScalarField dct_inverse(const Spectrum& s) {
  ScalarField f(s.grid_ptr());
  s.grid().raw_inverse(s.values(), f.values());
  return f;
}

/// Weight c_j c_k of mode (j, k) in the Parseval identity
///   hx hy sum f^2 = |Omega| sum_{jk} c_j c_k a_{jk}^2,  c_0 = 1, c_m = 2.
inline double mode_weight(std::size_t j, std::size_t k) noexcept {
  return (j == 0 ? 1.0 : 2.0) * (k == 0 ? 1.0 : 2.0);
}

/// cos(j pi x / lx) cos(k pi y / ly) sampled at cell centers: an exact
/// eigenvector of `laplacian` with eigenvalue grid.eig_lap(j, k).
inline ScalarField cosine_mode(const GridPtr& grid, std::size_t j, std::size_t k) {
  const double kx = static_cast<double>(j) * std::numbers::pi / grid->lx();
  const double ky = static_cast<double>(k) * std::numbers::pi / grid->ly();
  return ScalarField::from_function(grid, [&](double x, double y) { return std::cos(kx * x) * std::cos(ky * y); });
}

inline double sum(const ScalarField& f) noexcept {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s;
}

inline double mean(const ScalarField& f) noexcept { return sum(f) / static_cast<double>(f.size()); }

inline ScalarField subtract_mean(ScalarField f) {
  const double m = mean(f);
  for (double& v : f.values()) v -= m;
  return f;
}

inline double inner(const ScalarField& f, const ScalarField& g) {
  detail::require_same_grid(f.grid_ptr(), g.grid_ptr());
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
  return f.grid().cell_area() * s;
}

inline double inner(const FaceField& a, const FaceField& b) {
  detail::require_same_grid(a.grid_ptr(), b.grid_ptr());
  double s = 0.0;
  const auto ax = a.x_values(), bx = b.x_values();
  for (std::size_t k = 0; k < ax.size(); ++k) s += ax[k] * bx[k];
  const auto ay = a.y_values(), by = b.y_values();
  for (std::size_t k = 0; k < ay.size(); ++k) s += ay[k] * by[k];
  return a.grid().cell_area() * s;
}

inline double norm_l2(const ScalarField& f) { return std::sqrt(inner(f, f)); }
inline double norm_l2(const FaceField& v) { return std::sqrt(inner(v, v)); }

/// Root mean square of the samples; the scale used by tolerance checks.
inline double rms(const ScalarField& f) noexcept {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s / static_cast<double>(f.size()));
}

/// Face differences; wall faces carry the mirrored (zero) normal derivative.
inline FaceField gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  FaceField out(f.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i) out.x(i, j) = (f(i, j) - f(i - 1, j)) * ihx;
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) out.y(i, j) = (f(i, j) - f(i, j - 1)) * ihy;
  return out;
}

/// MAC divergence. For v with zero wall normal flux it is minus the adjoint
/// of `gradient`: (gradient f, v) = -(f, divergence v).
inline ScalarField divergence(const FaceField& v) {
  const Grid& g = v.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  ScalarField out(v.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      out(i, j) = (v.x(i + 1, j) - v.x(i, j)) * ihx + (v.y(i, j + 1) - v.y(i, j)) * ihy;
  return out;
}

/// u . grad f at cell centers: the average over the cell's two faces in each
/// direction of (face velocity) x (face gradient). Its transpose in f pairs
/// with `elastic_force`, and (advect(u, f), f) = -1/2 (f^2, divergence u),
/// which vanishes for discretely solenoidal u.
inline ScalarField advect(const FaceVelocity& u, const ScalarField& f) {
  detail::require_same_grid(u.grid_ptr(), f.grid_ptr());
  const Grid& g = f.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const FaceField df = gradient(f);
  ScalarField out(f.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      out(i, j) = 0.5 * (u.x(i, j) * df.x(i, j) + u.x(i + 1, j) * df.x(i + 1, j)) +
                  0.5 * (u.y(i, j) * df.y(i, j) + u.y(i, j + 1) * df.y(i, j + 1));
    }
  }
  return out;
}

inline double seminorm_h1(const ScalarField& f) { return norm_l2(gradient(f)); }

/// sqrt(|f|^2 + |grad f|^2 + |lap f|^2 + |grad lap f|^2), truncated after
/// `order` + 1 terms.
inline double norm_hk(const ScalarField& f, int order) {
  if (order < 0 || order > 3) throw UnsupportedOrder("norm_hk: order must be in 0..3, got " + std::to_string(order));
  double s = inner(f, f);
  if (order >= 1) {
    const FaceField df = gradient(f);
    s += inner(df, df);
  }
  if (order >= 2) {
    const ScalarField lf = laplacian(f);
    s += inner(lf, lf);
    if (order >= 3) {
      const FaceField dlf = gradient(lf);
      s += inner(dlf, dlf);
    }
  }
  return std::sqrt(s);
}

/// Unique zero-mean z with laplacian(z) = -rhs. Requires
/// |mean(rhs)| <= tol * rms(rhs).
inline ScalarField poisson_neumann(const ScalarField& rhs, double tol = 1e-10) {
  const double m = mean(rhs);
  const double scale = rms(rhs);
  if (std::abs(m) > tol * scale)
    throw IncompatibleRhs("poisson_neumann: mean(rhs) = " + std::to_string(m) + " exceeds " + std::to_string(tol) +
                          " * rms(rhs) = " + std::to_string(tol * scale));
  Spectrum s = dct_forward(rhs);
  const auto eig = rhs.grid().eig_table();
  s[0] = 0.0;
  for (std::size_t m2 = 1; m2 < s.size(); ++m2) s[m2] = -s[m2] / eig[m2];
  return dct_inverse(s);
}

}  // namespace vesflow
