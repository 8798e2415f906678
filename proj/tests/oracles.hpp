#pragma once

// Independent reference implementations for the unit tests. Nothing here
// calls the library's operators; they are rebuilt from first principles
// (dense matrices, direct sums, quadrature).

#include "vesflow/vesflow.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Dense matrix of the 5-point Laplacian with reflected ghosts, built row by
/// row from the neighbor list of each cell.
inline Matrix dense_laplacian(std::size_t nx, std::size_t ny, double hx, double hy) {
  const std::size_t n = nx * ny;
  Matrix a(n, std::vector<double>(n, 0.0));
  auto id = [&](std::size_t i, std::size_t j) { return j * nx + i; };
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t r = id(i, j);
      if (i > 0) {
        a[r][id(i - 1, j)] += 1.0 / (hx * hx);
        a[r][r] -= 1.0 / (hx * hx);
      }
      if (i + 1 < nx) {
        a[r][id(i + 1, j)] += 1.0 / (hx * hx);
        a[r][r] -= 1.0 / (hx * hx);
      }
      if (j > 0) {
        a[r][id(i, j - 1)] += 1.0 / (hy * hy);
        a[r][r] -= 1.0 / (hy * hy);
      }
      if (j + 1 < ny) {
        a[r][id(i, j + 1)] += 1.0 / (hy * hy);
        a[r][r] -= 1.0 / (hy * hy);
      }
    }
  return a;
}

inline std::vector<double> apply(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) y[r] += a[r][c] * x[c];
  return y;
}

/// Cosine coefficients by direct summation, normalized so a_00 is the mean.
inline std::vector<double> direct_dct(const vesflow::ScalarField& f) {
  const std::size_t nx = f.nx(), ny = f.ny();
  std::vector<double> a(nx * ny, 0.0);
  for (std::size_t k = 0; k < ny; ++k)
    for (std::size_t j = 0; j < nx; ++j) {
      double s = 0.0;
      for (std::size_t jy = 0; jy < ny; ++jy)
        for (std::size_t ix = 0; ix < nx; ++ix)
          s += f(ix, jy) * std::cos(std::numbers::pi * j * (ix + 0.5) / nx) *
               std::cos(std::numbers::pi * k * (jy + 0.5) / ny);
      a[k * nx + j] = s / static_cast<double>(nx * ny);
    }
  return a;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Continuum surface area per unit length of phi = tanh(x / w):
/// int eps/2 phi'^2 + F(phi)/eps dx over the real line.
inline double planar_area_density(double eps, double w, bool with_potential) {
  auto integrand = [&](double x) {
    const double t = std::tanh(x / w);
    const double dphi = (1.0 - t * t) / w;
    double v = 0.5 * eps * dphi * dphi;
    if (with_potential) v += 0.25 * (t * t - 1.0) * (t * t - 1.0) / eps;
    return v;
  };
  return simpson(integrand, -20.0 * w, 20.0 * w, 20000);
}

/// Continuum Willmore energy (1/2eps) int mu^2 of a radial profile
/// phi = tanh((R - r)/w) with w = eps sqrt 2. For this profile
/// -eps phi'' + F'(phi)/eps = 0, so mu = -eps phi'(r) / r.
inline double radial_willmore(double eps, double radius) {
  const double w = eps * std::numbers::sqrt2;
  auto integrand = [&](double r) {
    const double t = std::tanh((radius - r) / w);
    const double dphi = -(1.0 - t * t) / w;
    const double mu = -eps * dphi / r;
    return mu * mu * 2.0 * std::numbers::pi * r;
  };
  const double lo = std::max(1e-6, radius - 20.0 * w);
  return simpson(integrand, lo, radius + 20.0 * w, 40000) / (2.0 * eps);
}

/// Directional derivative of `energy` at psi along xi by centered
/// differences, minimized in error against `exact` over a step sweep.
inline double best_fd_error(const std::function<double(const vesflow::ScalarField&)>& energy,
                            const vesflow::ScalarField& psi, const vesflow::ScalarField& xi, double exact) {
  double best = INFINITY;
  for (int e = 1; e <= 9; ++e) {
    const double h = std::pow(10.0, -e);
    const double fd = (energy(psi + h * xi) - energy(psi - h * xi)) / (2.0 * h);
    best = std::min(best, std::abs(fd - exact) / std::abs(exact));
  }
  return best;
}

/// Skew-symmetric convective term at a single x-face, written out directly
/// from the face-control-volume fluxes.
inline double convective_x(const vesflow::FaceVelocity& u, std::size_t i, std::size_t j) {
  const auto& g = u.grid();
  auto ux = [&](long a, long b) -> double {
    if (b < 0 || b >= static_cast<long>(g.ny())) return 0.0;
    return u.x(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  };
  const long I = static_cast<long>(i), J = static_cast<long>(j);
  const double fe = 0.5 * (ux(I, J) + ux(I + 1, J)) * ux(I + 1, J);
  const double fw = 0.5 * (ux(I - 1, J) + ux(I, J)) * ux(I - 1, J);
  const double vn = 0.5 * (u.y(i - 1, j + 1) + u.y(i, j + 1));
  const double vs = 0.5 * (u.y(i - 1, j) + u.y(i, j));
  const double fn = vn * ux(I, J + 1);
  const double fs = vs * ux(I, J - 1);
  return 0.5 * ((fe - fw) / g.hx() + (fn - fs) / g.hy());
}

inline vesflow::FaceVelocity random_solenoidal(const vesflow::GridPtr& g, std::mt19937_64& rng) {
  return vesflow::random_solenoidal(g, rng);
}

}  // namespace oracle
