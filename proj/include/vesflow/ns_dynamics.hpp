#pragma once

// Incompressible Navier-Stokes on the MAC grid: explicit advance
//   u* = u^n + dt (-(u.grad)u + nu lap u + f)
// followed by an exact projection onto discretely solenoidal fields,
//   lap q = div(u*) / dt,   u^{n+1} = u* - dt grad q.

#include "vesflow/energetics.hpp"
#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vesflow {

struct NsStepParams {
  double dt = 1e-5;
  double poisson_tol = 1e-12;  ///< relative tolerance on the projection's compatibility
};

/// Diffusion bound h^2 / (4 nu) of the explicit viscous update, h = min(hx, hy).
inline double diffusion_dt_limit(const Grid& grid, double nu) {
  const double h = std::min(grid.hx(), grid.hy());
  return h * h / (4.0 * nu);
}

/// Vector Laplacian on interior faces. Wall-parallel neighbors outside the box
/// use the ghost value -u (zero velocity on the wall, first order there).
inline FaceField vector_laplacian(const FaceVelocity& u) {
  const Grid& g = u.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  FaceField out(u.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 1; i < nx; ++i) {
      const double c = u.x(i, j);
      const double s = j > 0 ? u.x(i, j - 1) : -c;
      const double n = j + 1 < ny ? u.x(i, j + 1) : -c;
      out.x(i, j) = (u.x(i - 1, j) - 2.0 * c + u.x(i + 1, j)) * ihx2 + (s - 2.0 * c + n) * ihy2;
    }
  }
  for (std::size_t j = 1; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double c = u.y(i, j);
      const double w = i > 0 ? u.y(i - 1, j) : -c;
      const double e = i + 1 < nx ? u.y(i + 1, j) : -c;
      out.y(i, j) = (w - 2.0 * c + e) * ihx2 + (u.y(i, j - 1) - 2.0 * c + u.y(i, j + 1)) * ihy2;
    }
  }
  return out;
}

/// |grad u|_2^2 as the discrete Dirichlet form -(vector_laplacian u, u).
inline double velocity_dirichlet(const FaceVelocity& u) { return -inner(vector_laplacian(u), u); }

/// Skew-symmetric (u.grad)u: on each face control volume,
///   C = 1/2 sum_faces (transport velocity . n) * (neighbor value) / h,
/// the average of the divergence and advective forms. Transport velocities are
/// averages of the two adjacent staggered components. (C(u), u) = 0 holds
/// identically, independent of the divergence.
inline FaceField convective_term(const FaceVelocity& u) {
  const Grid& g = u.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  FaceField out(u.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 1; i < nx; ++i) {
      const double ue = 0.5 * (u.x(i, j) + u.x(i + 1, j));
      const double uw = 0.5 * (u.x(i - 1, j) + u.x(i, j));
      const double vn = 0.5 * (u.y(i - 1, j + 1) + u.y(i, j + 1));
      const double vs = 0.5 * (u.y(i - 1, j) + u.y(i, j));
      const double north = j + 1 < ny ? u.x(i, j + 1) : 0.0;
      const double south = j > 0 ? u.x(i, j - 1) : 0.0;
      out.x(i, j) = 0.5 * ((ue * u.x(i + 1, j) - uw * u.x(i - 1, j)) * ihx + (vn * north - vs * south) * ihy);
    }
  }
  for (std::size_t j = 1; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double vn = 0.5 * (u.y(i, j) + u.y(i, j + 1));
      const double vs = 0.5 * (u.y(i, j - 1) + u.y(i, j));
      const double ue = 0.5 * (u.x(i + 1, j - 1) + u.x(i + 1, j));
      const double uw = 0.5 * (u.x(i, j - 1) + u.x(i, j));
      const double east = i + 1 < nx ? u.y(i + 1, j) : 0.0;
      const double west = i > 0 ? u.y(i - 1, j) : 0.0;
      out.y(i, j) = 0.5 * ((vn * u.y(i, j + 1) - vs * u.y(i, j - 1)) * ihy + (ue * east - uw * west) * ihx);
    }
  }
  return out;
}

/// lambda * (z averaged to faces) * (face gradient of psi); zero on walls.
/// Adjoint partner of `advect`: (elastic_force(z, psi), u) = lambda (advect(u, psi), z).
inline FaceField elastic_force(const ScalarField& z, const ScalarField& psi, const PhysParams& p) {
  detail::require_same_grid(z.grid_ptr(), psi.grid_ptr());
  const Grid& g = psi.grid();
  const std::size_t nx = g.nx(), ny = g.ny();
  const double cx = p.lambda / g.hx(), cy = p.lambda / g.hy();
  FaceField out(psi.grid_ptr());
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i)
      out.x(i, j) = cx * 0.5 * (z(i - 1, j) + z(i, j)) * (psi(i, j) - psi(i - 1, j));
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      out.y(i, j) = cy * 0.5 * (z(i, j - 1) + z(i, j)) * (psi(i, j) - psi(i, j - 1));
  return out;
}

struct Projection {
  FaceVelocity u;
  ScalarField q;  ///< pressure-like potential, zero mean
};

/// Removes the gradient part of `w` (zero wall normal flux required):
/// returns w - dt grad q with lap q = div(w) / dt. `tol` bounds the mean of
/// div(w) relative to max|w| / h, the scale of its round-off.
inline Projection project(const FaceField& w, double dt, double tol = 1e-12) {
  const Grid& g = w.grid();
  ScalarField div = divergence(w);
  const double m = mean(div);
  double wmax = 0.0;
  for (double v : w.x_values()) wmax = std::max(wmax, std::abs(v));
  for (double v : w.y_values()) wmax = std::max(wmax, std::abs(v));
  const double scale = wmax / std::min(g.hx(), g.hy());
  // Round-off of the telescoping flux sum grows like the number of cells.
  if (std::abs(m) > std::max(tol, 1e-15 * static_cast<double>(g.size())) * scale)
    throw IncompatibleRhs("project: net wall flux " + std::to_string(m));
  div += -m;

  Spectrum s = dct_forward(div);
  const auto eig = g.eig_table();
  s[0] = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) s[k] = s[k] / (eig[k] * dt);
  Projection out{w, dct_inverse(s)};
  FaceField dq = gradient(out.q);
  dq *= dt;
  out.u -= dq;
  out.u.zero_walls();
  return out;
}

struct NsStepResult {
  FaceVelocity u;
  ScalarField q_tilde;
};

inline NsStepResult ns_step(const FaceVelocity& u_n, const FaceField& force, const PhysParams& p,
                            const NsStepParams& sp) {
  const double limit = diffusion_dt_limit(u_n.grid(), p.nu);
  if (!(sp.dt > 0.0) || sp.dt > limit * (1.0 + 1e-12))
    throw CflViolation("ns_step: dt = " + std::to_string(sp.dt) + " exceeds h^2/(4 nu) = " + std::to_string(limit));

  FaceField rate = vector_laplacian(u_n);
  rate *= p.nu;
  rate -= convective_term(u_n);
  rate += force;
  rate *= sp.dt;
  FaceField star = u_n + rate;
  star.zero_walls();

  Projection proj = project(star, sp.dt, sp.poisson_tol);
  if (!proj.u.all_finite() || !proj.q.all_finite()) throw NonFiniteState("ns_step: non-finite velocity");
  return {std::move(proj.u), std::move(proj.q)};
}

}  // namespace vesflow
