#pragma once

// Bending energy of the phase field and its variational derivatives.
//
// All functions take the mean-zero phase psi and work with phi = psi + m0
// internally. Integrals are the midpoint sums of operators.hpp, so the
// discrete z returned by z_of is the exact gradient of the discrete energy
// on the zero-mean subspace.

#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/operators.hpp"

#include <cmath>
#include <string>

namespace vesflow {

enum class AreaForm {
  full,          ///< A = int eps/2 |grad phi|^2 + F(phi)/eps
  gradient_only  ///< A = int eps/2 |grad phi|^2
};

struct PhysParams {
  double eps = 0.08;     ///< interface width
  double lambda = 1.0;   ///< elastic coupling
  double nu = 1.0;       ///< viscosity
  double gamma = 1.0;    ///< mobility
  double m_pen = 1.0;    ///< area penalty constant M
  double alpha = 0.0;    ///< target surface area
  double m0 = 0.0;       ///< conserved mean of phi
  AreaForm area_form = AreaForm::full;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(name) + " > 0", "got " + std::to_string(v));
    };
    positive(eps, "eps");
    positive(lambda, "lambda");
    positive(nu, "nu");
    positive(gamma, "gamma");
    if (!(m_pen >= 0.0) || !std::isfinite(m_pen)) throw ValidationError("m_pen >= 0", "got " + std::to_string(m_pen));
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha >= 0", "got " + std::to_string(alpha));
    if (!std::isfinite(m0)) throw ValidationError("m0 finite", "got " + std::to_string(m0));
  }
};

/// Energy components. `willmore` and `penalty` are the two parts of the
/// bending energy; total = kinetic + lambda * (willmore + penalty).
struct EnergyBreakdown {
  double kinetic = 0.0;
  double willmore = 0.0;
  double penalty = 0.0;
  double area = 0.0;
  double total = 0.0;

  double bending() const noexcept { return willmore + penalty; }
};

// Ginzburg-Landau double well F(c) = (c^2 - 1)^2 / 4 and its derivatives.
constexpr double potential(double c) noexcept {
  const double s = c * c - 1.0;
  return 0.25 * s * s;
}
constexpr double potential_d1(double c) noexcept { return (c * c - 1.0) * c; }
constexpr double potential_d2(double c) noexcept { return 3.0 * c * c - 1.0; }
constexpr double potential_d3(double c) noexcept { return 6.0 * c; }

namespace detail {
template <class Fn>
ScalarField map_phase(const ScalarField& psi, double m0, Fn&& fn) {
  ScalarField out(psi.grid_ptr());
  for (std::size_t k = 0; k < psi.size(); ++k) out[k] = fn(psi[k] + m0);
  return out;
}
}  // namespace detail

inline ScalarField phase_of(const ScalarField& psi, const PhysParams& p) { return psi + p.m0; }

inline double surface_area(const ScalarField& psi, const PhysParams& p) {
  const FaceField d = gradient(psi);
  double a = 0.5 * p.eps * inner(d, d);
  if (p.area_form == AreaForm::full) {
    double s = 0.0;
    for (double v : psi.values()) s += potential(v + p.m0);
    a += psi.grid().cell_area() * s / p.eps;
  }
  return a;
}

/// mu = -eps lap(phi) + F'(phi) / eps.
inline ScalarField chemical_potential(const ScalarField& psi, const PhysParams& p) {
  ScalarField mu = laplacian(psi);
  mu *= -p.eps;
  for (std::size_t k = 0; k < mu.size(); ++k) mu[k] += potential_d1(psi[k] + p.m0) / p.eps;
  return mu;
}

/// Variational derivative of A: mu for the full form, -eps lap(phi) otherwise.
inline ScalarField area_derivative(const ScalarField& psi, const PhysParams& p) {
  if (p.area_form == AreaForm::full) return chemical_potential(psi, p);
  ScalarField d = laplacian(psi);
  d *= -p.eps;
  return d;
}

/// Breakdown with zero kinetic part. The bending energy itself is
/// `.bending()`; `.total` carries the lambda weight like every breakdown.
inline EnergyBreakdown bending_energy(const ScalarField& psi, const PhysParams& p) {
  const ScalarField mu = chemical_potential(psi, p);
  EnergyBreakdown e;
  e.area = surface_area(psi, p);
  e.willmore = inner(mu, mu) / (2.0 * p.eps);
  const double gap = e.area - p.alpha;
  e.penalty = 0.5 * p.m_pen * gap * gap;
  e.total = p.lambda * e.bending();
  return e;
}

/// G(phi) = -(1/eps) lap F'(phi) + (1/eps^2) F''(phi) mu + M (A - alpha) dA/dphi.
inline ScalarField g_of(const ScalarField& psi, const PhysParams& p) {
  const ScalarField mu = chemical_potential(psi, p);
  const ScalarField fp = detail::map_phase(psi, p.m0, potential_d1);
  ScalarField g = laplacian(fp);
  g *= -1.0 / p.eps;
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += inv_eps2 * potential_d2(psi[k] + p.m0) * mu[k];

  const double coef = p.m_pen * (surface_area(psi, p) - p.alpha);
  if (coef != 0.0) {
    const ScalarField da = p.area_form == AreaForm::full ? mu : area_derivative(psi, p);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += coef * da[k];
  }
  return g;
}

inline ScalarField g_bar(const ScalarField& psi, const PhysParams& p) { return subtract_mean(g_of(psi, p)); }

/// z = eps bilap(psi) + G_bar(psi), the gradient of the bending energy on
/// zero-mean fields.
inline ScalarField z_of(const ScalarField& psi, const PhysParams& p) {
  ScalarField z = bilaplacian(psi);
  z *= p.eps;
  z += g_bar(psi, p);
  return subtract_mean(std::move(z));
}

inline double kinetic_energy(const FaceVelocity& u) { return 0.5 * inner(u, u); }

inline EnergyBreakdown total_energy(const FaceVelocity& u, const ScalarField& psi, const PhysParams& p) {
  EnergyBreakdown e = bending_energy(psi, p);
  e.kinetic = kinetic_energy(u);
  e.total = e.kinetic + p.lambda * e.bending();
  return e;
}

}  // namespace vesflow
