#pragma once

// Semi-implicit stepper for the sixth-order phase subsystem
//   d_t psi + u . grad psi = gamma lap z,   z = eps bilap psi + G_bar(psi).
//
// The eps bilap part is implicit (giving an implicit -gamma eps lap^3 per
// step), G_bar is explicit with linear stabilization S (psi^{n+1} - psi^n),
// and advection is explicit. In the cosine basis each mode decouples:
//
//   psi'_m = [psi_m - dt adv_m + dt gamma L_m (G_m - S psi_m)]
//            / [1 + dt gamma (-L_m) (eps L_m^2 + S)]
//
// with L_m <= 0 the Laplacian eigenvalue. Mode (0, 0) is copied, so the
// phase mean is conserved structurally.

#include "vesflow/energetics.hpp"
#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vesflow {

struct ChStepParams {
  double dt = 1e-5;
  double stab = 0.0;  ///< stabilization S >= 0

  /// S = 2 / eps, the scale of max |F''| / eps over the pure phases.
  static double default_stab(const PhysParams& p) noexcept { return 2.0 / p.eps; }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt > 0", "got " + std::to_string(dt));
    if (!(stab >= 0.0) || !std::isfinite(stab)) throw ValidationError("stab >= 0", "got " + std::to_string(stab));
  }
};

struct ChStepResult {
  ScalarField psi;
  ScalarField z;  ///< the scheme's z^{n+1}, zero mean
};

namespace detail {
inline bool all_zero(const FaceVelocity& u) noexcept {
  auto zero = [](double v) { return v == 0.0; };
  return std::all_of(u.x_values().begin(), u.x_values().end(), zero) &&
         std::all_of(u.y_values().begin(), u.y_values().end(), zero);
}
}  // namespace detail

inline ChStepResult ch_step(const ScalarField& psi_n, const FaceVelocity& u_n, const PhysParams& p,
                            const ChStepParams& sp) {
  sp.validate();
  const double m = mean(psi_n);
  if (std::abs(m) > 1e-10)
    throw InvariantViolation("ch_step: input phase must have zero mean, got " + std::to_string(m));

  const Grid& grid = psi_n.grid();
  const double dt = sp.dt, gamma = p.gamma, eps = p.eps, stab = sp.stab;

  ScalarField explicit_part = psi_n;
  if (!detail::all_zero(u_n)) {
    ScalarField adv = advect(u_n, psi_n);
    adv *= dt;
    explicit_part -= adv;
  }

  const Spectrum psi_hat = dct_forward(psi_n);
  const Spectrum rhs_hat = dct_forward(explicit_part);
  const Spectrum g_hat = dct_forward(g_bar(psi_n, p));
  const auto eig = grid.eig_table();

  Spectrum next_hat(psi_n.grid_ptr());
  Spectrum z_hat(psi_n.grid_ptr());
  next_hat[0] = psi_hat[0];
  z_hat[0] = 0.0;
  for (std::size_t k = 1; k < next_hat.size(); ++k) {
    const double lam = eig[k];
    const double num = rhs_hat[k] + dt * gamma * lam * (g_hat[k] - stab * psi_hat[k]);
    const double den = 1.0 + dt * gamma * (-lam) * (eps * lam * lam + stab);
    next_hat[k] = num / den;
    z_hat[k] = eps * lam * lam * next_hat[k] + g_hat[k] + stab * (next_hat[k] - psi_hat[k]);
  }

  ChStepResult out{dct_inverse(next_hat), subtract_mean(dct_inverse(z_hat))};
  if (!out.psi.all_finite() || !out.z.all_finite())
    throw NonFiniteState("ch_step: non-finite phase; dt is too large for the explicit nonlinear part");
  return out;
}

/// Advisory step bound dt* = 0.5 / (gamma * Lip * |L_min|), where Lip is the
/// zeroth-order Lipschitz scale of the linearized G_bar,
///   Lip = (max|F''| / eps)^2 / eps + M |Omega| max|F'|^2 / eps^2,
/// minus the part absorbed by the stabilization S. |F''| <= 2 and
/// |F'| <= 2 / (3 sqrt 3) on [-1, 1]. Logged, not enforced.
inline double stable_dt_hint(const PhysParams& p, const Grid& grid, const ChStepParams& sp) {
  constexpr double fpp_max = 2.0;
  const double fp_max = 2.0 / (3.0 * std::sqrt(3.0));
  const double lip_willmore = fpp_max * fpp_max / (p.eps * p.eps * p.eps);
  const double lip_penalty = p.m_pen * grid.area() * fp_max * fp_max / (p.eps * p.eps);
  const double lip = std::max(lip_willmore + lip_penalty - sp.stab, 0.1 * (lip_willmore + lip_penalty));
  return 0.5 / (p.gamma * lip * std::abs(grid.eig_min()));
}

}  // namespace vesflow
