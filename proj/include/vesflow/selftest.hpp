#pragma once

// Operator and energetics identity battery behind `vesflow verify`.

#include "vesflow/energetics.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/ns_dynamics.hpp"
#include "vesflow/operators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace vesflow {

/// Uniform random samples in [-1, 1].
inline ScalarField random_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField f(grid);
  for (double& v : f.values()) v = d(rng);
  return f;
}

/// Random combination of low cosine modes (j, k < modes), amplitudes decaying
/// like 1 / (1 + j^2 + k^2). Smooth and Neumann-compatible.
inline ScalarField random_smooth_field(const GridPtr& grid, std::mt19937_64& rng, std::size_t modes = 6) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Spectrum s(grid);
  for (std::size_t k = 0; k < std::min(modes, grid->ny()); ++k)
    for (std::size_t j = 0; j < std::min(modes, grid->nx()); ++j)
      s(j, k) = d(rng) / static_cast<double>(1 + j * j + k * k);
  return dct_inverse(s);
}

/// Random face field with zero wall faces.
inline FaceField random_faces(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  FaceField v(grid);
  for (double& x : v.x_values()) x = d(rng);
  for (double& y : v.y_values()) y = d(rng);
  v.zero_walls();
  return v;
}

/// Discretely divergence-free velocity from a random streamfunction on cell
/// corners that vanishes on the boundary.
inline FaceVelocity random_solenoidal(const GridPtr& grid, std::mt19937_64& rng) {
  const std::size_t nx = grid->nx(), ny = grid->ny();
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> s((nx + 1) * (ny + 1), 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return s[j * (nx + 1) + i]; };
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i) at(i, j) = d(rng);
  FaceVelocity u(grid);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) u.x(i, j) = (at(i, j + 1) - at(i, j)) / grid->hy();
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) u.y(i, j) = -(at(i + 1, j) - at(i, j)) / grid->hx();
  return u;
}

struct CheckResult {
  std::string name;
  std::string grid;  ///< "64x64" etc.
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct BatteryReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
};

namespace detail {

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline std::string grid_label(const Grid& g) { return std::to_string(g.nx()) + "x" + std::to_string(g.ny()); }

/// Worst case of each identity over `trials` random inputs on one grid.
inline void operator_checks(const GridPtr& grid, std::mt19937_64& rng, int trials, std::vector<CheckResult>& out) {
  const std::string label = grid_label(*grid);
  auto add = [&](std::string name, double value, double tol) {
    out.push_back({std::move(name), label, value, tol, value <= tol});
  };

  // Eigenfunctions of the mirrored Laplacian and its square. Errors are
  // measured against the operator norm, the scale of their round-off.
  const double rho = std::abs(grid->eig_min());
  double eig_err = 0.0, bilap_err = 0.0;
  const std::size_t picks[][2] = {{1, 0}, {0, 1}, {3, 5}, {grid->nx() / 2, 2}, {grid->nx() - 1, grid->ny() - 1}};
  for (const auto& jk : picks) {
    const ScalarField m = cosine_mode(grid, jk[0], jk[1]);
    const double e = grid->eig_lap(jk[0], jk[1]);
    eig_err = std::max(eig_err, max_abs_diff(laplacian(m), e * m) / rho);
    bilap_err = std::max(bilap_err, max_abs_diff(bilaplacian(m), (e * e) * m) / (rho * rho));
  }
  add("laplacian eigenfunction", eig_err, 1e-13);
  add("bilaplacian eigenfunction", bilap_err, 1e-13);

  double sym = 0.0, adj = 0.0, skew = 0.0, conv = 0.0, transfer = 0.0, roundtrip = 0.0, parseval = 0.0;
  double pois_fwd = 0.0, pois_inv = 0.0, lap_mean = 0.0, proj_div = 0.0;
  PhysParams p;
  p.lambda = 0.7;
  for (int t = 0; t < trials; ++t) {
    const ScalarField f = random_field(grid, rng), g = random_field(grid, rng);
    const ScalarField lf = laplacian(f);
    sym = std::max(sym, std::abs(inner(lf, g) - inner(f, laplacian(g))) / (norm_l2(lf) * norm_l2(g)));
    lap_mean = std::max(lap_mean, std::abs(mean(lf)) / norm_l2(lf));

    const FaceField v = random_faces(grid, rng);
    const FaceField df = gradient(f);
    adj = std::max(adj, std::abs(inner(df, v) + inner(f, divergence(v))) / (norm_l2(df) * norm_l2(v)));

    const FaceVelocity u = random_solenoidal(grid, rng);
    const ScalarField a = advect(u, f);
    skew = std::max(skew, std::abs(inner(a, f)) / (norm_l2(a) * norm_l2(f)));
    const FaceField c = convective_term(u);
    conv = std::max(conv, std::abs(inner(c, u)) / (norm_l2(c) * norm_l2(u)));
    const FaceField force = elastic_force(g, f, p);
    transfer = std::max(transfer, std::abs(inner(force, u) - p.lambda * inner(a, g)) / (norm_l2(force) * norm_l2(u)));

    const Spectrum s = dct_forward(f);
    roundtrip = std::max(roundtrip, max_abs_diff(dct_inverse(s), f) / max_abs(f.values()));
    double modal = 0.0;
    for (std::size_t k = 0; k < grid->ny(); ++k)
      for (std::size_t j = 0; j < grid->nx(); ++j) modal += mode_weight(j, k) * s(j, k) * s(j, k);
    modal *= grid->area();
    parseval = std::max(parseval, std::abs(modal - inner(f, f)) / inner(f, f));

    const ScalarField rhs = subtract_mean(g);
    const ScalarField q = poisson_neumann(rhs);
    pois_fwd = std::max(pois_fwd, max_abs_diff(laplacian(q), -1.0 * rhs) / max_abs(rhs.values()));
    const ScalarField f0 = subtract_mean(f);
    pois_inv = std::max(pois_inv, max_abs_diff(poisson_neumann(-1.0 * lf), f0) / max_abs(f0.values()));

    const Projection pr = project(v, 1.0);
    const double hmin = std::min(grid->hx(), grid->hy());
    proj_div = std::max(proj_div, max_abs(divergence(pr.u).values()) * hmin / max_abs(pr.u.x_values()));
  }
  add("laplacian symmetry", sym, 1e-12);
  add("laplacian zero mean", lap_mean, 1e-12);
  add("gradient/divergence adjointness", adj, 1e-12);
  add("advection skew-symmetry", skew, 1e-12);
  add("convective energy neutrality", conv, 1e-12);
  add("elastic force / advection transfer", transfer, 1e-11);
  add("dct round trip", roundtrip, 1e-12);
  add("dct parseval", parseval, 1e-10);
  add("poisson forward", pois_fwd, 1e-10);
  add("poisson inverse of -laplacian", pois_inv, 1e-10);
  add("projection divergence", proj_div, 1e-11);
}

}  // namespace detail

struct GradientCheck {
  double worst_relative_error = 0.0;  ///< over all pairs, each at its best step
  std::vector<double> per_pair;
};

/// Centered-difference directional derivative of the bending energy against
/// inner(z_of(psi), xi), minimized over a step sweep h = 10^-1 .. 10^-8.
inline GradientCheck gradient_consistency(const GridPtr& grid, const PhysParams& p, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradientCheck out;
  for (int k = 0; k < pairs; ++k) {
    ScalarField psi = random_smooth_field(grid, rng);
    psi = subtract_mean(std::move(psi));
    ScalarField xi = subtract_mean(random_smooth_field(grid, rng));
    const double exact = inner(z_of(psi, p), xi);
    double best = std::numeric_limits<double>::infinity();
    for (int e = 1; e <= 8; ++e) {
      const double h = std::pow(10.0, -e);
      const double ep = bending_energy(psi + h * xi, p).bending();
      const double em = bending_energy(psi - h * xi, p).bending();
      const double fd = (ep - em) / (2.0 * h);
      best = std::min(best, std::abs(fd - exact) / std::abs(exact));
    }
    out.per_pair.push_back(best);
    out.worst_relative_error = std::max(out.worst_relative_error, best);
  }
  return out;
}

/// Full battery: operator identities on 64^2 and 96x64, energetics
/// consistency on 48^2. `quick` uses fewer random trials.
inline BatteryReport run_battery(bool quick, std::uint64_t seed = 20240531) {
  const auto t0 = std::chrono::steady_clock::now();
  BatteryReport rep;
  std::mt19937_64 rng(seed);
  const int trials = quick ? 10 : 100;
  for (const auto& grid : {Grid::make(64, 64, 1.0, 1.0), Grid::make(96, 64, 1.5, 1.0)})
    detail::operator_checks(grid, rng, trials, rep.checks);

  const GridPtr g48 = Grid::make(48, 48, 1.0, 1.0);
  PhysParams p;
  p.eps = 0.1;
  p.m_pen = 2.0;
  p.alpha = 1.5;
  p.m0 = 0.1;
  const GradientCheck gc = gradient_consistency(g48, p, quick ? 5 : 20, seed + 1);
  rep.checks.push_back({"z is the gradient of the bending energy", "48x48", gc.worst_relative_error, 1e-5,
                        gc.worst_relative_error < 1e-5});

  double zmean = 0.0, gmean = 0.0;
  for (int t = 0; t < (quick ? 5 : 20); ++t) {
    const ScalarField psi = subtract_mean(random_smooth_field(g48, rng));
    const ScalarField z = z_of(psi, p);
    const ScalarField gb = g_bar(psi, p);
    zmean = std::max(zmean, std::abs(mean(z)) / std::max(rms(z), 1e-300));
    gmean = std::max(gmean, std::abs(mean(gb)) / std::max(rms(gb), 1e-300));
  }
  rep.checks.push_back({"mean of z", "48x48", zmean, 1e-12, zmean <= 1e-12});
  rep.checks.push_back({"mean of G_bar", "48x48", gmean, 1e-13, gmean <= 1e-13});

  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace vesflow
