#pragma once

#include "vesflow/ch_dynamics.hpp"
#include "vesflow/energetics.hpp"
#include "vesflow/errors.hpp"
#include "vesflow/fields.hpp"
#include "vesflow/ns_dynamics.hpp"
#include "vesflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vesflow {

/// The (u, psi, z) triple at one instant. z and energy are derived from
/// (u, psi); construct through make_state so they stay consistent.
struct SimState {
  double t = 0.0;
  long step = 0;
  ScalarField psi;
  FaceVelocity u;
  ScalarField z;
  EnergyBreakdown energy;
};

inline SimState make_state(ScalarField psi, FaceVelocity u, const PhysParams& p, double t = 0.0, long step = 0) {
  ScalarField z = z_of(psi, p);
  const EnergyBreakdown e = total_energy(u, psi, p);
  return SimState{t, step, std::move(psi), std::move(u), std::move(z), e};
}

/// One staggered step of the coupled system:
///  1. force from the current (z^n, psi^n),
///  2. velocity update with that force,
///  3. phase update advected by the old velocity u^n,
///  4. z and energy recomputed from the new fields.
inline SimState step_coupled(const SimState& s, const PhysParams& p, const ChStepParams& ch, const NsStepParams& ns) {
  if (ch.dt != ns.dt) throw std::invalid_argument("step_coupled: phase and fluid dt differ");
  const FaceField force = elastic_force(s.z, s.psi, p);
  NsStepResult fluid = ns_step(s.u, force, p, ns);
  ChStepResult phase = ch_step(s.psi, s.u, p, ch);

  SimState next = make_state(std::move(phase.psi), std::move(fluid.u), p, s.t + ch.dt, s.step + 1);
  const double mpsi = mean(next.psi), mz = mean(next.z);
  if (std::abs(mpsi) > 1e-9 || std::abs(mz) > 1e-12 * std::max(1.0, rms(next.z)))
    throw InvariantViolation("step_coupled: mean drift psi=" + std::to_string(mpsi) + " z=" + std::to_string(mz));
  if (!std::isfinite(next.energy.total)) throw NonFiniteState("step_coupled: non-finite energy");
  return next;
}

// ---------------------------------------------------------------------------
// Dissipation ledger

/// One row of the energy balance. `residual` belongs to the step that ended
/// at this row: R = (E^{n+1} - E^n)/dt + nu |grad u^n|^2 + lambda gamma |grad z^n|^2.
struct LedgerRow {
  double t = 0.0;
  long step = 0;
  EnergyBreakdown energy;
  double mass_mean = 0.0;  ///< mean(psi + m0)
  double u_l2 = 0.0;
  double grad_u_l2 = 0.0;
  double z_l2 = 0.0;
  double grad_z_l2 = 0.0;
  double psi_h1 = 0.0;
  double psi_h3 = 0.0;
  double de_dt = 0.0;
  double visc_dissipation = 0.0;
  double phase_dissipation = 0.0;
  double residual = 0.0;
  double cumulative_dissipation = 0.0;  ///< int_0^t nu|grad u|^2 + lambda gamma |grad z|^2
};

struct DissipationLedger {
  std::vector<LedgerRow> rows;
  double max_abs_residual = 0.0;  ///< over every step, recorded or not
  double sum_abs_residual_dt = 0.0;
  double cumulative_dissipation = 0.0;
  double initial_energy = 0.0;
  long steps = 0;
};

/// Per-state norms for a ledger row (balance fields left at zero).
inline LedgerRow describe_state(const SimState& s, const PhysParams& p) {
  LedgerRow r;
  r.t = s.t;
  r.step = s.step;
  r.energy = s.energy;
  r.mass_mean = mean(s.psi) + p.m0;
  r.u_l2 = norm_l2(s.u);
  r.grad_u_l2 = std::sqrt(std::max(velocity_dirichlet(s.u), 0.0));
  r.z_l2 = norm_l2(s.z);
  r.grad_z_l2 = seminorm_h1(s.z);
  r.psi_h1 = norm_hk(s.psi, 1);
  r.psi_h3 = norm_hk(s.psi, 3);
  return r;
}

/// Dissipation rates of a state: {nu |grad u|^2, lambda gamma |grad z|^2}.
struct DissipationRates {
  double viscous = 0.0;
  double phase = 0.0;
  double total() const noexcept { return viscous + phase; }
};

inline DissipationRates dissipation_rates(const SimState& s, const PhysParams& p) {
  const double gz = seminorm_h1(s.z);
  return {p.nu * velocity_dirichlet(s.u), p.lambda * p.gamma * gz * gz};
}

/// Incremental ledger builder; records every `every` steps.
class LedgerBuilder {
 public:
  LedgerBuilder(const PhysParams& p, long every) : p_(p), every_(std::max(every, 1L)) {}

  const LedgerRow& start(const SimState& s) {
    ledger_.initial_energy = s.energy.total;
    LedgerRow r = describe_state(s, p_);
    ledger_.rows.push_back(r);
    return ledger_.rows.back();
  }

  /// Accounts the step prev -> next; returns the row if one was recorded.
  const LedgerRow* add_step(const SimState& prev, const SimState& next) {
    const double dt = next.t - prev.t;
    const DissipationRates d = dissipation_rates(prev, p_);
    const double de_dt = (next.energy.total - prev.energy.total) / dt;
    const double res = de_dt + d.total();
    ledger_.max_abs_residual = std::max(ledger_.max_abs_residual, std::abs(res));
    ledger_.sum_abs_residual_dt += std::abs(res) * dt;
    ledger_.cumulative_dissipation += d.total() * dt;
    ++ledger_.steps;
    if (next.step % every_ != 0) return nullptr;
    LedgerRow r = describe_state(next, p_);
    r.de_dt = de_dt;
    r.visc_dissipation = d.viscous;
    r.phase_dissipation = d.phase;
    r.residual = res;
    r.cumulative_dissipation = ledger_.cumulative_dissipation;
    ledger_.rows.push_back(r);
    return &ledger_.rows.back();
  }

  const DissipationLedger& ledger() const noexcept { return ledger_; }
  DissipationLedger take() { return std::move(ledger_); }

 private:
  PhysParams p_;
  long every_;
  DissipationLedger ledger_;
};

// ---------------------------------------------------------------------------
// Steady state, equilibria, convergence diagnostics

struct SteadyTolerances {
  double tol_u = 1e-6;
  double tol_z = 1e-6;
  double tol_dpsi = 1e-6;
};

/// True iff |u| < tol_u, |grad z| < tol_z and |psi^n - psi^{n-1}| / dt < tol_dpsi
/// for the last two entries of `history`. Comparisons are strict.
inline bool detect_steady(const SimState& prev, const SimState& cur, const SteadyTolerances& tol) {
  const double dt = cur.t - prev.t;
  if (!(dt > 0.0)) return false;
  if (!(norm_l2(cur.u) < tol.tol_u)) return false;
  if (!(seminorm_h1(cur.z) < tol.tol_z)) return false;
  return norm_l2(cur.psi - prev.psi) / dt < tol.tol_dpsi;
}

inline bool detect_steady(std::span<const SimState> history, const SteadyTolerances& tol) {
  if (history.size() < 2) throw std::invalid_argument("detect_steady: need at least two states");
  return detect_steady(history[history.size() - 2], history[history.size() - 1], tol);
}

struct EquilibriumOptions {
  double dt = 1e-5;
  double stab = -1.0;  ///< < 0 selects ChStepParams::default_stab
  long max_iters = 200000;
};

struct EquilibriumResult {
  ScalarField psi;
  std::vector<double> residual_history;  ///< |z_of(psi)|_2 before each iteration and at exit
  long iterations = 0;
  double residual = 0.0;
};

/// Runs the pure phase gradient flow (u = 0) until |z_of(psi)|_2 < tol.
inline EquilibriumResult find_equilibrium(const ScalarField& psi0, const PhysParams& p, double tol,
                                          const EquilibriumOptions& opt = {}) {
  if (std::abs(mean(psi0)) > 1e-10) throw InvariantViolation("find_equilibrium: psi0 must have zero mean");
  const ChStepParams sp{opt.dt, opt.stab < 0.0 ? ChStepParams::default_stab(p) : opt.stab};
  const FaceVelocity still(psi0.grid_ptr());
  EquilibriumResult res{psi0, {}, 0, 0.0};
  for (;;) {
    res.residual = norm_l2(z_of(res.psi, p));
    res.residual_history.push_back(res.residual);
    if (res.residual < tol) return res;
    if (res.iterations >= opt.max_iters)
      throw NotConverged("find_equilibrium: residual " + std::to_string(res.residual) + " after " +
                             std::to_string(res.iterations) + " iterations",
                         res.iterations, res.residual);
    res.psi = ch_step(res.psi, still, p, sp).psi;
    ++res.iterations;
  }
}

struct LojasiewiczFit {
  double theta = 0.0;      ///< 1 - slope
  double slope = 0.0;      ///< d log|z| / d log(E - E_inf)
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of log|z|_2 against log(E - e_inf) over samples with
/// E > e_inf and |z| > 0. Descriptive: recovers theta exactly only for
/// log-linear data.
inline LojasiewiczFit lojasiewicz_estimate(std::span<const double> energy, std::span<const double> z_norm,
                                           double e_inf) {
  if (energy.size() != z_norm.size()) throw std::invalid_argument("lojasiewicz_estimate: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < energy.size(); ++k) {
    const double gap = energy[k] - e_inf;
    if (gap > 0.0 && z_norm[k] > 0.0 && std::isfinite(gap) && std::isfinite(z_norm[k])) {
      xs.push_back(std::log(gap));
      ys.push_back(std::log(z_norm[k]));
    }
  }
  if (xs.size() < 20)
    throw InsufficientTail("lojasiewicz_estimate: " + std::to_string(xs.size()) + " usable samples, need 20");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientTail("lojasiewicz_estimate: energy gap is constant over the tail");
  LojasiewiczFit fit;
  fit.samples = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.theta = 1.0 - fit.slope;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

/// Default tail-energy estimate: last energy minus half the last energy drop.
inline double estimate_e_infinity(std::span<const double> energy) {
  if (energy.empty()) return 0.0;
  if (energy.size() == 1) return energy.back();
  const double last = energy[energy.size() - 1];
  const double prev = energy[energy.size() - 2];
  return last - 0.5 * (prev - last);
}

struct HigherNormVerdict {
  std::vector<double> series;
  double first_half_max = 0.0;
  double tail_max = 0.0;
  bool bounded = true;
};

/// Bounded iff the max over the second half of the series is at most
/// 1.05 x the max over the first half.
inline HigherNormVerdict higher_norm_watch(std::vector<double> series) {
  HigherNormVerdict v;
  v.series = std::move(series);
  if (v.series.size() < 2) {
    v.first_half_max = v.tail_max = v.series.empty() ? 0.0 : v.series.front();
    return v;
  }
  const std::size_t half = v.series.size() / 2;
  v.first_half_max = *std::max_element(v.series.begin(), v.series.begin() + static_cast<long>(half));
  v.tail_max = *std::max_element(v.series.begin() + static_cast<long>(half), v.series.end());
  v.bounded = v.tail_max <= 1.05 * v.first_half_max;
  return v;
}

inline HigherNormVerdict higher_norm_watch(std::span<const SimState> history) {
  std::vector<double> series;
  series.reserve(history.size());
  for (const SimState& s : history) series.push_back(norm_hk(s.psi, 3));
  return higher_norm_watch(std::move(series));
}

// ---------------------------------------------------------------------------
// Time loop

struct RunSettings {
  PhysParams params;
  double dt = 1e-5;
  double t_end = 1.0;
  double stab = -1.0;  ///< < 0 selects ChStepParams::default_stab
  long checkpoint_every = 100;
  long ledger_every = 1;
  SteadyTolerances steady;
  bool stop_on_steady = true;
  std::size_t keep_checkpoints = 0;  ///< full states retained in memory; 0 keeps all
  std::size_t tail_length = 10;      ///< ledger rows summarized in the report tails

  ChStepParams ch_params() const { return {dt, stab < 0.0 ? ChStepParams::default_stab(params) : stab}; }
  NsStepParams ns_params() const { return {dt, 1e-12}; }
  long target_steps() const { return std::llround(t_end / dt); }
};

struct ConvergenceReport {
  std::vector<double> u_l2_tail;
  std::vector<double> grad_z_l2_tail;
  std::vector<double> cauchy_increments;  ///< |psi(t_{k+1}) - psi(t_k)|_2 over the last checkpoints
  std::vector<double> checkpoint_times;
  std::vector<double> psi_h3;  ///< one entry per checkpoint
  HigherNormVerdict h3_verdict;
  std::optional<LojasiewiczFit> loja;
  std::string loja_error;
  double e_infinity_hat = 0.0;
  bool steady_reached = false;
  long steady_step = -1;
};

struct RunObserver {
  std::function<void(const SimState&)> on_checkpoint;
  std::function<void(const LedgerRow&)> on_ledger_row;
};

struct RunResult {
  std::vector<SimState> checkpoints;
  DissipationLedger ledger;
  ConvergenceReport report;
  SimState final_state;
};

namespace detail {
inline std::vector<double> tail_of(const std::vector<LedgerRow>& rows, std::size_t n, double LedgerRow::*field) {
  std::vector<double> out;
  const std::size_t start = rows.size() > n ? rows.size() - n : 0;
  for (std::size_t k = start; k < rows.size(); ++k) out.push_back(rows[k].*field);
  return out;
}
}  // namespace detail

/// Number of late checkpoints whose consecutive increments enter the report.
inline constexpr std::size_t kCauchyWindow = 5;

/// Steps `initial` until t_end (counted in whole steps) or, when enabled,
/// until detect_steady fires. Checkpoints are taken at multiples of
/// checkpoint_every and at the final state.
inline RunResult run(const RunSettings& cfg, SimState initial, const RunObserver& obs = {}) {
  cfg.params.validate();
  const ChStepParams ch = cfg.ch_params();
  const NsStepParams ns = cfg.ns_params();
  ch.validate();
  const long target = cfg.target_steps();

  RunResult out{{}, {}, {}, initial};
  LedgerBuilder ledger(cfg.params, cfg.ledger_every);
  std::deque<ScalarField> late_psi;
  long last_checkpoint_step = -1;

  auto checkpoint = [&](const SimState& s) {
    if (s.step == last_checkpoint_step) return;
    last_checkpoint_step = s.step;
    out.report.checkpoint_times.push_back(s.t);
    out.report.psi_h3.push_back(norm_hk(s.psi, 3));
    late_psi.push_back(s.psi);
    if (late_psi.size() > kCauchyWindow) late_psi.pop_front();
    out.checkpoints.push_back(s);
    if (cfg.keep_checkpoints > 0 && out.checkpoints.size() > cfg.keep_checkpoints)
      out.checkpoints.erase(out.checkpoints.begin());
    if (obs.on_checkpoint) obs.on_checkpoint(s);
  };

  const LedgerRow& first = ledger.start(initial);
  if (obs.on_ledger_row) obs.on_ledger_row(first);
  checkpoint(initial);

  SimState cur = std::move(initial);
  while (cur.step < target) {
    SimState next = step_coupled(cur, cfg.params, ch, ns);
    if (const LedgerRow* row = ledger.add_step(cur, next); row && obs.on_ledger_row) obs.on_ledger_row(*row);
    const bool steady = cfg.stop_on_steady && detect_steady(cur, next, cfg.steady);
    cur = std::move(next);
    if (cur.step % std::max(cfg.checkpoint_every, 1L) == 0) checkpoint(cur);
    if (steady) {
      out.report.steady_reached = true;
      out.report.steady_step = cur.step;
      break;
    }
  }
  checkpoint(cur);

  out.ledger = ledger.take();
  if (out.ledger.rows.back().step != cur.step) {
    // Make sure the final state is represented in the ledger.
    LedgerRow r = describe_state(cur, cfg.params);
    r.cumulative_dissipation = out.ledger.cumulative_dissipation;
    out.ledger.rows.push_back(r);
    if (obs.on_ledger_row) obs.on_ledger_row(r);
  }

  ConvergenceReport& rep = out.report;
  rep.u_l2_tail = detail::tail_of(out.ledger.rows, cfg.tail_length, &LedgerRow::u_l2);
  rep.grad_z_l2_tail = detail::tail_of(out.ledger.rows, cfg.tail_length, &LedgerRow::grad_z_l2);
  for (std::size_t k = 1; k < late_psi.size(); ++k) rep.cauchy_increments.push_back(norm_l2(late_psi[k] - late_psi[k - 1]));
  rep.h3_verdict = higher_norm_watch(rep.psi_h3);

  // Lojasiewicz fit over the second half of the ledger (at least 20 rows).
  std::vector<double> energies, znorms;
  const std::size_t nrows = out.ledger.rows.size();
  const std::size_t fit_rows = std::min(nrows, std::max<std::size_t>(20, nrows / 2));
  for (const LedgerRow& r : std::span(out.ledger.rows).subspan(nrows - fit_rows)) {
    energies.push_back(r.energy.total);
    znorms.push_back(r.z_l2);
  }
  rep.e_infinity_hat = estimate_e_infinity(energies);
  try {
    rep.loja = lojasiewicz_estimate(energies, znorms, rep.e_infinity_hat);
  } catch (const InsufficientTail& e) {
    rep.loja_error = e.what();
  }
  out.final_state = std::move(cur);
  return out;
}

}  // namespace vesflow
