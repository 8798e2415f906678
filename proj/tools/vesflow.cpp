// vesflow command-line driver.
//
// Exit codes: 0 ok, 1 usage, 2 configuration or unreadable input,
// 3 numerical failure, 4 self-test failure.

#include "vesflow/vesflow.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace vesflow;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kSelfTest = 4 };

std::string padded(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08ld", step);
  return buf;
}

std::optional<RunConfig> load_or_report(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
  }
  return std::nullopt;
}

nlohmann::json fit_json(const LojasiewiczFit& f) {
  return {{"theta", f.theta}, {"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
          {"samples", f.samples}};
}

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
  auto cfg = load_or_report(config_path);
  if (!cfg) return kConfig;
  const fs::path out = out_override.empty() ? cfg->output_dir : fs::path(out_override);

  try {
    Prepared prep = prepare(*cfg);
    RunSettings rs = cfg->settings();
    rs.params = prep.params;
    const double hint = stable_dt_hint(prep.params, *prep.grid, rs.ch_params());
    std::cout << "grid " << prep.grid->nx() << "x" << prep.grid->ny() << "  dt " << rs.dt << "  stab "
              << rs.ch_params().stab << "  stable_dt_hint " << hint << '\n';
    std::printf("m0 %.17g  alpha %.17g\n", prep.params.m0, prep.params.alpha);
    if (rs.dt > hint) std::cout << "note: dt exceeds the advisory phase-step hint\n";

    fs::create_directories(out);
    LedgerCsvWriter csv(out / "ledger.csv");
    RunObserver obs;
    obs.on_ledger_row = [&](const LedgerRow& r) { csv.write(r); };
    obs.on_checkpoint = [&](const SimState& s) {
      write_checkpoint(s, out / ("checkpoint_" + padded(s.step) + ".bin"));
      write_snapshot(s, out / ("snapshot_" + padded(s.step) + ".vtk"));
    };

    const auto t0 = std::chrono::steady_clock::now();
    // On error the writers are unwound and flush what they hold.
    const RunResult res = run(rs, std::move(prep.state), obs);
    csv.flush();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double rate = secs > 0.0 ? static_cast<double>(res.ledger.steps) / secs : 0.0;

    const ConvergenceReport& rep = res.report;
    nlohmann::json j;
    j["steps"] = res.ledger.steps;
    j["t_final"] = res.final_state.t;
    j["steps_per_second"] = rate;
    j["energy_initial"] = res.ledger.initial_energy;
    j["energy_final"] = res.final_state.energy.total;
    j["max_abs_residual"] = res.ledger.max_abs_residual;
    j["cumulative_dissipation"] = res.ledger.cumulative_dissipation;
    j["steady_reached"] = rep.steady_reached;
    j["steady_step"] = rep.steady_step;
    j["cauchy_increments"] = rep.cauchy_increments;
    j["checkpoint_times"] = rep.checkpoint_times;
    j["psi_h3"] = rep.psi_h3;
    j["h3_bounded"] = rep.h3_verdict.bounded;
    j["e_infinity_hat"] = rep.e_infinity_hat;
    if (rep.loja)
      j["lojasiewicz"] = fit_json(*rep.loja);
    else
      j["lojasiewicz_error"] = rep.loja_error;
    std::ofstream(out / "report.json") << j.dump(2) << '\n';

    std::cout << "steps " << res.ledger.steps << "  t " << res.final_state.t << "  E " << res.final_state.energy.total
              << "  max|R| " << res.ledger.max_abs_residual << "  steady " << (rep.steady_reached ? "yes" : "no")
              << "  " << rate << " steps/s\n";
    std::cout << "outputs in " << out.string() << '\n';
    return kOk;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

int cmd_equilibrate(const std::string& config_path, std::optional<double> tol, const std::string& out_override) {
  auto cfg = load_or_report(config_path);
  if (!cfg) return kConfig;
  const fs::path out = out_override.empty() ? cfg->output_dir : fs::path(out_override);
  try {
    Prepared prep = prepare(*cfg);
    const double t = tol.value_or(cfg->tolerances.equilibrium_tol);
    EquilibriumOptions opt;
    opt.dt = cfg->dt;
    opt.stab = cfg->ch_params().stab;
    opt.max_iters = cfg->tolerances.equilibrium_max_iters;
    const EquilibriumResult eq = find_equilibrium(prep.state.psi, prep.params, t, opt);

    fs::create_directories(out);
    const SimState s = make_state(eq.psi, FaceVelocity(prep.grid), prep.params);
    write_checkpoint(s, out / "equilibrium.bin");
    write_snapshot(s, out / "equilibrium.vtk");
    std::ofstream hist(out / "equilibrium_residuals.csv");
    hist << "iteration,z_l2\n";
    for (std::size_t k = 0; k < eq.residual_history.size(); ++k) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, eq.residual_history[k]);
      hist << buf;
    }
    const EnergyBreakdown e = bending_energy(eq.psi, prep.params);
    std::cout << "converged in " << eq.iterations << " iterations, |z| = " << eq.residual << ", E_b = " << e.bending()
              << ", area = " << e.area << '\n';
    std::cout << "outputs in " << out.string() << '\n';
    return kOk;
  } catch (const NotConverged& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

int cmd_verify(bool quick) {
  const BatteryReport rep = run_battery(quick);
  for (const CheckResult& c : rep.checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  %-42s %-6s value %.3e  tol %.1e", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  c.grid.c_str(), c.value, c.tol);
    std::cout << buf << '\n';
  }
  std::cout << (rep.all_pass() ? "all checks passed" : "SELF-TEST FAILED") << " in " << rep.seconds << " s\n";
  return rep.all_pass() ? kOk : kSelfTest;
}

int cmd_loja(const std::string& ledger_path, long tail, std::optional<double> e_inf) {
  std::vector<LedgerRow> rows;
  try {
    rows = read_ledger_csv(ledger_path);
  } catch (const Error& e) {
    std::cerr << "cannot read ledger: " << e.what() << '\n';
    return kConfig;
  }
  const std::size_t n = tail > 0 ? std::min(rows.size(), static_cast<std::size_t>(tail)) : rows.size();
  std::vector<double> energy, z;
  for (std::size_t k = rows.size() - n; k < rows.size(); ++k) {
    energy.push_back(rows[k].energy.total);
    z.push_back(rows[k].z_l2);
  }
  const double einf = e_inf.value_or(estimate_e_infinity(energy));
  try {
    const LojasiewiczFit f = lojasiewicz_estimate(energy, z, einf);
    std::printf("theta %.12f\nslope %.12f\nr_squared %.12f\nsamples %zu\ne_inf %.17g\n", f.theta, f.slope,
                f.r_squared, f.samples, einf);
    return kOk;
  } catch (const InsufficientTail& e) {
    std::cerr << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vesflow: Navier-Stokes / phase-field vesicle simulator"};
  app.require_subcommand(1);

  std::string config, out, ledger;
  std::optional<double> tol, e_inf;
  bool quick = false;
  long tail = 0;

  auto* sim = app.add_subcommand("simulate", "run the coupled system from a config");
  sim->add_option("--config", config, "run config (JSON)")->required();
  sim->add_option("--out", out, "output directory (overrides output_dir)");

  auto* eq = app.add_subcommand("equilibrate", "pure phase gradient flow to |z| < tol");
  eq->add_option("--config", config, "run config (JSON)")->required();
  eq->add_option("--tol", tol, "residual tolerance (default: tolerances.equilibrium_tol)");
  eq->add_option("--out", out, "output directory (overrides output_dir)");

  auto* ver = app.add_subcommand("verify", "operator and energetics self-test battery");
  ver->add_flag("--quick", quick, "fewer random trials");

  auto* lj = app.add_subcommand("loja", "Lojasiewicz exponent fit on a ledger CSV");
  lj->add_option("--ledger", ledger, "ledger.csv")->required();
  lj->add_option("--tail", tail, "use only the last N rows");
  lj->add_option("--e-inf", e_inf, "limit energy (default: last energy minus half the last drop)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (sim->parsed()) return cmd_simulate(config, out);
  if (eq->parsed()) return cmd_equilibrate(config, tol, out);
  if (ver->parsed()) return cmd_verify(quick);
  if (lj->parsed()) return cmd_loja(ledger, tail, e_inf);
  return kUsage;
}
