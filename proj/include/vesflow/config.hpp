#pragma once

// Run configuration: JSON document -> RunConfig -> initial state.
// Key names and defaults are documented in schema/run_config.schema.json.

#include "vesflow/ch_dynamics.hpp"
#include "vesflow/energetics.hpp"
#include "vesflow/errors.hpp"
#include "vesflow/io.hpp"
#include "vesflow/ns_dynamics.hpp"
#include "vesflow/simulation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace vesflow {

struct UniformIc {
  double c = 0.0;
};
struct DiskIc {
  double cx = 0.0, cy = 0.0, r = 0.0, width = 0.0;  ///< phi = +1 inside
};
struct AnnulusIc {
  double cx = 0.0, cy = 0.0, r_in = 0.0, r_out = 0.0, width = 0.0;  ///< phi = +1 in the ring
};
struct StripIc {
  double x0 = 0.0, width = 0.0;  ///< phi = tanh((x - x0) / width)
};
struct FileIc {
  std::filesystem::path path;  ///< VESFLOW1 checkpoint; psi, u, step and t are restored
};
using IcShape = std::variant<UniformIc, DiskIc, AnnulusIc, StripIc, FileIc>;

/// One stage of pure phase flow (u = 0) applied to the initial phase before
/// t = 0. Removes grid-scale content that no practical dt resolves.
struct RelaxStage {
  long steps = 0;
  double dt = 0.0;
  double stab = -1.0;  ///< < 0 selects the run's stabilization
};

struct InitialCondition {
  IcShape shape = DiskIc{};
  double noise = 0.0;  ///< amplitude of seeded uniform noise added to phi
  std::vector<RelaxStage> relax;
};

struct Tolerances {
  SteadyTolerances steady;
  double equilibrium_tol = 1e-6;
  long equilibrium_max_iters = 200000;
};

struct RunConfig {
  std::size_t nx = 0, ny = 0;
  double lx = 1.0, ly = 1.0;
  PhysParams params;
  std::optional<double> m0;      ///< validated against the initial phase when given
  bool alpha_from_initial = false;
  double dt = 0.0;
  double t_end = 0.0;
  double stab = -1.0;  ///< < 0 selects 2 / eps
  long checkpoint_every = 100;
  long ledger_every = 1;
  bool stop_on_steady = true;
  InitialCondition initial;
  Tolerances tolerances;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  GridPtr make_grid() const { return Grid::make(nx, ny, lx, ly); }

  RunSettings settings() const {
    RunSettings s;
    s.params = params;
    s.dt = dt;
    s.t_end = t_end;
    s.stab = stab;
    s.checkpoint_every = checkpoint_every;
    s.ledger_every = ledger_every;
    s.steady = tolerances.steady;
    s.stop_on_steady = stop_on_steady;
    s.keep_checkpoints = 2;
    return s;
  }

  ChStepParams ch_params() const { return settings().ch_params(); }
};

namespace detail {

using nlohmann::json;

/// Walks a JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ParseError(where() + ": missing required key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ParseError(name(key) + ": expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  long integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ParseError(name(key) + ": expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ParseError(name(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ParseError(name(key) + ": expected true or false");
    return v.get<bool>();
  }

  ObjectReader child(const std::string& key) { return ObjectReader(at(key), name(key)); }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key)) throw ParseError("unknown key '" + name(key) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& constraint, const std::string& detail) {
  if (!ok) throw ValidationError(constraint, detail);
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline InitialCondition parse_initial(ObjectReader r, const RunConfig& cfg, const std::filesystem::path& base) {
  InitialCondition ic;
  const double w0 = cfg.params.eps * std::sqrt(2.0);
  const std::string type = r.string("type");
  if (type == "uniform") {
    ic.shape = UniformIc{r.number("c")};
  } else if (type == "disk") {
    ic.shape = DiskIc{r.number("cx", 0.5 * cfg.lx), r.number("cy", 0.5 * cfg.ly),
                      r.number("r", 0.25 * std::min(cfg.lx, cfg.ly)), r.number("width", w0)};
  } else if (type == "annulus") {
    ic.shape = AnnulusIc{r.number("cx", 0.5 * cfg.lx), r.number("cy", 0.5 * cfg.ly), r.number("r_in"),
                         r.number("r_out"), r.number("width", w0)};
  } else if (type == "strip") {
    ic.shape = StripIc{r.number("x0", 0.5 * cfg.lx), r.number("width", w0)};
  } else if (type == "from_file") {
    std::filesystem::path p = r.string("path");
    if (p.is_relative()) p = base / p;
    ic.shape = FileIc{p};
  } else {
    throw ParseError(r.name("type") + ": unknown initial condition '" + type + "'");
  }
  ic.noise = r.number("noise", 0.0);
  if (r.has("relax")) {
    const json& stages = r.at("relax");
    if (!stages.is_array()) throw ParseError(r.name("relax") + ": expected an array");
    for (std::size_t k = 0; k < stages.size(); ++k) {
      ObjectReader s(stages[k], r.name("relax") + "[" + std::to_string(k) + "]");
      RelaxStage st{s.integer("steps"), s.number("dt"), s.number("stab", -1.0)};
      s.finish();
      ic.relax.push_back(st);
    }
  }
  r.finish();
  return ic;
}

inline void validate(const RunConfig& c) {
  require(c.nx >= 4, "nx >= 4", "got " + std::to_string(c.nx));
  require(c.ny >= 4, "ny >= 4", "got " + std::to_string(c.ny));
  require(c.lx > 0.0 && std::isfinite(c.lx), "lx > 0", "got " + num(c.lx));
  require(c.ly > 0.0 && std::isfinite(c.ly), "ly > 0", "got " + num(c.ly));
  c.params.validate();
  require(c.dt > 0.0 && std::isfinite(c.dt), "dt > 0", "got " + num(c.dt));
  require(c.t_end >= 0.0 && std::isfinite(c.t_end), "t_end >= 0", "got " + num(c.t_end));
  require(c.stab < 0.0 || std::isfinite(c.stab), "stab >= 0", "got " + num(c.stab));
  require(c.checkpoint_every >= 1, "checkpoint_every >= 1", "got " + std::to_string(c.checkpoint_every));
  require(c.ledger_every >= 1, "ledger_every >= 1", "got " + std::to_string(c.ledger_every));
  const double h = std::min(c.lx / static_cast<double>(c.nx), c.ly / static_cast<double>(c.ny));
  const double limit = h * h / (4.0 * c.params.nu);
  require(c.dt <= limit, "dt <= h^2/(4 nu)", "dt = " + num(c.dt) + " exceeds h^2/(4 nu) = " + num(limit));
  require(c.initial.noise >= 0.0, "noise >= 0", "got " + num(c.initial.noise));
  for (const RelaxStage& s : c.initial.relax) {
    require(s.steps >= 0, "relax.steps >= 0", "got " + std::to_string(s.steps));
    require(s.dt > 0.0, "relax.dt > 0", "got " + num(s.dt));
  }
  const Tolerances& t = c.tolerances;
  require(t.steady.tol_u > 0.0, "tol_u > 0", "got " + num(t.steady.tol_u));
  require(t.steady.tol_z > 0.0, "tol_z > 0", "got " + num(t.steady.tol_z));
  require(t.steady.tol_dpsi > 0.0, "tol_dpsi > 0", "got " + num(t.steady.tol_dpsi));
  require(t.equilibrium_tol > 0.0, "equilibrium_tol > 0", "got " + num(t.equilibrium_tol));
  require(t.equilibrium_max_iters >= 0, "equilibrium_max_iters >= 0", "got " + std::to_string(t.equilibrium_max_iters));
  if (std::holds_alternative<FileIc>(c.initial.shape)) {
    require(c.m0.has_value(), "m0 given for from_file", "a checkpoint stores psi only; set params.m0");
    require(c.initial.noise == 0.0, "noise = 0 for from_file", "got " + num(c.initial.noise));
  }
  if (const auto* a = std::get_if<AnnulusIc>(&c.initial.shape))
    require(a->r_in >= 0.0 && a->r_out > a->r_in, "0 <= r_in < r_out",
            "r_in = " + num(a->r_in) + ", r_out = " + num(a->r_out));
  if (const auto* d = std::get_if<DiskIc>(&c.initial.shape)) {
    require(d->r > 0.0, "r > 0", "got " + num(d->r));
    require(d->width > 0.0, "width > 0", "got " + num(d->width));
  }
  if (const auto* a = std::get_if<AnnulusIc>(&c.initial.shape))
    require(a->width > 0.0, "width > 0", "got " + num(a->width));
  if (const auto* s = std::get_if<StripIc>(&c.initial.shape))
    require(s->width > 0.0, "width > 0", "got " + num(s->width));
}

inline std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace detail

/// Parses a config document. Relative file paths resolve against `base_dir`.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }

  RunConfig c;
  detail::ObjectReader root(doc, "");

  {
    auto g = root.child("grid");
    const long nx = g.integer("nx"), ny = g.integer("ny");
    detail::require(nx >= 4, "nx >= 4", "got " + std::to_string(nx));
    detail::require(ny >= 4, "ny >= 4", "got " + std::to_string(ny));
    c.nx = static_cast<std::size_t>(nx);
    c.ny = static_cast<std::size_t>(ny);
    c.lx = g.number("lx", 1.0);
    c.ly = g.number("ly", 1.0);
    g.finish();
  }
  {
    auto p = root.child("params");
    c.params.eps = p.number("eps", 0.08);
    c.params.lambda = p.number("lambda", 1.0);
    c.params.nu = p.number("nu", 1.0);
    c.params.gamma = p.number("gamma", 1.0);
    c.params.m_pen = p.number("m_pen", 1.0);
    if (p.has("alpha") && p.at("alpha").is_string()) {
      if (p.string("alpha") != "initial") throw ParseError("params.alpha: expected a number or \"initial\"");
      c.alpha_from_initial = true;
    } else {
      c.params.alpha = p.number("alpha", 0.0);
    }
    if (p.has("m0")) c.m0 = p.number("m0");
    p.finish();
  }
  {
    auto s = root.child("stepping");
    c.dt = s.number("dt");
    c.t_end = s.number("t_end");
    c.stab = s.number("stab", -1.0);
    c.checkpoint_every = s.integer("checkpoint_every", 100);
    c.ledger_every = s.integer("ledger_every", 1);
    c.stop_on_steady = s.boolean("stop_on_steady", true);
    s.finish();
  }
  if (root.has("area_form")) {
    const std::string af = root.string("area_form");
    if (af == "full")
      c.params.area_form = AreaForm::full;
    else if (af == "gradient_only")
      c.params.area_form = AreaForm::gradient_only;
    else
      throw ParseError("area_form: expected \"full\" or \"gradient_only\", got \"" + af + "\"");
  }
  if (root.has("tolerances")) {
    auto t = root.child("tolerances");
    c.tolerances.steady.tol_u = t.number("tol_u", 1e-6);
    c.tolerances.steady.tol_z = t.number("tol_z", 1e-6);
    c.tolerances.steady.tol_dpsi = t.number("tol_dpsi", 1e-6);
    c.tolerances.equilibrium_tol = t.number("equilibrium_tol", 1e-6);
    c.tolerances.equilibrium_max_iters = t.integer("equilibrium_max_iters", 200000);
    t.finish();
  }
  if (root.has("seed")) {
    const long seed = root.integer("seed");
    detail::require(seed >= 0, "seed >= 0", "got " + std::to_string(seed));
    c.seed = static_cast<std::uint64_t>(seed);
  }
  c.output_dir = root.string("output_dir", "out");
  if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;

  // Parsed last: the default profile width depends on eps.
  if (root.has("initial_condition"))
    c.initial = detail::parse_initial(root.child("initial_condition"), c, base_dir);
  else
    c.initial.shape = DiskIc{0.5 * c.lx, 0.5 * c.ly, 0.25 * std::min(c.lx, c.ly), c.params.eps * std::sqrt(2.0)};

  root.finish();
  detail::validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

/// The initial phase phi (not mean-shifted) sampled at cell centers.
inline ScalarField initial_phase(const RunConfig& c, const GridPtr& grid) {
  ScalarField phi = std::visit(
      [&](const auto& ic) -> ScalarField {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, UniformIc>) {
          return ScalarField(grid, ic.c);
        } else if constexpr (std::is_same_v<T, DiskIc>) {
          return ScalarField::from_function(
              grid, [&](double x, double y) { return std::tanh((ic.r - std::hypot(x - ic.cx, y - ic.cy)) / ic.width); });
        } else if constexpr (std::is_same_v<T, AnnulusIc>) {
          return ScalarField::from_function(grid, [&](double x, double y) {
            const double d = std::hypot(x - ic.cx, y - ic.cy);
            return std::tanh(std::min(d - ic.r_in, ic.r_out - d) / ic.width);
          });
        } else if constexpr (std::is_same_v<T, StripIc>) {
          return ScalarField::from_function(grid, [&](double x, double) { return std::tanh((x - ic.x0) / ic.width); });
        } else {
          const Checkpoint cp = read_checkpoint(ic.path, grid);
          return cp.psi + *c.m0;
        }
      },
      c.initial.shape);
  if (c.initial.noise > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> dist(-c.initial.noise, c.initial.noise);
    for (double& v : phi.values()) v += dist(rng);
  }
  return phi;
}

struct Prepared {
  GridPtr grid;
  PhysParams params;  ///< m0 and alpha resolved
  SimState state;
};

/// Builds the t = 0 state: samples the profile, fixes m0 (and alpha when
/// "initial"), applies the relaxation stages. from_file restores u, step, t.
inline Prepared prepare(const RunConfig& c) {
  GridPtr grid = c.make_grid();
  PhysParams p = c.params;
  const ScalarField phi = initial_phase(c, grid);
  const double m = mean(phi);
  if (c.m0) {
    detail::require(std::abs(*c.m0 - m) <= 1e-10 * std::max(1.0, std::abs(m)), "m0 = mean(initial phase)",
                    "m0 = " + detail::num(*c.m0) + ", initial phase mean = " + detail::num(m));
    p.m0 = *c.m0;
  } else {
    p.m0 = m;
  }
  ScalarField psi = phi - p.m0;
  psi = subtract_mean(std::move(psi));

  FaceVelocity u(grid);
  long step = 0;
  double t = 0.0;
  if (const auto* f = std::get_if<FileIc>(&c.initial.shape)) {
    Checkpoint cp = read_checkpoint(f->path, grid);
    psi = std::move(cp.psi);
    u = std::move(cp.u);
    step = cp.step;
    t = cp.t;
  }
  if (c.alpha_from_initial) p.alpha = surface_area(psi, p);

  const FaceVelocity still(grid);
  const double run_stab = c.ch_params().stab;
  for (const RelaxStage& s : c.initial.relax) {
    const ChStepParams sp{s.dt, s.stab < 0.0 ? run_stab : s.stab};
    for (long k = 0; k < s.steps; ++k) psi = ch_step(psi, still, p, sp).psi;
  }
  SimState st = make_state(std::move(psi), std::move(u), p, t, step);
  return {grid, p, std::move(st)};
}

}  // namespace vesflow
