#include "wavedecay/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "wavedecay/csv.hpp"
#include "wavedecay/error.hpp"

namespace wavedecay {
namespace {

using nlohmann::json;

// Reads keys of one JSON object and rejects the ones nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw InvalidArgument("'" + ctx_ + "' must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? as_number(at(key), key) : fallback;
  }

  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as_number(at(key), key);
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    return as_integer(at(key), key);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_string()) throw InvalidArgument(where(key) + " must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) throw InvalidArgument(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const auto& v = at(key);
    if (!v.is_array()) throw InvalidArgument(where(key) + " must be an array");
    for (const auto& e : v) out.push_back(as_number(e, key));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw InvalidArgument("unknown key '" + it.key() + "' in '" + ctx_ + "'");
      }
    }
  }

  std::string where(const std::string& key) const { return "'" + ctx_ + "." + key + "'"; }

 private:
  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) throw InvalidArgument(where(key) + " must be a number");
    return v.get<double>();
  }

  long long as_integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) throw InvalidArgument(where(key) + " must be an integer");
    return v.get<long long>();
  }

  const json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

int checked_int(long long v, const std::string& what) {
  if (v < -1000000000LL || v > 1000000000LL) throw InvalidArgument(what + " is out of range");
  return static_cast<int>(v);
}

std::size_t checked_count(long long v, const std::string& what) {
  if (v < 0) throw InvalidArgument(what + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

const json empty_object = json::object();

const json& section(const json& j, const char* key) {
  return j.contains(key) ? j.at(key) : empty_object;
}

}  // namespace

Scenario Scenario::from_json(const json& j, const std::string& base_dir) {
  Scenario s;
  s.base_dir = base_dir;
  Reader top(j, "scenario");
  s.name = top.text("name", "");
  if (top.has("seed")) {
    const auto& v = top.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw InvalidArgument("'scenario.seed' must be a nonnegative integer");
    }
    s.seed = v.get<std::uint64_t>();
  }
  for (const char* key : {"grid", "damper", "law", "forcing", "initial", "numerics",
                          "constants", "ensemble"}) {
    top.has(key);
  }
  top.finish();

  {
    Reader r(section(j, "grid"), "grid");
    s.grid.dimension = checked_int(r.integer("dimension", 1), "grid.dimension");
    s.grid.length = r.number("length", 1.0);
    s.grid.nodes = checked_int(r.integer("nodes", 400), "grid.nodes");
    s.grid.length2 = r.number("length2", s.grid.length);
    s.grid.nodes2 = checked_int(r.integer("nodes2", s.grid.dimension == 2 ? s.grid.nodes : 0),
                                "grid.nodes2");
    r.finish();
  }
  {
    Reader r(section(j, "damper"), "damper");
    if (r.has("intervals")) {
      const auto& a = r.at("intervals");
      if (!a.is_array()) throw InvalidArgument("'damper.intervals' must be an array");
      for (const auto& iv : a) {
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
          throw InvalidArgument("each damper interval must be [lo, hi]");
        }
        s.damper.intervals.push_back({iv[0].get<double>(), iv[1].get<double>()});
      }
    }
    if (r.has("rectangles")) {
      const auto& a = r.at("rectangles");
      if (!a.is_array()) throw InvalidArgument("'damper.rectangles' must be an array");
      for (const auto& rc : a) {
        if (!rc.is_array() || rc.size() != 4) {
          throw InvalidArgument("each damper rectangle must be [x0, x1, y0, y1]");
        }
        for (const auto& v : rc) {
          if (!v.is_number()) throw InvalidArgument("damper rectangle entries must be numbers");
        }
        s.damper.rectangles.push_back({rc[0].get<double>(), rc[1].get<double>(),
                                       rc[2].get<double>(), rc[3].get<double>()});
      }
    }
    s.damper.amplitude = r.number("amplitude", 1.0);
    s.damper.smoothing = r.opt_number("smoothing");
    r.finish();
  }
  {
    Reader r(section(j, "law"), "law");
    s.law.kind = r.text("kind", "linear");
    s.law.r0 = r.number("r0", 0.5);
    s.law.file = r.text("file", "");
    s.law.h0_exponent = r.number("h0_exponent", 1.0);
    r.finish();
  }
  {
    Reader r(section(j, "forcing"), "forcing");
    s.forcing.profile = r.text("profile", "zero");
    s.forcing.M = r.number("M", 0.0);
    s.forcing.theta = r.number("theta", 0.0);
    s.forcing.file = r.text("file", "");
    s.forcing.shape = r.text("shape", "sine");
    s.forcing.mode = checked_int(r.integer("mode", 1), "forcing.mode");
    s.forcing.centre = r.number("centre", 0.5);
    s.forcing.width = r.number("width", 0.25);
    r.finish();
  }
  {
    Reader r(section(j, "initial"), "initial");
    s.initial.kind = r.text("kind", "sine_mode");
    s.initial.mode = checked_int(r.integer("mode", 1), "initial.mode");
    s.initial.amplitude = r.number("amplitude", 1.0);
    s.initial.velocity = r.number("velocity", 0.0);
    s.initial.u0 = r.numbers("u0");
    s.initial.u1 = r.numbers("u1");
    s.initial.file = r.text("file", "");
    r.finish();
  }
  {
    Reader r(section(j, "numerics"), "numerics");
    s.numerics.dt = r.opt_number("dt");
    s.numerics.dt_factor = r.number("dt_factor", 0.45);
    s.numerics.horizon = r.number("horizon", 10.0);
    s.numerics.sample_stride = checked_count(r.integer("sample_stride", 1), "numerics.sample_stride");
    s.numerics.ode_horizon = r.opt_number("ode_horizon");
    s.numerics.ode_dt = r.opt_number("ode_dt");
    const auto fw = r.numbers("fit_window");
    if (!fw.empty()) {
      if (fw.size() != 2) throw InvalidArgument("'numerics.fit_window' must be [t0, t1]");
      s.numerics.fit_window = std::array<double, 2>{fw[0], fw[1]};
    }
    r.finish();
  }
  {
    Reader r(section(j, "constants"), "constants");
    s.constants.T = r.opt_number("T");
    s.constants.C_T = r.opt_number("C_T");
    s.constants.C1T = r.opt_number("C1T");
    s.constants.K = r.opt_number("K");
    s.constants.envelope_factor = r.number("envelope_factor", 2.0);
    s.constants.safety_factor = r.number("safety_factor", 2.0);
    s.constants.agreement_tolerance = r.number("agreement_tolerance", 0.15);
    r.finish();
  }
  {
    Reader r(section(j, "ensemble"), "ensemble");
    s.ensemble.runs = checked_count(r.integer("runs", 32), "ensemble.runs");
    s.ensemble.modes = checked_int(r.integer("modes", 16), "ensemble.modes");
    s.ensemble.random_forcing = r.boolean("random_forcing", true);
    s.ensemble.horizon = r.opt_number("horizon");
    if (r.has("nodes")) s.ensemble.nodes = checked_int(r.integer("nodes", 0), "ensemble.nodes");
    s.ensemble.workers = checked_count(r.integer("workers", 0), "ensemble.workers");
    r.finish();
  }
  return s;
}

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path().string();
  return from_json(j, dir);
}

json Scenario::to_json() const {
  json j;
  if (!name.empty()) j["name"] = name;
  if (seed) j["seed"] = *seed;

  json g;
  g["dimension"] = grid.dimension;
  g["length"] = grid.length;
  g["nodes"] = grid.nodes;
  if (grid.dimension == 2) {
    g["length2"] = grid.length2;
    g["nodes2"] = grid.nodes2;
  }
  j["grid"] = g;

  json d;
  if (!damper.intervals.empty()) {
    d["intervals"] = json::array();
    for (const auto& iv : damper.intervals) d["intervals"].push_back({iv.lo, iv.hi});
  }
  if (!damper.rectangles.empty()) {
    d["rectangles"] = json::array();
    for (const auto& r : damper.rectangles) d["rectangles"].push_back({r.x0, r.x1, r.y0, r.y1});
  }
  d["amplitude"] = damper.amplitude;
  if (damper.smoothing) d["smoothing"] = *damper.smoothing;
  j["damper"] = d;

  json l;
  l["kind"] = law.kind;
  l["r0"] = law.r0;
  l["h0_exponent"] = law.h0_exponent;
  if (!law.file.empty()) l["file"] = law.file;
  j["law"] = l;

  json f;
  f["profile"] = forcing.profile;
  f["M"] = forcing.M;
  f["theta"] = forcing.theta;
  if (!forcing.file.empty()) f["file"] = forcing.file;
  f["shape"] = forcing.shape;
  f["mode"] = forcing.mode;
  f["centre"] = forcing.centre;
  f["width"] = forcing.width;
  j["forcing"] = f;

  json in;
  in["kind"] = initial.kind;
  in["mode"] = initial.mode;
  in["amplitude"] = initial.amplitude;
  in["velocity"] = initial.velocity;
  if (!initial.u0.empty()) in["u0"] = initial.u0;
  if (!initial.u1.empty()) in["u1"] = initial.u1;
  if (!initial.file.empty()) in["file"] = initial.file;
  j["initial"] = in;

  json n;
  if (numerics.dt) n["dt"] = *numerics.dt;
  n["dt_factor"] = numerics.dt_factor;
  n["horizon"] = numerics.horizon;
  n["sample_stride"] = numerics.sample_stride;
  if (numerics.ode_horizon) n["ode_horizon"] = *numerics.ode_horizon;
  if (numerics.ode_dt) n["ode_dt"] = *numerics.ode_dt;
  if (numerics.fit_window) n["fit_window"] = {(*numerics.fit_window)[0], (*numerics.fit_window)[1]};
  j["numerics"] = n;

  json c;
  if (constants.T) c["T"] = *constants.T;
  if (constants.C_T) c["C_T"] = *constants.C_T;
  if (constants.C1T) c["C1T"] = *constants.C1T;
  if (constants.K) c["K"] = *constants.K;
  c["envelope_factor"] = constants.envelope_factor;
  c["safety_factor"] = constants.safety_factor;
  c["agreement_tolerance"] = constants.agreement_tolerance;
  j["constants"] = c;

  json e;
  e["runs"] = ensemble.runs;
  e["modes"] = ensemble.modes;
  e["random_forcing"] = ensemble.random_forcing;
  if (ensemble.horizon) e["horizon"] = *ensemble.horizon;
  if (ensemble.nodes) e["nodes"] = *ensemble.nodes;
  e["workers"] = ensemble.workers;
  j["ensemble"] = e;
  return j;
}

std::string Scenario::resolve(const std::string& file) const {
  if (file.empty()) throw InvalidArgument("missing file name");
  const std::filesystem::path p(file);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

Grid Scenario::build_grid() const {
  if (grid.dimension == 1) return Grid::interval(grid.length, grid.nodes);
  if (grid.dimension == 2) {
    return Grid::rectangle(grid.length, grid.length2, grid.nodes, grid.nodes2);
  }
  throw InvalidArgument("grid dimension must be 1 or 2");
}

Grid Scenario::build_ensemble_grid() const {
  if (!ensemble.nodes) return build_grid();
  const int n = *ensemble.nodes;
  if (grid.dimension == 1) return Grid::interval(grid.length, n);
  const int n2 = static_cast<int>(std::lround(n * grid.length2 / grid.length));
  return Grid::rectangle(grid.length, grid.length2, n, std::max(n2, Grid::kMinCells));
}

DamperProfile Scenario::build_damper(const Grid& g) const {
  const double smoothing = damper.smoothing ? *damper.smoothing : 2.0 * g.dx();
  if (g.dimension() == 1) {
    if (!damper.rectangles.empty()) throw InvalidArgument("rectangles need a 2D grid");
    return wavedecay::build_damper(g, damper.intervals, damper.amplitude, smoothing);
  }
  if (!damper.intervals.empty()) throw InvalidArgument("intervals need a 1D grid");
  return wavedecay::build_damper(g, damper.rectangles, damper.amplitude, smoothing);
}

DampingLaw Scenario::build_law() const {
  if (law.kind == "linear") return DampingLaw::linear();
  if (law.kind == "sublinear") return DampingLaw::sublinear(law.r0);
  if (law.kind == "superlinear") return DampingLaw::superlinear();
  if (law.kind == "table") return DampingLaw::from_csv(resolve(law.file), law.h0_exponent);
  throw InvalidArgument("unknown damping law '" + law.kind + "'");
}

ForcingTerm Scenario::build_forcing(const Grid& g) const {
  if (forcing.profile == "field") return ForcingTerm::from_field_csv(g, resolve(forcing.file));
  TimeProfile rho;
  if (forcing.profile == "zero") {
    rho = TimeProfile::zero();
  } else if (forcing.profile == "exponential") {
    rho = TimeProfile::exponential(forcing.M, forcing.theta);
  } else if (forcing.profile == "polynomial") {
    rho = TimeProfile::polynomial(forcing.M, forcing.theta);
  } else if (forcing.profile == "table") {
    rho = TimeProfile::from_csv(resolve(forcing.file));
  } else {
    throw InvalidArgument("unknown forcing profile '" + forcing.profile + "'");
  }
  ShapeSpec shape;
  if (forcing.shape == "sine") {
    shape.kind = ShapeSpec::Kind::sine;
  } else if (forcing.shape == "bump") {
    shape.kind = ShapeSpec::Kind::bump;
  } else {
    throw InvalidArgument("unknown forcing shape '" + forcing.shape + "'");
  }
  shape.mode = forcing.mode;
  shape.centre = forcing.centre;
  shape.width = forcing.width;
  return ForcingTerm::separable(g, std::move(rho), shape);
}

WaveState Scenario::build_initial(const Grid& g) const {
  const double L = g.length();
  const double L2 = g.dimension() == 2 ? g.length2() : 1.0;
  const bool two_d = g.dimension() == 2;
  auto mode_fn = [=](int k, double x, double y) {
    double v = std::sin(k * std::numbers::pi * x / L);
    if (two_d) v *= std::sin(std::numbers::pi * y / L2);
    return v;
  };
  if (initial.kind == "sine_mode") {
    if (initial.mode < 1) throw InvalidArgument("initial mode must be at least 1");
    const int k = initial.mode;
    const double a = initial.amplitude;
    const double b = initial.velocity;
    return make_state(
        g, [&](double x, double y) { return a * mode_fn(k, x, y); },
        [&](double x, double y) { return b * mode_fn(k, x, y); });
  }
  if (initial.kind == "fourier") {
    if (initial.u0.empty() && initial.u1.empty()) {
      throw InvalidArgument("fourier initial data needs u0 or u1 coefficients");
    }
    auto series = [&](const std::vector<double>& c) {
      return [&c, &mode_fn](double x, double y) {
        double acc = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
          acc += c[k] * mode_fn(static_cast<int>(k) + 1, x, y);
        }
        return acc;
      };
    };
    return make_state(g, series(initial.u0), series(initial.u1));
  }
  if (initial.kind == "table") {
    const auto cols = read_numeric_csv(resolve(initial.file), 2);
    if (cols[0].size() != g.node_count()) {
      throw InvalidArgument("initial table has " + std::to_string(cols[0].size()) +
                            " rows, grid has " + std::to_string(g.node_count()) + " nodes");
    }
    WaveState s;
    s.u = cols[0];
    s.v = cols[1];
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      if (g.is_boundary(k)) s.u[k] = s.v[k] = 0.0;
    }
    return s;
  }
  throw InvalidArgument("unknown initial data kind '" + initial.kind + "'");
}

ControlTime Scenario::control_time() const {
  if (grid.dimension == 2) {
    if (!constants.T) {
      throw InvalidArgument("2D scenarios need constants.T (control time is user-supplied)");
    }
    return {*constants.T / kControlTimeMargin, ControlTime::Method::user_supplied};
  }
  return control_time_1d(build_grid(), damper.intervals);
}

double Scenario::working_T() const {
  if (constants.T) {
    if (!(*constants.T > 0.0)) throw InvalidArgument("constants.T must be positive");
    return *constants.T;
  }
  return kControlTimeMargin * control_time().t_min;
}

double Scenario::dt(const Grid& g) const {
  if (numerics.dt) return *numerics.dt;
  return numerics.dt_factor * g.max_stable_dt(1.0);
}

double Scenario::ode_horizon() const {
  return std::max(numerics.ode_horizon.value_or(numerics.horizon), numerics.horizon);
}

void Scenario::validate() const {
  const Grid g = build_grid();
  build_damper(g);
  build_law();
  build_forcing(g);
  build_initial(g);
  if (!(numerics.horizon >= 0.0) || !std::isfinite(numerics.horizon)) {
    throw InvalidArgument("horizon must be nonnegative");
  }
  const double T = working_T();
  if (numerics.horizon <= T) throw InvalidArgument("horizon must exceed T");
  if (numerics.horizon < 2.0 * T) throw InvalidArgument("horizon must be at least 2T");
  if (numerics.sample_stride == 0) throw InvalidArgument("sample_stride must be positive");
  if (!numerics.dt && !(numerics.dt_factor > 0.0)) {
    throw InvalidArgument("dt_factor must be positive");
  }
  check_cfl(g, dt(g));
  if (numerics.ode_dt && !(*numerics.ode_dt > 0.0)) throw InvalidArgument("ode_dt must be positive");
  if (numerics.fit_window) {
    const auto& w = *numerics.fit_window;
    if (!(w[0] >= 0.0 && w[1] > w[0] && w[1] <= numerics.horizon)) {
      throw InvalidArgument("fit_window must satisfy 0 <= t0 < t1 <= horizon");
    }
  }
  if (constants.C_T && !(*constants.C_T >= 1.0)) throw InvalidArgument("C_T must be at least 1");
  if (constants.C1T && !(*constants.C1T >= 1.0)) throw InvalidArgument("C1T must be at least 1");
  if (constants.K) {
    if (!(*constants.K > 0.0)) throw InvalidArgument("K must be positive");
    if (constants.C_T && *constants.K < *constants.C_T) throw InvalidArgument("K must be at least C_T");
  }
  if (!(constants.envelope_factor >= 0.0)) throw InvalidArgument("envelope_factor must be nonnegative");
  if (!(constants.safety_factor >= 1.0)) throw InvalidArgument("safety_factor must be at least 1");
  if (!(constants.agreement_tolerance > 0.0)) {
    throw InvalidArgument("agreement_tolerance must be positive");
  }
  if (ensemble.runs == 0) throw InvalidArgument("ensemble.runs must be positive");
  if (ensemble.modes < 1) throw InvalidArgument("ensemble.modes must be positive");
  if (ensemble.horizon && *ensemble.horizon < T) {
    throw InvalidArgument("ensemble horizon must exceed T");
  }
  build_ensemble_grid();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Scenario& s) {
  if (flag) return *flag;
  if (s.seed) return *s.seed;
  if (const char* env = std::getenv("WAVEDECAY_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || env[0] == '-') {
      throw InvalidArgument("WAVEDECAY_SEED must be a nonnegative integer");
    }
    return v;
  }
  return 1;
}

}  // namespace wavedecay
