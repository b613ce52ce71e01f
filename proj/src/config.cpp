#include "chns/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "chns/errors.hpp"

namespace chns {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Reads one JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(name() + " must be an object");
  }

  std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }

  bool has(const std::string& k) const { return j_.contains(k); }

  void num(const std::string& k, double& out, double null_value = std::nan("")) {
    if (!take(k)) return;
    const json& v = j_.at(k);
    if (v.is_null() && !std::isnan(null_value)) {
      out = null_value;
      return;
    }
    if (!v.is_number()) throw ConfigError(key(k) + " must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(key(k) + " must be finite");
  }

  void integer(const std::string& k, int& out) {
    if (!take(k)) return;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k) + " must be an integer");
    out = v.get<int>();
  }

  void uint64(const std::string& k, std::uint64_t& out) {
    if (!take(k)) return;
    const json& v = j_.at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(key(k) + " must be a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& k, bool& out) {
    if (!take(k)) return;
    const json& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(key(k) + " must be true or false");
    out = v.get<bool>();
  }

  void str(const std::string& k, std::string& out, std::initializer_list<const char*> allowed = {}) {
    if (!take(k)) return;
    const json& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(key(k) + " must be a string");
    out = v.get<std::string>();
    if (allowed.size() == 0) return;
    std::string list;
    for (const char* a : allowed) {
      if (out == a) return;
      list += std::string(list.empty() ? "" : ", ") + a;
    }
    throw ConfigError(key(k) + ": '" + out + "' is not one of " + list);
  }

  /// Nested object; absent keys yield an empty object.
  Reader sub(const std::string& k) {
    static const json empty = json::object();
    return Reader(take(k) ? j_.at(k) : empty, key(k));
  }

  /// Throws on keys that were never consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + key(it.key()) + "'");
  }

 private:
  std::string name() const { return prefix_.empty() ? "config" : prefix_; }
  bool take(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void read_coefficient(Reader r, Coefficient& c) {
  r.num("c0", c.c0);
  r.num("c1", c.c1);
  r.finish();
}

json bound(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

void RunConfig::validate() const {
  physics.validate();
  const ObstacleInterval& k = potential.interval;
  if (!(k.psi1 < k.psi2)) throw ConfigError("potential.psi1 must be < potential.psi2");
  if (k.psi1 != physics.psi1() || k.psi2 != physics.psi2())
    throw ConfigError("potential.psi1/psi2 must equal -1 - physics.mean_shift and 1 - physics.mean_shift");
  k.validate();
  make_family(*this);  // schedule and theta rule checks
  if (!(potential.theta_rule(potential.alpha0) < potential.alpha0))
    throw ConfigError("potential.theta_rule: theta(alpha0) must be < alpha0");
  if (!(2.0 * potential.theta_rule(potential.alpha0) < k.psi2 - k.psi1))
    throw ConfigError("potential.theta_rule: 2 theta(alpha0) must be < psi2 - psi1");
  if (!(initial.amplitude >= 0.0)) throw ConfigError("initial.amplitude must be >= 0");
  if (!(initial.width > 0.0)) throw ConfigError("initial.width must be > 0");
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
  if (solver.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (solver.max_halvings < 0) throw ConfigError("solver.max_halvings must be >= 0");
  if (!(objective.xi >= 0.0)) throw ConfigError("objective.xi must be >= 0");
  if (objective.target_stage < 0 || objective.target_stage >= potential.n_stages)
    throw ConfigError("objective.target_stage must lie in [0, potential.n_stages)");
  if (objective.box_lower > objective.box_upper)
    throw ConfigError("objective.box_lower must be <= objective.box_upper");
  if (objective.box_lower > 0.0 || objective.box_upper < 0.0)
    throw ConfigError("objective: the box must contain 0 (boundary faces are pinned to 0)");
  if (!(objective.xi > 0.0) && !(std::isfinite(objective.box_lower) && std::isfinite(objective.box_upper)))
    throw ConfigError("objective: need xi > 0 or a bounded control box");
  if (!(optimizer.tol_stat > 0.0)) throw ConfigError("optimizer.tol_stat must be > 0");
  if (optimizer.max_iters < 0) throw ConfigError("optimizer.max_iters must be >= 0");
  if (!(optimizer.armijo_c > 0.0 && optimizer.armijo_c < 1.0))
    throw ConfigError("optimizer.armijo_c must lie in (0, 1)");
  if (!(optimizer.backtrack > 0.0 && optimizer.backtrack < 1.0))
    throw ConfigError("optimizer.backtrack must lie in (0, 1)");
  if (optimizer.max_backtracks < 1) throw ConfigError("optimizer.max_backtracks must be >= 1");
  if (!(optimizer.initial_step > 0.0)) throw ConfigError("optimizer.initial_step must be > 0");
  if (!(continuation.tol_act > 0.0)) throw ConfigError("continuation.tol_act must be > 0");
  if (!(continuation.eps_set_tol > 0.0)) throw ConfigError("continuation.eps_set_tol must be > 0");
  if (!(continuation.decay_factor >= 0.0)) throw ConfigError("continuation.decay_factor must be >= 0");
  if (gradcheck.directions < 1) throw ConfigError("gradcheck.directions must be >= 1");
  if (!(gradcheck.step > 0.0)) throw ConfigError("gradcheck.step must be > 0");
  if (!(gradcheck.tolerance > 0.0)) throw ConfigError("gradcheck.tolerance must be > 0");
  if (!(gradcheck.transpose_tolerance > 0.0))
    throw ConfigError("gradcheck.transpose_tolerance must be > 0");
  if (!(audit.slack_tol >= 0.0)) throw ConfigError("audit.slack_tol must be >= 0");
  if (!(audit.mass_tol >= 0.0)) throw ConfigError("audit.mass_tol must be >= 0");
  if (!(audit.div_tol >= 0.0)) throw ConfigError("audit.div_tol must be >= 0");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    c.validate();
    return c;
  }
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  try {
    Reader r(root, "");

    Reader grid = r.sub("grid");
    grid.integer("nx", c.physics.grid.nx);
    grid.integer("ny", c.physics.grid.ny);
    grid.num("lx", c.physics.grid.lx);
    grid.num("ly", c.physics.grid.ly);
    grid.finish();

    Reader ph = r.sub("physics");
    ph.num("rho1", c.physics.rho1);
    ph.num("rho2", c.physics.rho2);
    ph.num("mean_shift", c.physics.mean_shift);
    read_coefficient(ph.sub("mobility"), c.physics.mobility);
    read_coefficient(ph.sub("viscosity"), c.physics.viscosity);
    ph.num("b1", c.physics.b1);
    ph.num("b2", c.physics.b2);
    ph.finish();

    Reader t = r.sub("time");
    t.num("tau", c.physics.tau);
    t.integer("M", c.physics.M);
    t.finish();

    Reader po = r.sub("potential");
    c.potential.interval.psi1 = c.physics.psi1();
    c.potential.interval.psi2 = c.physics.psi2();
    po.num("psi1", c.potential.interval.psi1);
    po.num("psi2", c.potential.interval.psi2);
    po.num("kappa", c.potential.interval.kappa);
    po.num("alpha0", c.potential.alpha0);
    po.num("alpha_factor", c.potential.alpha_factor);
    po.integer("n_stages", c.potential.n_stages);
    std::string rule = c.potential.theta_rule.str();
    po.str("theta_rule", rule);
    c.potential.theta_rule = ThetaRule::parse(rule);
    po.finish();

    Reader in = r.sub("initial");
    in.str("phi", c.initial.phi, {"spinodal", "stripes", "zero"});
    in.num("amplitude", c.initial.amplitude);
    in.num("width", c.initial.width);
    in.str("velocity", c.initial.velocity, {"zero", "stream"});
    in.num("velocity_amplitude", c.initial.velocity_amplitude);
    in.str("control", c.initial.control, {"zero", "stream"});
    in.num("control_amplitude", c.initial.control_amplitude);
    in.finish();

    Reader so = r.sub("solver");
    so.num("tol", c.solver.tol);
    so.integer("max_iters", c.solver.max_iters);
    so.boolean("line_search", c.solver.line_search);
    so.integer("max_halvings", c.solver.max_halvings);
    so.boolean("polish", c.solver.polish);
    so.finish();

    Reader ob = r.sub("objective");
    ob.str("target", c.objective.target, {"zero", "initial", "known_control"});
    ob.num("target_amplitude", c.objective.target_amplitude);
    ob.integer("target_stage", c.objective.target_stage);
    ob.boolean("target_project", c.objective.target_project);
    ob.num("xi", c.objective.xi);
    ob.num("box_lower", c.objective.box_lower, -kInf);
    ob.num("box_upper", c.objective.box_upper, kInf);
    ob.finish();

    Reader op = r.sub("optimizer");
    op.num("tol_stat", c.optimizer.tol_stat);
    op.integer("max_iters", c.optimizer.max_iters);
    op.num("armijo_c", c.optimizer.armijo_c);
    op.num("backtrack", c.optimizer.backtrack);
    op.integer("max_backtracks", c.optimizer.max_backtracks);
    op.num("initial_step", c.optimizer.initial_step);
    op.boolean("bb_step", c.optimizer.bb_step);
    op.finish();

    Reader co = r.sub("continuation");
    co.num("tol_act", c.continuation.tol_act);
    co.num("eps_set_tol", c.continuation.eps_set_tol);
    co.num("decay_factor", c.continuation.decay_factor);
    co.finish();

    Reader gc = r.sub("gradcheck");
    gc.integer("directions", c.gradcheck.directions);
    gc.num("step", c.gradcheck.step);
    gc.num("tolerance", c.gradcheck.tolerance);
    gc.num("transpose_tolerance", c.gradcheck.transpose_tolerance);
    gc.finish();

    Reader au = r.sub("audit");
    au.num("slack_tol", c.audit.slack_tol);
    au.num("mass_tol", c.audit.mass_tol);
    au.num("div_tol", c.audit.div_tol);
    au.boolean("snapshots", c.audit.snapshots);
    au.finish();

    r.uint64("seed", c.seed);
    r.finish();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  const PhysConfig& p = c.physics;
  json j;
  j["grid"] = {{"nx", p.grid.nx}, {"ny", p.grid.ny}, {"lx", p.grid.lx}, {"ly", p.grid.ly}};
  j["physics"] = {{"rho1", p.rho1},
                  {"rho2", p.rho2},
                  {"mean_shift", p.mean_shift},
                  {"mobility", {{"c0", p.mobility.c0}, {"c1", p.mobility.c1}}},
                  {"viscosity", {{"c0", p.viscosity.c0}, {"c1", p.viscosity.c1}}},
                  {"b1", p.b1},
                  {"b2", p.b2}};
  j["time"] = {{"tau", p.tau}, {"M", p.M}};
  j["potential"] = {{"psi1", c.potential.interval.psi1},
                    {"psi2", c.potential.interval.psi2},
                    {"kappa", c.potential.interval.kappa},
                    {"alpha0", c.potential.alpha0},
                    {"alpha_factor", c.potential.alpha_factor},
                    {"n_stages", c.potential.n_stages},
                    {"theta_rule", c.potential.theta_rule.str()}};
  j["initial"] = {{"phi", c.initial.phi},
                  {"amplitude", c.initial.amplitude},
                  {"width", c.initial.width},
                  {"velocity", c.initial.velocity},
                  {"velocity_amplitude", c.initial.velocity_amplitude},
                  {"control", c.initial.control},
                  {"control_amplitude", c.initial.control_amplitude}};
  j["solver"] = {{"tol", c.solver.tol},
                 {"max_iters", c.solver.max_iters},
                 {"line_search", c.solver.line_search},
                 {"max_halvings", c.solver.max_halvings},
                 {"polish", c.solver.polish}};
  j["objective"] = {{"target", c.objective.target},
                    {"target_amplitude", c.objective.target_amplitude},
                    {"target_stage", c.objective.target_stage},
                    {"target_project", c.objective.target_project},
                    {"xi", c.objective.xi},
                    {"box_lower", bound(c.objective.box_lower)},
                    {"box_upper", bound(c.objective.box_upper)}};
  j["optimizer"] = {{"tol_stat", c.optimizer.tol_stat},
                    {"max_iters", c.optimizer.max_iters},
                    {"armijo_c", c.optimizer.armijo_c},
                    {"backtrack", c.optimizer.backtrack},
                    {"max_backtracks", c.optimizer.max_backtracks},
                    {"initial_step", c.optimizer.initial_step},
                    {"bb_step", c.optimizer.bb_step}};
  j["continuation"] = {{"tol_act", c.continuation.tol_act},
                       {"eps_set_tol", c.continuation.eps_set_tol},
                       {"decay_factor", c.continuation.decay_factor}};
  j["gradcheck"] = {{"directions", c.gradcheck.directions},
                    {"step", c.gradcheck.step},
                    {"tolerance", c.gradcheck.tolerance},
                    {"transpose_tolerance", c.gradcheck.transpose_tolerance}};
  j["audit"] = {{"slack_tol", c.audit.slack_tol},
                {"mass_tol", c.audit.mass_tol},
                {"div_tol", c.audit.div_tol},
                {"snapshots", c.audit.snapshots}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PotentialFamily make_family(const RunConfig& c) {
  PotentialFamily f = PotentialFamily::geometric(c.potential.interval, c.potential.alpha0,
                                                 c.potential.alpha_factor, c.potential.n_stages,
                                                 c.potential.theta_rule);
  f.validate();
  return f;
}

Model make_model(const RunConfig& c) { return Model{c.physics, make_family(c).member(0)}; }

Scenario make_scenario(const RunConfig& c) {
  const GridSpec& g = c.physics.grid;
  Scenario sc;
  sc.model = make_model(c);
  if (c.initial.phi == "spinodal")
    sc.phi_a = initial_spinodal(g, c.initial.amplitude, c.seed);
  else if (c.initial.phi == "stripes")
    sc.phi_a = initial_stripes(g, c.initial.width, c.initial.amplitude);
  else
    sc.phi_a = CellField(g);
  sc.v_a = c.initial.velocity == "stream" ? stream_field(g, c.initial.velocity_amplitude) : FaceField(g);
  sc.newton = c.solver;
  return sc;
}

namespace {
ControlSeries stream_series(const GridSpec& g, int M, double amplitude) {
  ControlSeries u(g, M);
  const FaceField s = stream_field(g, amplitude);
  for (int k = 1; k <= M - 1; ++k) u.at(k) = s;
  return u;
}
}  // namespace

ControlSeries make_control(const RunConfig& c) {
  if (c.initial.control == "stream")
    return stream_series(c.physics.grid, c.physics.M, c.initial.control_amplitude);
  return ControlSeries(c.physics.grid, c.physics.M);
}

ControlSeries make_target_control(const RunConfig& c) {
  return stream_series(c.physics.grid, c.physics.M, c.objective.target_amplitude);
}

ControlParams make_control_params(const RunConfig& c, const Scenario& sc) {
  const GridSpec& g = c.physics.grid;
  ControlParams cp;
  cp.xi = c.objective.xi;
  cp.box = ControlBox::uniform(g, c.objective.box_lower, c.objective.box_upper);
  if (c.objective.target == "initial") {
    cp.phi_d = sc.phi_a;
  } else if (c.objective.target == "known_control") {
    Model gen = sc.model;
    gen.pot = make_family(c).member(static_cast<std::size_t>(c.objective.target_stage));
    const ForwardResult f = simulate(make_target_control(c), sc.phi_a, sc.v_a, gen, sc.newton);
    cp.phi_d = f.traj.phi(c.physics.M - 1);
    if (c.objective.target_project)
      for (int k = 0; k < cp.phi_d.size(); ++k)
        cp.phi_d.values[k] = proj_K(cp.phi_d.values[k], c.potential.interval);
    cp.phi_d.values.array() -= mean(cp.phi_d);
  } else {
    cp.phi_d = CellField(g);
  }
  cp.validate();
  return cp;
}

}  // namespace chns
