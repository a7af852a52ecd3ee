#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "perdiff/hypotheses.hpp"
#include "perdiff/linear_theory.hpp"
#include "perdiff/ls_reduction.hpp"
#include "perdiff/oracle.hpp"

namespace perdiff::cli {
namespace {

using json = nlohmann::ordered_json;

// Unreadable or malformed input files; maps to kExitParse.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flag values discovered after CLI11 has accepted the command line.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  json doc;
};

json header(const std::string& command) {
  json doc;
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["input"] = json::object();
  return doc;
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

const json& require_field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw InputError("'" + path + "' lacks field \"" + key + "\"");
  return j.at(key);
}

struct LoadedProblem {
  Problem problem;
  std::optional<std::int64_t> seed;
  json echo;
};

LoadedProblem load_problem(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw InputError("'" + path + "' must hold a JSON object");
  const json& b = require_field(j, "b", path);
  const json& c = require_field(j, "c", path);
  const json& n = require_field(j, "N", path);
  const json& g = require_field(j, "g", path);
  if (!b.is_number() || !c.is_number()) throw InputError("\"b\" and \"c\" must be numbers");
  if (!n.is_number_integer()) throw InputError("\"N\" must be an integer");
  if (!g.is_string()) throw InputError("\"g\" must be a string");

  LoadedProblem lp;
  const auto n_value = n.get<std::int64_t>();
  if (n_value < 2 || n_value > 1000000) throw InputError("\"N\" must lie in [2, 1000000]");
  Expr expr;
  try {
    expr = parse(g.get<std::string>());
  } catch (const ParseError& e) {
    throw InputError("\"g\" at offset " + std::to_string(e.offset()) + ": " + e.what());
  }
  try {
    lp.problem = make_problem(b.get<double>(), c.get<double>(), static_cast<int>(n_value), expr);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  lp.echo["path"] = path;
  lp.echo["b"] = lp.problem.b;
  lp.echo["c"] = lp.problem.c;
  lp.echo["N"] = lp.problem.n;
  lp.echo["g"] = g.get<std::string>();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw InputError("\"seed\" must be an integer");
    lp.seed = j["seed"].get<std::int64_t>();
    lp.echo["seed"] = *lp.seed;
  }
  return lp;
}

json to_json(const Vec2& v) { return json::array({v.u, v.v}); }

json to_json(const PeriodicSequence& x) {
  json arr = json::array();
  for (const Vec2& v : x.values()) arr.push_back(to_json(v));
  return arr;
}

json to_json(const CheckReport& rep) {
  json out;
  out["theorem"] = rep.theorem;
  out["overall"] = rep.overall();
  json conds = json::array();
  for (const ConditionVerdict& v : rep.conditions) {
    json c;
    c["id"] = v.id;
    c["pass"] = v.pass;
    c["sampled"] = v.sampled;
    if (v.sampled) c["caveat"] = "sampled, not proven";
    c["note"] = v.note;
    conds.push_back(std::move(c));
  }
  out["conditions"] = std::move(conds);
  out["quantities"] = json::object();
  for (const auto& [k, v] : rep.quantities) out["quantities"][k] = v;
  out["series"] = json::object();
  for (const auto& [k, v] : rep.series) out["series"][k] = v;
  out["sampling"] = json::object();
  for (const auto& [k, v] : rep.sampling) out["sampling"][k] = v;
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw UsageError(what + ": '" + text + "' is not a finite number");
  }
  return v;
}

long long parse_integer(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(what + ": '" + text + "' is not an integer");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

// ---- classify ---------------------------------------------------------------

struct ClassifyArgs {
  std::string problem;
};

int cmd_classify(const ClassifyArgs& a, Context& ctx, std::ostream& out) {
  const LoadedProblem lp = load_problem(a.problem);
  ctx.doc["input"]["problem"] = lp.echo;
  const ResonanceClass cls = classify(lp.problem);
  ctx.doc["dim"] = cls.dim;
  if (cls.theta) ctx.doc["theta"] = *cls.theta;
  if (cls.r_int) ctx.doc["r_int"] = *cls.r_int;
  if (cls.dim > 0) {
    json kb = json::array();
    json ab = json::array();
    for (const auto& s : cls.kernel_basis) kb.push_back(to_json(s));
    for (const auto& s : cls.adjoint_basis) ab.push_back(to_json(s));
    ctx.doc["kernel_basis"] = std::move(kb);
    ctx.doc["adjoint_basis"] = std::move(ab);
  }
  if (std::fabs(lp.problem.b) < 2.0) ctx.doc["in_U"] = membership_U(lp.problem.b).in_u;
  emit(out, ctx.doc);
  return kExitOk;
}

// ---- solve ------------------------------------------------------------------

struct SolveArgs {
  std::string problem;
  SolveOptions opts;
  std::optional<std::int64_t> seed;
};

int cmd_solve(const SolveArgs& a, Context& ctx, std::ostream& out) {
  const LoadedProblem lp = load_problem(a.problem);
  ctx.doc["input"]["problem"] = lp.echo;
  // The solvers are deterministic; the seed is recorded for reproducibility only.
  const std::int64_t seed = a.seed.value_or(lp.seed.value_or(0));
  json opts;
  opts["tol"] = a.opts.tol;
  opts["radius"] = a.opts.radius;
  opts["r"] = a.opts.r;
  opts["grid"] = a.opts.grid;
  opts["seed"] = seed;
  ctx.doc["input"]["options"] = std::move(opts);
  if (!(a.opts.tol > 0.0) || !(a.opts.r > 0.0) || a.opts.radius < 0.0 || a.opts.grid < 1) {
    throw UsageError("--tol and --r must be positive, --radius non-negative, --grid at least 1");
  }

  const SolveReport rep = solve(lp.problem, a.opts);
  ctx.doc["regime"] = rep.regime;
  ctx.doc["y"] = rep.y;
  ctx.doc["residual_sup"] = rep.residual_sup;
  ctx.doc["pre_polish_residual"] = rep.pre_polish_residual;
  ctx.doc["oracle_verified"] = rep.oracle_verified;
  ctx.doc["alpha"] = to_json(rep.alpha);
  if (rep.regime > 0) ctx.doc["radius"] = rep.radius;
  if (rep.winding) ctx.doc["winding"] = *rep.winding;
  if (rep.regime == 2) ctx.doc["degree_evidence"] = rep.degree_evidence;
  if (rep.nontrivial_found) {
    ctx.doc["nontrivial_found"] = *rep.nontrivial_found;
    if (*rep.nontrivial_found) ctx.doc["nontrivial_y"] = rep.nontrivial_y;
  }
  json it;
  it["outer"] = rep.iterations.outer;
  it["inner_picard"] = rep.iterations.inner_picard;
  it["inner_newton"] = rep.iterations.inner_newton;
  it["map_evaluations"] = rep.iterations.map_evaluations;
  ctx.doc["iterations"] = std::move(it);
  ctx.doc["notes"] = rep.notes;
  emit(out, ctx.doc);
  return kExitOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string problem;
  std::string solution;
  double tol = 1e-9;
};

int cmd_verify(const VerifyArgs& a, Context& ctx, std::ostream& out) {
  const LoadedProblem lp = load_problem(a.problem);
  ctx.doc["input"]["problem"] = lp.echo;
  ctx.doc["input"]["solution_path"] = a.solution;
  ctx.doc["input"]["options"] = {{"tol", a.tol}};
  if (!(a.tol > 0.0)) throw UsageError("--tol must be positive");

  const json sol = read_json_file(a.solution);
  if (!sol.is_object() || !sol.contains("y") || !sol["y"].is_array()) {
    throw InputError("'" + a.solution + "' must hold an object with array field \"y\"");
  }
  std::vector<double> y;
  for (const json& v : sol["y"]) {
    if (!v.is_number()) throw InputError("\"y\" must contain only numbers");
    y.push_back(v.get<double>());
  }
  ctx.doc["input"]["y"] = y;
  if (y.size() != static_cast<std::size_t>(lp.problem.n)) {
    throw InputError("\"y\" has " + std::to_string(y.size()) + " entries, expected N = " +
                     std::to_string(lp.problem.n));
  }
  const std::vector<double> r = oracle::residual(lp.problem, y);
  double sup = 0.0;
  for (double v : r) sup = std::fmax(sup, std::fabs(v));
  const bool pass = sup <= a.tol;
  ctx.doc["residual"] = r;
  ctx.doc["residual_sup"] = sup;
  ctx.doc["pass"] = pass;
  emit(out, ctx.doc);
  return pass ? kExitOk : kExitHypothesis;
}

// ---- check ------------------------------------------------------------------

struct CheckArgs {
  std::string problem;
  std::string theorem;
  double r = 10.0;
  double zhat = 1.0;
  double big_r = 1.0;
  std::optional<int> grid;
  std::string r_schedule = "10,100,1000,10000,100000,1000000";
};

int cmd_check(const CheckArgs& a, Context& ctx, std::ostream& out) {
  const LoadedProblem lp = load_problem(a.problem);
  ctx.doc["input"]["problem"] = lp.echo;
  json opts;
  opts["theorem"] = a.theorem;
  CheckReport rep;
  if (a.theorem == "thm1") {
    const int grid = a.grid.value_or(401);
    opts["r"] = a.r;
    opts["zhat"] = a.zhat;
    opts["grid"] = grid;
    ctx.doc["input"]["options"] = std::move(opts);
    rep = check_thm1(lp.problem, a.r, a.zhat, grid);
  } else if (a.theorem == "cor") {
    const int grid = a.grid.value_or(2001);
    std::vector<double> schedule;
    for (const std::string& s : split(a.r_schedule, ',')) schedule.push_back(parse_double(s, "--r-schedule"));
    opts["R"] = a.big_r;
    opts["r_schedule"] = schedule;
    opts["grid"] = grid;
    ctx.doc["input"]["options"] = std::move(opts);
    rep = check_corollary(lp.problem, a.big_r, schedule, grid);
  } else {
    const int grid = a.grid.value_or(2001);
    opts["zhat"] = a.zhat;
    opts["grid"] = grid;
    ctx.doc["input"]["options"] = std::move(opts);
    rep = check_thm2(lp.problem, a.zhat, grid);
  }
  ctx.doc["report"] = to_json(rep);
  emit(out, ctx.doc);
  return rep.overall() ? kExitOk : kExitHypothesis;
}

// ---- scan -------------------------------------------------------------------

struct ScanArgs {
  std::string b_range;
  double c = 1.0;
  std::string n_list = "3";
  std::string out_path;
};

std::vector<double> expand_range(const std::string& spec) {
  const std::vector<std::string> parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("--b-range must look like lo:hi:steps");
  const double lo = parse_double(parts[0], "--b-range lo");
  const double hi = parse_double(parts[1], "--b-range hi");
  const long long steps = parse_integer(parts[2], "--b-range steps");
  if (steps < 0 || steps > 10000000) throw UsageError("--b-range steps must lie in [0, 1e7]");
  std::vector<double> out;
  if (steps == 1) return {lo};
  for (long long k = 0; k < steps; ++k) {
    out.push_back(k == steps - 1 ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
  }
  return out;
}

std::string scan_row(double b, double c, int n) {
  const Problem p = make_problem(b, c, n, parse("0"));
  const ResonanceClass cls = classify(p);
  std::string theta;
  std::string in_u = "false";
  if (std::fabs(b) < 2.0) {
    const UMembership u = membership_U(b);
    theta = format_double(u.theta);
    in_u = u.in_u ? "true" : "false";
  }
  std::string r_int;
  std::string g;
  if (cls.r_int) {
    r_int = std::to_string(*cls.r_int);
    g = std::to_string(std::gcd(*cls.r_int, n));
  }
  return format_double(b) + "," + format_double(c) + "," + std::to_string(n) + "," +
         std::to_string(cls.dim) + "," + theta + "," + in_u + "," + r_int + "," + g + "\n";
}

int cmd_scan(const ScanArgs& a, Context& ctx, std::ostream& out) {
  ctx.doc["input"]["options"] = {{"b_range", a.b_range}, {"c", a.c}, {"N_list", a.n_list}};
  const std::vector<double> bs = expand_range(a.b_range);
  std::vector<int> ns;
  for (const std::string& s : split(a.n_list, ',')) {
    const long long n = parse_integer(s, "--N-list");
    if (n < 2 || n > 1000000) throw UsageError("--N-list entries must lie in [2, 1000000]");
    ns.push_back(static_cast<int>(n));
  }
  if (a.c == 0.0 || !std::isfinite(a.c)) throw UsageError("--c must be finite and non-zero");

  std::string csv = "b,c,N,dim,theta,in_U,r_int,gcd\n";
  for (double b : bs) {
    for (int n : ns) csv += scan_row(b, a.c, n);
  }
  if (a.out_path.empty()) {
    out << csv;
  } else {
    std::ofstream file(a.out_path, std::ios::binary);
    if (!file || !(file << csv)) throw InputError("cannot write '" + a.out_path + "'");
  }
  return kExitOk;
}

json error_body(const std::string& kind, const std::string& message) {
  return json{{"kind", kind}, {"message", message}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic solutions of y(t+2) + b y(t+1) + c y(t) = g(t, y(t))", "perdiff"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ClassifyArgs classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "Kernel dimension and bases of the linear part");
  classify_cmd->add_option("problem", classify_args.problem, "Problem JSON file")->required();

  SolveArgs solve_args;
  std::int64_t solve_seed = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Compute a periodic solution");
  solve_cmd->add_option("problem", solve_args.problem, "Problem JSON file")->required();
  solve_cmd->add_option("--tol", solve_args.opts.tol, "Residual tolerance")->capture_default_str();
  solve_cmd->add_option("--radius", solve_args.opts.radius, "Disk radius in dimension two (0 = automatic)")
      ->capture_default_str();
  solve_cmd->add_option("--r", solve_args.opts.r, "Bracket half-width in dimension one")->capture_default_str();
  solve_cmd->add_option("--grid", solve_args.opts.grid, "Seeds per axis in dimension two")->capture_default_str();
  auto* seed_opt = solve_cmd->add_option("--seed", solve_seed, "Seed recorded in the report");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Residual of a candidate solution");
  verify_cmd->add_option("problem", verify_args.problem, "Problem JSON file")->required();
  verify_cmd->add_option("solution", verify_args.solution, "Solution JSON file {\"y\": [...]}")->required();
  verify_cmd->add_option("--tol", verify_args.tol, "Pass threshold on the sup residual")->capture_default_str();

  CheckArgs check_args;
  int check_grid = 0;
  auto* check_cmd = app.add_subcommand("check", "Check the hypotheses of an existence theorem");
  check_cmd->add_option("problem", check_args.problem, "Problem JSON file")->required();
  check_cmd->add_option("--theorem", check_args.theorem, "thm1, cor or thm2")
      ->required()
      ->check(CLI::IsMember({"thm1", "cor", "thm2"}));
  check_cmd->add_option("--r", check_args.r, "Ball radius r")->capture_default_str();
  check_cmd->add_option("--zhat", check_args.zhat, "Sign threshold zhat")->capture_default_str();
  check_cmd->add_option("--R", check_args.big_r, "Sign threshold R of the corollary")->capture_default_str();
  auto* grid_opt = check_cmd->add_option("--grid", check_grid, "Sampling grid size");
  check_cmd->add_option("--r-schedule", check_args.r_schedule, "Comma-separated radii for C1*")
      ->capture_default_str();

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("scan", "Classify a sweep of (b, N) pairs as CSV");
  scan_cmd->add_option("--b-range", scan_args.b_range, "lo:hi:steps")->required();
  scan_cmd->add_option("--c", scan_args.c, "Coefficient c")->capture_default_str();
  scan_cmd->add_option("--N-list", scan_args.n_list, "Comma-separated periods")->capture_default_str();
  scan_cmd->add_option("--out", scan_args.out_path, "CSV output path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Context ctx;
  std::string command;
  try {
    if (classify_cmd->parsed()) {
      command = "classify";
      ctx.doc = header(command);
      return cmd_classify(classify_args, ctx, out);
    }
    if (solve_cmd->parsed()) {
      command = "solve";
      ctx.doc = header(command);
      if (seed_opt->count() > 0) solve_args.seed = solve_seed;
      return cmd_solve(solve_args, ctx, out);
    }
    if (verify_cmd->parsed()) {
      command = "verify";
      ctx.doc = header(command);
      return cmd_verify(verify_args, ctx, out);
    }
    if (check_cmd->parsed()) {
      command = "check";
      ctx.doc = header(command);
      if (grid_opt->count() > 0) check_args.grid = check_grid;
      return cmd_check(check_args, ctx, out);
    }
    command = "scan";
    ctx.doc = header(command);
    return cmd_scan(scan_args, ctx, out);
  } catch (const UsageError& e) {
    err << "perdiff " << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    ctx.doc["error"] = error_body("input", e.what());
    emit(out, ctx.doc);
    return kExitParse;
  } catch (const SolverError& e) {
    ctx.doc["error"] = error_body(to_string(e.kind()), e.what());
    ctx.doc["error"]["last_residual"] = e.last_residual();
    emit(out, ctx.doc);
    return kExitSolver;
  } catch (const ExprError& e) {
    ctx.doc["error"] = error_body("domain_error", e.what());
    emit(out, ctx.doc);
    return kExitSolver;
  } catch (const HypothesisError& e) {
    ctx.doc["error"] = error_body("precondition", e.what());
    emit(out, ctx.doc);
    return kExitHypothesis;
  } catch (const std::exception& e) {
    ctx.doc["error"] = error_body("internal", e.what());
    emit(out, ctx.doc);
    return kExitSolver;
  }
}

}  // namespace perdiff::cli
