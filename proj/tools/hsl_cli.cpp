// Command-line front end: one subcommand per operation, JSON configs, CSV/JSON artifacts.
#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "hsl/asymptotics.hpp"
#include "hsl/barriers.hpp"
#include "hsl/hardy.hpp"
#include "hsl/io.hpp"
#include "hsl/params.hpp"
#include "hsl/radial_ode.hpp"
#include "hsl/seeds.hpp"

using namespace hsl;
using io::json;

namespace {

// Malformed input: usage text, exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Artifacts of one run: file name -> content. Written only by the top level,
// so sweeps can run tasks without touching the disk.
struct Artifacts {
  std::map<std::string, std::string> files;
  std::vector<std::string> summary;  // human-readable lines
};

struct Command {
  std::string name, help;
  json defaults;
  std::function<json(const json& cfg, Artifacts& out)> run;  // returns scalar summary
};

Problem problem_of(const json& c) {
  Problem pb;
  pb.mu = c.at("mu").get<double>();
  pb.p = c.at("p").get<double>();
  pb.N = c.at("N").get<int>();
  const std::string g = c.value("geometry", std::string("ball"));
  if (g == "ball")
    pb.geometry = Ball{c.at("R").get<double>()};
  else if (g == "annulus")
    pb.geometry = Annulus{c.at("r0").get<double>(), c.at("R").get<double>()};
  else
    throw UsageError("geometry must be 'ball' or 'annulus'");
  return pb;
}

PicardConfig picard_of(const json& c) {
  PicardConfig pc;
  pc.d0 = c.value("d0", pc.d0);
  pc.tol = c.value("tol", pc.tol);
  pc.panels = c.value("panels", pc.panels);
  pc.quadrature_points = c.value("quadrature_points", pc.quadrature_points);
  pc.contraction_alpha = c.value("contraction_alpha", pc.contraction_alpha);
  pc.max_iter = c.value("max_iter", pc.max_iter);
  return pc;
}

json fit_summary(const BoundaryFit& f) {
  return {{"regime", to_string(f.regime)},
          {"exponent", f.exponent},
          {"coefficient", f.coefficient},
          {"nonexistence_flag", f.nonexistence_flag}};
}

std::string num(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

void add_table(Artifacts& out, const std::string& stem, const SolutionTable& t) {
  out.files[stem + ".csv"] = io::table_csv(t);
  out.files[stem + ".json"] = io::dump(io::table_sidecar(t));
}

// --- subcommands ---------------------------------------------------------

json run_exponents(const json& c, Artifacts& out) {
  Problem pb;
  pb.mu = c.at("mu").get<double>();
  pb.p = c.at("p").get<double>();
  pb.N = c.at("N").get<int>();
  pb.validate();
  const Exponents e = exponents(pb);
  json j = io::to_json(e);
  j["schema_version"] = io::kSchemaVersion;
  j["problem"] = io::to_json(pb);
  j["deadcore_coefficients"] = io::to_json(deadcore_coefficients(pb));
  json adm = json::array();
  for (Regime r : admissible_regimes(pb)) adm.push_back(to_string(r));
  j["admissible_regimes"] = adm;
  out.files["exponents.json"] = io::dump(j);
  out.summary.push_back("beta_minus " + num(e.beta_minus) + ", beta_plus " + num(e.beta_plus) +
                        ", mu_star " + num(e.mu_star) + ", order_alpha " + num(e.order_alpha));
  return io::to_json(e);
}

json run_seed(const json& c, Artifacts& out) {
  const Problem pb = problem_of(c);
  const PicardConfig pc = picard_of(c);
  const std::string kind = c.at("kind").get<std::string>();
  const Side side = side_from_string(c.at("side").get<std::string>());
  Seed s;
  if (kind == "deadcore-interior") {
    double R0 = c.at("R0").get<double>();
    if (R0 == 0.0) R0 = 0.5 * (pb.inner_radius() + pb.outer_radius());
    s = deadcore_seed(pb, DeadCoreInteriorAt{R0}, pc, c.at("direction").get<int>());
  } else if (kind == "deadcore-boundary") {
    s = deadcore_seed(pb, DeadCoreBoundaryAt{side}, pc);
  } else if (kind == "deadcore-origin") {
    s = deadcore_seed(pb, DeadCoreOriginAt{}, pc);
  } else if (kind == "regular") {
    s = regular_seed(pb, side, c.at("w0").get<double>(), pc);
  } else if (kind == "singular") {
    s = singular_seed(pb, side, c.at("v0").get<double>(), c.at("C").get<double>(), pc);
  } else {
    throw UsageError("unknown seed kind '" + kind + "'");
  }
  out.files["seed.json"] = io::dump(io::to_json(s));
  out.summary.push_back(to_string(s.kind) + ": d0 " + num(s.d0) + ", exponent " + num(s.exponent) +
                        ", coefficient " + num(s.coefficient) + ", residual " +
                        num(s.certificate.residual_rel));
  return {{"kind", to_string(s.kind)},
          {"d0", s.d0},
          {"coefficient", s.coefficient},
          {"iterations", s.certificate.iterations},
          {"contraction_ratio", s.certificate.contraction_ratio},
          {"w_at_zero", s.certificate.w_at_zero},
          {"residual_rel", s.certificate.residual_rel}};
}

json classify_sides(const SolutionTable& t, const json& c, Artifacts& out) {
  WindowPolicy w;
  w.delta_hi = c.value("delta_hi", 0.0);
  json fits = json::array(), summary;
  std::vector<Side> sides{Side::Outer};
  if (!t.problem.is_ball()) sides.insert(sides.begin(), Side::Inner);
  for (Side side : sides) {
    try {
      const BoundaryFit f = classify(t.problem, fit_exponent(t, side, w));
      fits.push_back(io::to_json(f));
      summary[to_string(side)] = fit_summary(f);
      out.summary.push_back(to_string(side) + " boundary: " + to_string(f.regime) + " (exponent " +
                            num(f.exponent) + ", coefficient " + num(f.coefficient) + ")");
    } catch (const DataError& e) {
      fits.push_back({{"side", to_string(side)}, {"error", e.what()}});
      summary[to_string(side)] = {{"regime", "none"}};
      out.summary.push_back(to_string(side) + " boundary: no fit (" + e.what() + ")");
    }
  }
  out.files["fit.json"] = io::dump({{"schema_version", io::kSchemaVersion}, {"fits", fits}});
  return summary;
}

json table_summary(const SolutionTable& t) {
  json ev = json::array();
  for (const auto& e : t.events) ev.push_back(to_string(e.kind));
  return {{"rows", t.size()}, {"events", ev}, {"max_u", t.u.size() ? t.u.maxCoeff() : 0.0}};
}

IntegrationOptions integration_of(const json& c) {
  IntegrationOptions o;
  o.rtol = c.value("rtol", o.rtol);
  return o;
}

json run_solve_ball(const json& c, Artifacts& out) {
  json cc = c;
  cc["geometry"] = "ball";
  const Problem pb = problem_of(cc);
  const ShootResult s = shoot_from_center(pb, c.at("u0").get<double>(), integration_of(c));
  add_table(out, "table", s.table);
  json sum = table_summary(s.table);
  sum["richardson_error"] = s.richardson_error;
  out.summary.push_back("shot from u0 = " + num(c.at("u0").get<double>()) + ": " +
                        std::to_string(s.table.size()) + " rows");
  for (const auto& e : s.table.events)
    out.summary.push_back("event " + to_string(e.kind) + " at r = " + num(e.location));
  if (c.at("classify").get<bool>()) sum["fit"] = classify_sides(s.table, c, out);
  return sum;
}

json run_solve_annulus(const json& c, Artifacts& out) {
  json cc = c;
  cc["geometry"] = "annulus";
  const Problem pb = problem_of(cc);
  SolutionTable t;
  const std::string seed_path = c.at("seed").get<std::string>();
  if (!seed_path.empty()) {
    Seed s = io::seed_from_json(json::parse(io::read_file(seed_path)));
    t = solve_from_seed(s, integration_of(c));
  } else {
    t = assemble_with_deadcore(pb, c.at("a").get<double>(), c.at("b").get<double>(), picard_of(c),
                               integration_of(c));
  }
  add_table(out, "table", t);
  json sum = table_summary(t);
  out.summary.push_back("annulus solution: " + std::to_string(t.size()) + " rows");
  for (const auto& e : t.events) out.summary.push_back("event " + to_string(e.kind) + " at r = " + num(e.location));
  if (c.at("classify").get<bool>()) sum["fit"] = classify_sides(t, c, out);
  return sum;
}

json run_classify(const json& c, Artifacts& out) {
  const std::string path = c.at("table").get<std::string>();
  if (path.empty()) throw UsageError("classify needs --table");
  std::string side_path = c.at("sidecar").get<std::string>();
  if (side_path.empty()) side_path = std::filesystem::path(path).replace_extension(".json").string();
  const SolutionTable t = io::table_from_csv(io::read_file(path), json::parse(io::read_file(side_path)));
  WindowPolicy w;
  w.delta_hi = c.at("delta_hi").get<double>();
  w.octaves = c.at("octaves").get<int>();
  const Side side = side_from_string(c.at("side").get<std::string>());
  const BoundaryFit f = classify(t.problem, fit_exponent(t, side, w));
  json doc{{"schema_version", io::kSchemaVersion}, {"fit", io::to_json(f)}};
  json sum = fit_summary(f);
  out.summary.push_back(to_string(side) + " boundary: " + to_string(f.regime) + " (exponent " +
                        num(f.exponent) + ")");
  if (f.nonexistence_flag) out.summary.push_back("warning: " + f.note);
  if (c.at("slope").get<bool>() &&
      (f.regime == Regime::LinearSingular || f.regime == Regime::LinearRegular)) {
    const SlopeCheck s = slope_check(t, side, f.regime);
    doc["slope"] = io::to_json(s);
    sum["slope_ratio"] = s.measured_ratio;
    out.summary.push_back("v'(0)/v(0) = " + num(s.measured_ratio) + " (predicted " + num(s.predicted) + ")");
  }
  if (c.at("alpha").get<bool>() && f.regime == Regime::LinearRegular) {
    const AlphaCheck a = order_alpha_check(t, side);
    doc["alpha"] = io::to_json(a);
    sum["alpha_fit"] = a.alpha_fit;
  }
  out.files["classify.json"] = io::dump(doc);
  return sum;
}

json run_hardy(const json& c, Artifacts& out) {
  HardyOptions o;
  o.grading = c.at("grading").get<double>();
  o.n0 = c.at("n0").get<int>();
  const int n = o.n0 << c.at("refine").get<int>();
  HardyEstimate est;
  const double L = c.at("interval").get<double>();
  if (L > 0.0)
    est = hardy_interval(L, n, o);
  else
    est = hardy_annulus_radial(c.at("r0").get<double>(), c.at("R").get<double>(), c.at("N").get<int>(), n, o);
  out.files["hardy_history.csv"] = io::history_csv(est);
  out.files["hardy.json"] = io::dump(io::to_json(est));
  for (const auto& [k, v] : est.history) out.summary.push_back("n = " + std::to_string(k) + ": " + num(v));
  return {{"value", est.value}, {"mesh_size", est.mesh_size}};
}

BarrierPair barriers_of(const Problem& pb, const DistanceModel& dm, const json& c) {
  BarrierPair pair;
  if (pb.mu > 0.0) {
    PositiveMuParams prm;
    prm.M = c.at("M").get<double>();
    prm.epsilon = c.at("epsilon").get<double>();
    prm.rho = c.at("rho").get<double>();
    prm.epsilon_low = c.at("epsilon_low").get<double>();
    prm.rho_low = c.at("rho_low").get<double>();
    pair = build_barriers_positive_mu(pb, dm, prm);
  } else {
    NegativeMuParams prm;
    const double M = c.at("M").get<double>();
    if (M > 0.0) prm.M = M;
    prm.sigma_bar = c.at("sigma_bar").get<double>();
    prm.sigma_low = c.at("sigma_low").get<double>();
    prm.seeds = picard_of(c);
    pair = build_barriers_negative_mu(pb, dm, prm);
  }
  const double rho = c.at("deadcore_rho").get<double>();
  if (rho > 0.0) pair.upper = build_deadcore_upper(pb, dm, pair, rho, picard_of(c));
  return pair;
}

json barrier_doc(const Problem& pb, const DistanceModel& dm, const BarrierPair& pair) {
  return {{"schema_version", io::kSchemaVersion},
          {"problem", io::to_json(pb)},
          {"rho0", dm.rho0},
          {"curvature_bound", dm.curvature_bound},
          {"lower", io::to_json(pair.lower)},
          {"upper", io::to_json(pair.upper)}};
}

json run_barriers(const json& c, Artifacts& out) {
  const Problem pb = problem_of(c);
  const DistanceModel dm = distance_model(pb);
  const BarrierPair pair = barriers_of(pb, dm, c);
  out.files["barriers.csv"] = io::pair_csv(pair);
  out.files["barriers.json"] = io::dump(barrier_doc(pb, dm, pair));
  out.summary.push_back(kind_name(pair.upper.kind) + " margin " + num(pair.upper.verified_margin));
  out.summary.push_back(kind_name(pair.lower.kind) + " margin " + num(pair.lower.verified_margin));
  return {{"upper_margin", pair.upper.verified_margin}, {"lower_margin", pair.lower.verified_margin}};
}

json run_iterate(const json& c, Artifacts& out) {
  const Problem pb = problem_of(c);
  const DistanceModel dm = distance_model(pb);
  const BarrierPair pair = barriers_of(pb, dm, c);
  const Mesh1D mesh = iteration_mesh(pb, c.at("n").get<int>(), c.at("delta_min").get<double>());
  IterationOptions o;
  o.max_sweeps = c.at("max_sweeps").get<int>();
  o.tol = c.at("tol").get<double>();
  const IterationResult res = monotone_iteration(pb, pair, mesh, o);
  if (!res.converged)
    throw ConvergenceError("monotone iteration did not converge in " + std::to_string(res.sweeps) + " sweeps",
                           res.increments.back(), res.increments.size() > 1 ? res.increments.end()[-2] : 0.0);
  json doc = io::to_json(res);
  doc["barriers"] = barrier_doc(pb, dm, pair);
  // Boundary fit on the mesh's own near-boundary octaves.
  WindowPolicy w;
  w.delta_hi = 1024.0 * mesh.delta(mesh.intervals());
  json sum{{"sweeps", res.sweeps}, {"residual", res.residual}, {"sandwiched", res.sandwiched}};
  try {
    const BoundaryFit f = classify(pb, fit_exponent(res.table, Side::Outer, w));
    doc["fit"] = io::to_json(f);
    sum["fit"] = fit_summary(f);
    out.summary.push_back("outer boundary: " + to_string(f.regime) + " (exponent " + num(f.exponent) + ")");
  } catch (const DataError& e) {
    doc["fit"] = {{"error", e.what()}};
  }
  out.files["iterate_table.csv"] = io::table_csv(res.table);
  out.files["iterate_trace.csv"] = io::trace_csv(res);
  out.files["iterate.json"] = io::dump(doc);
  out.summary.push_back("converged in " + std::to_string(res.sweeps) + " sweeps, residual " + num(res.residual) +
                        ", sandwiched " + (res.sandwiched ? "yes" : "no"));
  if (const Event* e = res.table.find_event(EventKind::DeadCoreInterval))
    out.summary.push_back("dead core [" + num(e->a) + ", " + num(e->b) + "]");
  return sum;
}

// --- configuration -------------------------------------------------------

const json kProblem = {{"mu", 0.1}, {"p", 0.5}, {"N", 2}};

json with_problem(json extra) {
  json j = kProblem;
  j.update(extra);
  return j;
}

const json kPicard = {{"d0", 0.0}, {"tol", 1e-12}, {"panels", 40}, {"quadrature_points", 16},
                      {"contraction_alpha", 0.0}, {"max_iter", 5000}};

json barrier_keys() {
  json j = with_problem({{"geometry", "ball"}, {"R", 1.0}, {"r0", 0.5}, {"M", 0.0}, {"epsilon", 0.0},
                         {"rho", 0.0}, {"epsilon_low", 0.0}, {"rho_low", 0.0}, {"sigma_bar", 0.0},
                         {"sigma_low", 0.0}, {"deadcore_rho", 0.0}});
  j.update(kPicard);
  return j;
}

std::vector<Command> commands() {
  std::vector<Command> cs;
  cs.push_back({"exponents", "indicial exponents and critical constants", kProblem, run_exponents});
  json seed = with_problem({{"geometry", "ball"}, {"R", 1.0}, {"r0", 0.5}, {"kind", "singular"},
                            {"side", "outer"}, {"R0", 0.0}, {"direction", 1}, {"w0", 1.0}, {"v0", 1.0},
                            {"C", 0.0}});
  seed.update(kPicard);
  cs.push_back({"seed", "certified local solution near a boundary, the centre or a dead point", seed, run_seed});
  cs.push_back({"solve-ball", "shoot from the centre of a ball",
                with_problem({{"R", 1.0}, {"u0", 1.0}, {"rtol", 1e-10}, {"classify", false}, {"delta_hi", 0.0}}),
                run_solve_ball});
  json ann = with_problem({{"r0", 0.5}, {"R", 1.0}, {"a", 0.75}, {"b", 0.75}, {"seed", ""}, {"rtol", 1e-10},
                           {"classify", false}, {"delta_hi", 0.0}});
  ann.update(kPicard);
  cs.push_back({"solve-annulus", "annulus solution from a dead core [a, b] or a seed file", ann, run_solve_annulus});
  cs.push_back({"classify", "boundary regime of a stored table",
                {{"table", ""}, {"sidecar", ""}, {"side", "outer"}, {"delta_hi", 0.0}, {"octaves", 10},
                 {"slope", false}, {"alpha", false}},
                run_classify});
  cs.push_back({"hardy", "discrete Hardy constant with refinement history",
                {{"interval", 0.0}, {"r0", 0.5}, {"R", 1.0}, {"N", 2}, {"refine", 5}, {"n0", 16}, {"grading", 6.0}},
                run_hardy});
  cs.push_back({"barriers", "upper and lower solutions with verified margins", barrier_keys(), run_barriers});
  json it = barrier_keys();
  it.update({{"n", 2048}, {"delta_min", 0.0}, {"max_sweeps", 200}, {"tol", 1e-12}});
  cs.push_back({"iterate", "monotone iteration between the barriers", it, run_iterate});
  return cs;
}

// Converts a flag string to the type of the key's default.
json coerce(const std::string& key, const json& def, const std::string& text) {
  try {
    std::size_t used = 0;
    if (def.is_boolean()) {
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw std::invalid_argument(text);
    }
    if (def.is_number_integer()) {
      const long v = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    if (def.is_number()) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    return text;
  } catch (const std::exception&) {
    throw UsageError("invalid value '" + text + "' for " + key);
  }
}

// Merges `over` into `cfg`, rejecting keys the command does not know and
// values of the wrong type.
void merge_checked(json& cfg, const json& defaults, const json& over, const std::string& where) {
  if (!over.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [k, v] : over.items()) {
    if (!defaults.contains(k)) throw UsageError("unknown key '" + k + "' in " + where);
    const json& d = defaults[k];
    const bool ok = (d.is_boolean() && v.is_boolean()) || (d.is_number_integer() && v.is_number_integer()) ||
                    (d.is_number_float() && v.is_number()) || (d.is_string() && v.is_string());
    if (!ok) throw UsageError("key '" + k + "' in " + where + " has the wrong type");
    cfg[k] = d.is_number_float() ? json(v.get<double>()) : v;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// sweep: one row per grid point, computed concurrently, written in grid order.
json run_sweep(const Command& task, const json& base, const json& grid, int threads, Artifacts& out) {
  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (const auto& [k, v] : grid.items()) {
    if (!task.defaults.contains(k)) throw UsageError("unknown grid key '" + k + "' for " + task.name);
    if (!v.is_array() || v.empty()) throw UsageError("grid values for '" + k + "' must be a non-empty list");
    keys.push_back(k);
    std::vector<json> vs;
    for (const auto& x : v) {
      json tmp = base;
      merge_checked(tmp, task.defaults, json{{k, x}}, "grid");
      vs.push_back(tmp[k]);
    }
    values.push_back(vs);
  }
  std::size_t total = 1;
  for (const auto& v : values) total *= v.size();
  std::vector<json> rows(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < total;) {
      json cfg = base, row{{"index", i}};
      std::size_t rem = i;
      for (std::size_t k = keys.size(); k-- > 0;) {
        const json& v = values[k][rem % values[k].size()];
        rem /= values[k].size();
        cfg[keys[k]] = v;
        row[keys[k]] = v;
      }
      Artifacts scratch;
      try {
        row["status"] = "ok";
        row["result"] = task.run(cfg, scratch);
      } catch (const DomainError& e) {
        row["status"] = "domain_error";
        row["error"] = e.what();
      } catch (const ConvergenceError& e) {
        row["status"] = "convergence_failure";
        row["error"] = e.what();
      } catch (const std::exception& e) {
        row["status"] = "error";
        row["error"] = e.what();
      }
      rows[i] = row;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, threads); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // CSV: grid keys, status, then flattened scalar results in first-seen order.
  std::vector<std::string> cols;
  for (const auto& r : rows)
    if (r.contains("result")) {
      const json flat = r["result"].flatten();
      for (const auto& [k, v] : flat.items())
        if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    }
  std::string csv = "index";
  for (const auto& k : keys) csv += "," + k;
  csv += ",status";
  for (const auto& k : cols) csv += "," + k;
  csv += ",error\n";
  auto cell = [](const json& v) {
    if (v.is_number_float()) return io::fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  std::size_t ok = 0;
  for (const auto& r : rows) {
    csv += std::to_string(r["index"].get<std::size_t>());
    for (const auto& k : keys) csv += "," + cell(r[k]);
    csv += "," + r["status"].get<std::string>();
    const json flat = r.contains("result") ? r["result"].flatten() : json::object();
    for (const auto& k : cols) csv += "," + (flat.contains(k) ? cell(flat[k]) : std::string());
    std::string err = r.value("error", std::string());
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    csv += "," + err + "\n";
    ok += r["status"] == "ok";
  }
  out.files["sweep.csv"] = csv;
  out.files["sweep.json"] =
      io::dump({{"schema_version", io::kSchemaVersion}, {"task", task.name}, {"base", base}, {"rows", rows}});
  out.summary.push_back(std::to_string(total) + " grid points, " + std::to_string(ok) + " ok");
  return {{"points", total}, {"ok", ok}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial solver for  Δu + μ/δ² u = u^p  with a Hardy potential"};
  app.require_subcommand(1);
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "directory for artifacts")->capture_default_str();

  const auto cmds = commands();
  struct Bound {
    const Command* cmd;
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::string> flags;
    std::map<std::string, bool> switches;
  };
  std::vector<Bound> bound(cmds.size() + 1);
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    Bound& b = bound[i];
    b.cmd = &cmds[i];
    b.sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    b.sub->add_option("--config", b.config, "JSON file with parameters");
    for (const auto& [k, v] : cmds[i].defaults.items()) {
      if (v.is_boolean())
        b.sub->add_flag("--" + k, b.switches[k]);
      else
        b.sub->add_option("--" + k, b.flags[k])->description("default " + v.dump());
    }
  }
  // sweep: task, grid, threads, plus free-form task parameters via --set.
  Bound& sw = bound.back();
  std::string task = "solve-ball";
  std::vector<std::string> grid_flags, set_flags;
  int threads = 4;
  sw.sub = app.add_subcommand("sweep", "run a subcommand over a parameter grid");
  sw.sub->add_option("--config", sw.config, "JSON file {task, grid, threads, ...task parameters}");
  sw.sub->add_option("--task", task, "subcommand to sweep")->capture_default_str();
  sw.sub->add_option("--grid", grid_flags, "key=v1,v2,... (repeatable)");
  sw.sub->add_option("--set", set_flags, "key=value for the task (repeatable)");
  sw.sub->add_option("--threads", threads)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const auto find = [&](const std::string& name) -> const Command* {
    for (const auto& c : cmds)
      if (c.name == name) return &c;
    return nullptr;
  };

  try {
    Artifacts out;
    std::string name;
    json effective;
    if (sw.sub->parsed()) {
      name = "sweep";
      json file = sw.config.empty() ? json::object() : json::parse(io::read_file(sw.config));
      if (!file.is_object()) throw UsageError("sweep config must be a JSON object");
      if (file.contains("task")) task = file["task"].get<std::string>();
      if (sw.sub->count("--task")) task = sw.sub->get_option("--task")->as<std::string>();
      const Command* t = find(task);
      if (!t) throw UsageError("unknown sweep task '" + task + "'");
      json grid = file.value("grid", json::object());
      if (file.contains("threads") && !sw.sub->count("--threads")) threads = file["threads"].get<int>();
      json params = file;
      params.erase("task");
      params.erase("grid");
      params.erase("threads");
      json base = t->defaults;
      merge_checked(base, t->defaults, params, sw.config);
      for (const auto& s : set_flags) {
        const auto kv = split(s, '=');
        if (kv.size() != 2 || !t->defaults.contains(kv[0])) throw UsageError("bad --set '" + s + "'");
        base[kv[0]] = coerce(kv[0], t->defaults[kv[0]], kv[1]);
      }
      for (const auto& g : grid_flags) {
        const auto kv = split(g, '=');
        if (kv.size() != 2 || !t->defaults.contains(kv[0])) throw UsageError("bad --grid '" + g + "'");
        json vs = json::array();
        for (const auto& x : split(kv[1], ',')) vs.push_back(coerce(kv[0], t->defaults[kv[0]], x));
        grid[kv[0]] = vs;
      }
      effective = {{"task", task}, {"grid", grid}, {"threads", threads}};
      effective.update(base);
      run_sweep(*t, base, grid, threads, out);
    } else {
      for (std::size_t i = 0; i < cmds.size(); ++i) {
        Bound& b = bound[i];
        if (!b.sub->parsed()) continue;
        name = b.cmd->name;
        effective = b.cmd->defaults;
        if (!b.config.empty()) merge_checked(effective, b.cmd->defaults, json::parse(io::read_file(b.config)), b.config);
        for (const auto& [k, v] : b.flags)
          if (b.sub->count("--" + k)) effective[k] = coerce(k, b.cmd->defaults[k], v);
        for (const auto& [k, v] : b.switches)
          if (b.sub->count("--" + k)) effective[k] = v;
        b.cmd->run(effective, out);
      }
    }
    std::filesystem::create_directories(out_dir);
    out.files[name + ".config.json"] = io::dump(effective);
    for (const auto& [file, content] : out.files) io::write_file((std::filesystem::path(out_dir) / file).string(), content);
    std::cout << name << "\n";
    for (const auto& line : out.summary) std::cout << "  " << line << "\n";
    std::cout << "  artifacts in " << out_dir << ":";
    for (const auto& [file, content] : out.files) std::cout << " " << file;
    std::cout << "\n";
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
