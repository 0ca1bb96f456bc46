#include "hsl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hsl::io {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SingularExpansion::Case case_from_string(const std::string& s) {
  for (auto c : {SingularExpansion::Case::BetaInMinusHalfZero, SingularExpansion::Case::BetaEqualMinusHalf,
                 SingularExpansion::Case::BetaBelowMinusHalf})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown expansion case '" + s + "'");
}

}  // namespace

json to_json(const Problem& pb) {
  json j{{"mu", pb.mu}, {"p", pb.p}, {"N", pb.N}};
  if (const auto* b = std::get_if<Ball>(&pb.geometry)) {
    j["geometry"] = {{"type", "ball"}, {"R", b->R}};
  } else {
    const auto& a = std::get<Annulus>(pb.geometry);
    j["geometry"] = {{"type", "annulus"}, {"r0", a.r0}, {"R", a.R}};
  }
  return j;
}

Problem problem_from_json(const json& j) {
  Problem pb;
  pb.mu = j.at("mu").get<double>();
  pb.p = j.at("p").get<double>();
  pb.N = j.at("N").get<int>();
  const json& g = j.at("geometry");
  const std::string type = g.at("type").get<std::string>();
  if (type == "ball")
    pb.geometry = Ball{g.at("R").get<double>()};
  else if (type == "annulus")
    pb.geometry = Annulus{g.at("r0").get<double>(), g.at("R").get<double>()};
  else
    throw std::invalid_argument("unknown geometry '" + type + "'");
  return pb;
}

json to_json(const Exponents& e) {
  return {{"beta_minus", e.beta_minus},       {"beta_plus", e.beta_plus},
          {"mu_star", e.mu_star},             {"nonlinear_exponent", e.nonlinear_exp},
          {"order_alpha", e.order_alpha}};
}

json to_json(const DeadCoreCoefficients& c) {
  json j{{"c_p", c.c_p}};
  j["c_boundary"] = c.c_boundary ? json(*c.c_boundary) : json(nullptr);
  j["c_origin"] = c.c_origin ? json(*c.c_origin) : json(nullptr);
  return j;
}

json to_json(const PicardConfig& c) {
  return {{"contraction_alpha", c.contraction_alpha},
          {"d0", c.d0},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"quadrature_points", c.quadrature_points},
          {"panels", c.panels},
          {"max_halvings", c.max_halvings}};
}

PicardConfig picard_from_json(const json& j) {
  PicardConfig c;
  c.contraction_alpha = j.value("contraction_alpha", c.contraction_alpha);
  c.d0 = j.value("d0", c.d0);
  c.tol = j.value("tol", c.tol);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.quadrature_points = j.value("quadrature_points", c.quadrature_points);
  c.panels = j.value("panels", c.panels);
  c.max_halvings = j.value("max_halvings", c.max_halvings);
  return c;
}

json to_json(const IntegrationOptions& o) {
  return {{"rtol", o.rtol},       {"delta_switch", o.delta_switch}, {"delta_min", o.delta_min},
          {"r_min", o.r_min},     {"max_steps", o.max_steps}};
}

IntegrationOptions integration_from_json(const json& j) {
  IntegrationOptions o;
  o.rtol = j.value("rtol", o.rtol);
  o.delta_switch = j.value("delta_switch", o.delta_switch);
  o.delta_min = j.value("delta_min", o.delta_min);
  o.r_min = j.value("r_min", o.r_min);
  o.max_steps = j.value("max_steps", o.max_steps);
  return o;
}

json to_json(const Seed& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = to_string(s.kind);
  j["problem"] = to_json(s.problem);
  j["anchor"] = s.anchor;
  j["direction"] = s.direction;
  j["side"] = s.side ? json(to_string(*s.side)) : json(nullptr);
  j["d0"] = s.d0;
  j["exponent"] = s.exponent;
  j["coefficient"] = s.coefficient;
  j["C"] = s.C;
  if (s.expansion) {
    const auto& e = *s.expansion;
    j["expansion"] = {{"v0", e.v0},       {"C", e.C},         {"A_const", e.A_const},
                      {"K_coeff", e.K_coeff}, {"slope", e.slope}, {"case", to_string(e.case_tag)}};
  } else {
    j["expansion"] = nullptr;
  }
  j["d"] = vec(s.d);
  j["values"] = vec(s.values);
  j["u"] = vec(s.u);
  j["du_dd"] = vec(s.du_dd);
  const auto& c = s.certificate;
  j["certificate"] = {{"iterations", c.iterations},
                      {"halvings", c.halvings},
                      {"contraction_ratio", c.contraction_ratio},
                      {"ratio_bound", c.ratio_bound},
                      {"sup_w", c.sup_w},
                      {"M_bound", c.M_bound},
                      {"w_at_zero", c.w_at_zero},
                      {"residual_abs", c.residual_abs},
                      {"residual_rel", c.residual_rel},
                      {"last_increment", c.last_increment}};
  return j;
}

Seed seed_from_json(const json& j) {
  Seed s;
  s.kind = seed_kind_from_string(j.at("kind").get<std::string>());
  s.problem = problem_from_json(j.at("problem"));
  s.anchor = j.at("anchor").get<double>();
  s.direction = j.at("direction").get<int>();
  if (!j.at("side").is_null()) s.side = side_from_string(j.at("side").get<std::string>());
  s.d0 = j.at("d0").get<double>();
  s.exponent = j.at("exponent").get<double>();
  s.coefficient = j.at("coefficient").get<double>();
  s.C = j.at("C").get<double>();
  if (!j.at("expansion").is_null()) {
    const json& e = j.at("expansion");
    SingularExpansion x;
    x.v0 = e.at("v0").get<double>();
    x.C = e.at("C").get<double>();
    x.A_const = e.at("A_const").get<double>();
    x.K_coeff = e.at("K_coeff").get<double>();
    x.slope = e.at("slope").get<double>();
    x.case_tag = case_from_string(e.at("case").get<std::string>());
    s.expansion = x;
  }
  s.d = vec_from(j.at("d"));
  s.values = vec_from(j.at("values"));
  s.u = vec_from(j.at("u"));
  s.du_dd = vec_from(j.at("du_dd"));
  const json& c = j.at("certificate");
  auto& cert = s.certificate;
  cert.iterations = c.at("iterations").get<int>();
  cert.halvings = c.at("halvings").get<int>();
  cert.contraction_ratio = c.at("contraction_ratio").get<double>();
  cert.ratio_bound = c.at("ratio_bound").get<double>();
  cert.sup_w = c.at("sup_w").get<double>();
  cert.M_bound = c.at("M_bound").get<double>();
  cert.w_at_zero = c.at("w_at_zero").get<double>();
  cert.residual_abs = c.at("residual_abs").get<double>();
  cert.residual_rel = c.at("residual_rel").get<double>();
  cert.last_increment = c.at("last_increment").get<double>();
  return s;
}

std::string table_csv(const SolutionTable& t) {
  std::string out = "r,u,u_prime,delta\n";
  for (Eigen::Index i = 0; i < t.size(); ++i)
    out += fmt(t.r(i)) + "," + fmt(t.u(i)) + "," + fmt(t.u_prime(i)) + "," + fmt(t.delta(i)) + "\n";
  return out;
}

json table_sidecar(const SolutionTable& t) {
  json ev = json::array();
  for (const auto& e : t.events)
    ev.push_back({{"kind", to_string(e.kind)}, {"location", e.location}, {"a", e.a}, {"b", e.b},
                  {"detail", e.detail}});
  return {{"schema_version", kSchemaVersion},
          {"problem", to_json(t.problem)},
          {"rows", t.size()},
          {"events", ev}};
}

SolutionTable table_from_csv(const std::string& csv, const json& sidecar) {
  SolutionTable t;
  t.problem = problem_from_json(sidecar.at("problem"));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "r,u,u_prime,delta") throw DataError("unexpected table header '" + line + "'");
  std::vector<double> cols[4];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (auto& c : cols) {
      if (!std::getline(ls, cell, ',')) throw DataError("short table row '" + line + "'");
      c.push_back(std::stod(cell));
    }
    const std::size_t n = cols[0].size();
    if (n > 1 && !(cols[0][n - 1] > cols[0][n - 2])) throw DataError("table radii must increase");
    if (cols[1].back() < 0.0) throw DataError("negative u in table");
  }
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  t.r = to_vec(cols[0]);
  t.u = to_vec(cols[1]);
  t.u_prime = to_vec(cols[2]);
  t.delta = to_vec(cols[3]);
  for (const auto& e : sidecar.at("events"))
    t.events.push_back({event_kind_from_string(e.at("kind").get<std::string>()), e.at("location").get<double>(),
                        e.at("a").get<double>(), e.at("b").get<double>(), e.at("detail").get<std::string>()});
  return t;
}

json to_json(const BoundaryFit& f) {
  return {{"side", to_string(f.side)},
          {"exponent", f.exponent},
          {"coefficient", f.coefficient},
          {"delta_lo", f.delta_lo},
          {"delta_hi", f.delta_hi},
          {"rms_residual", f.rms_residual},
          {"samples", f.samples},
          {"regime", to_string(f.regime)},
          {"nonexistence_flag", f.nonexistence_flag},
          {"near_degenerate", f.near_degenerate},
          {"note", f.note}};
}

json to_json(const SlopeCheck& s) {
  return {{"side", to_string(s.side)},        {"v0", s.v0},
          {"v1", s.v1},                       {"measured_ratio", s.measured_ratio},
          {"predicted", s.predicted},         {"abs_error", s.abs_error}};
}

json to_json(const AlphaCheck& a) {
  return {{"alpha_fit", a.alpha_fit},
          {"limit_const_fit", a.limit_const_fit},
          {"w0", a.w0},
          {"alpha_predicted", a.alpha_predicted},
          {"const_predicted", a.const_predicted}};
}

std::string history_csv(const HardyEstimate& est) {
  std::string out = "n,value\n";
  for (const auto& [n, v] : est.history) out += std::to_string(n) + "," + fmt(v) + "\n";
  return out;
}

json to_json(const HardyEstimate& est) {
  return {{"schema_version", kSchemaVersion},
          {"value", est.value},
          {"mesh_size", est.mesh_size},
          {"grading", est.mesh.grading},
          {"a", est.mesh.a},
          {"b", est.mesh.b},
          {"weight_power", est.mesh.weight_power}};
}

json to_json(const BarrierProfile& b) {
  json params;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, UpperPosMu>)
          params = {{"M", k.M}, {"epsilon", k.epsilon}, {"rho", k.rho}, {"delta_bar", k.delta_bar},
                    {"cap_value", k.cap_value}};
        else if constexpr (std::is_same_v<K, LowerPosMu>)
          params = {{"M", k.M}, {"epsilon_low", k.epsilon_low}, {"rho_low", k.rho_low}};
        else if constexpr (std::is_same_v<K, UpperNegMu>)
          params = {{"M", k.M}, {"sigma_bar", k.sigma_bar}};
        else if constexpr (std::is_same_v<K, LowerNegMu>)
          params = {{"sigma_low", k.sigma_low}};
        else
          params = {{"rho", k.rho}, {"rho_tilde", k.rho_tilde}, {"m", k.m}};
      },
      b.kind);
  return {{"kind", kind_name(b.kind)},
          {"parameters", params},
          {"verified_margin", b.verified_margin},
          {"samples", b.delta.size()}};
}

std::string pair_csv(const BarrierPair& pair) {
  std::string out = "delta,lower,upper\n";
  const auto& d = pair.lower.delta;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    out += fmt(d(i)) + "," + fmt(pair.lower.values(i)) + "," + fmt(pair.upper(d(i))) + "\n";
  return out;
}

std::string trace_csv(const IterationResult& res) {
  std::string out = "sweep,increment\n";
  for (std::size_t k = 0; k < res.increments.size(); ++k)
    out += std::to_string(k + 1) + "," + fmt(res.increments[k]) + "\n";
  return out;
}

json to_json(const IterationResult& res) {
  return {{"schema_version", kSchemaVersion},
          {"sweeps", res.sweeps},
          {"converged", res.converged},
          {"residual", res.residual},
          {"max_u", res.max_u},
          {"sandwiched", res.sandwiched},
          {"barrier_defect", res.barrier_defect},
          {"table", table_sidecar(res.table)}};
}

}  // namespace hsl::io
