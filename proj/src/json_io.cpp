#include "ldnet/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "ldnet/errors.hpp"

namespace ldnet {

namespace {

double finite_number(const json& j, const char* key) {
  if (!j.contains(key))
    throw InvalidParams(std::string("input: missing key '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number())
    throw InvalidParams(std::string("input: key '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d))
    throw InvalidParams(std::string("input: key '") + key + "' must be finite");
  return d;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known)
      throw InvalidParams("input: unknown key '" + it.key() + "'");
  }
}

json vec_to_json(const Vec2& v) { return json::array({v[0], v[1]}); }

Vec2 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw InvalidParams("input: expected a two-element array");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

double number_or_inf(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

NetworkParams network_params_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParams("input: parameters must be a JSON object");
  reject_unknown(j, {"lambda1_bar", "lambda2_bar", "mu1", "mu2", "mu1_star",
                     "r12", "r21"});
  NetworkParams p{};
  p.lambda1_bar = finite_number(j, "lambda1_bar");
  p.lambda2_bar = finite_number(j, "lambda2_bar");
  p.mu1 = finite_number(j, "mu1");
  p.mu2 = finite_number(j, "mu2");
  p.mu1_star = finite_number(j, "mu1_star");
  p.r12 = finite_number(j, "r12");
  p.r21 = finite_number(j, "r21");
  p.validate();
  return p;
}

json to_json(const NetworkParams& p) {
  return {{"lambda1_bar", p.lambda1_bar}, {"lambda2_bar", p.lambda2_bar},
          {"mu1", p.mu1},                 {"mu2", p.mu2},
          {"mu1_star", p.mu1_star},       {"r12", p.r12},
          {"r21", p.r21}};
}

ForkParams fork_params_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParams("input: parameters must be a JSON object");
  reject_unknown(j, {"nu", "lambda", "eta", "alpha", "beta"});
  ForkParams p{};
  p.nu = finite_number(j, "nu");
  p.lambda = finite_number(j, "lambda");
  p.eta = finite_number(j, "eta");
  p.alpha = finite_number(j, "alpha");
  p.beta_rate = finite_number(j, "beta");
  p.validate();
  return p;
}

json to_json(const ForkParams& p) {
  return {{"nu", p.nu},
          {"lambda", p.lambda},
          {"eta", p.eta},
          {"alpha", p.alpha},
          {"beta", p.beta_rate}};
}

Regime regime_from_string(const std::string& s) {
  if (s == "Jitter") return Regime::Jitter;
  if (s == "Bridge") return Regime::Bridge;
  if (s == "Cascade") return Regime::Cascade;
  throw InvalidParams("input: unknown regime '" + s + "'");
}

json to_json(const LDAnalysis& a) {
  json j;
  j["regime"] = to_string(a.regime);
  j["rate"] = a.rate;
  j["theta_b"] = vec_to_json(a.theta_b);
  j["theta_j"] = vec_to_json(a.theta_j);
  j["theta_c"] = vec_to_json(a.theta_c);
  j["rho"] = a.rho;
  j["beta"] = a.beta;
  j["v_plus"] = vec_to_json(a.v_plus);
  j["v_minus"] = vec_to_json(a.v_minus);
  j["cascade_height"] = a.cascade_height;
  j["cascade_velocity"] = vec_to_json(a.cascade_velocity);
  j["multipliers"] = {{"u", a.u_interior}, {"u1", a.u1}, {"u2", a.u2}, {"u3", a.u3}};
  j["drift_interior"] = vec_to_json(a.drift_interior);
  j["drift_boundary"] = vec_to_json(a.drift_boundary);
  j["drift_y_boundary"] = vec_to_json(a.drift_y_boundary);
  j["y_climb_cost"] = a.y_climb_cost;
  j["traffic"] = {{"lambda1", a.traffic.lambda1},
                  {"lambda2", a.traffic.lambda2},
                  {"rho1", a.traffic.rho1},
                  {"rho2", a.traffic.rho2}};
  return j;
}

LDAnalysis analysis_from_json(const json& j) {
  LDAnalysis a;
  a.regime = regime_from_string(j.at("regime").get<std::string>());
  a.rate = j.at("rate").get<double>();
  a.theta_b = vec_from_json(j.at("theta_b"));
  a.theta_j = vec_from_json(j.at("theta_j"));
  a.theta_c = vec_from_json(j.at("theta_c"));
  a.rho = j.at("rho").get<double>();
  a.beta = j.at("beta").get<double>();
  a.v_plus = vec_from_json(j.at("v_plus"));
  a.v_minus = vec_from_json(j.at("v_minus"));
  a.cascade_height = j.at("cascade_height").get<double>();
  a.cascade_velocity = vec_from_json(j.at("cascade_velocity"));
  const json& m = j.at("multipliers");
  a.u_interior = m.at("u").get<double>();
  a.u1 = m.at("u1").get<double>();
  a.u2 = m.at("u2").get<double>();
  a.u3 = m.at("u3").get<double>();
  a.drift_interior = vec_from_json(j.at("drift_interior"));
  a.drift_boundary = vec_from_json(j.at("drift_boundary"));
  a.drift_y_boundary = vec_from_json(j.at("drift_y_boundary"));
  a.y_climb_cost = number_or_inf(j.at("y_climb_cost"));
  const json& t = j.at("traffic");
  a.traffic.lambda1 = t.at("lambda1").get<double>();
  a.traffic.lambda2 = t.at("lambda2").get<double>();
  a.traffic.rho1 = t.at("rho1").get<double>();
  a.traffic.rho2 = t.at("rho2").get<double>();
  return a;
}

json to_json(const SimEstimate& e) {
  json rows = json::array();
  for (const LevelStat& ls : e.levels) {
    rows.push_back({{"level", ls.level},
                    {"p", ls.p},
                    {"ci", ls.ci},
                    {"boundary_fraction", ls.boundary_fraction},
                    {"bf_ci", ls.bf_ci},
                    {"hits", ls.hits}});
  }
  return {{"levels", rows},
          {"slope", e.slope},
          {"slope_stderr", e.slope_stderr},
          {"drift_per_busy_cycle", e.drift_per_busy_cycle},
          {"cycles", e.cycles},
          {"cycle_equivalents", e.cycle_equivalents},
          {"splitting", e.splitting},
          {"master_seed", e.master_seed}};
}

json to_json(const TailEstimate& e) {
  return {{"tail", e.tail},      {"tail_ci", e.tail_ci}, {"slope", e.slope},
          {"c", e.c},            {"p_x0", e.p_x0},       {"cycles", e.cycles}};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sim_csv(const SimEstimate& e) {
  std::ostringstream os;
  os << "level,p,ci,boundary_fraction,bf_ci,hits\n";
  for (const LevelStat& ls : e.levels) {
    os << ls.level << ',' << format_double(ls.p) << ',' << format_double(ls.ci)
       << ',' << format_double(ls.boundary_fraction) << ','
       << format_double(ls.bf_ci) << ',' << ls.hits << '\n';
  }
  return os.str();
}

std::string path_csv(const FluidPath& path) {
  std::ostringstream os;
  os << "x,y,segment,label,vx,vy,beta\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    const PathSegment& s = path[i];
    for (const Vec2& pt : {s.from, s.to}) {
      os << format_double(pt[0]) << ',' << format_double(pt[1]) << ',' << i
         << ',' << s.label << ',';
      if (s.velocity)
        os << format_double((*s.velocity)[0]) << ','
           << format_double((*s.velocity)[1]);
      else
        os << ',';
      os << ',';
      if (s.beta) os << format_double(*s.beta);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace ldnet
