#include "slipfsi/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "slipfsi/errors.hpp"

namespace slipfsi {

const char* to_string(BodyMode m) {
  switch (m) {
    case BodyMode::free: return "free";
    case BodyMode::pinned: return "pinned";
    case BodyMode::prescribed: return "prescribed";
  }
  return "?";
}

const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::rest: return "rest";
    case InitialKind::rigid_rotation: return "rigid_rotation";
    case InitialKind::swirl: return "swirl";
  }
  return "?";
}

const char* to_string(SlipKind k) { return k == SlipKind::navier ? "navier" : "no_slip"; }

namespace {

std::string at_line(const YAML::Node& n) {
  return "line " + std::to_string(n.Mark().line + 1) + ": ";
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(at_line(n) + key + " must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(at_line(n) + "cannot parse value of " + key);
  }
}

Vec2 vec2(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(at_line(n) + key + " must be a list [x, y]");
  return Vec2(scalar<double>(n[0], key), scalar<double>(n[1], key));
}

template <typename E>
E enum_value(const YAML::Node& n, const std::string& key, std::initializer_list<E> options) {
  const auto s = scalar<std::string>(n, key);
  std::string allowed;
  for (E e : options) {
    if (s == to_string(e)) return e;
    allowed += std::string(allowed.empty() ? "" : ", ") + to_string(e);
  }
  throw ConfigError(at_line(n) + key + " must be one of: " + allowed);
}

using Setter = std::function<void(SimConfig&, const YAML::Node&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"geometry",
       {{"r_outer", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.r_outer = scalar<double>(n, k); }},
        {"r_inner", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.r_inner = scalar<double>(n, k); }},
        {"q0", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.q0 = vec2(n, k); }}}},
      {"physics",
       {{"mu", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.mu = scalar<double>(n, k); }},
        {"beta", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.beta = scalar<double>(n, k); }},
        {"slip", [](SimConfig& c, const YAML::Node& n, const std::string& k) {
           c.slip = enum_value(n, k, {SlipKind::navier, SlipKind::no_slip});
         }}}},
      {"grid",
       {{"n_r", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.n_r = scalar<int>(n, k); }},
        {"n_theta", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.n_theta = scalar<int>(n, k); }}}},
      {"time",
       {{"dt", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.dt = scalar<double>(n, k); }},
        {"t_end", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.t_end = scalar<double>(n, k); }},
        {"cfl", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.cfl = scalar<double>(n, k); }}}},
      {"run",
       {{"seed", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.seed = scalar<std::uint64_t>(n, k); }},
        {"delta0", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.delta0 = scalar<double>(n, k); }}}},
      {"solver",
       {{"proj_tol", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.proj_tol = scalar<double>(n, k); }},
        {"newton_tol", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.newton_tol = scalar<double>(n, k); }},
        {"max_iter", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.max_iter = scalar<int>(n, k); }}}},
      {"body",
       {{"mode", [](SimConfig& c, const YAML::Node& n, const std::string& k) {
           c.body_mode = enum_value(n, k, {BodyMode::free, BodyMode::pinned, BodyMode::prescribed});
         }},
        {"a0", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.a0 = vec2(n, k); }},
        {"omega0", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.omega0 = scalar<double>(n, k); }}}},
      {"initial",
       {{"kind", [](SimConfig& c, const YAML::Node& n, const std::string& k) {
           c.initial = enum_value(n, k, {InitialKind::rest, InitialKind::rigid_rotation, InitialKind::swirl});
         }},
        {"amplitude", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.amplitude = scalar<double>(n, k); }},
        {"perturbation", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.perturbation = scalar<double>(n, k); }}}},
      {"transform",
       {{"track_rotation", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.track_rotation = scalar<bool>(n, k); }}}},
      {"output",
       {{"dump_every", [](SimConfig& c, const YAML::Node& n, const std::string& k) { c.dump_every = scalar<int>(n, k); }}}},
  };
  return s;
}

SimConfig from_node(const YAML::Node& root) {
  SimConfig c;
  if (!root || root.IsNull()) {
    validate(c);
    return c;
  }
  if (!root.IsMap()) throw ConfigError(at_line(root) + "top level must be a mapping");
  const auto& sch = schema();
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string section = it->first.as<std::string>();
    auto s = sch.find(section);
    if (s == sch.end()) throw ConfigError(at_line(it->first) + "unknown section '" + section + "'");
    const YAML::Node body = it->second;
    if (body.IsNull()) continue;
    if (!body.IsMap()) throw ConfigError(at_line(body) + "section '" + section + "' must be a mapping");
    for (auto kv = body.begin(); kv != body.end(); ++kv) {
      const std::string key = kv->first.as<std::string>();
      auto f = s->second.find(key);
      if (f == s->second.end())
        throw ConfigError(at_line(kv->first) + "unknown key '" + section + "." + key + "'");
      f->second(c, kv->second, section + "." + key);
    }
  }
  validate(c);
  return c;
}

}  // namespace

void validate(const SimConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("invalid configuration: " + msg);
  };
  need(std::isfinite(c.mu) && c.mu > 0.0, "μ > 0 (mu > 0) violated");
  need(std::isfinite(c.beta) && c.beta > 0.0, "β > 0 (beta > 0) violated");
  need(c.r_inner > 0.0 && c.r_outer > c.r_inner, "0 < r_inner < r_outer violated");
  need(c.n_r >= 8 && c.n_theta >= 8, "n_r >= 8 and n_theta >= 8 violated");
  need(c.dt >= 0.0, "dt >= 0 violated");
  need(c.t_end >= 0.0, "t_end >= 0 violated");
  need(c.cfl > 0.0 && c.cfl <= 1.0, "0 < cfl <= 1 violated");
  need(c.delta0 >= 0.0, "delta0 >= 0 violated");
  need(c.proj_tol > 0.0 && c.newton_tol > 0.0, "solver tolerances > 0 violated");
  need(c.max_iter > 0, "max_iter > 0 violated");
  need(c.dump_every >= 0, "dump_every >= 0 violated");
  const double clearance = c.r_outer - c.q0.norm() - c.r_inner;
  need(clearance > c.effective_delta0(), "initial body-wall distance > delta0 violated");
}

SimConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return from_node(root);
}

SimConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const SimConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto v2 = [&](const Vec2& v) { e << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << YAML::EndSeq; };
  e << YAML::BeginMap;
  e << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "r_outer" << YAML::Value << c.r_outer;
  e << YAML::Key << "r_inner" << YAML::Value << c.r_inner;
  e << YAML::Key << "q0" << YAML::Value;
  v2(c.q0);
  e << YAML::EndMap;
  e << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mu" << YAML::Value << c.mu;
  e << YAML::Key << "beta" << YAML::Value << c.beta;
  e << YAML::Key << "slip" << YAML::Value << to_string(c.slip);
  e << YAML::EndMap;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_r" << YAML::Value << c.n_r;
  e << YAML::Key << "n_theta" << YAML::Value << c.n_theta;
  e << YAML::EndMap;
  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << c.dt;
  e << YAML::Key << "t_end" << YAML::Value << c.t_end;
  e << YAML::Key << "cfl" << YAML::Value << c.cfl;
  e << YAML::EndMap;
  e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "delta0" << YAML::Value << c.delta0;
  e << YAML::EndMap;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "proj_tol" << YAML::Value << c.proj_tol;
  e << YAML::Key << "newton_tol" << YAML::Value << c.newton_tol;
  e << YAML::Key << "max_iter" << YAML::Value << c.max_iter;
  e << YAML::EndMap;
  e << YAML::Key << "body" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value << to_string(c.body_mode);
  e << YAML::Key << "a0" << YAML::Value;
  v2(c.a0);
  e << YAML::Key << "omega0" << YAML::Value << c.omega0;
  e << YAML::EndMap;
  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << to_string(c.initial);
  e << YAML::Key << "amplitude" << YAML::Value << c.amplitude;
  e << YAML::Key << "perturbation" << YAML::Value << c.perturbation;
  e << YAML::EndMap;
  e << YAML::Key << "transform" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "track_rotation" << YAML::Value << c.track_rotation;
  e << YAML::EndMap;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dump_every" << YAML::Value << c.dump_every;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace slipfsi
