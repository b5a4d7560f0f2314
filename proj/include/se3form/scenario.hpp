// Copyright 2026 The se3form Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario files (JSON), seeded initial-state generation, and the built-in
// catalog.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "se3form/control.hpp"
#include "se3form/error.hpp"
#include "se3form/graph.hpp"
#include "se3form/lie.hpp"
#include "se3form/rigidity.hpp"
#include "se3form/simulation.hpp"

namespace se3form {

using Json = nlohmann::json;

inline constexpr const char* kSeedEnvVar = "SE3FORM_SEED";

/// Recipe for the initial state: target positions plus a seeded offset.
/// Agent i gets p_i = target_i + position_noise * u and
/// R_i = so3_exp(rotation_noise * u'), with u, u' uniform in [-1, 1]^3 drawn
/// in that order from mt19937_64(seed).
struct ScenarioGenerator {
  std::uint64_t seed = 0;
  std::vector<Vec3> target_positions;
  double position_noise = 0.0;
  double rotation_noise = 0.0;

  friend bool operator==(const ScenarioGenerator& a, const ScenarioGenerator& b) {
    if (a.seed != b.seed || a.position_noise != b.position_noise ||
        a.rotation_noise != b.rotation_noise ||
        a.target_positions.size() != b.target_positions.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.target_positions.size(); ++i) {
      if (a.target_positions[i] != b.target_positions[i]) return false;
    }
    return true;
  }
};

struct Scenario {
  std::string name;
  FormationGraph graph;
  FrameworkState initial;
  TargetFormation target;
  ControlConfig control;
  SimConfig sim;
  std::optional<ScenarioGenerator> generator;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Desired constraints read off a configuration with every R_i = I.
inline TargetFormation target_from_positions(const std::vector<Vec3>& positions,
                                             const FormationGraph& graph) {
  const FrameworkState s = FrameworkState::at_positions(positions);
  TargetFormation t;
  for (const Edge& e : graph.bearing_edges) t.bearings.push_back(bearing(s, e));
  for (const Edge& e : graph.distance_edges) {
    t.distances.push_back(edge_geometry(s, e).length);
  }
  return t;
}

/// Deterministic across platforms: only the raw mt19937_64 stream is used.
inline FrameworkState generate_initial_state(const ScenarioGenerator& gen) {
  std::mt19937_64 rng(gen.seed);
  auto uniform = [&rng] {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * unit - 1.0;
  };
  FrameworkState s;
  for (const Vec3& p : gen.target_positions) {
    const double ux = uniform(), uy = uniform(), uz = uniform();
    const double rx = uniform(), ry = uniform(), rz = uniform();
    s.positions.push_back(p + gen.position_noise * Vec3(ux, uy, uz));
    s.rotations.push_back(so3_exp(gen.rotation_noise * Vec3(rx, ry, rz)));
  }
  return s;
}

namespace detail {

inline std::string join_path(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

inline const Json& require(const Json& j, std::string_view parent, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::ParseError, "missing field \"" + join_path(parent, key) + "\"");
  }
  return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, "field \"" + path + "\" must be a number");
  return j.get<double>();
}

inline long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw Error(ErrorCode::ParseError, "field \"" + path + "\" must be an integer");
  }
  return j.get<long>();
}

inline std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw Error(ErrorCode::ParseError, "field \"" + path + "\" must be a string");
  return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!j.is_array() || (size && j.size() != *size)) {
    throw Error(ErrorCode::ParseError,
                "field \"" + path + "\" must be an array" +
                    (size ? " of " + std::to_string(*size) + " numbers" : std::string()));
  }
  return j;
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  array(j, path, 3);
  return Vec3(number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]"));
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline std::vector<Edge> edge_list(const Json& j, const std::string& path) {
  std::vector<Edge> out;
  for (std::size_t k = 0; k < array(j, path).size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    array(j[k], p, 2);
    out.push_back(Edge{static_cast<int>(integer(j[k][0], p + "[0]")),
                       static_cast<int>(integer(j[k][1], p + "[1]"))});
  }
  return out;
}

inline Json to_json(const std::vector<Edge>& edges) {
  Json out = Json::array();
  for (const Edge& e : edges) out.push_back(Json::array({e.from, e.to}));
  return out;
}

template <class Enum, std::size_t N>
Enum parse_enum(const Json& j, const std::string& path,
                const std::pair<const char*, Enum> (&names)[N]) {
  const std::string s = text(j, path);
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw Error(ErrorCode::ParseError, "field \"" + path + "\" must be one of: " + allowed);
}

template <class Enum, std::size_t N>
const char* enum_name(Enum value, const std::pair<const char*, Enum> (&names)[N]) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "";
}

inline constexpr std::pair<const char*, ControlLaw> kLawNames[] = {
    {"bearing_only", ControlLaw::BearingOnly}, {"mixed", ControlLaw::Mixed}};
inline constexpr std::pair<const char*, ControlMode> kModeNames[] = {
    {"full_gradient", ControlMode::FullGradient}, {"local", ControlMode::Local}};
inline constexpr std::pair<const char*, Integrator> kIntegratorNames[] = {
    {"euler_exp", Integrator::EulerExp}, {"rk4_exp", Integrator::RK4Exp}};

// Graph and state errors surface as ValidationError at load time.
template <class F>
void as_validation(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError) throw;
    throw Error(ErrorCode::ValidationError, e.what());
  }
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

/// Builds a validated scenario from its JSON form. `agents` and `target` may
/// be omitted when a `generator` block supplies target positions.
inline Scenario scenario_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "scenario must be a JSON object");

  Scenario s;
  s.name = text(require(j, "", "name"), "name");

  s.graph.bearing_edges = edge_list(require(j, "", "bearing_edges"), "bearing_edges");
  s.graph.distance_edges = edge_list(require(j, "", "distance_edges"), "distance_edges");

  if (j.contains("generator")) {
    const Json& g = j.at("generator");
    ScenarioGenerator gen;
    const long seed = integer(require(g, "generator", "seed"), "generator.seed");
    if (seed < 0) throw Error(ErrorCode::ParseError, "field \"generator.seed\" must be non-negative");
    gen.seed = static_cast<std::uint64_t>(seed);
    const Json& tp = array(require(g, "generator", "target_positions"), "generator.target_positions");
    for (std::size_t i = 0; i < tp.size(); ++i) {
      gen.target_positions.push_back(vec3(tp[i], "generator.target_positions[" + std::to_string(i) + "]"));
    }
    gen.position_noise = number(require(g, "generator", "position_noise"), "generator.position_noise");
    gen.rotation_noise = number(require(g, "generator", "rotation_noise"), "generator.rotation_noise");
    s.generator = gen;
  }

  if (j.contains("agents") || !s.generator) {
    const Json& agents = array(require(j, "", "agents"), "agents");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const std::string p = "agents[" + std::to_string(i) + "]";
      s.initial.positions.push_back(vec3(require(agents[i], p, "p"), p + ".p"));
      const Json& r = array(require(agents[i], p, "R"), p + ".R", 9);
      Mat3 R;
      for (int k = 0; k < 9; ++k) R(k / 3, k % 3) = number(r[k], p + ".R[" + std::to_string(k) + "]");
      s.initial.rotations.push_back(R);
    }
  } else {
    s.initial = generate_initial_state(*s.generator);
  }
  s.graph.n = s.initial.size();

  detail::as_validation([&] { validate_graph(s.graph); });

  if (j.contains("target") || !s.generator) {
    const Json& t = require(j, "", "target");
    const Json& bs = array(require(t, "target", "bearings"), "target.bearings");
    for (std::size_t k = 0; k < bs.size(); ++k) {
      s.target.bearings.push_back(vec3(bs[k], "target.bearings[" + std::to_string(k) + "]"));
    }
    const Json& ds = array(require(t, "target", "distances"), "target.distances");
    for (std::size_t k = 0; k < ds.size(); ++k) {
      s.target.distances.push_back(number(ds[k], "target.distances[" + std::to_string(k) + "]"));
    }
  } else {
    if (static_cast<int>(s.generator->target_positions.size()) != s.graph.n) {
      throw Error(ErrorCode::ValidationError, "generator.target_positions size differs from agent count");
    }
    detail::as_validation([&] { s.target = target_from_positions(s.generator->target_positions, s.graph); });
  }

  const Json& c = require(j, "", "control");
  s.control.gain = number(require(c, "control", "gain"), "control.gain");
  s.control.law = parse_enum(require(c, "control", "law"), "control.law", kLawNames);
  s.control.mode = parse_enum(require(c, "control", "mode"), "control.mode", kModeNames);
  if (c.contains("normalized")) {
    if (!c.at("normalized").is_boolean()) {
      throw Error(ErrorCode::ParseError, "field \"control.normalized\" must be a boolean");
    }
    s.control.normalized = c.at("normalized").get<bool>();
  }

  const Json& sim = require(j, "", "sim");
  s.sim.dt = number(require(sim, "sim", "dt"), "sim.dt");
  s.sim.max_steps = integer(require(sim, "sim", "max_steps"), "sim.max_steps");
  s.sim.convergence_tol = number(require(sim, "sim", "tol"), "sim.tol");
  s.sim.integrator = parse_enum(require(sim, "sim", "integrator"), "sim.integrator", kIntegratorNames);
  if (sim.contains("renorm_interval")) {
    s.sim.renorm_interval = static_cast<int>(integer(sim.at("renorm_interval"), "sim.renorm_interval"));
  }
  if (sim.contains("record_every")) {
    s.sim.record_every = static_cast<int>(integer(sim.at("record_every"), "sim.record_every"));
  }

  detail::as_validation([&] {
    validate_state(s.initial, s.graph);
    validate_target(s.target, s.graph);
    validate_control(s.control);
    validate_sim(s.sim);
    if (s.control.law == ControlLaw::BearingOnly && s.graph.m_b() < 1) {
      throw Error(ErrorCode::ValidationError, "bearing-only scenario has no bearing edges");
    }
  });
  return s;
}

/// Full JSON form. Agents and target are always written out, so the result
/// loads to the same scenario without regeneration.
inline Json scenario_to_json(const Scenario& s) {
  using namespace detail;
  Json j;
  j["name"] = s.name;
  if (s.generator) {
    Json tp = Json::array();
    for (const Vec3& p : s.generator->target_positions) tp.push_back(to_json(p));
    j["generator"] = {{"seed", s.generator->seed},
                      {"target_positions", tp},
                      {"position_noise", s.generator->position_noise},
                      {"rotation_noise", s.generator->rotation_noise}};
  }
  Json agents = Json::array();
  for (int i = 0; i < s.initial.size(); ++i) {
    Json R = Json::array();
    for (int k = 0; k < 9; ++k) R.push_back(s.initial.rotations[i](k / 3, k % 3));
    agents.push_back({{"p", to_json(s.initial.positions[i])}, {"R", R}});
  }
  j["agents"] = agents;
  j["bearing_edges"] = to_json(s.graph.bearing_edges);
  j["distance_edges"] = to_json(s.graph.distance_edges);
  Json bearings = Json::array();
  for (const Vec3& b : s.target.bearings) bearings.push_back(to_json(b));
  j["target"] = {{"bearings", bearings}, {"distances", s.target.distances}};
  j["control"] = {{"gain", s.control.gain},
                  {"law", enum_name(s.control.law, kLawNames)},
                  {"mode", enum_name(s.control.mode, kModeNames)},
                  {"normalized", s.control.normalized}};
  j["sim"] = {{"dt", s.sim.dt},
              {"max_steps", s.sim.max_steps},
              {"tol", s.sim.convergence_tol},
              {"integrator", enum_name(s.sim.integrator, kIntegratorNames)},
              {"renorm_interval", s.sim.renorm_interval},
              {"record_every", s.sim.record_every}};
  return j;
}

/// Parses scenario text. JSON syntax errors report the line number.
inline Scenario parse_scenario(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                    ": " + e.what());
  }
  return scenario_from_json(j);
}

/// Regenerates the initial state from the generator with the seed in
/// SE3FORM_SEED, when both are present.
inline void apply_seed_override(Scenario& s) {
  const char* env = std::getenv(kSeedEnvVar);
  if (env == nullptr || !s.generator) return;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || env[0] == '-') {
    throw Error(ErrorCode::ValidationError, std::string(kSeedEnvVar) + " must be a non-negative integer");
  }
  s.generator->seed = seed;
  s.initial = generate_initial_state(*s.generator);
  detail::as_validation([&] { validate_state(s.initial, s.graph); });
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::string& path) {
  Scenario s = parse_scenario(read_file(path));
  apply_seed_override(s);
  return s;
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace se3form
