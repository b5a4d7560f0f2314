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

// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "se3form.hpp"

namespace se3form {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

Trajectory run(const Scenario& s) { return simulate(s.initial, s.graph, s.target, s.control, s.sim); }

testing::RandomProblem consistent_problem(testing::Generator& gen, bool with_distances) {
  auto p = testing::random_problem(gen, with_distances);
  p.target.bearings.clear();
  p.target.distances.clear();
  for (const Edge& e : p.graph.bearing_edges) p.target.bearings.push_back(bearing(p.state, e));
  for (const Edge& e : p.graph.distance_edges) {
    p.target.distances.push_back((p.state.positions[e.from] - p.state.positions[e.to]).norm());
  }
  return p;
}

Outcome rigidity_matrices() {
  const auto t0 = Clock::now();
  testing::Generator gen(1001);
  double worst_bearing = 0.0, worst_mixed = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testing::random_problem(gen, true);
    const Eigen::MatrixXd B = bearing_rigidity_matrix(p.state, p.graph);
    worst_bearing = std::max(worst_bearing,
        max_relative_error(B, finite_difference_jacobian(p.state, p.graph, 1e-6, RigidityFunction::Bearing)));
    const Eigen::MatrixXd M = mixed_rigidity_matrix(p.state, p.graph).assembled;
    worst_mixed = std::max(worst_mixed,
        max_relative_error(M, finite_difference_jacobian(p.state, p.graph, 1e-6, RigidityFunction::Mixed)));
  }
  const double elapsed = seconds_since(t0);
  return {worst_bearing < 1e-5 && worst_mixed < 1e-5 && elapsed < 10.0,
          "bearing " + sci(worst_bearing) + ", mixed " + sci(worst_mixed) + ", " + sci(elapsed) + " s"};
}

Outcome compact_form() {
  testing::Generator gen(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testing::random_problem(gen, true);
    const Eigen::VectorXd a = bearing_rigidity_function(p.state, p.graph);
    const Eigen::VectorXd b = bearing_rigidity_function_compact(p.state, p.graph);
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, "max difference " + sci(worst)};
}

Outcome gradient() {
  testing::Generator gen(1003);
  double worst[2] = {0.0, 0.0};
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testing::random_problem(gen, true);
    for (int l = 0; l < 2; ++l) {
      ControlConfig c;
      c.law = l == 0 ? ControlLaw::BearingOnly : ControlLaw::Mixed;
      c.gain = 1.0 + 0.01 * trial;
      const Eigen::VectorXd rate = configuration_rate(p.state, compute_control(p.state, p.graph, p.target, c));
      const Eigen::VectorXd oracle = gradient_oracle(p.state, p.graph, p.target, c.law, 1e-6);
      worst[l] = std::max(worst[l], max_relative_error(rate, -c.gain * oracle));
    }
  }
  return {worst[0] < 1e-5 && worst[1] < 1e-5, "bearing-only " + sci(worst[0]) + ", mixed " + sci(worst[1])};
}

Outcome equilibrium() {
  testing::Generator gen(1004);
  double worst = 0.0;
  auto record = [&](const ControlInputs& u) {
    for (const auto& in : u) worst = std::max({worst, in.v.cwiseAbs().maxCoeff(), in.w.cwiseAbs().maxCoeff()});
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = consistent_problem(gen, true);
    for (ControlMode mode : {ControlMode::FullGradient, ControlMode::Local}) {
      ControlConfig c;
      c.mode = mode;
      c.law = ControlLaw::BearingOnly;
      record(bearing_only_control(p.state, p.graph, p.target, c));
      c.law = ControlLaw::Mixed;
      record(mixed_control(p.state, p.graph, p.target, c));
    }
  }
  return {worst < 1e-12, "max |input| " + sci(worst)};
}

Outcome bearing_only_drift() {
  Scenario s = builtin_scenario("cube8-bearing");
  double centroid[2], scale[2], s0 = 0.0;
  std::string status;
  for (int k = 0; k < 2; ++k) {
    s.sim.dt = k == 0 ? 1e-3 : 5e-4;
    s.sim.max_steps = static_cast<long>(200.0 / s.sim.dt);
    s.sim.record_every = 1000000;
    const Trajectory traj = run(s);
    const InvariantReport r = invariant_report(traj);
    s0 = r.initial_scale;
    centroid[k] = r.centroid_drift;
    scale[k] = r.scale_drift;
    status += std::string(k ? ", " : "") + std::string(to_string(traj.termination)) + " at step " +
              std::to_string(traj.metrics.back().step);
  }
  // Centroid drift is identically zero in exact arithmetic; below the floor it
  // is pure round-off and cannot shrink with dt.
  const double floor = 1e-12 * s0;
  const bool bounded = centroid[0] < 1e-6 * s0 && scale[0] < 1e-6 * s0;
  const bool scale_halves = scale[1] <= 0.5 * scale[0] || scale[1] < floor;
  const bool centroid_halves = centroid[1] <= 0.5 * centroid[0] || centroid[1] < floor;
  return {bounded && scale_halves && centroid_halves,
          "dt=1e-3: centroid " + sci(centroid[0] / s0) + " s0, scale " + sci(scale[0] / s0) +
              " s0; dt=5e-4: centroid " + sci(centroid[1] / s0) + " s0, scale " + sci(scale[1] / s0) + " s0 (" +
              status + ")"};
}

Outcome mixed_centroid() {
  Scenario s = builtin_scenario("quad4-5b1d");
  s.sim.dt = 1e-3;
  s.sim.max_steps = 2000000;
  s.sim.record_every = 1000000;
  const Trajectory traj = run(s);
  const InvariantReport r = invariant_report(traj);
  const bool centroid_ok = r.centroid_drift < 1e-6 * r.initial_scale;
  const bool rate_vanishes = std::abs(r.final_scale_rate) <= 1e-3 * r.max_scale_rate &&
                             r.final_distance_residual < 1e-3 * r.initial_distance_residual;
  return {centroid_ok && rate_vanishes && traj.termination == Termination::Converged,
          "centroid drift " + sci(r.centroid_drift / r.initial_scale) + " s0; ds/dt " +
              sci(r.initial_scale_rate) + " -> " + sci(r.final_scale_rate) + " as |d - d*| " +
              sci(r.initial_distance_residual) + " -> " + sci(r.final_distance_residual)};
}

Outcome cube_example() {
  const auto t0 = Clock::now();
  const Scenario s = builtin_scenario("cube8-bearing");
  const Trajectory traj = run(s);
  const double elapsed = seconds_since(t0);
  const StepMetrics& last = traj.metrics.back();
  const double s0 = traj.metrics.front().scale;
  const double ds = std::abs(last.scale - s0);
  return {traj.termination == Termination::Converged && last.bearing_residual < 1e-3 && last.step <= 200000 &&
              ds < 1e-4 * s0 && elapsed < 30.0,
          std::string(to_string(traj.termination)) + " at step " + std::to_string(last.step) + ", |b - b*| " +
              sci(last.bearing_residual) + ", |s - s0| " + sci(ds / s0) + " s0, " + sci(elapsed) + " s"};
}

Outcome quad_example() {
  std::ostringstream detail;
  bool pass = true;

  const Scenario full = builtin_scenario("quad4-5b1d");
  const Trajectory traj = run(full);
  const Sample& end = traj.final_sample();
  double worst_distance = 0.0;
  for (int k = 0; k < full.graph.m_d(); ++k) {
    const Edge& e = full.graph.distance_edges[k];
    const double z = (end.state.positions[e.from] - end.state.positions[e.to]).norm();
    worst_distance = std::max(worst_distance, std::abs(z - full.target.distances[k]));
  }
  pass = pass && end.phi < 1e-6 && worst_distance < 1e-3;
  detail << "5b1d phi " << sci(end.phi) << " distance error " << sci(worst_distance);

  for (const char* name : {"quad4-3b4d", "quad4-3b3d"}) {
    const Scenario s = builtin_scenario(name);
    const Trajectory t = run(s);
    const double phi = t.metrics.back().phi;
    pass = pass && phi > 1e-3;
    detail << "; " << (name + 6) << " phi " << sci(phi) << " (" << to_string(t.termination) << " at step "
           << t.metrics.back().step << ")";
  }
  return {pass, detail.str()};
}

Outcome null_space() {
  const FrameworkState cube = FrameworkState::at_positions(testing::unit_cube());
  FormationGraph g = testing::complete_bearing_graph(8);
  const int bearing_dim = infinitesimal_motion_space(bearing_rigidity_matrix(cube, g)).dimension();
  g.distance_edges.push_back({0, 7});
  const int mixed_dim = infinitesimal_motion_space(mixed_rigidity_matrix(cube, g).assembled).dimension();
  return {bearing_dim == 7 && mixed_dim == 6,
          "bearing-only " + std::to_string(bearing_dim) + ", with one distance edge " + std::to_string(mixed_dim)};
}

Outcome hygiene() {
  namespace fs = std::filesystem;
  double worst = 0.0;
  bool identical = true;
  const fs::path dir = fs::temp_directory_path() / "se3form_acceptance";
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const std::string& name : builtin_names()) {
    const Scenario s = builtin_scenario(name);
    std::string csv[2];
    for (int k = 0; k < 2; ++k) {
      const Trajectory traj = run(s);
      for (const StepMetrics& m : traj.metrics) worst = std::max(worst, m.max_orthonormality_defect);
      const fs::path p = dir / (name + std::to_string(k) + ".csv");
      write_trajectory(traj, p.string());
      csv[k] = slurp(p);
    }
    identical = identical && !csv[0].empty() && csv[0] == csv[1];
  }
  fs::remove_all(dir);
  return {worst < 1e-8 && identical,
          "max |R^T R - I| " + sci(worst) + ", repeated CSV " + (identical ? "byte-identical" : "DIFFERENT")};
}

}  // namespace
}  // namespace se3form

int main() {
  using namespace se3form;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1 rigidity matrices match finite differences", rigidity_matrices},
      {"AC2 compact and per-edge bearing functions agree", compact_form},
      {"AC3 full-gradient control matches the potential gradient", gradient},
      {"AC4 zero input at the target", equilibrium},
      {"AC5 centroid and scale invariance of bearing-only control", bearing_only_drift},
      {"AC6 centroid invariance of mixed control", mixed_centroid},
      {"AC7 cube formation converges at constant scale", cube_example},
      {"AC8 four-agent constraint sets", quad_example},
      {"AC9 infinitesimal motions of the cube", null_space},
      {"AC10 rotation hygiene and deterministic output", hygiene},
  };
  int failures = 0;
  for (const auto& [label, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", label, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
