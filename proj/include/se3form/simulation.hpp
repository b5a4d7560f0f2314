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

// Closed-loop integration of p_i' = R_i v_i, R_i' = R_i hat(w_i).

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "se3form/control.hpp"
#include "se3form/error.hpp"
#include "se3form/graph.hpp"
#include "se3form/lie.hpp"
#include "se3form/rigidity.hpp"

namespace se3form {

enum class Integrator { EulerExp, RK4Exp };
enum class Termination { Converged, StepLimit, NumericalFailure };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::StepLimit: return "StepLimit";
    case Termination::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

struct SimConfig {
  double dt = 1e-2;
  long max_steps = 200000;
  double convergence_tol = 1e-8;  // on phi
  Integrator integrator = Integrator::EulerExp;
  int renorm_interval = 100;      // 0 disables
  int record_every = 1;           // full-state sampling period, in steps

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate_sim(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw Error(ErrorCode::ValidationError, "dt must be positive");
  }
  if (cfg.max_steps < 1) throw Error(ErrorCode::ValidationError, "max_steps must be at least 1");
  if (!(cfg.convergence_tol >= 0.0)) {
    throw Error(ErrorCode::ValidationError, "tol must be non-negative");
  }
  if (cfg.renorm_interval < 0) {
    throw Error(ErrorCode::ValidationError, "renorm_interval must be non-negative");
  }
  if (cfg.record_every < 1) throw Error(ErrorCode::ValidationError, "record_every must be at least 1");
}

/// p_bar = mean position, s = sqrt(mean |p_i - p_bar|^2).
inline std::pair<Vec3, double> centroid_and_scale(const FrameworkState& state) {
  const int n = state.size();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "centroid of an empty framework");
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : state.positions) c += p;
  c /= static_cast<double>(n);
  double acc = 0.0;
  for (const Vec3& p : state.positions) acc += (p - c).squaredNorm();
  return {c, std::sqrt(acc / static_cast<double>(n))};
}

/// One EulerExp step with the inputs held: p += dt R v, R <- R exp(dt w).
inline FrameworkState euler_step(const FrameworkState& state, const ControlInputs& inputs, double dt) {
  FrameworkState out = state;
  for (int i = 0; i < state.size(); ++i) {
    if (inputs[i].v.isZero(0.0) && inputs[i].w.isZero(0.0)) continue;
    out.positions[i] = state.positions[i] + dt * (state.rotations[i] * inputs[i].v);
    out.rotations[i] = state.rotations[i] * so3_exp(dt * inputs[i].w);
  }
  return out;
}

/// One step of the coupled kinematics with inputs re-evaluated by `field`
/// (a callable FrameworkState -> ControlInputs) at every stage.
///
/// RK4Exp is the Munthe-Kaas form of classical RK4: each agent's rotation is
/// R_0 exp(u) with u integrated in the Lie algebra through dexp_inv, and
/// positions use the ordinary RK4 weights.
template <class Field>
FrameworkState step_closed_loop(const FrameworkState& state, double dt, Integrator integrator,
                                Field&& field) {
  if (integrator == Integrator::EulerExp) return euler_step(state, field(state), dt);

  const int n = state.size();
  std::vector<Vec3> pdot[4];
  std::vector<Vec3> udot[4];
  auto stage = [&](int s, const FrameworkState& x, const std::vector<Vec3>& u) {
    const ControlInputs in = field(x);
    pdot[s].resize(n);
    udot[s].resize(n);
    for (int i = 0; i < n; ++i) {
      pdot[s][i] = x.rotations[i] * in[i].v;
      udot[s][i] = dexp_inv_right(u[i], in[i].w);
    }
  };
  auto offset = [&](int s, double c, std::vector<Vec3>& u) {
    FrameworkState x = state;
    for (int i = 0; i < n; ++i) {
      u[i] = c * dt * udot[s][i];
      x.positions[i] = state.positions[i] + c * dt * pdot[s][i];
      x.rotations[i] = state.rotations[i] * so3_exp(u[i]);
    }
    return x;
  };

  std::vector<Vec3> u(n, Vec3::Zero());
  stage(0, state, u);
  FrameworkState x = offset(0, 0.5, u);
  stage(1, x, u);
  x = offset(1, 0.5, u);
  stage(2, x, u);
  x = offset(2, 1.0, u);
  stage(3, x, u);

  FrameworkState out = state;
  for (int i = 0; i < n; ++i) {
    const Vec3 dp = pdot[0][i] + 2.0 * pdot[1][i] + 2.0 * pdot[2][i] + pdot[3][i];
    const Vec3 du = udot[0][i] + 2.0 * udot[1][i] + 2.0 * udot[2][i] + udot[3][i];
    out.positions[i] = state.positions[i] + (dt / 6.0) * dp;
    out.rotations[i] = state.rotations[i] * so3_exp((dt / 6.0) * du);
  }
  return out;
}

/// Advances the state with inputs held constant over the step (zero-order
/// hold). EulerExp ignores rotation changes within the step; RK4Exp
/// integrates p' = R(t) v along R(t) = R exp(t w).
inline FrameworkState step(const FrameworkState& state, const ControlInputs& inputs, double dt,
                           Integrator integrator) {
  if (static_cast<int>(inputs.size()) != state.size()) {
    throw Error(ErrorCode::InvalidArgument, "one control input per agent is required");
  }
  for (const ControlInput& in : inputs) {
    if (!in.v.allFinite() || !in.w.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "non-finite control input");
    }
  }
  return step_closed_loop(state, dt, integrator, [&](const FrameworkState&) { return inputs; });
}

/// Per-step scalar record. Always kept for every step.
struct StepMetrics {
  long step = 0;
  double t = 0.0;
  double phi = 0.0;
  Vec3 centroid = Vec3::Zero();
  double scale = 0.0;
  double max_orthonormality_defect = 0.0;
  double bearing_residual = 0.0;   // |b - b*|
  double distance_residual = 0.0;  // |d - d*|
};

/// Full state snapshot, kept every `record_every` steps and at the end.
struct Sample {
  long step = 0;
  double t = 0.0;
  FrameworkState state;
  ControlInputs inputs;
  double phi = 0.0;
  Vec3 centroid = Vec3::Zero();
  double scale = 0.0;
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<StepMetrics> metrics;
  Termination termination = Termination::StepLimit;
  std::string message;

  bool empty() const { return samples.empty(); }
  const Sample& final_sample() const { return samples.back(); }
};

/// Runs control + integration until phi <= tol, max_steps integration steps,
/// or a numerical failure (non-finite values, coincident agents, rotations
/// that cannot be re-orthonormalized).
inline Trajectory simulate(const FrameworkState& state0, const FormationGraph& graph,
                           const TargetFormation& target, const ControlConfig& control,
                           const SimConfig& sim) {
  validate_graph(graph);
  validate_state(state0, graph);
  validate_target(target, graph);
  validate_control(control);
  validate_sim(sim);

  auto field = [&](const FrameworkState& x) { return compute_control(x, graph, target, control); };

  Trajectory traj;
  FrameworkState state = state0;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * sim.dt;
    double phi = 0.0;
    ControlInputs inputs;
    StepMetrics m;
    try {
      phi = potential(state, graph, target, control.law);
      inputs = field(state);
      m.bearing_residual =
          (bearing_rigidity_function(state, graph) - target.bearing_function()).norm();
      m.distance_residual =
          (distance_function(state, graph) - target.distance_function()).norm();
    } catch (const Error& e) {
      traj.termination = Termination::NumericalFailure;
      traj.message = e.what();
      break;
    }
    if (!std::isfinite(phi)) {
      traj.termination = Termination::NumericalFailure;
      traj.message = "potential became non-finite at step " + std::to_string(k);
      break;
    }

    const auto [centroid, scale] = centroid_and_scale(state);
    m.step = k;
    m.t = t;
    m.phi = phi;
    m.centroid = centroid;
    m.scale = scale;
    for (const Mat3& R : state.rotations) {
      m.max_orthonormality_defect = std::max(m.max_orthonormality_defect, orthonormality_defect(R));
    }
    traj.metrics.push_back(m);

    const bool converged = phi <= sim.convergence_tol;
    const bool exhausted = k >= sim.max_steps;
    if (k % sim.record_every == 0 || converged || exhausted) {
      traj.samples.push_back(Sample{k, t, state, inputs, phi, centroid, scale});
    }
    if (converged) {
      traj.termination = Termination::Converged;
      break;
    }
    if (exhausted) {
      traj.termination = Termination::StepLimit;
      break;
    }

    try {
      state = sim.integrator == Integrator::EulerExp
                  ? euler_step(state, inputs, sim.dt)
                  : step_closed_loop(state, sim.dt, sim.integrator, field);
      if (sim.renorm_interval > 0 && (k + 1) % sim.renorm_interval == 0) {
        for (Mat3& R : state.rotations) R = reorthonormalize(R);
      }
    } catch (const Error& e) {
      traj.termination = Termination::NumericalFailure;
      traj.message = e.what();
      break;
    }
    bool finite = true;
    for (int i = 0; i < state.size(); ++i) {
      finite = finite && state.positions[i].allFinite() && state.rotations[i].allFinite();
    }
    if (!finite) {
      traj.termination = Termination::NumericalFailure;
      traj.message = "state became non-finite at step " + std::to_string(k + 1);
      break;
    }
  }
  return traj;
}

struct InvariantReport {
  double initial_scale = 0.0;
  double centroid_drift = 0.0;  // max |p_bar(t) - p_bar(0)|
  double scale_drift = 0.0;     // max |s(t) - s(0)|
  double max_orthonormality_defect = 0.0;
  double initial_scale_rate = 0.0;  // ds/dt over the first step
  double final_scale_rate = 0.0;    // ds/dt over the last step
  double max_scale_rate = 0.0;
  double initial_distance_residual = 0.0;
  double final_distance_residual = 0.0;
};

/// Drift of the centroid and scale, rotation hygiene, and the measured scale
/// rate at both ends of the run.
inline InvariantReport invariant_report(const Trajectory& traj) {
  const auto& ms = traj.metrics;
  if (ms.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "invariant report needs at least two recorded steps");
  }
  InvariantReport r;
  r.initial_scale = ms.front().scale;
  r.initial_distance_residual = ms.front().distance_residual;
  r.final_distance_residual = ms.back().distance_residual;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    r.centroid_drift = std::max(r.centroid_drift, (ms[k].centroid - ms.front().centroid).norm());
    r.scale_drift = std::max(r.scale_drift, std::abs(ms[k].scale - ms.front().scale));
    r.max_orthonormality_defect = std::max(r.max_orthonormality_defect, ms[k].max_orthonormality_defect);
    if (k + 1 < ms.size()) {
      const double rate = (ms[k + 1].scale - ms[k].scale) / (ms[k + 1].t - ms[k].t);
      r.max_scale_rate = std::max(r.max_scale_rate, std::abs(rate));
      if (k == 0) r.initial_scale_rate = rate;
      r.final_scale_rate = rate;
    }
  }
  return r;
}

}  // namespace se3form
