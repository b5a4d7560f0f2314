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

// Potentials and gradient-descent control inputs.
//
// Inputs are body-frame velocities (v_i, w_i) driving p_i' = R_i v_i and
// R_i' = R_i hat(w_i). In FullGradient mode they realize the exact gradient
// flow of the potential: R_i v_i = -k dphi/dp_i and w_i = -k dphi/dtheta_i.
// Local mode keeps only the terms of edges measured by agent i.

#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "se3form/error.hpp"
#include "se3form/graph.hpp"
#include "se3form/lie.hpp"
#include "se3form/rigidity.hpp"

namespace se3form {

enum class ControlLaw { BearingOnly, Mixed };
enum class ControlMode { Local, FullGradient };

struct ControlConfig {
  double gain = 1.0;
  ControlLaw law = ControlLaw::BearingOnly;
  ControlMode mode = ControlMode::FullGradient;
  // Divide the gradient by |F - F*| (the unit-direction variant).
  bool normalized = false;

  friend bool operator==(const ControlConfig&, const ControlConfig&) = default;
};

struct ControlInput {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

using ControlInputs = std::vector<ControlInput>;

inline void validate_control(const ControlConfig& cfg) {
  if (!(cfg.gain > 0.0) || !std::isfinite(cfg.gain)) {
    throw Error(ErrorCode::ValidationError, "control gain must be positive");
  }
}

/// phi = |b - b*|^2 / 2.
inline double bearing_potential(const FrameworkState& state, const FormationGraph& graph,
                                const TargetFormation& target) {
  if (graph.m_b() < 1) {
    throw Error(ErrorCode::InvalidArgument, "bearing potential needs at least one bearing edge");
  }
  return 0.5 * (bearing_rigidity_function(state, graph) - target.bearing_function()).squaredNorm();
}

/// phi = |b - b*|^2 / 2 + |d - d*|^2 / 2 with d = z^2 / 2.
inline double mixed_potential(const FrameworkState& state, const FormationGraph& graph,
                              const TargetFormation& target) {
  const double bearing_part =
      0.5 * (bearing_rigidity_function(state, graph) - target.bearing_function()).squaredNorm();
  const double distance_part =
      0.5 * (distance_function(state, graph) - target.distance_function()).squaredNorm();
  return bearing_part + distance_part;
}

inline double potential(const FrameworkState& state, const FormationGraph& graph,
                        const TargetFormation& target, ControlLaw law) {
  return law == ControlLaw::BearingOnly ? bearing_potential(state, graph, target)
                                        : mixed_potential(state, graph, target);
}

/// Residual F - F* of the constraints the law acts on.
inline Eigen::VectorXd constraint_residual(const FrameworkState& state, const FormationGraph& graph,
                                           const TargetFormation& target, ControlLaw law) {
  const Eigen::VectorXd db = bearing_rigidity_function(state, graph) - target.bearing_function();
  if (law == ControlLaw::BearingOnly) return db;
  Eigen::VectorXd out(graph.m_d() + db.size());
  out << distance_function(state, graph) - target.distance_function(), db;
  return out;
}

/// Analytic gradient of the law's potential in configuration coordinates:
/// [dphi/dp (world frame, 3n); dphi/dtheta (body frame, 3n)].
inline Eigen::VectorXd potential_gradient(const FrameworkState& state, const FormationGraph& graph,
                                          const TargetFormation& target, ControlLaw law) {
  const int n = graph.n;
  const Eigen::VectorXd db = bearing_rigidity_function(state, graph) - target.bearing_function();
  Eigen::MatrixXd G, K;
  detail::fill_bearing_blocks(state, graph, G, K);

  Eigen::VectorXd grad(6 * n);
  grad.head(3 * n) = G.transpose() * db;
  grad.tail(3 * n) = K.transpose() * db;
  if (law == ControlLaw::Mixed && graph.m_d() > 0) {
    const Eigen::VectorXd dd = distance_function(state, graph) - target.distance_function();
    grad.head(3 * n) += detail::distance_block(state, graph).transpose() * dd;
  }
  return grad;
}

namespace detail {

inline double normalization(const FrameworkState& state, const FormationGraph& graph,
                            const TargetFormation& target, const ControlConfig& cfg) {
  if (!cfg.normalized) return 1.0;
  const double r = constraint_residual(state, graph, target, cfg.law).norm();
  return r > 0.0 ? 1.0 / r : 1.0;
}

// Gradient restricted to edges measured by each agent (outgoing edges).
inline Eigen::VectorXd local_gradient(const FrameworkState& state, const FormationGraph& graph,
                                      const TargetFormation& target, ControlLaw law) {
  const int n = graph.n;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(6 * n);
  for (int k = 0; k < graph.m_b(); ++k) {
    const Edge& e = graph.bearing_edges[k];
    const EdgeGeometry g = edge_geometry(state, e);
    const Mat3& R = state.rotations[e.from];
    const Vec3 b = R.transpose() * g.unit;
    const Vec3 db = b - target.bearings[k];
    grad.segment<3>(3 * e.from) += g.inv_length * project(g.unit) * R * db;
    grad.segment<3>(3 * n + 3 * e.from) += hat(b).transpose() * db;
  }
  if (law == ControlLaw::Mixed) {
    for (int k = 0; k < graph.m_d(); ++k) {
      const Edge& e = graph.distance_edges[k];
      const EdgeGeometry g = edge_geometry(state, e);
      const double dd = 0.5 * g.diff.squaredNorm() - 0.5 * target.distances[k] * target.distances[k];
      grad.segment<3>(3 * e.from) += g.diff * dd;
    }
  }
  return grad;
}

inline ControlInputs inputs_from_gradient(const FrameworkState& state, const Eigen::VectorXd& grad,
                                          double scale) {
  const int n = state.size();
  ControlInputs out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[i].v = -scale * (state.rotations[i].transpose() * grad.segment<3>(3 * i));
    out[i].w = -scale * grad.segment<3>(3 * n + 3 * i);
  }
  return out;
}

inline ControlInputs control_for_law(const FrameworkState& state, const FormationGraph& graph,
                                     const TargetFormation& target, const ControlConfig& cfg) {
  validate_control(cfg);
  const Eigen::VectorXd grad = cfg.mode == ControlMode::FullGradient
                                   ? potential_gradient(state, graph, target, cfg.law)
                                   : local_gradient(state, graph, target, cfg.law);
  return inputs_from_gradient(state, grad, cfg.gain * normalization(state, graph, target, cfg));
}

}  // namespace detail

/// Bearing-only law. Requires cfg.law == BearingOnly and at least one
/// bearing edge; distance edges are ignored.
inline ControlInputs bearing_only_control(const FrameworkState& state, const FormationGraph& graph,
                                          const TargetFormation& target, const ControlConfig& cfg) {
  if (cfg.law != ControlLaw::BearingOnly) {
    throw Error(ErrorCode::InvalidArgument, "bearing_only_control called with a mixed config");
  }
  if (graph.m_b() < 1) {
    throw Error(ErrorCode::InvalidArgument, "bearing-only control needs at least one bearing edge");
  }
  return detail::control_for_law(state, graph, target, cfg);
}

/// Mixed bearing-distance law. Requires cfg.law == Mixed.
inline ControlInputs mixed_control(const FrameworkState& state, const FormationGraph& graph,
                                   const TargetFormation& target, const ControlConfig& cfg) {
  if (cfg.law != ControlLaw::Mixed) {
    throw Error(ErrorCode::InvalidArgument, "mixed_control called with a bearing-only config");
  }
  return detail::control_for_law(state, graph, target, cfg);
}

inline ControlInputs compute_control(const FrameworkState& state, const FormationGraph& graph,
                                     const TargetFormation& target, const ControlConfig& cfg) {
  return cfg.law == ControlLaw::BearingOnly ? bearing_only_control(state, graph, target, cfg)
                                            : mixed_control(state, graph, target, cfg);
}

/// Configuration velocity produced by the inputs, in gradient coordinates:
/// [R_i v_i (world); w_i (body)].
inline Eigen::VectorXd configuration_rate(const FrameworkState& state, const ControlInputs& inputs) {
  const int n = state.size();
  Eigen::VectorXd out(6 * n);
  for (int i = 0; i < n; ++i) {
    out.segment<3>(3 * i) = state.rotations[i] * inputs[i].v;
    out.segment<3>(3 * n + 3 * i) = inputs[i].w;
  }
  return out;
}

/// Central-difference gradient of the law's potential.
inline Eigen::VectorXd gradient_oracle(const FrameworkState& state, const FormationGraph& graph,
                                       const TargetFormation& target, ControlLaw law, double h) {
  check_step(h);
  const int cols = 6 * graph.n;
  Eigen::VectorXd grad(cols);
  for (int c = 0; c < cols; ++c) {
    const double fp = potential(perturb_coordinate(state, c, h), graph, target, law);
    const double fm = potential(perturb_coordinate(state, c, -h), graph, target, law);
    grad(c) = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace se3form
