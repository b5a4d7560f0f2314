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

// Bearing and distance rigidity functions of an SE(3) framework, their
// analytic Jacobians (rigidity matrices), a central-difference Jacobian used
// as an independent check, and null-space analysis of the result.
//
// Configuration coordinates are ordered [p_0 .. p_{n-1}, theta_0 .. theta_{n-1}],
// three per agent. Rotation coordinates are body-frame perturbations:
// R_i <- R_i * so3_exp(theta_i), the same tangent convention as R' = R hat(w).

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "se3form/error.hpp"
#include "se3form/graph.hpp"
#include "se3form/lie.hpp"

namespace se3form {

inline constexpr double kCoincidentThreshold = 1e-9;
inline constexpr double kRotationTolerance = 1e-9;
inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kDefaultNullTolerance = 1e-8;

/// Poses of all agents: the configuration (p, R).
struct FrameworkState {
  std::vector<Vec3> positions;
  std::vector<Mat3> rotations;

  int size() const { return static_cast<int>(positions.size()); }

  /// Identity rotations at the given positions.
  static FrameworkState at_positions(std::vector<Vec3> positions) {
    FrameworkState s;
    s.rotations.assign(positions.size(), Mat3::Identity());
    s.positions = std::move(positions);
    return s;
  }

  friend bool operator==(const FrameworkState& a, const FrameworkState& b) {
    if (a.positions.size() != b.positions.size() || a.rotations.size() != b.rotations.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
      if (a.positions[i] != b.positions[i]) return false;
    }
    for (std::size_t i = 0; i < a.rotations.size(); ++i) {
      if (a.rotations[i] != b.rotations[i]) return false;
    }
    return true;
  }
};

/// Desired bearings b* (one per bearing edge, unit, expressed in the measuring
/// agent's frame) and desired distances z* (one per distance edge).
struct TargetFormation {
  std::vector<Vec3> bearings;
  std::vector<double> distances;

  /// d*_k = z*_k^2 / 2, matching the entries of the distance function.
  Eigen::VectorXd distance_function() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(distances.size()));
    for (std::size_t k = 0; k < distances.size(); ++k) {
      out(static_cast<Eigen::Index>(k)) = 0.5 * distances[k] * distances[k];
    }
    return out;
  }

  Eigen::VectorXd bearing_function() const {
    Eigen::VectorXd out(3 * static_cast<Eigen::Index>(bearings.size()));
    for (std::size_t k = 0; k < bearings.size(); ++k) {
      out.segment<3>(3 * static_cast<Eigen::Index>(k)) = bearings[k];
    }
    return out;
  }

  friend bool operator==(const TargetFormation& a, const TargetFormation& b) {
    if (a.distances != b.distances || a.bearings.size() != b.bearings.size()) return false;
    for (std::size_t k = 0; k < a.bearings.size(); ++k) {
      if (a.bearings[k] != b.bearings[k]) return false;
    }
    return true;
  }
};

/// Analytic Jacobian blocks. D is m_d x 3n, G and K are 3m_b x 3n, and
/// assembled = [[D, 0], [G, K]].
struct RigidityMatrices {
  Eigen::MatrixXd D;
  Eigen::MatrixXd G;
  Eigen::MatrixXd K;
  Eigen::MatrixXd assembled;
};

/// Per-edge geometry for (i, j): p_ij = p_i - p_j, its length and unit vector.
struct EdgeGeometry {
  Vec3 diff;
  double length = 0.0;
  double inv_length = 0.0;
  Vec3 unit;
};

inline EdgeGeometry edge_geometry(const FrameworkState& state, const Edge& e) {
  EdgeGeometry g;
  g.diff = state.positions[e.from] - state.positions[e.to];
  g.length = g.diff.norm();
  if (!(g.length > kCoincidentThreshold)) {
    throw Error(ErrorCode::CoincidentAgents,
                "agents " + std::to_string(e.from) + " and " + std::to_string(e.to) +
                    " are coincident");
  }
  g.inv_length = 1.0 / g.length;
  g.unit = g.diff * g.inv_length;
  return g;
}

inline void validate_rotation(const Mat3& R, const std::string& where) {
  if (!R.allFinite()) {
    throw Error(ErrorCode::ValidationError, where + ": non-finite rotation");
  }
  if (orthonormality_defect(R) > kRotationTolerance ||
      std::abs(R.determinant() - 1.0) > kRotationTolerance) {
    throw Error(ErrorCode::ValidationError, where + ": not a rotation matrix");
  }
}

/// Size agreement with the graph, valid rotations and non-coincident
/// endpoints on every declared edge.
inline void validate_state(const FrameworkState& state, const FormationGraph& graph) {
  if (state.size() != graph.n || state.rotations.size() != state.positions.size()) {
    throw Error(ErrorCode::ValidationError,
                "state has " + std::to_string(state.positions.size()) + " positions and " +
                    std::to_string(state.rotations.size()) + " rotations; graph has " +
                    std::to_string(graph.n) + " vertices");
  }
  for (int i = 0; i < state.size(); ++i) {
    if (!state.positions[i].allFinite()) {
      throw Error(ErrorCode::ValidationError, "agent " + std::to_string(i) + ": non-finite position");
    }
    validate_rotation(state.rotations[i], "agent " + std::to_string(i));
  }
  for (const auto* edges : {&graph.bearing_edges, &graph.distance_edges}) {
    for (const Edge& e : *edges) edge_geometry(state, e);
  }
}

inline void validate_target(const TargetFormation& target, const FormationGraph& graph) {
  if (static_cast<int>(target.bearings.size()) != graph.m_b()) {
    throw Error(ErrorCode::ValidationError,
                "target has " + std::to_string(target.bearings.size()) +
                    " bearings but the graph has " + std::to_string(graph.m_b()) +
                    " bearing edges");
  }
  if (static_cast<int>(target.distances.size()) != graph.m_d()) {
    throw Error(ErrorCode::ValidationError,
                "target has " + std::to_string(target.distances.size()) +
                    " distances but the graph has " + std::to_string(graph.m_d()) +
                    " distance edges");
  }
  for (std::size_t k = 0; k < target.bearings.size(); ++k) {
    const double norm = target.bearings[k].norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::ValidationError,
                  "desired bearing " + std::to_string(k) + " is not a unit vector (norm " +
                      std::to_string(norm) + ")");
    }
  }
  for (std::size_t k = 0; k < target.distances.size(); ++k) {
    if (!(target.distances[k] > 0.0) || !std::isfinite(target.distances[k])) {
      throw Error(ErrorCode::ValidationError,
                  "desired distance " + std::to_string(k) + " must be positive and finite");
    }
  }
}

/// b_ij = R_i^T (p_i - p_j) / |p_i - p_j|.
inline Vec3 bearing(const FrameworkState& state, const Edge& e) {
  const EdgeGeometry g = edge_geometry(state, e);
  return state.rotations[e.from].transpose() * g.unit;
}

/// Per-edge stack of bearings, 3 m_b entries.
inline Eigen::VectorXd bearing_rigidity_function(const FrameworkState& state,
                                                 const FormationGraph& graph) {
  Eigen::VectorXd out(3 * graph.m_b());
  for (int k = 0; k < graph.m_b(); ++k) {
    out.segment<3>(3 * k) = bearing(state, graph.bearing_edges[k]);
  }
  return out;
}

/// Same quantity through the incidence form -diag(d_ij R_i^T) (E kron I_3)^T p.
/// E carries -1 at the measuring vertex, so (E kron I_3)^T p stacks p_j - p_i
/// and the leading minus sign restores p_i - p_j.
inline Eigen::VectorXd bearing_rigidity_function_compact(const FrameworkState& state,
                                                         const FormationGraph& graph) {
  const int n = graph.n;
  const int m = graph.m_b();
  Eigen::VectorXd p(3 * n);
  for (int i = 0; i < n; ++i) p.segment<3>(3 * i) = state.positions[i];

  const Eigen::MatrixXd Ebar = kron_expand(incidence(graph, EdgeKind::Bearing), 3);
  const Eigen::VectorXd rel = Ebar.transpose() * p;

  Eigen::MatrixXd scaled_rotations = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  for (int k = 0; k < m; ++k) {
    const Edge& e = graph.bearing_edges[k];
    const double d = edge_geometry(state, e).inv_length;
    scaled_rotations.block<3, 3>(3 * k, 3 * k) = d * state.rotations[e.from].transpose();
  }
  return -(scaled_rotations * rel);
}

/// Stack of z_k^2 / 2 over distance edges.
inline Eigen::VectorXd distance_function(const FrameworkState& state, const FormationGraph& graph) {
  Eigen::VectorXd out(graph.m_d());
  for (int k = 0; k < graph.m_d(); ++k) {
    const EdgeGeometry g = edge_geometry(state, graph.distance_edges[k]);
    out(k) = 0.5 * g.diff.squaredNorm();
  }
  return out;
}

/// [distance function; bearing function], m_d + 3 m_b entries.
inline Eigen::VectorXd mixed_rigidity_function(const FrameworkState& state,
                                               const FormationGraph& graph) {
  Eigen::VectorXd out(graph.m_d() + 3 * graph.m_b());
  out << distance_function(state, graph), bearing_rigidity_function(state, graph);
  return out;
}

namespace detail {

// Bearing rows: G (position columns) and K (rotation columns).
//   d b_ij / d p_i     =  d_ij R_i^T P(pbar_ij),  d b_ij / d p_j = -(same)
//   d b_ij / d theta_i =  R_i^T hat(pbar_ij) R_i  (= hat(b_ij))
inline void fill_bearing_blocks(const FrameworkState& state, const FormationGraph& graph,
                                Eigen::MatrixXd& G, Eigen::MatrixXd& K) {
  const int n = graph.n;
  G = Eigen::MatrixXd::Zero(3 * graph.m_b(), 3 * n);
  K = Eigen::MatrixXd::Zero(3 * graph.m_b(), 3 * n);
  for (int k = 0; k < graph.m_b(); ++k) {
    const Edge& e = graph.bearing_edges[k];
    const EdgeGeometry g = edge_geometry(state, e);
    const Mat3 Rt = state.rotations[e.from].transpose();
    const Mat3 dp = g.inv_length * Rt * project(g.unit);
    G.block<3, 3>(3 * k, 3 * e.from) = dp;
    G.block<3, 3>(3 * k, 3 * e.to) = -dp;
    K.block<3, 3>(3 * k, 3 * e.from) = Rt * hat(g.unit) * state.rotations[e.from];
  }
}

// Distance rows: d(z_k^2 / 2) / d p_i = e_k^T, d / d p_j = -e_k^T.
inline Eigen::MatrixXd distance_block(const FrameworkState& state, const FormationGraph& graph) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(graph.m_d(), 3 * graph.n);
  for (int k = 0; k < graph.m_d(); ++k) {
    const Edge& e = graph.distance_edges[k];
    const EdgeGeometry g = edge_geometry(state, e);
    D.block<1, 3>(k, 3 * e.from) = g.diff.transpose();
    D.block<1, 3>(k, 3 * e.to) = -g.diff.transpose();
  }
  return D;
}

}  // namespace detail

/// Jacobian of the bearing function: [G K], 3 m_b x 6 n.
inline Eigen::MatrixXd bearing_rigidity_matrix(const FrameworkState& state,
                                               const FormationGraph& graph) {
  Eigen::MatrixXd G, K;
  detail::fill_bearing_blocks(state, graph, G, K);
  Eigen::MatrixXd B(G.rows(), 6 * graph.n);
  B << G, K;
  return B;
}

/// Jacobian of the mixed function with its blocks.
inline RigidityMatrices mixed_rigidity_matrix(const FrameworkState& state,
                                              const FormationGraph& graph) {
  RigidityMatrices out;
  detail::fill_bearing_blocks(state, graph, out.G, out.K);
  out.D = detail::distance_block(state, graph);
  const int n = graph.n;
  const int md = graph.m_d();
  out.assembled = Eigen::MatrixXd::Zero(md + out.G.rows(), 6 * n);
  out.assembled.block(0, 0, md, 3 * n) = out.D;
  out.assembled.block(md, 0, out.G.rows(), 3 * n) = out.G;
  out.assembled.block(md, 3 * n, out.K.rows(), 3 * n) = out.K;
  return out;
}

/// Moves one configuration coordinate: additive for positions, right
/// multiplication by so3_exp for rotations.
inline FrameworkState perturb_coordinate(const FrameworkState& state, int coord, double delta) {
  FrameworkState out = state;
  const int n = state.size();
  if (coord < 3 * n) {
    out.positions[coord / 3](coord % 3) += delta;
  } else {
    const int c = coord - 3 * n;
    out.rotations[c / 3] = state.rotations[c / 3] * so3_exp(delta * Vec3::Unit(c % 3));
  }
  return out;
}

/// "p3.y" or "R3.y" for configuration column `coord`.
inline std::string coordinate_label(int coord, int n) {
  const char axis = "xyz"[coord % 3];
  if (coord < 3 * n) return "p" + std::to_string(coord / 3) + "." + axis;
  return "R" + std::to_string((coord - 3 * n) / 3) + "." + axis;
}

enum class RigidityFunction { Bearing, Mixed };

inline void check_step(double h) {
  if (!(h >= 1e-9 && h <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "finite-difference step must lie in [1e-9, 1e-3]");
  }
}

/// Central-difference Jacobian of the bearing or mixed rigidity function.
inline Eigen::MatrixXd finite_difference_jacobian(const FrameworkState& state,
                                                  const FormationGraph& graph, double h,
                                                  RigidityFunction which) {
  check_step(h);
  auto eval = [&](const FrameworkState& s) {
    return which == RigidityFunction::Bearing ? bearing_rigidity_function(s, graph)
                                              : mixed_rigidity_function(s, graph);
  };
  const Eigen::VectorXd f0 = eval(state);
  const int cols = 6 * graph.n;
  Eigen::MatrixXd J(f0.size(), cols);
  for (int c = 0; c < cols; ++c) {
    const Eigen::VectorXd fp = eval(perturb_coordinate(state, c, h));
    const Eigen::VectorXd fm = eval(perturb_coordinate(state, c, -h));
    J.col(c) = (fp - fm) / (2.0 * h);
  }
  return J;
}

/// max|actual - reference| / max|reference|; the absolute difference when the
/// reference is identically zero.
inline double max_relative_error(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& reference) {
  if (actual.size() == 0) return 0.0;
  const double diff = (actual - reference).cwiseAbs().maxCoeff();
  const double ref = reference.cwiseAbs().maxCoeff();
  return ref > 0.0 ? diff / ref : diff;
}

/// Null space of a rigidity matrix.
struct MotionSpace {
  Eigen::MatrixXd basis;          // orthonormal columns
  Eigen::VectorXd singular_values;  // descending, padded with zeros to cols
  int rank = 0;
  double sigma_max = 0.0;

  int dimension() const { return static_cast<int>(basis.cols()); }
};

/// Right singular vectors whose singular value is at or below tol * sigma_max.
/// A matrix with fewer rows than columns contributes implicit zero singular
/// values. The zero matrix yields the full coordinate space.
inline MotionSpace infinitesimal_motion_space(const Eigen::MatrixXd& M,
                                              double tol = kDefaultNullTolerance) {
  const Eigen::Index cols = M.cols();
  MotionSpace out;
  out.singular_values = Eigen::VectorXd::Zero(cols);
  if (cols == 0) return out;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  out.singular_values.head(sv.size()) = sv;
  out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;

  const double threshold = tol * out.sigma_max;
  int rank = 0;
  if (out.sigma_max > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > threshold) ++rank;
    }
  }
  out.rank = rank;
  out.basis = svd.matrixV().rightCols(cols - rank);
  return out;
}

}  // namespace se3form
