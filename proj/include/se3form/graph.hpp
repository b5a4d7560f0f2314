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

#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "se3form/error.hpp"

namespace se3form {

enum class EdgeKind { Bearing, Distance };

/// Directed edge (from, to). The measurement is taken by `from`, so the edge
/// is outgoing at `from`.
struct Edge {
  int from = 0;
  int to = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Vertices 0..n-1 with separate, ordered bearing and distance edge lists.
/// Edge index k is the position in the list; every stacked quantity follows
/// that order, distance entries before bearing entries.
struct FormationGraph {
  int n = 0;
  std::vector<Edge> bearing_edges;
  std::vector<Edge> distance_edges;

  int m_b() const { return static_cast<int>(bearing_edges.size()); }
  int m_d() const { return static_cast<int>(distance_edges.size()); }

  const std::vector<Edge>& edges(EdgeKind kind) const {
    return kind == EdgeKind::Bearing ? bearing_edges : distance_edges;
  }

  friend bool operator==(const FormationGraph&, const FormationGraph&) = default;
};

namespace detail {

inline void validate_edge_list(int n, const std::vector<Edge>& edges, const char* label) {
  std::set<Edge> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const std::string where = std::string(label) + " edge " + std::to_string(k) + " (" +
                              std::to_string(e.from) + "," + std::to_string(e.to) + ")";
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw Error(ErrorCode::IndexOutOfRange, where + " references a vertex outside [0, " +
                                                  std::to_string(n) + ")");
    }
    if (e.from == e.to) {
      throw Error(ErrorCode::SelfLoop, where + " is a self-loop");
    }
    if (!seen.insert(e).second) {
      throw Error(ErrorCode::DuplicateEdge, where + " is declared twice");
    }
  }
}

}  // namespace detail

/// Checks vertex count, index ranges, self-loops and duplicates within each
/// edge kind. The same ordered pair may appear once as a bearing edge and once
/// as a distance edge.
inline const FormationGraph& validate_graph(const FormationGraph& g) {
  if (g.n < 1) {
    throw Error(ErrorCode::IndexOutOfRange, "graph must have at least one vertex");
  }
  detail::validate_edge_list(g.n, g.bearing_edges, "bearing");
  detail::validate_edge_list(g.n, g.distance_edges, "distance");
  return g;
}

/// Full incidence matrix: -1 at the tail (measuring vertex), +1 at the head.
inline Eigen::MatrixXd incidence(const FormationGraph& g, EdgeKind kind) {
  const auto& edges = g.edges(kind);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(g.n, static_cast<Eigen::Index>(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    E(edges[k].from, static_cast<Eigen::Index>(k)) = -1.0;
    E(edges[k].to, static_cast<Eigen::Index>(k)) = 1.0;
  }
  return E;
}

/// Outgoing-only incidence: keeps the -1 entries of incidence().
inline Eigen::MatrixXd outgoing_incidence(const FormationGraph& g, EdgeKind kind) {
  const auto& edges = g.edges(kind);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(g.n, static_cast<Eigen::Index>(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    E(edges[k].from, static_cast<Eigen::Index>(k)) = -1.0;
  }
  return E;
}

/// M kron I_d.
inline Eigen::MatrixXd kron_expand(const Eigen::MatrixXd& M, int d) {
  if (d < 1) {
    throw Error(ErrorCode::InvalidArgument, "kron_expand needs a positive block size");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(M.rows() * d, M.cols() * d);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index k = 0; k < M.cols(); ++k) {
      if (M(i, k) != 0.0) {
        out.block(i * d, k * d, d, d).diagonal().setConstant(M(i, k));
      }
    }
  }
  return out;
}

}  // namespace se3form
