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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "se3form/graph.hpp"

namespace se3form {
namespace {

ErrorCode code_of(const FormationGraph& g) {
  try {
    validate_graph(g);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "graph unexpectedly valid";
  return ErrorCode::InvalidArgument;
}

TEST(ValidateGraph, AcceptsSimpleGraph) {
  FormationGraph g{2, {{0, 1}}, {}};
  EXPECT_NO_THROW(validate_graph(g));
  EXPECT_EQ(g.m_b(), 1);
  EXPECT_EQ(g.m_d(), 0);
}

TEST(ValidateGraph, Diagnostics) {
  EXPECT_EQ(code_of({2, {{0, 0}}, {}}), ErrorCode::SelfLoop);
  EXPECT_EQ(code_of({2, {{0, 1}, {0, 1}}, {}}), ErrorCode::DuplicateEdge);
  EXPECT_EQ(code_of({2, {{0, 2}}, {}}), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of({2, {}, {{-1, 0}}}), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of({2, {}, {{1, 0}, {1, 0}}}), ErrorCode::DuplicateEdge);
  EXPECT_EQ(code_of({0, {}, {}}), ErrorCode::IndexOutOfRange);
}

TEST(ValidateGraph, SamePairAllowedOncePerKind) {
  FormationGraph g{2, {{0, 1}, {1, 0}}, {{0, 1}}};
  EXPECT_NO_THROW(validate_graph(g));
}

TEST(Incidence, Examples) {
  FormationGraph g2{2, {{0, 1}}, {}};
  EXPECT_EQ(incidence(g2, EdgeKind::Bearing), (Eigen::MatrixXd(2, 1) << -1, 1).finished());
  EXPECT_EQ(outgoing_incidence(g2, EdgeKind::Bearing), (Eigen::MatrixXd(2, 1) << -1, 0).finished());

  FormationGraph g3{3, {{0, 1}, {1, 2}}, {}};
  EXPECT_EQ(incidence(g3, EdgeKind::Bearing), (Eigen::MatrixXd(3, 2) << -1, 0, 1, -1, 0, 1).finished());
  EXPECT_EQ(outgoing_incidence(g3, EdgeKind::Bearing),
            (Eigen::MatrixXd(3, 2) << -1, 0, 0, -1, 0, 0).finished());

  const Eigen::MatrixXd empty = incidence(g3, EdgeKind::Distance);
  EXPECT_EQ(empty.rows(), 3);
  EXPECT_EQ(empty.cols(), 0);
  EXPECT_EQ(outgoing_incidence(g3, EdgeKind::Distance).cols(), 0);
}

TEST(Incidence, ColumnSumsAndOutgoingRelation) {
  testing::Generator gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(2, 9);
    FormationGraph g{n, gen.edges(n, gen.integer(1, 15)), gen.edges(n, gen.integer(0, 5))};
    for (EdgeKind kind : {EdgeKind::Bearing, EdgeKind::Distance}) {
      const Eigen::MatrixXd E = incidence(g, kind);
      EXPECT_TRUE((Eigen::RowVectorXd::Ones(n) * E).isZero(0.0));
      const Eigen::MatrixXd Eo = outgoing_incidence(g, kind);
      EXPECT_EQ(Eo, E.cwiseMin(0.0));
      for (Eigen::Index k = 0; k < E.cols(); ++k) {
        EXPECT_EQ((E.col(k).array() == -1.0).count(), 1);
        EXPECT_EQ((E.col(k).array() == 1.0).count(), 1);
      }
    }
  }
}

TEST(KronExpand, Examples) {
  const Eigen::MatrixXd col = (Eigen::MatrixXd(2, 1) << -1, 1).finished();
  Eigen::MatrixXd expected(6, 3);
  expected << -Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity();
  EXPECT_EQ(kron_expand(col, 3), expected);
  EXPECT_EQ(kron_expand(Eigen::MatrixXd::Identity(2, 2), 3), Eigen::MatrixXd::Identity(6, 6));

  FormationGraph g{4, {{0, 1}, {2, 3}, {3, 1}}, {}};
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, 4);
  EXPECT_TRUE(kron_expand(ones * incidence(g, EdgeKind::Bearing), 3).isZero(0.0));
  EXPECT_THROW(kron_expand(col, 0), Error);
}

TEST(KronExpand, MixedProductProperty) {
  testing::Generator gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = gen.integer(1, 5), k = gen.integer(1, 5), c = gen.integer(1, 5), d = gen.integer(1, 4);
    Eigen::MatrixXd A(r, k), B(k, c);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = gen.integer(-3, 3);
    for (Eigen::Index i = 0; i < B.size(); ++i) B(i) = gen.integer(-3, 3);
    const Eigen::MatrixXd lhs = kron_expand(A * B, d);
    const Eigen::MatrixXd rhs = kron_expand(A, d) * kron_expand(B, d);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(lhs.rows(), r * d);
    EXPECT_EQ(lhs.cols(), c * d);
  }
}

}  // namespace
}  // namespace se3form
