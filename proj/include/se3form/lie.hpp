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

// SO(3) primitives: hat/vee, the orthogonal projector onto a vector's
// complement, the exponential map and polar re-orthonormalization.

#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "se3form/error.hpp"

namespace se3form {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Below this rotation angle so3_exp switches to its Taylor expansion.
inline constexpr double kSmallAngle = 1e-8;
/// project() refuses vectors at or below this norm.
inline constexpr double kMinProjectNorm = 1e-12;
inline constexpr double kSkewTolerance = 1e-9;

/// hat(w) * x == w.cross(x).
inline Mat3 hat(const Vec3& w) {
  Mat3 W;
  W << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return W;
}

/// Inverse of hat. Throws NotSkew when ||W + W^T||_F exceeds 1e-9; within
/// tolerance the symmetric part is dropped.
inline Vec3 vee(const Mat3& W) {
  if ((W + W.transpose()).norm() > kSkewTolerance) {
    throw Error(ErrorCode::NotSkew, "matrix is not skew-symmetric");
  }
  return Vec3(0.5 * (W(2, 1) - W(1, 2)),
              0.5 * (W(0, 2) - W(2, 0)),
              0.5 * (W(1, 0) - W(0, 1)));
}

/// P(v) = I - u u^T with u = v / |v|.
inline Mat3 project(const Vec3& v) {
  const double n = v.norm();
  if (!(n > kMinProjectNorm)) {
    throw Error(ErrorCode::ZeroVector, "cannot project onto the complement of a zero vector");
  }
  const Vec3 u = v / n;
  return Mat3::Identity() - u * u.transpose();
}

/// Rodrigues formula for exp(hat(w)).
inline Mat3 so3_exp(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 W = hat(w);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + W + 0.5 * (W * W);
  }
  return Mat3::Identity() + (std::sin(theta) / theta) * W +
         ((1.0 - std::cos(theta)) / theta2) * (W * W);
}

/// ||R^T R - I||_F.
inline double orthonormality_defect(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

/// Nearest proper rotation to R in the Frobenius sense (polar factor with the
/// determinant forced to +1).
inline Mat3 reorthonormalize(const Mat3& R) {
  if (!R.allFinite()) {
    throw Error(ErrorCode::Degenerate, "non-finite rotation entries");
  }
  if (!(orthonormality_defect(R) < 0.1)) {
    throw Error(ErrorCode::Degenerate, "matrix is too far from SO(3) to re-orthonormalize");
  }
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (sigma(2) <= 1e-12 * sigma(0)) {
    throw Error(ErrorCode::Degenerate, "rank-deficient rotation matrix");
  }
  const Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  Mat3 S = Mat3::Identity();
  S(2, 2) = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return U * S * V.transpose();
}

/// Inverse right-trivialized differential of exp, truncated after the
/// second bracket. Used by the Munthe-Kaas RK4 stages: for R(t) = R0 exp(u(t))
/// with body rate w, u' = dexp_inv_right(u, w) + O(|u|^3).
inline Vec3 dexp_inv_right(const Vec3& u, const Vec3& w) {
  const Vec3 uw = u.cross(w);
  return w + 0.5 * uw + (1.0 / 12.0) * u.cross(uw);
}

}  // namespace se3form
