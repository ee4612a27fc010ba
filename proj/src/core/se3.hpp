// Copyright 2026 contactcal contributors
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

#include <Eigen/Dense>
#include <string>

namespace ccal {

/// Six-parameter pose: translation in metres, then extrinsic X-Y-Z Euler
/// angles (roll phi, pitch theta, yaw psi) in radians. The rotation is
/// composed as R = Rz(psi) * Ry(theta) * Rx(phi); this convention is
/// recorded in every report file that carries these numbers.
struct ExtrinsicParams {
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double phi{0.0};
  double theta{0.0};
  double psi{0.0};

  /// Angles wrapped into (-pi, pi]. Idempotent.
  ExtrinsicParams normalized() const;
};

/// Small camera-frame motion: applied on the left of a transform as
/// Exp(delta_rotation) followed by delta_translation.
struct TwistIncrement {
  Eigen::Vector3d delta_translation{Eigen::Vector3d::Zero()};
  Eigen::Vector3d delta_rotation{Eigen::Vector3d::Zero()};

  double translation_norm() const { return delta_translation.norm(); }
  double rotation_norm() const { return delta_rotation.norm(); }
};

/// SE(3) element stored as an orthonormal rotation plus a translation.
class RigidTransform {
 public:
  RigidTransform()
      : rotation_(Eigen::Matrix3d::Identity()),
        translation_(Eigen::Vector3d::Zero()) {}

  RigidTransform(const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return RigidTransform(); }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  /// this * other: first apply `other`, then this.
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// R p + t, the homogeneous product with the projection folded in.
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }

  /// Snap the rotation back onto SO(3) (quaternion renormalization).
  /// Call after long composition chains.
  RigidTransform reorthonormalized() const;

  /// Max deviation of R'R from identity plus |det - 1|.
  double orthonormality_error() const;

  /// 12 numbers: rotation row-major, then translation. One text line.
  std::string to_line() const;
  static RigidTransform from_line(const std::string& line);

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Wrap into (-pi, pi].
double normalize_angle(double a);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues' formula; exact for any |w|, stable near zero.
Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& w);

Eigen::Matrix3d rotation_x(double a);
Eigen::Matrix3d rotation_y(double a);
Eigen::Matrix3d rotation_z(double a);

RigidTransform extrinsic_to_transform(const ExtrinsicParams& p);

/// Inverse of extrinsic_to_transform. Throws ErrorCode::kGimbalLock when the
/// pitch is within 1e-6 rad of +/- pi/2, where roll and yaw are not separable.
ExtrinsicParams transform_to_extrinsic(const RigidTransform& t);

/// Left-composed update: Exp(d) * T, with the exact rotation exponential so
/// the result stays on SE(3). Residual linearizations in the registration
/// module are taken with respect to exactly this update.
RigidTransform apply_increment(const RigidTransform& t, const TwistIncrement& d);

/// 6 numbers on one line: x y z phi theta psi (metres, radians).
std::string extrinsic_to_line(const ExtrinsicParams& p);
ExtrinsicParams extrinsic_from_line(const std::string& line);

}  // namespace ccal
