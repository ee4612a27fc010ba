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

#include "core/se3.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace ccal {

double normalize_angle(double a) {
  double v = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
  if (v <= -M_PI) v += 2.0 * M_PI;
  return v;
}

ExtrinsicParams ExtrinsicParams::normalized() const {
  ExtrinsicParams out = *this;
  out.phi = normalize_angle(phi);
  out.theta = normalize_angle(theta);
  out.psi = normalize_angle(psi);
  return out;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    // Second-order series keeps the result orthonormal to machine precision.
    Eigen::Matrix3d k = skew(w);
    return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Eigen::Matrix3d rotation_x(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rotation_y(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d rotation_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return RigidTransform(rotation_ * other.rotation_,
                        rotation_ * other.translation_ + translation_);
}

RigidTransform RigidTransform::inverse() const {
  Eigen::Matrix3d rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_));
}

RigidTransform RigidTransform::reorthonormalized() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  return RigidTransform(q.toRotationMatrix(), translation_);
}

double RigidTransform::orthonormality_error() const {
  double e = (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity())
                 .cwiseAbs()
                 .maxCoeff();
  return e + std::abs(rotation_.determinant() - 1.0);
}

std::string RigidTransform::to_line() const {
  std::vector<double> v;
  v.reserve(12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v.push_back(rotation_(r, c));
  for (int r = 0; r < 3; ++r) v.push_back(translation_(r));
  return join_doubles(v);
}

namespace {

std::vector<double> parse_doubles(const std::string& line, size_t expected,
                                  const char* what) {
  std::vector<double> out;
  for (const std::string& tok : split(trim(line))) {
    double v = 0.0;
    if (!parse_double(tok, v))
      throw Error(ErrorCode::kParse,
                  std::string(what) + ": bad number '" + tok + "'");
    out.push_back(v);
  }
  if (out.size() != expected)
    throw Error(ErrorCode::kParse, std::string(what) + ": expected " +
                                       std::to_string(expected) +
                                       " numbers, got " +
                                       std::to_string(out.size()));
  return out;
}

}  // namespace

RigidTransform RigidTransform::from_line(const std::string& line) {
  std::vector<double> v = parse_doubles(line, 12, "transform line");
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  return RigidTransform(r, Eigen::Vector3d(v[9], v[10], v[11]));
}

RigidTransform extrinsic_to_transform(const ExtrinsicParams& p) {
  Eigen::Matrix3d r = rotation_z(p.psi) * rotation_y(p.theta) * rotation_x(p.phi);
  return RigidTransform(r, Eigen::Vector3d(p.x, p.y, p.z));
}

ExtrinsicParams transform_to_extrinsic(const RigidTransform& t) {
  const Eigen::Matrix3d& r = t.rotation();
  // R = Rz(psi) Ry(theta) Rx(phi):  r20 = -sin(theta).
  const double s = -r(2, 0);
  const double pitch = std::asin(std::clamp(s, -1.0, 1.0));
  if (std::abs(pitch) > M_PI / 2.0 - 1e-6)
    throw Error(ErrorCode::kGimbalLock,
                "pitch within 1e-6 rad of +/-pi/2; roll/yaw not separable");
  ExtrinsicParams p;
  p.x = t.translation().x();
  p.y = t.translation().y();
  p.z = t.translation().z();
  p.theta = pitch;
  p.phi = std::atan2(r(2, 1), r(2, 2));
  p.psi = std::atan2(r(1, 0), r(0, 0));
  return p.normalized();
}

RigidTransform apply_increment(const RigidTransform& t, const TwistIncrement& d) {
  if (d.delta_rotation.isZero(0.0) && d.delta_translation.isZero(0.0)) return t;
  Eigen::Matrix3d rd = rotation_exp(d.delta_rotation);
  return RigidTransform(rd * t.rotation(),
                        rd * t.translation() + d.delta_translation);
}

std::string extrinsic_to_line(const ExtrinsicParams& p) {
  return join_doubles({p.x, p.y, p.z, p.phi, p.theta, p.psi});
}

ExtrinsicParams extrinsic_from_line(const std::string& line) {
  std::vector<double> v = parse_doubles(line, 6, "extrinsic line");
  return ExtrinsicParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

}  // namespace ccal
