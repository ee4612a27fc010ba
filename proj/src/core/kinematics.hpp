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
#include <vector>

#include "core/pointcloud.hpp"
#include "core/se3.hpp"

namespace ccal {

/// Fixed Denavit-Hartenberg parameters of one revolute link. The joint
/// angle is the only variable; alpha and the two offsets come from the
/// chain description file.
struct DHRow {
  double alpha{0.0};  ///< twist about the link x axis [rad]
  double r{0.0};      ///< offset along the link x axis [m]
  double d{0.0};      ///< offset along the joint z axis [m]
};

/// Serial revolute chain: DH rows plus an additive bias per joint angle.
/// Biases default to zero; calibration estimates them.
class KinematicChain {
 public:
  explicit KinematicChain(std::vector<DHRow> rows);
  KinematicChain(std::vector<DHRow> rows, Eigen::VectorXd joint_biases);

  size_t dof() const { return rows_.size(); }
  const std::vector<DHRow>& rows() const { return rows_; }
  const Eigen::VectorXd& joint_biases() const { return joint_biases_; }

  /// Same geometry with the given biases. Throws kDimensionMismatch when
  /// the size differs from dof().
  KinematicChain with_biases(const Eigen::VectorXd& joint_biases) const;

 private:
  std::vector<DHRow> rows_;
  Eigen::VectorXd joint_biases_;
};

/// One logged touch: the commanded joint vector at the instant of contact.
struct ContactRecord {
  Eigen::VectorXd joints;
};

/// Homogeneous transform of one DH link at joint angle theta:
/// rotate about z by theta, translate d along z, translate r along x,
/// rotate about x by alpha.
RigidTransform dh_matrix(double theta, const DHRow& row);

/// Base-to-end-effector transform at `joints` (biases applied on top).
/// Throws kDimensionMismatch when joints.size() != chain.dof().
RigidTransform forward_kinematics(const KinematicChain& chain,
                                  const Eigen::VectorXd& joints);

/// Partial products T_0..T_K where T_0 is identity and T_k maps frame k to
/// the base. T_K equals forward_kinematics.
std::vector<RigidTransform> link_frames(const KinematicChain& chain,
                                        const Eigen::VectorXd& joints);

/// End-effector position in the base frame.
Eigen::Vector3d contact_point(const KinematicChain& chain,
                              const Eigen::VectorXd& joints);

/// Contact points of all records, in record order. Deterministic for any
/// thread count. Throws kEmptyCloud on an empty log and kDimensionMismatch
/// on a joint-count mismatch.
PointCloud build_contact_cloud(const KinematicChain& chain,
                               const std::vector<ContactRecord>& records,
                               int threads = 1);

/// d(contact point)/d(joint bias): column k is z_{k-1} x (p_E - o_{k-1})
/// with axes and origins taken from the chain at the biased angles.
Eigen::Matrix3Xd bias_jacobian(const KinematicChain& chain,
                               const Eigen::VectorXd& joints);

/// Chain description file: one "alpha r d" row per joint, '#' comments and
/// blank lines ignored. Returned chain has zero biases.
KinematicChain load_chain_file(const std::string& path);
void save_chain_file(const KinematicChain& chain, const std::string& path);

/// Joint log CSV with header theta_1,...,theta_K, angles in radians.
std::vector<ContactRecord> read_joint_log(const std::string& path);
void write_joint_log(const std::vector<ContactRecord>& records,
                     const std::string& path);

}  // namespace ccal
