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
#include <utility>
#include <vector>

#include "core/kinematics.hpp"
#include "core/registration.hpp"
#include "core/se3.hpp"

namespace ccal {

/// Levenberg-Marquardt settings for the joint extrinsic + joint-bias
/// solve. The damped normal equations use H + mu * diag(H); mu shrinks by
/// damping_decrease on accepted steps and grows by damping_increase on
/// rejected ones. Correspondences are refreshed every repair_every
/// accepted steps, rebuilding the contact cloud under the current biases.
struct CalibrationConfig {
  double initial_damping{1e-4};
  double damping_decrease{0.3};
  double damping_increase{3.0};
  int max_iterations{100};
  double parameter_tolerance{1e-8};
  double cost_tolerance{1e-10};  ///< relative decrease marking a plateau
  int max_rejected_steps{25};
  int repair_every{1};
  double condition_threshold{1e10};     ///< identifiability gate
  double min_eigenvalue_ratio{1e-12};   ///< identifiability gate
  bool pin_joint1_bias{false};  ///< fix the base-joint bias at zero
  bool icp_restarts{true};      ///< multi-start seed alignment
  IcpConfig icp;

  void validate() const;
};

/// Inputs of one calibration run. The chain is the nominal geometry; the
/// solver estimates additive joint biases on top of it when solve_biases
/// is set.
struct CalibrationProblem {
  CalibrationProblem(KinematicChain chain_in,
                     std::vector<ContactRecord> joint_logs_in,
                     PointCloud depth_in, ExtrinsicParams initial_extrinsic_in)
      : chain(std::move(chain_in)),
        joint_logs(std::move(joint_logs_in)),
        depth(std::move(depth_in)),
        initial_extrinsic(initial_extrinsic_in) {}

  KinematicChain chain;
  std::vector<ContactRecord> joint_logs;
  PointCloud depth;
  ExtrinsicParams initial_extrinsic;
  bool solve_biases{true};
  CalibrationConfig config;
};

/// Identifiability figures of the augmented system at the solution.
/// A base-rotation bias and the camera yaw compensate each other exactly
/// on any scene, so that direction is excluded from the verdict and
/// reported on its own; `verdict` reflects the remaining spectrum.
struct DegeneracyDiagnostic {
  bool degenerate{false};
  double condition_number{0.0};
  double min_eigenvalue{0.0};
  double max_eigenvalue{0.0};
  double determinant{0.0};  ///< of the full augmented matrix, scale-fragile
  std::vector<std::pair<Eigen::VectorXd, std::string>> near_null;
  Eigen::VectorXd gauge_direction;
  std::string verdict;  ///< "IDENTIFIABLE" or "DEGENERATE: <labels>"
};

struct CalibrationResult {
  ExtrinsicParams extrinsic;
  Eigen::VectorXd joint_biases;
  double final_cost{0.0};
  Eigen::MatrixXd augmented_hessian;  ///< (6+K)x(6+K) at the solution
  DegeneracyDiagnostic degeneracy;
  std::vector<double> history;  ///< cost after each accepted step
  int iterations{0};
  bool converged{false};
  size_t correspondences_used{0};
  bool downgraded_to_rigid{false};
};

/// Residual and full-width derivative row of one weighted pair.
struct AugmentedPair {
  double residual{0.0};
  Eigen::VectorXd jacobian;  ///< 6 + K entries
  size_t source_index{0};
  size_t target_index{0};
};

/// Per-pair residuals and (6+K)-column rows at (t, biases) over the
/// weight-1 correspondences. The first 6 columns equal the rigid
/// residual_jacobian; column 6+k is n . R_cb * (bias_jacobian column k),
/// the plane-projected sensitivity of the contact point to bias k. Note
/// the two blocks model opposite step signs: the rigid block predicts
/// r' = r - J d under apply_increment while the bias block predicts
/// r' = r + B db under theta' = theta + db. The solver accounts for this;
/// consumers differentiating numerically will see exactly these values.
std::vector<AugmentedPair> augmented_residual_jacobian(
    const KinematicChain& chain, const std::vector<ContactRecord>& logs,
    const PointCloud& depth,
    const std::vector<Correspondence>& correspondences,
    const RigidTransform& t, const Eigen::VectorXd& biases);

/// Direction along which a base-joint bias increment is exactly absorbed
/// by a camera-frame pose change, unit norm, in the same column
/// convention as augmented_residual_jacobian. dof is the joint count.
Eigen::VectorXd gauge_direction(const RigidTransform& t, size_t dof);

/// Joint damped-least-squares solve of extrinsic and joint biases. A
/// rigid-only alignment seeds the pose, biases start at zero. After
/// convergence the augmented spectrum is gated (thresholds in config,
/// gauge direction excluded); a degenerate problem is re-solved rigid-only
/// and returned with the diagnostic populated. Throws kDegenerateProblem
/// when the rigid 6x6 block itself is rank-deficient at the start, and
/// kNonDecreasingCost when max_rejected_steps consecutive proposals fail
/// to reduce the cost while steps are still large.
CalibrationResult calibrate(const CalibrationProblem& problem,
                            int threads = 1);

/// One spectral line of the augmented system.
struct IdentifiabilityRow {
  double eigenvalue{0.0};
  Eigen::VectorXd direction;
  std::string label;  ///< empty unless near-null
};

struct IdentifiabilityReport {
  Eigen::MatrixXd hessian;
  std::vector<IdentifiabilityRow> rows;  ///< descending eigenvalue
  int numeric_rank{0};
  double condition_number{0.0};
};

/// Eigen-decomposition of the augmented system at (t, biases), with
/// near-null directions labeled by their dominant parameters, e.g.
/// "psi_e / dtheta_1 trade-off".
IdentifiabilityReport identifiability_report(
    const KinematicChain& chain, const std::vector<ContactRecord>& logs,
    const PointCloud& depth, const RigidTransform& t,
    const Eigen::VectorXd& biases, const IcpConfig& icp,
    double rank_tolerance = 1e-8, int threads = 1);

}  // namespace ccal
