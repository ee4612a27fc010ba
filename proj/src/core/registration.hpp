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

#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/pointcloud.hpp"
#include "core/se3.hpp"

namespace ccal {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Settings for rigid point-to-plane alignment of a sparse contact cloud
/// (base frame) against a dense depth cloud (camera frame).
struct IcpConfig {
  int max_iterations{100};
  double translation_tolerance{1e-7};     ///< m
  double rotation_tolerance{1e-7};        ///< rad
  double max_correspondence_distance{0.75};  ///< m
  double trim_ratio{0.10};                ///< fraction of kept pairs zeroed
  int normal_k{20};  ///< neighbours for on-the-fly depth normals

  void validate() const;
};

struct IcpResult {
  RigidTransform transform;
  double final_cost{0.0};  ///< sum of weighted squared residuals [m^2]
  int iterations{0};
  bool converged{false};
  size_t correspondences_used{0};
  Matrix6d hessian{Matrix6d::Zero()};  ///< over weight-1 pairs, final pose
  std::string diagnostic;              ///< empty unless the solve degenerated
};

/// Thrown when the 6x6 normal equations lose rank; carries the numerical
/// rank and an orthonormal basis of the unconstrained directions
/// (columns, [translation; rotation] ordering).
class DegenerateNormalEquations : public Error {
 public:
  DegenerateNormalEquations(int rank, Eigen::Matrix<double, 6, -1> null_space,
                            const std::string& what);
  int rank() const { return rank_; }
  const Eigen::Matrix<double, 6, -1>& null_space() const {
    return null_space_;
  }

 private:
  int rank_;
  Eigen::Matrix<double, 6, -1> null_space_;
};

/// Signed plane distance n . (T a - b).
double point_to_plane_residual(const RigidTransform& t,
                               const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b,
                               const Eigen::Vector3d& n);

/// Row vector [-n^T, -(p x n)^T] with p = T a. The first-order model is
/// r(apply_increment(T, d)) = r(T) - J d, so the normal-equation step
/// H d = sum w J^T r moves downhill when applied through apply_increment.
Vector6d residual_jacobian(const RigidTransform& t, const Eigen::Vector3d& a,
                           const Eigen::Vector3d& n);

/// Nearest-depth-point pairing of every contact point under T. Pairs
/// beyond max_correspondence_distance and pairs whose depth point has no
/// valid normal are dropped; of the kept pairs the trim_ratio largest by
/// distance (ties broken by source index) get weight 0. Output ordered by
/// source index. Throws kNoCorrespondences when nothing survives.
std::vector<Correspondence> find_correspondences(const PointCloud& contact,
                                                 const PointCloud& depth,
                                                 const NeighborIndex& index,
                                                 const RigidTransform& t,
                                                 const IcpConfig& cfg,
                                                 int threads = 1);

/// One linearized solve, with diagnostics kept for the caller.
struct IcpStep {
  TwistIncrement increment;
  double cost{0.0};  ///< weighted squared residual sum at the input pose
  Matrix6d hessian{Matrix6d::Zero()};
  int rank{6};
  Eigen::Matrix<double, 6, -1> null_directions;  ///< empty when full rank
};

/// Weighted normal equations over the given pairs at pose `t`. On rank
/// deficiency (threshold 1e-10 of the largest eigenvalue) the increment is
/// the minimum-norm least-squares step and rank/null_directions report the
/// deficiency. Throws kInsufficientCorrespondences below 6 weighted pairs.
IcpStep solve_icp_step(const std::vector<Correspondence>& correspondences,
                       const RigidTransform& t, const PointCloud& contact,
                       const PointCloud& depth);

/// As solve_icp_step, but a rank-deficient system throws
/// DegenerateNormalEquations instead of returning diagnostics.
TwistIncrement icp_step(const std::vector<Correspondence>& correspondences,
                        const RigidTransform& t, const PointCloud& contact,
                        const PointCloud& depth);

/// Full alignment loop: pair, solve, apply, until both increment norms
/// fall under their tolerances or max_iterations. A rank-deficient iterate
/// takes the minimum-norm step and continues; a deficiency still present
/// at the stop leaves converged = false with a diagnostic. The result
/// carries the weight-1 quadratic form at the final pose for stability
/// analysis. Depth normals are estimated on the fly (viewpoint = camera
/// origin) when the cloud has none.
IcpResult register_clouds(const PointCloud& contact, const PointCloud& depth,
                          const RigidTransform& initial, const IcpConfig& cfg,
                          int threads = 1);

/// register_clouds from the given initial plus a fixed grid of roll and
/// yaw offsets (+-12 deg), keeping the lowest mean squared residual.
/// Hand-measured initials ten-plus degrees off can drop the alignment into
/// a false lock on these table-top layouts; the offset starts cover the
/// neighbouring basins. Deterministic; later starts are skipped once a
/// start converges onto an exact fit.
IcpResult register_clouds_robust(const PointCloud& contact,
                                 const PointCloud& depth,
                                 const RigidTransform& initial,
                                 const IcpConfig& cfg, int threads = 1);

}  // namespace ccal
