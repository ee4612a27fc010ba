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
#include <cstdint>
#include <string>
#include <vector>

#include "core/kinematics.hpp"
#include "core/pointcloud.hpp"
#include "core/se3.hpp"
#include "core/stability.hpp"

namespace ccal {

/// Rectangular planar patch: corner plus two orthogonal edge vectors. The
/// outward normal is the unit cross product edge_u x edge_v.
struct Patch {
  std::string label;
  Eigen::Vector3d corner{Eigen::Vector3d::Zero()};
  Eigen::Vector3d edge_u{Eigen::Vector3d::UnitX()};
  Eigen::Vector3d edge_v{Eigen::Vector3d::UnitY()};

  Eigen::Vector3d normal() const {
    return edge_u.cross(edge_v).normalized();
  }
  double area() const { return edge_u.cross(edge_v).norm(); }
};

struct Scene {
  std::vector<Patch> patches;

  void validate() const;
  std::vector<std::string> labels() const;
  const Patch* find(const std::string& label) const;
};

/// Virtual depth scan settings. `extrinsic` is the true base-to-camera
/// transform; output points are expressed in the camera frame.
struct DepthScanConfig {
  RigidTransform extrinsic;
  double point_density{45000.0};  ///< samples per m^2 of visible surface
  double gaussian_sigma{0.0};     ///< m, along the surface normal
  double bow_amplitude{0.0};      ///< m, quadratic warp, zero at edges
  uint64_t seed{1};

  void validate() const;
};

/// Contact raster settings. Forces are negative (pushing); a draw is
/// admitted when it lies between force_max and force_min, the
/// larger-magnitude and smaller-magnitude thresholds.
struct ContactScanConfig {
  std::vector<std::string> selected_patches;
  double raster_spacing{0.03};       ///< m
  double clearance{0.01};            ///< m, kept from neighbouring surfaces
  double contact_noise_sigma{0.001}; ///< m, along the surface normal
  double force_setpoint{-4.0};       ///< N
  double force_min{-3.0};            ///< N, smallest admitted magnitude
  double force_max{-15.0};           ///< N, largest admitted magnitude
  double force_noise_sigma{1.0};     ///< N
  uint64_t seed{1};

  void validate() const;
};

/// One planned touch: where the surface was met and its outward normal.
struct ContactSample {
  Eigen::Vector3d point{Eigen::Vector3d::Zero()};
  Eigen::Vector3d normal{Eigen::Vector3d::UnitZ()};
  std::string label;
};

/// Fixed benchmark layouts. Presets: two_prisms_table (1.2 x 0.8 m table,
/// prisms 0.4 x 0.3 x 0.345 m and 0.25 x 0.2 x 0.15 m, both rotated about
/// z so oblique faces are visible), one_prism_table, single_plane,
/// orthogonal_triplet. Throws kUnknownPreset.
Scene make_benchmark_scene(const std::string& preset);

/// Patch-list file: `label cx cy cz e1x e1y e1z e2x e2y e2z` per line.
Scene load_scene_file(const std::string& path);
void save_scene_file(const Scene& scene, const std::string& path);

/// Uniform surface samples of the patches whose outward side faces the
/// camera (per point: normal . (camera - point) > 0), noised along the
/// normal and warped by the bow term, expressed in the camera frame.
/// Ground-truth normals attached. Deterministic per seed.
PointCloud render_depth(const Scene& scene, const DepthScanConfig& cfg);

/// Boustrophedon grid on each selected patch, inset half a spacing from
/// the edges. Each grid point draws a contact force; draws outside the
/// admission window are dropped, admitted points are perturbed along the
/// normal. Throws kEmptySelection.
std::vector<ContactSample> plan_contact_raster(const Scene& scene,
                                               const ContactScanConfig& cfg);

/// Uniform samples with outward normals on the named patches, base frame,
/// no noise, no visibility culling; pairs for sampling-choice analysis.
PairedSet sample_scene_surface(const Scene& scene,
                               const std::vector<std::string>& labels,
                               double density, uint64_t seed);

struct IkOptions {
  int max_iterations{200};
  double damping{0.05};
  double position_tolerance{1e-6};  ///< m, hard
  double axis_tolerance{0.017453292519943295};  ///< rad (1 deg), soft
  std::vector<int> locked_joints;   ///< zero-based indices held at seed value
  bool align_axis{true};
};

/// Damped least-squares inverse kinematics: position is a hard constraint,
/// pointing the tool z-axis along -approach_normal is a soft one. Returns
/// the joint vector; throws kIkFailure when the position tolerance is not
/// met within the iteration cap. Deterministic given the seed config.
Eigen::VectorXd solve_ik(const KinematicChain& chain,
                         const Eigen::Vector3d& target,
                         const Eigen::Vector3d& approach_normal,
                         const Eigen::VectorXd& seed_config,
                         const IkOptions& options = IkOptions());

/// How IK seeds are chosen during dataset generation. `raster` warm-starts
/// each contact from the previous one for fast, smooth rasters; `jitter`
/// seeds every contact independently with randomized wrist postures to
/// spread the visited configuration space (needed for bias
/// identifiability).
enum class IkSeedMode { kRaster, kJitter };

struct DatasetConfig {
  DepthScanConfig depth;
  ContactScanConfig contact;
  IkSeedMode seed_mode{IkSeedMode::kRaster};
  bool wrist_locked{false};  ///< hold the last three joints fixed
  uint64_t seed{1};
};

struct Dataset {
  PointCloud depth;                   ///< camera frame, true normals
  std::vector<ContactRecord> logs;    ///< what the encoders recorded
  std::vector<ContactSample> contacts;  ///< realized touches, base frame
  size_t skipped_ik{0};
};

/// End-to-end synthetic data: depth scan plus joint logs produced by
/// driving the TRUE chain (nominal geometry + true_biases) to each raster
/// contact. Downstream consumers see only the nominal chain and the logs;
/// the true extrinsic and biases stay in the caller's hands.
Dataset generate_dataset(const Scene& scene, const KinematicChain& nominal,
                         const Eigen::VectorXd& true_biases,
                         const DatasetConfig& cfg, int threads = 1);

}  // namespace ccal
