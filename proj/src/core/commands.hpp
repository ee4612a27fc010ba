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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"
#include "core/kinematics.hpp"
#include "core/se3.hpp"
#include "core/simulator.hpp"

namespace ccal {

inline constexpr char kVersionString[] = "0.1.0";

/// Process exit code for a thrown error: 2 for degeneracy, 1 otherwise.
int exit_code_for(ErrorCode code);

/// Six-joint bench arm used when no chain file is given.
KinematicChain default_chain();

/// Camera pose used by the benchmark datasets, magnitudes typical of a
/// tripod-mounted depth sensor facing a table-top work cell.
ExtrinsicParams benchmark_extrinsic();

/// Patch labels whose outward face the camera at `extrinsic` can see.
std::vector<std::string> visible_contact_patches(const Scene& scene,
                                                 const RigidTransform& extrinsic);

/// Expands a mask string "name:spec;name:spec" against a label set.
/// spec is "*" (all), "*-a,b" (all except), or "a,b" (exactly these).
/// Unknown labels and empty selections are errors.
std::vector<std::pair<std::string, std::vector<std::string>>> resolve_masks(
    const std::string& text, const std::vector<std::string>& all_labels);

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
  uint64_t seed{1};
  int threads{1};
};

struct CalibrateArgs {
  std::string depth_path;
  std::string joints_path;
  std::string chain_path;  ///< empty: default_chain()
  std::string config_path;
  std::string out_dir;
  uint64_t seed{1};
  int threads{1};
};

struct StabilityArgs {
  std::string config_path;  ///< optional for --self-test
  std::string out_dir;
  std::string depth_path;
  std::string joints_path;
  std::string chain_path;
  std::string extrinsic_path;
  bool self_test{false};
  uint64_t seed{1};
  int threads{1};
};

struct StudyArgs {
  std::string depth_path;
  std::string joints_path;
  std::string chain_path;  ///< empty: default_chain()
  std::string config_path;
  std::string ground_truth_dir;
  std::string out_dir;
  uint64_t seed{1};
  int threads{1};
};

/// Renders a dataset to out_dir: depth.ply, joints.csv,
/// contact_nominal.ply, a ground_truth/ bundle, manifest.txt.
int cmd_simulate(const SimulateArgs& args);

/// Rigid alignment, then the joint bias solve unless disabled. Writes
/// rigid_report.txt and rigid_extrinsic.txt always; calibration_report.txt,
/// calibrated_extrinsic.txt and cost_history.csv when biases are solved.
/// Returns 0 on convergence, 2 on a degenerate verdict.
int cmd_calibrate(const CalibrateArgs& args);

/// Spectral comparison of sampling choices; writes stability.csv.
int cmd_stability(const StabilityArgs& args);

/// Registration error versus contact-point count; writes study.csv. The
/// ground-truth bundle is read here and nowhere else.
int cmd_downsample_study(const StudyArgs& args);

}  // namespace ccal
