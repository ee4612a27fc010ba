/* Copyright 2026 contactcal contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the contactcal shared library.
 *
 * All functions return ccal_status; on CCAL_ERROR call ccal_last_error()
 * for a message (thread local, valid until the next call on the same
 * thread). Objects behind opaque handles must be released with the
 * matching *_free function.
 */

#ifndef CONTACTCAL_CONTACTCAL_H_
#define CONTACTCAL_CONTACTCAL_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CCAL_API

typedef enum ccal_status {
  CCAL_OK = 0,
  CCAL_ERROR = 1,
  CCAL_DEGENERATE = 2
} ccal_status;

/* Row-major rotation plus translation, mapping points into the camera
 * frame: p_cam = R * p_base + t. */
typedef struct ccal_transform {
  double rotation[9];
  double translation[3];
} ccal_transform;

/* Pose as x y z (metres) and roll/pitch/yaw phi theta psi (radians),
 * rotation composed as Rz(psi) * Ry(theta) * Rx(phi). */
typedef struct ccal_extrinsic {
  double x, y, z;
  double phi, theta, psi;
} ccal_extrinsic;

typedef struct ccal_icp_options {
  int max_iterations;
  double translation_tolerance;
  double rotation_tolerance;
  double max_correspondence_distance;
  double trim_ratio;
  size_t normal_k;
} ccal_icp_options;

typedef struct ccal_cloud ccal_cloud;

CCAL_API const char* ccal_version(void);
CCAL_API const char* ccal_last_error(void);

CCAL_API void ccal_icp_options_init(ccal_icp_options* options);

CCAL_API ccal_status ccal_transform_identity(ccal_transform* out);
CCAL_API ccal_status ccal_transform_from_extrinsic(const ccal_extrinsic* in,
                                                   ccal_transform* out);
/* Fails near pitch = +/- pi/2 where roll and yaw are not separable. */
CCAL_API ccal_status ccal_extrinsic_from_transform(const ccal_transform* in,
                                                   ccal_extrinsic* out);

/* ASCII PLY (primary) or xyz CSV, by content. */
CCAL_API ccal_status ccal_cloud_load(const char* path, ccal_cloud** out);
CCAL_API void ccal_cloud_free(ccal_cloud* cloud);
CCAL_API size_t ccal_cloud_size(const ccal_cloud* cloud);
CCAL_API int ccal_cloud_has_normals(const ccal_cloud* cloud);
/* ".ply" suffix selects PLY, anything else CSV. */
CCAL_API ccal_status ccal_cloud_save(const ccal_cloud* cloud,
                                     const char* path);
/* Uniform subset without replacement; count may not exceed the size. */
CCAL_API ccal_status ccal_cloud_downsample(const ccal_cloud* cloud,
                                           size_t count, uint64_t seed,
                                           ccal_cloud** out);
/* PCA normals from k neighbours, oriented toward the viewpoint
 * (sensor position in the cloud frame); replaces existing normals. */
CCAL_API ccal_status ccal_cloud_estimate_normals(ccal_cloud* cloud, size_t k,
                                                 const double viewpoint[3]);

/* Point-to-plane alignment of a contact cloud onto a depth cloud.
 * options may be NULL for defaults; out_cost, out_iterations and
 * out_converged may be NULL. Returns CCAL_DEGENERATE when the normal
 * equations lose rank before convergence. */
CCAL_API ccal_status ccal_register_clouds(const ccal_cloud* contact,
                                          const ccal_cloud* depth,
                                          const ccal_transform* initial,
                                          const ccal_icp_options* options,
                                          int threads,
                                          ccal_transform* out_pose,
                                          double* out_cost,
                                          int* out_iterations,
                                          int* out_converged);

/* Command-level entry points, mirroring the CLI subcommands. Paths that
 * are optional for the command may be NULL or empty. Each writes its
 * reports under out_dir; the status doubles as the process exit code. */

typedef struct ccal_simulate_args {
  const char* config_path;
  const char* out_dir;
  uint64_t seed;
  int threads;
} ccal_simulate_args;

typedef struct ccal_calibrate_args {
  const char* depth_path;
  const char* joints_path;
  const char* chain_path; /* NULL: built-in six-joint bench arm */
  const char* config_path;
  const char* out_dir;
  uint64_t seed;
  int threads;
} ccal_calibrate_args;

typedef struct ccal_stability_args {
  const char* config_path; /* NULL allowed with self_test */
  const char* out_dir;
  const char* depth_path;
  const char* joints_path;
  const char* chain_path;
  const char* extrinsic_path;
  int self_test;
  uint64_t seed;
  int threads;
} ccal_stability_args;

typedef struct ccal_study_args {
  const char* depth_path;
  const char* joints_path;
  const char* chain_path;
  const char* config_path;
  const char* ground_truth_dir;
  const char* out_dir;
  uint64_t seed;
  int threads;
} ccal_study_args;

CCAL_API ccal_status ccal_cmd_simulate(const ccal_simulate_args* args);
CCAL_API ccal_status ccal_cmd_calibrate(const ccal_calibrate_args* args);
CCAL_API ccal_status ccal_cmd_stability(const ccal_stability_args* args);
CCAL_API ccal_status ccal_cmd_downsample_study(const ccal_study_args* args);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CONTACTCAL_CONTACTCAL_H_ */
