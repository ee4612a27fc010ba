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

#include "contactcal/contactcal.h"

#include <string>

#include "core/cloud_io.hpp"
#include "core/commands.hpp"
#include "core/error.hpp"
#include "core/pointcloud.hpp"
#include "core/registration.hpp"
#include "core/se3.hpp"

struct ccal_cloud {
  ccal::PointCloud cloud;
};

namespace {

thread_local std::string g_last_error;

std::string str_or_empty(const char* s) { return s == nullptr ? "" : s; }

/// Runs fn, mapping exceptions onto statuses and the error slot.
template <typename Fn>
ccal_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const ccal::Error& e) {
    g_last_error = e.what();
    return ccal::exit_code_for(e.code()) == 2 ? CCAL_DEGENERATE : CCAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CCAL_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return CCAL_ERROR;
  }
}

ccal_status invalid(const char* message) {
  g_last_error = message;
  return CCAL_ERROR;
}

ccal::RigidTransform to_transform(const ccal_transform& in) {
  Eigen::Matrix3d r;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      r(row, col) = in.rotation[row * 3 + col];
    }
  }
  const Eigen::Vector3d t(in.translation[0], in.translation[1],
                          in.translation[2]);
  return ccal::RigidTransform(r, t);
}

void from_transform(const ccal::RigidTransform& in, ccal_transform& out) {
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      out.rotation[row * 3 + col] = in.rotation()(row, col);
    }
  }
  for (int i = 0; i < 3; ++i) {
    out.translation[i] = in.translation()[i];
  }
}

ccal::IcpConfig to_icp(const ccal_icp_options* options) {
  ccal::IcpConfig cfg;
  if (options != nullptr) {
    cfg.max_iterations = options->max_iterations;
    cfg.translation_tolerance = options->translation_tolerance;
    cfg.rotation_tolerance = options->rotation_tolerance;
    cfg.max_correspondence_distance = options->max_correspondence_distance;
    cfg.trim_ratio = options->trim_ratio;
    cfg.normal_k = options->normal_k;
  }
  return cfg;
}

}  // namespace

extern "C" {

const char* ccal_version(void) { return ccal::kVersionString; }

const char* ccal_last_error(void) { return g_last_error.c_str(); }

void ccal_icp_options_init(ccal_icp_options* options) {
  if (options == nullptr) return;
  const ccal::IcpConfig defaults;
  options->max_iterations = defaults.max_iterations;
  options->translation_tolerance = defaults.translation_tolerance;
  options->rotation_tolerance = defaults.rotation_tolerance;
  options->max_correspondence_distance = defaults.max_correspondence_distance;
  options->trim_ratio = defaults.trim_ratio;
  options->normal_k = defaults.normal_k;
}

ccal_status ccal_transform_identity(ccal_transform* out) {
  if (out == nullptr) return invalid("null output");
  from_transform(ccal::RigidTransform(), *out);
  g_last_error.clear();
  return CCAL_OK;
}

ccal_status ccal_transform_from_extrinsic(const ccal_extrinsic* in,
                                          ccal_transform* out) {
  if (in == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    ccal::ExtrinsicParams p;
    p.x = in->x;
    p.y = in->y;
    p.z = in->z;
    p.phi = in->phi;
    p.theta = in->theta;
    p.psi = in->psi;
    from_transform(ccal::extrinsic_to_transform(p), *out);
    return CCAL_OK;
  });
}

ccal_status ccal_extrinsic_from_transform(const ccal_transform* in,
                                          ccal_extrinsic* out) {
  if (in == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    const ccal::ExtrinsicParams p =
        ccal::transform_to_extrinsic(to_transform(*in));
    out->x = p.x;
    out->y = p.y;
    out->z = p.z;
    out->phi = p.phi;
    out->theta = p.theta;
    out->psi = p.psi;
    return CCAL_OK;
  });
}

ccal_status ccal_cloud_load(const char* path, ccal_cloud** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    auto handle = new ccal_cloud{ccal::read_cloud(path)};
    *out = handle;
    return CCAL_OK;
  });
}

void ccal_cloud_free(ccal_cloud* cloud) { delete cloud; }

size_t ccal_cloud_size(const ccal_cloud* cloud) {
  return cloud == nullptr ? 0 : cloud->cloud.size();
}

int ccal_cloud_has_normals(const ccal_cloud* cloud) {
  return cloud != nullptr && cloud->cloud.has_normals() ? 1 : 0;
}

ccal_status ccal_cloud_save(const ccal_cloud* cloud, const char* path) {
  if (cloud == nullptr || path == nullptr) return invalid("null argument");
  return guarded([&] {
    ccal::write_cloud(cloud->cloud, path);
    return CCAL_OK;
  });
}

ccal_status ccal_cloud_downsample(const ccal_cloud* cloud, size_t count,
                                  uint64_t seed, ccal_cloud** out) {
  if (cloud == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    auto handle =
        new ccal_cloud{ccal::random_downsample(cloud->cloud, count, seed)};
    *out = handle;
    return CCAL_OK;
  });
}

ccal_status ccal_cloud_estimate_normals(ccal_cloud* cloud, size_t k,
                                        const double viewpoint[3]) {
  if (cloud == nullptr || viewpoint == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    cloud->cloud = ccal::estimate_normals(
        cloud->cloud, k,
        Eigen::Vector3d(viewpoint[0], viewpoint[1], viewpoint[2]));
    return CCAL_OK;
  });
}

ccal_status ccal_register_clouds(const ccal_cloud* contact,
                                 const ccal_cloud* depth,
                                 const ccal_transform* initial,
                                 const ccal_icp_options* options, int threads,
                                 ccal_transform* out_pose, double* out_cost,
                                 int* out_iterations, int* out_converged) {
  if (contact == nullptr || depth == nullptr || initial == nullptr ||
      out_pose == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    const ccal::IcpResult result =
        ccal::register_clouds(contact->cloud, depth->cloud,
                              to_transform(*initial), to_icp(options), threads);
    from_transform(result.transform, *out_pose);
    if (out_cost != nullptr) *out_cost = result.final_cost;
    if (out_iterations != nullptr) *out_iterations = result.iterations;
    if (out_converged != nullptr) *out_converged = result.converged ? 1 : 0;
    if (!result.diagnostic.empty()) {
      g_last_error = result.diagnostic;
      return CCAL_DEGENERATE;
    }
    return CCAL_OK;
  });
}

ccal_status ccal_cmd_simulate(const ccal_simulate_args* args) {
  if (args == nullptr) return invalid("null argument");
  return guarded([&] {
    ccal::SimulateArgs a;
    a.config_path = str_or_empty(args->config_path);
    a.out_dir = str_or_empty(args->out_dir);
    a.seed = args->seed;
    a.threads = args->threads;
    return ccal::cmd_simulate(a) == 0 ? CCAL_OK : CCAL_ERROR;
  });
}

ccal_status ccal_cmd_calibrate(const ccal_calibrate_args* args) {
  if (args == nullptr) return invalid("null argument");
  return guarded([&] {
    ccal::CalibrateArgs a;
    a.depth_path = str_or_empty(args->depth_path);
    a.joints_path = str_or_empty(args->joints_path);
    a.chain_path = str_or_empty(args->chain_path);
    a.config_path = str_or_empty(args->config_path);
    a.out_dir = str_or_empty(args->out_dir);
    a.seed = args->seed;
    a.threads = args->threads;
    const int code = ccal::cmd_calibrate(a);
    if (code == 2) {
      g_last_error = "degenerate problem; see the written reports";
      return CCAL_DEGENERATE;
    }
    if (code != 0) {
      g_last_error = "solver did not converge; see the written reports";
      return CCAL_ERROR;
    }
    return CCAL_OK;
  });
}

ccal_status ccal_cmd_stability(const ccal_stability_args* args) {
  if (args == nullptr) return invalid("null argument");
  return guarded([&] {
    ccal::StabilityArgs a;
    a.config_path = str_or_empty(args->config_path);
    a.out_dir = str_or_empty(args->out_dir);
    a.depth_path = str_or_empty(args->depth_path);
    a.joints_path = str_or_empty(args->joints_path);
    a.chain_path = str_or_empty(args->chain_path);
    a.extrinsic_path = str_or_empty(args->extrinsic_path);
    a.self_test = args->self_test != 0;
    a.seed = args->seed;
    a.threads = args->threads;
    return ccal::cmd_stability(a) == 0 ? CCAL_OK : CCAL_ERROR;
  });
}

ccal_status ccal_cmd_downsample_study(const ccal_study_args* args) {
  if (args == nullptr) return invalid("null argument");
  return guarded([&] {
    ccal::StudyArgs a;
    a.depth_path = str_or_empty(args->depth_path);
    a.joints_path = str_or_empty(args->joints_path);
    a.chain_path = str_or_empty(args->chain_path);
    a.config_path = str_or_empty(args->config_path);
    a.ground_truth_dir = str_or_empty(args->ground_truth_dir);
    a.out_dir = str_or_empty(args->out_dir);
    a.seed = args->seed;
    a.threads = args->threads;
    return ccal::cmd_downsample_study(a) == 0 ? CCAL_OK : CCAL_ERROR;
  });
}

}  // extern "C"
