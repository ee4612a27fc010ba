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

#include "core/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>

#include "core/error.hpp"
#include "core/runtime.hpp"
#include "core/textio.hpp"

namespace ccal {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void append_box(Scene& scene, const std::string& name,
                const Eigen::Vector2d& center, double width, double depth,
                double z0, double z1, double yaw) {
  const Eigen::Vector3d ex(std::cos(yaw), std::sin(yaw), 0.0);
  const Eigen::Vector3d ey(-std::sin(yaw), std::cos(yaw), 0.0);
  const Eigen::Vector3d ez = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d c(center.x(), center.y(), 0.0);
  const double h = z1 - z0;
  auto patch = [&](const std::string& label, const Eigen::Vector3d& corner,
                   const Eigen::Vector3d& eu, const Eigen::Vector3d& ev) {
    scene.patches.push_back(Patch{label, corner, eu, ev});
  };
  const Eigen::Vector3d half_w = 0.5 * width * ex;
  const Eigen::Vector3d half_d = 0.5 * depth * ey;
  // Outward normals: side_1 +ex, side_2 -ex, side_3 +ey, side_4 -ey.
  patch(name + "_side_1", c + half_w - half_d + z0 * ez, depth * ey, h * ez);
  patch(name + "_side_2", c - half_w + half_d + z0 * ez, -depth * ey, h * ez);
  patch(name + "_side_3", c + half_d + half_w + z0 * ez, -width * ex, h * ez);
  patch(name + "_side_4", c - half_d - half_w + z0 * ez, width * ex, h * ez);
  patch(name + "_top", c - half_w - half_d + z1 * ez, width * ex, depth * ey);
  patch(name + "_bottom", c - half_w + half_d + z0 * ez, width * ex,
        -depth * ey);
}

uint64_t patch_stream(size_t patch_idx, uint64_t local) {
  return (static_cast<uint64_t>(patch_idx) << 40) + local;
}

/// Closed face groups ("<name>_side_*", "<name>_top", "<name>_bottom")
/// describe solids the end effector cannot enter; the planner drops raster
/// points that fall strictly inside one, e.g. table points under a prism.
std::vector<std::vector<const Patch*>> solid_groups(const Scene& scene) {
  std::map<std::string, std::vector<const Patch*>> by_prefix;
  for (const Patch& p : scene.patches) {
    const size_t side = p.label.rfind("_side_");
    const size_t top = p.label.rfind("_top");
    const size_t bottom = p.label.rfind("_bottom");
    size_t cut = std::string::npos;
    if (side != std::string::npos) cut = side;
    if (top != std::string::npos && p.label.size() == top + 4) cut = top;
    if (bottom != std::string::npos && p.label.size() == bottom + 7) {
      cut = bottom;
    }
    if (cut != std::string::npos && cut > 0) {
      by_prefix[p.label.substr(0, cut)].push_back(&p);
    }
  }
  std::vector<std::vector<const Patch*>> out;
  for (auto& [prefix, faces] : by_prefix) {
    if (faces.size() >= 5) out.push_back(std::move(faces));
  }
  return out;
}

double rectangle_distance(const Eigen::Vector3d& p, const Patch& patch) {
  const double len_u = patch.edge_u.norm();
  const double len_v = patch.edge_v.norm();
  const Eigen::Vector3d d = p - patch.corner;
  const double u = std::clamp(d.dot(patch.edge_u) / len_u, 0.0, len_u);
  const double v = std::clamp(d.dot(patch.edge_v) / len_v, 0.0, len_v);
  const Eigen::Vector3d closest = patch.corner + u * patch.edge_u / len_u +
                                  v * patch.edge_v / len_v;
  return (p - closest).norm();
}

bool inside_any_solid(const Eigen::Vector3d& p,
                      const std::vector<std::vector<const Patch*>>& groups) {
  for (const auto& faces : groups) {
    bool inside = true;
    for (const Patch* face : faces) {
      if (face->normal().dot(p - face->corner) >= -1e-9) {
        inside = false;
        break;
      }
    }
    if (inside) return true;
  }
  return false;
}

}  // namespace

void Scene::validate() const {
  if (patches.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "scene has no patches");
  }
  for (const Patch& p : patches) {
    if (!p.corner.allFinite() || !p.edge_u.allFinite() ||
        !p.edge_v.allFinite()) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "patch '" + p.label + "' has non-finite geometry");
    }
    if (p.edge_u.norm() <= 0.0 || p.edge_v.norm() <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "patch '" + p.label + "' has a zero edge");
    }
    if (std::abs(p.edge_u.dot(p.edge_v)) >
        1e-9 * p.edge_u.norm() * p.edge_v.norm()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "patch '" + p.label + "' edges are not orthogonal");
    }
  }
}

std::vector<std::string> Scene::labels() const {
  std::vector<std::string> out;
  out.reserve(patches.size());
  for (const Patch& p : patches) out.push_back(p.label);
  return out;
}

const Patch* Scene::find(const std::string& label) const {
  for (const Patch& p : patches) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

void DepthScanConfig::validate() const {
  if (!(point_density > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "point_density must be > 0");
  }
  if (gaussian_sigma < 0.0 || bow_amplitude < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise amplitudes must be non-negative");
  }
}

void ContactScanConfig::validate() const {
  if (!(raster_spacing > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "raster_spacing must be > 0");
  }
  if (clearance < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "clearance must be non-negative");
  }
  if (contact_noise_sigma < 0.0 || force_noise_sigma < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise sigmas must be non-negative");
  }
  const double lo = std::abs(force_min);
  const double mid = std::abs(force_setpoint);
  const double hi = std::abs(force_max);
  const bool same_sign = force_min * force_setpoint > 0.0 &&
                         force_max * force_setpoint > 0.0;
  if (!same_sign || !(lo < mid && mid < hi)) {
    throw Error(ErrorCode::kInvalidArgument,
                "force thresholds must satisfy |min| < |setpoint| < |max| "
                "with one sign");
  }
}

Scene make_benchmark_scene(const std::string& preset) {
  Scene scene;
  if (preset == "two_prisms_table" || preset == "one_prism_table") {
    scene.patches.push_back(Patch{"table",
                                  Eigen::Vector3d(-1.10, -0.55, -0.08),
                                  Eigen::Vector3d(0.80, 0.0, 0.0),
                                  Eigen::Vector3d(0.0, 1.20, 0.0)});
    append_box(scene, "prism_a", Eigen::Vector2d(-0.80, -0.10), 0.40, 0.30,
               -0.08, 0.265, -30.0 * kPi / 180.0);
    if (preset == "two_prisms_table") {
      append_box(scene, "prism_b", Eigen::Vector2d(-0.60, 0.35), 0.25, 0.20,
                 -0.08, 0.07, 20.0 * kPi / 180.0);
    }
  } else if (preset == "single_plane") {
    scene.patches.push_back(Patch{"plane",
                                  Eigen::Vector3d(-1.10, -0.50, 0.0),
                                  Eigen::Vector3d(1.0, 0.0, 0.0),
                                  Eigen::Vector3d(0.0, 1.0, 0.0)});
  } else if (preset == "orthogonal_triplet") {
    scene.patches.push_back(Patch{"floor", Eigen::Vector3d(0.0, 0.0, 0.0),
                                  Eigen::Vector3d(0.6, 0.0, 0.0),
                                  Eigen::Vector3d(0.0, 0.6, 0.0)});
    scene.patches.push_back(Patch{"wall_x", Eigen::Vector3d(0.0, 0.0, 0.0),
                                  Eigen::Vector3d(0.0, 0.6, 0.0),
                                  Eigen::Vector3d(0.0, 0.0, 0.6)});
    scene.patches.push_back(Patch{"wall_y", Eigen::Vector3d(0.0, 0.0, 0.0),
                                  Eigen::Vector3d(0.0, 0.0, 0.6),
                                  Eigen::Vector3d(0.6, 0.0, 0.0)});
  } else {
    throw Error(ErrorCode::kUnknownPreset, "unknown scene preset: " + preset);
  }
  scene.validate();
  return scene;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open scene file: " + path);
  }
  Scene scene;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const std::vector<std::string> tokens = split(body);
    if (tokens.size() != 10) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_no) +
                      ": expected 'label cx cy cz e1x e1y e1z e2x e2y e2z'");
    }
    Patch p;
    p.label = tokens[0];
    double v[9];
    for (int i = 0; i < 9; ++i) {
      if (!parse_double(tokens[static_cast<size_t>(i) + 1], v[i])) {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) +
                                           ": malformed number");
      }
    }
    p.corner = Eigen::Vector3d(v[0], v[1], v[2]);
    p.edge_u = Eigen::Vector3d(v[3], v[4], v[5]);
    p.edge_v = Eigen::Vector3d(v[6], v[7], v[8]);
    scene.patches.push_back(std::move(p));
  }
  scene.validate();
  return scene;
}

void save_scene_file(const Scene& scene, const std::string& path) {
  scene.validate();
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write scene file: " + path);
  }
  out << "# label cx cy cz e1x e1y e1z e2x e2y e2z\n";
  for (const Patch& p : scene.patches) {
    out << p.label;
    const double v[9] = {p.corner.x(), p.corner.y(), p.corner.z(),
                         p.edge_u.x(), p.edge_u.y(), p.edge_u.z(),
                         p.edge_v.x(), p.edge_v.y(), p.edge_v.z()};
    for (double x : v) out << ' ' << format_double(x);
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

PointCloud render_depth(const Scene& scene, const DepthScanConfig& cfg) {
  scene.validate();
  cfg.validate();
  const RigidTransform inverse = cfg.extrinsic.inverse();
  const Eigen::Vector3d camera = inverse.translation();
  PointCloud cloud;
  for (size_t pi = 0; pi < scene.patches.size(); ++pi) {
    const Patch& patch = scene.patches[pi];
    const Eigen::Vector3d n = patch.normal();
    const auto count =
        static_cast<uint64_t>(std::llround(cfg.point_density * patch.area()));
    for (uint64_t i = 0; i < count; ++i) {
      std::mt19937_64 engine = make_engine(cfg.seed, patch_stream(pi, i));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double u = unit(engine);
      const double v = unit(engine);
      Eigen::Vector3d p = patch.corner + u * patch.edge_u + v * patch.edge_v;
      if (n.dot(camera - p) <= 0.0) continue;
      double offset =
          cfg.bow_amplitude * (4.0 * u * (1.0 - u)) * (4.0 * v * (1.0 - v));
      if (cfg.gaussian_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.gaussian_sigma);
        offset += noise(engine);
      }
      p += offset * n;
      cloud.add_point(cfg.extrinsic.apply(p),
                      cfg.extrinsic.rotation() * n);
    }
  }
  if (cloud.empty()) {
    throw Error(ErrorCode::kEmptyCloud,
                "no visible surface under the given camera pose");
  }
  return cloud;
}

std::vector<ContactSample> plan_contact_raster(const Scene& scene,
                                               const ContactScanConfig& cfg) {
  scene.validate();
  cfg.validate();
  if (cfg.selected_patches.empty()) {
    throw Error(ErrorCode::kEmptySelection, "no patches selected for contact");
  }
  const double sign = cfg.force_setpoint < 0.0 ? -1.0 : 1.0;
  const double admit_lo = std::abs(cfg.force_min);
  const double admit_hi = std::abs(cfg.force_max);
  const auto solids = solid_groups(scene);
  std::vector<ContactSample> out;
  for (size_t si = 0; si < cfg.selected_patches.size(); ++si) {
    const Patch* patch = scene.find(cfg.selected_patches[si]);
    if (patch == nullptr) {
      throw Error(ErrorCode::kEmptySelection,
                  "selected patch not in scene: " + cfg.selected_patches[si]);
    }
    const double len_u = patch->edge_u.norm();
    const double len_v = patch->edge_v.norm();
    const Eigen::Vector3d du = patch->edge_u / len_u;
    const Eigen::Vector3d dv = patch->edge_v / len_v;
    const Eigen::Vector3d n = patch->normal();
    const auto steps = [&](double len) -> uint64_t {
      if (len < cfg.raster_spacing) return 1;
      return static_cast<uint64_t>(
                 std::floor((len - cfg.raster_spacing) / cfg.raster_spacing)) +
             1;
    };
    const uint64_t nu = steps(len_u);
    const uint64_t nv = steps(len_v);
    const double u0 = nu == 1 ? 0.5 * len_u : 0.5 * cfg.raster_spacing;
    const double v0 = nv == 1 ? 0.5 * len_v : 0.5 * cfg.raster_spacing;
    const size_t patch_index =
        static_cast<size_t>(patch - scene.patches.data());
    for (uint64_t iv = 0; iv < nv; ++iv) {
      for (uint64_t step = 0; step < nu; ++step) {
        // Serpentine rows: odd rows run backwards.
        const uint64_t iu = (iv % 2 == 0) ? step : nu - 1 - step;
        Eigen::Vector3d p = patch->corner +
                            (u0 + static_cast<double>(iu) * cfg.raster_spacing) * du +
                            (v0 + static_cast<double>(iv) * cfg.raster_spacing) * dv;
        if (inside_any_solid(p, solids)) continue;
        // The probe tip has extent; keep clear of adjoining surfaces so a
        // touch near a junction cannot register against the wrong face.
        bool blocked = false;
        for (const Patch& other : scene.patches) {
          if (&other == patch) continue;
          if (rectangle_distance(p, other) < cfg.clearance) {
            blocked = true;
            break;
          }
        }
        if (blocked) continue;
        std::mt19937_64 engine = make_engine(
            cfg.seed, patch_stream(patch_index, iv * nu + iu));
        std::normal_distribution<double> force_draw(cfg.force_setpoint,
                                                    cfg.force_noise_sigma);
        const double force = force_draw(engine);
        if (force * sign < 0.0) continue;
        const double magnitude = std::abs(force);
        if (magnitude < admit_lo || magnitude > admit_hi) continue;
        if (cfg.contact_noise_sigma > 0.0) {
          std::normal_distribution<double> noise(0.0, cfg.contact_noise_sigma);
          // Truncated at four sigma: a contact is admitted only once the
          // end effector is near the surface, so wild offsets cannot occur.
          const double bound = 4.0 * cfg.contact_noise_sigma;
          p += std::clamp(noise(engine), -bound, bound) * n;
        }
        out.push_back(ContactSample{p, n, patch->label});
      }
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptySelection,
                "force admission rejected every raster point");
  }
  return out;
}

PairedSet sample_scene_surface(const Scene& scene,
                               const std::vector<std::string>& labels,
                               double density, uint64_t seed) {
  scene.validate();
  if (labels.empty()) {
    throw Error(ErrorCode::kEmptySelection, "no patches selected");
  }
  if (!(density > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample density must be > 0");
  }
  PairedSet out;
  for (const std::string& label : labels) {
    const Patch* patch = scene.find(label);
    if (patch == nullptr) {
      throw Error(ErrorCode::kEmptySelection,
                  "selected patch not in scene: " + label);
    }
    const size_t patch_index =
        static_cast<size_t>(patch - scene.patches.data());
    const Eigen::Vector3d n = patch->normal();
    const auto count =
        static_cast<uint64_t>(std::llround(density * patch->area()));
    for (uint64_t i = 0; i < count; ++i) {
      std::mt19937_64 engine = make_engine(seed, patch_stream(patch_index, i));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double u = unit(engine);
      const double v = unit(engine);
      out.points.push_back(patch->corner + u * patch->edge_u +
                           v * patch->edge_v);
      out.normals.push_back(n);
    }
  }
  if (out.points.empty()) {
    throw Error(ErrorCode::kEmptySelection, "selection produced no samples");
  }
  return out;
}

namespace {

struct IkAttempt {
  bool position_met{false};
  double axis_angle{kPi};
  Eigen::VectorXd joints;
};

/// Damped least squares with strict task priority: the tip position is
/// the primary task, the tool-axis alignment runs in its null space so
/// it can never push the tip off target.
IkAttempt run_dls(const KinematicChain& chain, const Eigen::Vector3d& target,
                  const Eigen::Vector3d& desired_axis,
                  const std::vector<char>& locked, Eigen::VectorXd q,
                  const IkOptions& options) {
  const auto dof = static_cast<Eigen::Index>(chain.dof());
  const double lambda_sq = options.damping * options.damping;
  IkAttempt attempt;
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const std::vector<RigidTransform> frames = link_frames(chain, q);
    const Eigen::Vector3d tip = frames.back().translation();
    const Eigen::Vector3d tool_axis = frames.back().rotation().col(2);
    const Eigen::Vector3d pos_err = target - tip;
    Eigen::Vector3d axis_err = Eigen::Vector3d::Zero();
    double axis_angle = 0.0;
    if (options.align_axis) {
      axis_err = tool_axis.cross(desired_axis);
      axis_angle = std::atan2(axis_err.norm(), tool_axis.dot(desired_axis));
    }
    const bool position_met = pos_err.norm() < options.position_tolerance;
    if (position_met &&
        (!attempt.position_met || axis_angle < attempt.axis_angle)) {
      attempt.position_met = true;
      attempt.axis_angle = axis_angle;
      attempt.joints = q;
      if (axis_angle < options.axis_tolerance) return attempt;
    }
    if (iter == options.max_iterations) break;
    Eigen::MatrixXd jac_pos = Eigen::MatrixXd::Zero(3, dof);
    Eigen::MatrixXd jac_axis = Eigen::MatrixXd::Zero(3, dof);
    for (Eigen::Index k = 0; k < dof; ++k) {
      if (locked[static_cast<size_t>(k)]) continue;
      const Eigen::Vector3d axis =
          frames[static_cast<size_t>(k)].rotation().col(2);
      const Eigen::Vector3d origin =
          frames[static_cast<size_t>(k)].translation();
      jac_pos.col(k) = axis.cross(tip - origin);
      if (options.align_axis) {
        jac_axis.col(k) = (axis.cross(tool_axis)).cross(desired_axis);
      }
    }
    const Eigen::Matrix3d pos_gram =
        jac_pos * jac_pos.transpose() + lambda_sq * Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d pos_inv = pos_gram.ldlt().solve(
        Eigen::Matrix3d::Identity());
    Eigen::VectorXd dq = jac_pos.transpose() * (pos_inv * pos_err);
    if (options.align_axis) {
      const Eigen::MatrixXd null_proj =
          Eigen::MatrixXd::Identity(dof, dof) -
          jac_pos.transpose() * pos_inv * jac_pos;
      const Eigen::MatrixXd jac_null = jac_axis * null_proj;
      const Eigen::Matrix3d axis_gram = jac_null * jac_null.transpose() +
                                        0.01 * Eigen::Matrix3d::Identity();
      dq += jac_null.transpose() *
            axis_gram.ldlt().solve(-axis_err - jac_axis * dq);
    }
    const double dq_norm = dq.norm();
    if (dq_norm > 0.5) dq *= 0.5 / dq_norm;
    q += dq;
  }
  return attempt;
}

}  // namespace

Eigen::VectorXd solve_ik(const KinematicChain& chain,
                         const Eigen::Vector3d& target,
                         const Eigen::Vector3d& approach_normal,
                         const Eigen::VectorXd& seed_config,
                         const IkOptions& options) {
  const auto dof = static_cast<Eigen::Index>(chain.dof());
  if (seed_config.size() != dof) {
    throw Error(ErrorCode::kDimensionMismatch, "IK seed has wrong size");
  }
  std::vector<char> locked(chain.dof(), 0);
  for (int j : options.locked_joints) {
    if (j < 0 || j >= static_cast<int>(chain.dof())) {
      throw Error(ErrorCode::kInvalidArgument, "locked joint out of range");
    }
    locked[static_cast<size_t>(j)] = 1;
  }
  const Eigen::Vector3d desired_axis = -approach_normal.normalized();

  // The damped solve can park the wrist in a posture where the tool axis
  // is first-order immovable toward the goal; restarts over a wrist-
  // posture grid escape that trap. Candidates run in ascending order of
  // the tool-axis error at the seed, so the first one usually succeeds
  // and the scan stays deterministic.
  std::vector<Eigen::VectorXd> seeds;
  seeds.push_back(seed_config);
  const Eigen::Index wrist_a = dof - 3;
  const Eigen::Index wrist_b = dof - 2;
  if (options.align_axis && dof >= 3 && !locked[static_cast<size_t>(wrist_a)] &&
      !locked[static_cast<size_t>(wrist_b)]) {
    std::vector<std::pair<double, Eigen::VectorXd>> ranked;
    for (const double qa : {-2.4, -1.2, 0.0, 1.2, 2.4}) {
      for (const double qb : {-2.4, -1.2, 0.0, 1.2, 2.4}) {
        Eigen::VectorXd s = seed_config;
        s[wrist_a] = qa;
        s[wrist_b] = qb;
        const Eigen::Vector3d tool_axis =
            forward_kinematics(chain, s).rotation().col(2);
        ranked.emplace_back(-tool_axis.dot(desired_axis), std::move(s));
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first;
                     });
    for (auto& [score, s] : ranked) seeds.push_back(std::move(s));
  }

  IkAttempt best;
  for (const Eigen::VectorXd& seed : seeds) {
    const IkAttempt attempt =
        run_dls(chain, target, desired_axis, locked, seed, options);
    if (!attempt.position_met) continue;
    if (attempt.axis_angle < options.axis_tolerance) return attempt.joints;
    if (!best.position_met || attempt.axis_angle < best.axis_angle) {
      best = attempt;
    }
  }
  // Position is the hard constraint; the axis stays best-effort.
  if (best.position_met) return best.joints;
  throw Error(ErrorCode::kIkFailure,
              "inverse kinematics did not reach the target");
}

Dataset generate_dataset(const Scene& scene, const KinematicChain& nominal,
                         const Eigen::VectorXd& true_biases,
                         const DatasetConfig& cfg, int threads) {
  const KinematicChain true_chain = nominal.with_biases(true_biases);
  Dataset out;
  out.depth = render_depth(scene, cfg.depth);
  const std::vector<ContactSample> raster =
      plan_contact_raster(scene, cfg.contact);

  IkOptions ik;
  if (cfg.wrist_locked) {
    const int dof = static_cast<int>(nominal.dof());
    for (int j = std::max(0, dof - 3); j < dof; ++j) {
      ik.locked_joints.push_back(j);
    }
    ik.align_axis = false;
  }

  const auto dof = static_cast<Eigen::Index>(nominal.dof());
  auto nominal_seed = [&](const Eigen::Vector3d& target) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(dof);
    q[0] = std::atan2(target.y(), target.x());
    if (dof > 1) q[1] = -0.5;
    if (dof > 2) q[2] = 1.0;
    if (dof > 4) q[4] = -0.9;
    return q;
  };

  if (cfg.seed_mode == IkSeedMode::kRaster) {
    // Warm-started rastering is order dependent, hence sequential; results
    // must not change with the thread count.
    std::optional<Eigen::VectorXd> warm;
    for (const ContactSample& sample : raster) {
      Eigen::VectorXd seed = warm ? *warm : nominal_seed(sample.point);
      try {
        Eigen::VectorXd q =
            solve_ik(true_chain, sample.point, sample.normal, seed, ik);
        warm = q;
        out.logs.push_back(ContactRecord{std::move(q)});
        out.contacts.push_back(sample);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kIkFailure) throw;
        // Cold restart after a failure so one bad corner cannot poison
        // the rest of the raster.
        warm.reset();
        ++out.skipped_ik;
      }
    }
  } else {
    // Independent per-point seeds: reproducible for any thread count. The
    // randomized postures spread the visited configuration space, and the
    // tool axis is left free so approach tilts vary; a normal-aligned tool
    // hides the last joint from planar contacts (its tip circle is tangent
    // to the surface).
    IkOptions jitter_ik = ik;
    jitter_ik.align_axis = false;
    std::vector<std::optional<Eigen::VectorXd>> solutions(raster.size());
    parallel_for(raster.size(), threads, [&](size_t i) {
      const ContactSample& sample = raster[i];
      Eigen::VectorXd seed = nominal_seed(sample.point);
      {
        std::mt19937_64 engine =
            make_engine(cfg.seed, 0x1c0000000000ull + i);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        if (dof > 0) seed[0] += 0.15 * unit(engine);
        if (dof > 1) seed[1] += 0.25 * unit(engine);
        if (dof > 2) seed[2] += 0.35 * unit(engine);
        // A locked wrist stays at one posture for every touch.
        if (!cfg.wrist_locked) {
          if (dof > 3) seed[3] = kPi * unit(engine);
          if (dof > 4) seed[4] += 0.8 * unit(engine);
          if (dof > 5) seed[5] = kPi * unit(engine);
        }
      }
      try {
        solutions[i] = solve_ik(true_chain, sample.point, sample.normal,
                                seed, jitter_ik);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kIkFailure) throw;
      }
    });
    for (size_t i = 0; i < raster.size(); ++i) {
      if (solutions[i]) {
        out.logs.push_back(ContactRecord{std::move(*solutions[i])});
        out.contacts.push_back(raster[i]);
      } else {
        ++out.skipped_ik;
      }
    }
  }
  if (out.logs.empty()) {
    throw Error(ErrorCode::kIkFailure,
                "inverse kinematics failed on every contact");
  }
  return out;
}

}  // namespace ccal
