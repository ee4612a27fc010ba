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

#include "core/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "core/calibration.hpp"
#include "core/cloud_io.hpp"
#include "core/config.hpp"
#include "core/registration.hpp"
#include "core/reports.hpp"
#include "core/runtime.hpp"
#include "core/stability.hpp"
#include "core/textio.hpp"

namespace ccal {

namespace {

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

ExtrinsicParams read_extrinsic_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open extrinsic file: " + path);
  }
  std::string line;
  while (std::getline(in, line)) {
    const std::string body = trim(line.substr(0, line.find('#')));
    if (!body.empty()) return extrinsic_from_line(body);
  }
  throw Error(ErrorCode::kParse, "extrinsic file is empty: " + path);
}

Eigen::Vector3d vector3_from_config(const KeyValueConfig& cfg,
                                    const std::string& key) {
  const std::vector<double> v = cfg.get_double_list(key, {});
  if (v.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "key '" + key + "' must hold three numbers");
  }
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

/// Extrinsic from "<prefix>_file" or "<prefix>_position" (m) plus
/// "<prefix>_angles_deg". Throws when required and absent.
ExtrinsicParams extrinsic_from_config(const KeyValueConfig& cfg,
                                      const std::string& prefix, bool required,
                                      const ExtrinsicParams& fallback) {
  const std::string file_key = prefix + "_file";
  const std::string pos_key = prefix + "_position";
  const std::string ang_key = prefix + "_angles_deg";
  if (cfg.has(file_key)) {
    return read_extrinsic_file(cfg.require_string(file_key));
  }
  if (cfg.has(pos_key) || cfg.has(ang_key)) {
    if (!cfg.has(pos_key) || !cfg.has(ang_key)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "keys '" + pos_key + "' and '" + ang_key +
                      "' must be given together");
    }
    const Eigen::Vector3d p = vector3_from_config(cfg, pos_key);
    const Eigen::Vector3d a = vector3_from_config(cfg, ang_key);
    ExtrinsicParams e;
    e.x = p.x();
    e.y = p.y();
    e.z = p.z();
    e.phi = a.x() * kDegToRad;
    e.theta = a.y() * kDegToRad;
    e.psi = a.z() * kDegToRad;
    return e;
  }
  if (required) {
    throw Error(ErrorCode::kInvalidArgument,
                cfg.origin() + ": an initial extrinsic is required; set '" +
                    file_key + "' or '" + pos_key + "' + '" + ang_key + "'");
  }
  return fallback;
}

IcpConfig icp_from_config(const KeyValueConfig& cfg) {
  IcpConfig icp;
  icp.max_iterations =
      static_cast<int>(cfg.get_int("icp_max_iterations", icp.max_iterations));
  icp.translation_tolerance =
      cfg.get_double("translation_tolerance", icp.translation_tolerance);
  icp.rotation_tolerance =
      cfg.get_double("rotation_tolerance", icp.rotation_tolerance);
  icp.max_correspondence_distance = cfg.get_double(
      "max_correspondence_distance", icp.max_correspondence_distance);
  icp.trim_ratio = cfg.get_double("trim_ratio", icp.trim_ratio);
  icp.normal_k = static_cast<size_t>(cfg.get_int(
      "normal_k", static_cast<int64_t>(icp.normal_k)));
  icp.validate();
  return icp;
}

/// Depth clouds must carry oriented normals; without them the sensor
/// position is needed to orient estimates, so demand it explicitly.
PointCloud with_normals(PointCloud depth, const KeyValueConfig& cfg,
                        size_t normal_k) {
  if (depth.has_normals()) {
    cfg.get_string("viewpoint", "");  // consume if present
    return depth;
  }
  if (!cfg.has("viewpoint")) {
    throw Error(ErrorCode::kInvalidArgument,
                "depth cloud has no normals; set 'viewpoint = x, y, z' (the "
                "sensor position in the cloud frame) to estimate them");
  }
  return estimate_normals(depth, normal_k, vector3_from_config(cfg, "viewpoint"));
}

Scene scene_from_config(const KeyValueConfig& cfg) {
  if (cfg.has("scene_file")) {
    if (cfg.has("preset")) {
      throw Error(ErrorCode::kInvalidArgument,
                  "give either 'preset' or 'scene_file', not both");
    }
    return load_scene_file(cfg.require_string("scene_file"));
  }
  return make_benchmark_scene(cfg.get_string("preset", "two_prisms_table"));
}

KinematicChain chain_from_path(const std::string& path) {
  return path.empty() ? default_chain() : load_chain_file(path);
}

Eigen::VectorXd read_bias_csv(const std::string& path, size_t dof) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open bias file: " + path);
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw Error(ErrorCode::kParse, "bias file is empty: " + path);
  }
  const size_t columns = split(trim(header), ',').size();
  if (columns != dof) {
    throw Error(ErrorCode::kDimensionMismatch,
                path + ": expected " + std::to_string(dof) +
                    " bias columns, got " + std::to_string(columns));
  }
  std::string row;
  if (!std::getline(in, row)) {
    throw Error(ErrorCode::kParse, path + ": missing bias row");
  }
  const std::vector<std::string> tokens = split(trim(row), ',');
  if (tokens.size() != dof) {
    throw Error(ErrorCode::kParse, path + ": malformed bias row");
  }
  Eigen::VectorXd biases(static_cast<Eigen::Index>(dof));
  for (size_t i = 0; i < dof; ++i) {
    double v = 0.0;
    if (!parse_double(trim(tokens[i]), v)) {
      throw Error(ErrorCode::kParse, path + ": bad number '" + tokens[i] + "'");
    }
    biases[static_cast<Eigen::Index>(i)] = v;
  }
  return biases;
}

std::string bias_csv_text(const Eigen::VectorXd& biases) {
  std::string header;
  std::string row;
  for (Eigen::Index k = 0; k < biases.size(); ++k) {
    if (k) {
      header += ',';
      row += ',';
    }
    header += "bias_" + std::to_string(k + 1);
    row += format_double(biases[k]);
  }
  return header + "\n" + row + "\n";
}

void write_manifest(
    const std::string& out_dir, const std::string& command,
    std::vector<std::pair<std::string, std::string>> entries) {
  entries.insert(entries.begin(), {"command", command});
  entries.insert(entries.begin() + 1, {"version", kVersionString});
  write_text_atomic(path_join(out_dir, "manifest.txt"),
                    manifest_text(entries));
}

double rotation_angle_between(const Eigen::Matrix3d& a,
                              const Eigen::Matrix3d& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

PairedSet to_camera_frame(const PairedSet& base, const RigidTransform& t) {
  PairedSet out;
  out.points.reserve(base.points.size());
  out.normals.reserve(base.normals.size());
  for (size_t i = 0; i < base.points.size(); ++i) {
    out.points.push_back(t.apply(base.points[i]));
    out.normals.push_back(t.rotation() * base.normals[i]);
  }
  return out;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateProblem:
    case ErrorCode::kDegenerateNormalEquations:
      return 2;
    default:
      return 1;
  }
}

KinematicChain default_chain() {
  const double half_pi = 1.5707963267948966;
  std::vector<DHRow> rows;
  rows.push_back(DHRow{half_pi, 0.0, 0.22});
  rows.push_back(DHRow{0.0, 0.63, 0.0});
  rows.push_back(DHRow{0.0, 0.56, 0.0});
  rows.push_back(DHRow{half_pi, 0.0, 0.15});
  rows.push_back(DHRow{-half_pi, 0.0, 0.12});
  rows.push_back(DHRow{0.0, 0.08, 0.10});
  return KinematicChain(rows);
}

ExtrinsicParams benchmark_extrinsic() {
  ExtrinsicParams e;
  e.x = 0.83677;
  e.y = 0.25677;
  e.z = 0.68773;
  e.phi = -119.90 * kDegToRad;
  e.theta = 1.22 * kDegToRad;
  e.psi = 15.60 * kDegToRad;
  return e;
}

std::vector<std::string> visible_contact_patches(
    const Scene& scene, const RigidTransform& extrinsic) {
  const Eigen::Vector3d camera = extrinsic.inverse().translation();
  std::vector<std::string> out;
  for (const Patch& p : scene.patches) {
    const Eigen::Vector3d center = p.corner + 0.5 * p.edge_u + 0.5 * p.edge_v;
    if (p.normal().dot(camera - center) > 1e-9) {
      out.push_back(p.label);
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptySelection,
                "camera pose sees no patch front face");
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<std::string>>> resolve_masks(
    const std::string& text, const std::vector<std::string>& all_labels) {
  const std::set<std::string> known(all_labels.begin(), all_labels.end());
  auto check_known = [&](const std::string& label) {
    if (known.count(label) == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mask references unknown patch '" + label + "'");
    }
  };
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  std::set<std::string> names;
  for (const std::string& entry_raw : split(text, ';')) {
    const std::string entry = trim(entry_raw);
    if (entry.empty()) continue;
    const size_t colon = entry.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kParse,
                  "mask entry needs 'name:spec', got '" + entry + "'");
    }
    const std::string name = trim(entry.substr(0, colon));
    const std::string spec = trim(entry.substr(colon + 1));
    if (name.empty() || !names.insert(name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mask names must be unique and non-empty");
    }
    std::vector<std::string> labels;
    if (spec == "*") {
      labels = all_labels;
    } else if (spec.rfind("*-", 0) == 0) {
      std::set<std::string> removed;
      for (const std::string& tok : split(spec.substr(2), ',')) {
        const std::string label = trim(tok);
        if (label.empty()) continue;
        check_known(label);
        removed.insert(label);
      }
      for (const std::string& label : all_labels) {
        if (removed.count(label) == 0) labels.push_back(label);
      }
    } else {
      for (const std::string& tok : split(spec, ',')) {
        const std::string label = trim(tok);
        if (label.empty()) continue;
        check_known(label);
        labels.push_back(label);
      }
    }
    if (labels.empty()) {
      throw Error(ErrorCode::kEmptySelection,
                  "mask '" + name + "' selects no patches");
    }
    out.emplace_back(name, std::move(labels));
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptySelection, "no masks given");
  }
  return out;
}

int cmd_simulate(const SimulateArgs& args) {
  const KeyValueConfig cfg = KeyValueConfig::load(args.config_path);
  const Scene scene = scene_from_config(cfg);
  const ExtrinsicParams true_extrinsic = extrinsic_from_config(
      cfg, "true_extrinsic", false, benchmark_extrinsic());
  const KinematicChain chain =
      chain_from_path(cfg.get_string("chain_file", ""));

  Eigen::VectorXd biases =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(chain.dof()));
  const std::vector<double> bias_deg = cfg.get_double_list("true_biases_deg", {});
  if (bias_deg.size() > chain.dof()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "more bias entries than joints");
  }
  for (size_t k = 0; k < bias_deg.size(); ++k) {
    biases[static_cast<Eigen::Index>(k)] = bias_deg[k] * kDegToRad;
  }

  DatasetConfig dcfg;
  dcfg.depth.extrinsic = extrinsic_to_transform(true_extrinsic);
  dcfg.depth.point_density = cfg.get_double("depth_density", 45000.0);
  dcfg.depth.gaussian_sigma = cfg.get_double("depth_sigma", 0.0);
  dcfg.depth.bow_amplitude = cfg.get_double("depth_bow", 0.0);
  dcfg.depth.seed = derive_seed(args.seed, 1);
  dcfg.contact.selected_patches = cfg.get_string_list("contact_patches", {});
  if (dcfg.contact.selected_patches.empty()) {
    dcfg.contact.selected_patches =
        visible_contact_patches(scene, dcfg.depth.extrinsic);
  }
  dcfg.contact.raster_spacing = cfg.get_double("raster_spacing", 0.03);
  dcfg.contact.clearance = cfg.get_double("contact_clearance", 0.01);
  dcfg.contact.contact_noise_sigma = cfg.get_double("contact_sigma", 0.00025);
  dcfg.contact.force_setpoint = cfg.get_double("force_setpoint", -4.0);
  dcfg.contact.force_min = cfg.get_double("force_min", -3.0);
  dcfg.contact.force_max = cfg.get_double("force_max", -15.0);
  dcfg.contact.force_noise_sigma = cfg.get_double("force_sigma", 1.0);
  dcfg.contact.seed = derive_seed(args.seed, 2);
  const std::string seed_mode = cfg.get_string("ik_seed_mode", "raster");
  if (seed_mode == "raster") {
    dcfg.seed_mode = IkSeedMode::kRaster;
  } else if (seed_mode == "jitter") {
    dcfg.seed_mode = IkSeedMode::kJitter;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "ik_seed_mode must be raster or jitter");
  }
  dcfg.wrist_locked = cfg.get_bool("wrist_locked", false);
  dcfg.seed = derive_seed(args.seed, 3);
  cfg.check_all_consumed();

  const Dataset dataset =
      generate_dataset(scene, chain, biases, dcfg, args.threads);

  const std::string gt_dir = path_join(args.out_dir, "ground_truth");
  std::filesystem::create_directories(gt_dir);
  write_cloud(dataset.depth, path_join(args.out_dir, "depth.ply"));
  write_joint_log(dataset.logs, path_join(args.out_dir, "joints.csv"));
  write_cloud(build_contact_cloud(chain, dataset.logs, args.threads),
              path_join(args.out_dir, "contact_nominal.ply"));
  save_chain_file(chain, path_join(args.out_dir, "chain.txt"));
  write_text_atomic(path_join(gt_dir, "extrinsic.txt"),
                    extrinsic_to_line(true_extrinsic) + "\n");
  write_text_atomic(path_join(gt_dir, "biases.csv"), bias_csv_text(biases));
  save_scene_file(scene, path_join(gt_dir, "scene.txt"));
  PointCloud contacts_true;
  contacts_true.reserve(dataset.contacts.size());
  for (const ContactSample& s : dataset.contacts) {
    contacts_true.add_point(s.point, s.normal);
  }
  write_cloud(contacts_true, path_join(gt_dir, "contacts_true.ply"));

  write_manifest(args.out_dir, "simulate",
                 {{"config", args.config_path},
                  {"out", args.out_dir},
                  {"seed", std::to_string(args.seed)},
                  {"threads", std::to_string(args.threads)},
                  {"depth_points", std::to_string(dataset.depth.size())},
                  {"contacts", std::to_string(dataset.logs.size())},
                  {"skipped_ik", std::to_string(dataset.skipped_ik)}});
  return 0;
}

int cmd_calibrate(const CalibrateArgs& args) {
  const KeyValueConfig cfg = KeyValueConfig::load(args.config_path);
  const KinematicChain chain = chain_from_path(args.chain_path);
  const std::vector<ContactRecord> logs = read_joint_log(args.joints_path);
  const IcpConfig icp = icp_from_config(cfg);
  const PointCloud depth =
      with_normals(read_cloud(args.depth_path), cfg, icp.normal_k);
  const ExtrinsicParams initial =
      extrinsic_from_config(cfg, "initial_extrinsic", true, {});

  CalibrationProblem problem(chain, logs, depth, initial);
  problem.solve_biases = cfg.get_bool("solve_biases", true);
  problem.config.icp = icp;
  problem.config.pin_joint1_bias = cfg.get_bool("pin_joint1_bias", false);
  problem.config.icp_restarts = cfg.get_bool("icp_restarts", true);
  problem.config.initial_damping =
      cfg.get_double("lm_initial_damping", problem.config.initial_damping);
  problem.config.max_iterations = static_cast<int>(
      cfg.get_int("lm_max_iterations", problem.config.max_iterations));
  problem.config.parameter_tolerance = cfg.get_double(
      "lm_parameter_tolerance", problem.config.parameter_tolerance);
  problem.config.cost_tolerance =
      cfg.get_double("lm_cost_tolerance", problem.config.cost_tolerance);
  problem.config.max_rejected_steps = static_cast<int>(
      cfg.get_int("lm_max_rejected_steps", problem.config.max_rejected_steps));
  problem.config.repair_every = static_cast<int>(
      cfg.get_int("lm_repair_every", problem.config.repair_every));
  problem.config.condition_threshold = cfg.get_double(
      "condition_threshold", problem.config.condition_threshold);
  problem.config.min_eigenvalue_ratio = cfg.get_double(
      "min_eigenvalue_ratio", problem.config.min_eigenvalue_ratio);
  problem.config.validate();
  cfg.check_all_consumed();

  std::filesystem::create_directories(args.out_dir);

  const PointCloud contact = build_contact_cloud(chain, logs, args.threads);
  const RigidTransform t_initial = extrinsic_to_transform(initial);
  const IcpResult rigid =
      problem.config.icp_restarts
          ? register_clouds_robust(contact, depth, t_initial, icp,
                                   args.threads)
          : register_clouds(contact, depth, t_initial, icp, args.threads);
  {
    const NeighborIndex index(depth);
    const std::vector<Correspondence> corr = find_correspondences(
        contact, depth, index, rigid.transform, icp, args.threads);
    const PairedSet pairs =
        active_pairs(corr, rigid.transform, contact, depth);
    const StabilityReport centered = analyze(hessian_from_pairs(pairs, true));
    const StabilityReport raw = analyze(hessian_from_pairs(pairs, false));
    write_text_atomic(path_join(args.out_dir, "rigid_report.txt"),
                      rigid_report_text(rigid, centered, raw));
  }
  try {
    write_text_atomic(
        path_join(args.out_dir, "rigid_extrinsic.txt"),
        extrinsic_to_line(transform_to_extrinsic(rigid.transform)) + "\n");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kGimbalLock) throw;
  }

  int code = 0;
  std::vector<std::pair<std::string, std::string>> manifest{
      {"depth", args.depth_path},
      {"joints", args.joints_path},
      {"chain", args.chain_path.empty() ? "<builtin>" : args.chain_path},
      {"config", args.config_path},
      {"out", args.out_dir},
      {"seed", std::to_string(args.seed)},
      {"threads", std::to_string(args.threads)},
      {"rigid_iterations", std::to_string(rigid.iterations)},
      {"rigid_cost", format_double(rigid.final_cost)},
      {"rigid_converged", rigid.converged ? "yes" : "no"}};

  if (!problem.solve_biases) {
    if (!rigid.diagnostic.empty()) {
      code = 2;
    } else if (!rigid.converged) {
      code = 1;
    }
  } else {
    const CalibrationResult result = calibrate(problem, args.threads);
    write_text_atomic(path_join(args.out_dir, "calibration_report.txt"),
                      calibration_report_text(result));
    write_text_atomic(path_join(args.out_dir, "calibrated_extrinsic.txt"),
                      extrinsic_to_line(result.extrinsic) + "\n");
    write_text_atomic(path_join(args.out_dir, "cost_history.csv"),
                      cost_history_csv(result.history));
    manifest.emplace_back("calibration_iterations",
                          std::to_string(result.iterations));
    manifest.emplace_back("calibration_cost", format_double(result.final_cost));
    manifest.emplace_back("verdict", result.degeneracy.verdict);
    if (result.degeneracy.degenerate) {
      code = 2;
    } else if (!result.converged) {
      code = 1;
    }
  }
  write_manifest(args.out_dir, "calibrate", std::move(manifest));
  return code;
}

int cmd_stability(const StabilityArgs& args) {
  std::filesystem::create_directories(args.out_dir);
  std::vector<SamplingRow> rows;
  std::vector<std::pair<std::string, std::string>> manifest{
      {"out", args.out_dir},
      {"seed", std::to_string(args.seed)},
      {"threads", std::to_string(args.threads)}};

  if (args.self_test) {
    const StabilityReport unit = analyze(Matrix6d::Identity());
    SamplingRow row;
    row.label = "self_test";
    row.rank = unit.numeric_rank;
    row.eigenvalues = unit.eigenvalues;
    row.condition_number = unit.condition_number;
    rows.push_back(row);
    manifest.emplace_back("mode", "self_test");
  } else {
    const KeyValueConfig cfg = KeyValueConfig::load(args.config_path);
    manifest.emplace_back("config", args.config_path);
    const std::string mode = cfg.get_string("mode", "scene");
    manifest.emplace_back("mode", mode);
    if (mode == "scene") {
      const Scene scene = scene_from_config(cfg);
      ExtrinsicParams extrinsic;
      if (!args.extrinsic_path.empty()) {
        extrinsic = read_extrinsic_file(args.extrinsic_path);
      } else {
        extrinsic = extrinsic_from_config(cfg, "extrinsic", false, {});
      }
      const RigidTransform t = extrinsic_to_transform(extrinsic);
      const auto masks =
          resolve_masks(cfg.get_string("masks", "full:*"), scene.labels());
      const double density = cfg.get_double("sample_density", 4000.0);
      cfg.check_all_consumed();
      std::vector<std::pair<std::string, PairedSet>> sets;
      for (const auto& [name, labels] : masks) {
        sets.emplace_back(
            name, to_camera_frame(sample_scene_surface(
                                      scene, labels, density,
                                      derive_seed(args.seed, 7)),
                                  t));
      }
      rows = compare_sampling(sets);
    } else if (mode == "dataset") {
      if (args.depth_path.empty() || args.joints_path.empty() ||
          args.extrinsic_path.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "dataset mode needs --depth, --joints and --extrinsic");
      }
      const KinematicChain chain = chain_from_path(args.chain_path);
      const std::vector<ContactRecord> logs =
          read_joint_log(args.joints_path);
      const IcpConfig icp = icp_from_config(cfg);
      const PointCloud depth =
          with_normals(read_cloud(args.depth_path), cfg, icp.normal_k);
      const RigidTransform t =
          extrinsic_to_transform(read_extrinsic_file(args.extrinsic_path));
      cfg.check_all_consumed();
      const PointCloud contact =
          build_contact_cloud(chain, logs, args.threads);
      const NeighborIndex index(depth);
      const std::vector<Correspondence> corr =
          find_correspondences(contact, depth, index, t, icp, args.threads);
      rows = compare_sampling(
          {{"dataset", active_pairs(corr, t, contact, depth)}});
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "mode must be scene or dataset, got '" + mode + "'");
    }
  }
  write_text_atomic(path_join(args.out_dir, "stability.csv"),
                    stability_csv(rows));
  write_manifest(args.out_dir, "stability", std::move(manifest));
  return 0;
}

int cmd_downsample_study(const StudyArgs& args) {
  const KeyValueConfig cfg = KeyValueConfig::load(args.config_path);
  KinematicChain chain = chain_from_path(args.chain_path);
  const std::vector<ContactRecord> logs = read_joint_log(args.joints_path);
  const IcpConfig icp = icp_from_config(cfg);
  const PointCloud depth =
      with_normals(read_cloud(args.depth_path), cfg, icp.normal_k);
  const ExtrinsicParams initial =
      extrinsic_from_config(cfg, "initial_extrinsic", true, {});

  const ExtrinsicParams truth = read_extrinsic_file(
      path_join(args.ground_truth_dir, "extrinsic.txt"));
  const std::string bias_path =
      path_join(args.ground_truth_dir, "biases.csv");
  if (std::filesystem::exists(bias_path)) {
    chain = chain.with_biases(read_bias_csv(bias_path, chain.dof()));
  }
  const RigidTransform t_truth = extrinsic_to_transform(truth);
  const RigidTransform t_initial = extrinsic_to_transform(initial);

  const std::vector<double> counts_raw = cfg.get_double_list("counts", {});
  if (counts_raw.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "key 'counts' must list at least one point count");
  }
  const auto trials =
      static_cast<size_t>(std::max<int64_t>(1, cfg.get_int("trials", 20)));
  cfg.check_all_consumed();

  const PointCloud contact = build_contact_cloud(chain, logs, args.threads);
  std::vector<StudyRow> rows;
  for (double raw : counts_raw) {
    if (raw < 0.0 || raw != std::floor(raw)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "counts must be non-negative integers");
    }
    const size_t count =
        raw == 0.0 ? contact.size() : static_cast<size_t>(raw);
    if (count > contact.size()) {
      throw Error(ErrorCode::kTargetTooLarge,
                  "count " + std::to_string(count) + " exceeds the " +
                      std::to_string(contact.size()) + "-point contact map");
    }
    const size_t effective_trials = count == contact.size() ? 1 : trials;
    StudyRow row;
    row.count = count;
    row.trials = effective_trials;
    for (size_t trial = 0; trial < effective_trials; ++trial) {
      const PointCloud subset = random_downsample(
          contact, count,
          derive_seed(args.seed, 0x200000000ull +
                                     static_cast<uint64_t>(count) * 4099 +
                                     trial));
      const IcpResult fit =
          register_clouds(subset, depth, t_initial, icp, args.threads);
      const double terr =
          (fit.transform.translation() - t_truth.translation()).norm();
      const double rerr = rotation_angle_between(fit.transform.rotation(),
                                                 t_truth.rotation()) *
                          kRadToDeg;
      row.mean_translation_error += terr;
      row.max_translation_error = std::max(row.max_translation_error, terr);
      row.mean_rotation_error_deg += rerr;
      row.max_rotation_error_deg = std::max(row.max_rotation_error_deg, rerr);
      row.mean_cost += fit.correspondences_used > 0
                           ? fit.final_cost /
                                 static_cast<double>(fit.correspondences_used)
                           : fit.final_cost;
    }
    const double n = static_cast<double>(effective_trials);
    row.mean_translation_error /= n;
    row.mean_rotation_error_deg /= n;
    row.mean_cost /= n;
    rows.push_back(row);
  }

  std::filesystem::create_directories(args.out_dir);
  write_text_atomic(path_join(args.out_dir, "study.csv"), study_csv(rows));
  write_manifest(args.out_dir, "downsample-study",
                 {{"depth", args.depth_path},
                  {"joints", args.joints_path},
                  {"chain", args.chain_path.empty() ? "<builtin>" : args.chain_path},
                  {"config", args.config_path},
                  {"ground_truth", args.ground_truth_dir},
                  {"out", args.out_dir},
                  {"seed", std::to_string(args.seed)},
                  {"threads", std::to_string(args.threads)},
                  {"contact_points", std::to_string(contact.size())}});
  return 0;
}

}  // namespace ccal
