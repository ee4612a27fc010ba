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

#include "core/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/pointcloud.hpp"

namespace ccal {

namespace {

std::string parameter_name(size_t i) {
  static const char* kExtrinsic[6] = {"x_e",   "y_e",   "z_e",
                                      "phi_e", "theta_e", "psi_e"};
  if (i < 6) return kExtrinsic[i];
  return "dtheta_" + std::to_string(i - 5);
}

std::string mixture_label(const Eigen::VectorXd& v) {
  const double total = v.squaredNorm();
  if (total <= 0.0) return "undetermined";
  std::vector<size_t> dominant;
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] * v[i] / total >= 0.15) dominant.push_back(static_cast<size_t>(i));
  }
  if (dominant.empty()) {
    int argmax = 0;
    v.cwiseAbs().maxCoeff(&argmax);
    dominant.push_back(static_cast<size_t>(argmax));
  }
  bool extrinsic = false;
  bool bias = false;
  std::string label;
  for (size_t i : dominant) {
    if (!label.empty()) label += " / ";
    label += parameter_name(i);
    (i < 6 ? extrinsic : bias) = true;
  }
  if (extrinsic && bias) label += " trade-off";
  return label;
}

// Basis of the hyperplane orthogonal to v, as matrix columns.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - 1);
}

// The exposed jacobian rows model the rigid step with the opposite sign
// of the bias step (see the header); negating the first six columns gives
// rows D with the uniform model r' = r + D s, s = [pose increment; bias
// increment], which is what the solver differentiates.
Eigen::VectorXd uniform_row(const AugmentedPair& pair) {
  Eigen::VectorXd row = pair.jacobian;
  row.head<6>() = -row.head<6>();
  return row;
}

struct Assembly {
  Eigen::MatrixXd hessian;  // uniform convention
  Eigen::VectorXd gradient;
  double cost{0.0};
  size_t pair_count{0};
};

Assembly assemble(const std::vector<AugmentedPair>& pairs, size_t width) {
  Assembly out;
  out.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width),
                                      static_cast<Eigen::Index>(width));
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
  for (const AugmentedPair& pair : pairs) {
    const Eigen::VectorXd row = uniform_row(pair);
    out.hessian.noalias() += row * row.transpose();
    out.gradient.noalias() += row * pair.residual;
    out.cost += pair.residual * pair.residual;
    ++out.pair_count;
  }
  return out;
}

Eigen::MatrixXd spec_hessian(const std::vector<AugmentedPair>& pairs,
                             size_t width) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width),
                                            static_cast<Eigen::Index>(width));
  for (const AugmentedPair& pair : pairs) {
    h.noalias() += pair.jacobian * pair.jacobian.transpose();
  }
  return h;
}

double fixed_pair_cost(const KinematicChain& chain,
                       const std::vector<ContactRecord>& logs,
                       const PointCloud& depth,
                       const std::vector<Correspondence>& correspondences,
                       const RigidTransform& t,
                       const Eigen::VectorXd& biases) {
  const KinematicChain biased = chain.with_biases(biases);
  double cost = 0.0;
  for (const Correspondence& c : correspondences) {
    if (c.weight <= 0.0) continue;
    const Eigen::Vector3d a = contact_point(biased, logs[c.source_index].joints);
    const double r = point_to_plane_residual(t, a, depth.points[c.target_index],
                                             c.normal);
    cost += c.weight * r * r;
  }
  return cost;
}

struct GateResult {
  DegeneracyDiagnostic diagnostic;
  Eigen::VectorXd eigenvalues;  // of the gated (reduced) system, ascending
};

// Spectrum-based identifiability check. `reduce` maps the full parameter
// space to the subspace actually judged: the rigid block for pose-only
// solves, everything but the pinned bias, or the orthogonal complement of
// the gauge direction. Near-null directions are reported in full
// coordinates.
GateResult run_gate(const Eigen::MatrixXd& h_full,
                    const Eigen::MatrixXd& reduce,
                    const CalibrationConfig& cfg) {
  const Eigen::MatrixXd h_gate =
      reduce.transpose() * h_full * reduce;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h_gate);
  GateResult out;
  out.eigenvalues = eig.eigenvalues();
  const Eigen::Index n = h_gate.rows();
  const double lambda_max = std::max(eig.eigenvalues()[n - 1], 0.0);
  const double lambda_min = eig.eigenvalues()[0];
  DegeneracyDiagnostic& d = out.diagnostic;
  d.max_eigenvalue = lambda_max;
  d.min_eigenvalue = lambda_min;
  d.condition_number = lambda_min > 0.0
                           ? lambda_max / lambda_min
                           : std::numeric_limits<double>::infinity();
  d.determinant = h_full.determinant();
  const double floor_value =
      std::max(lambda_max * cfg.min_eigenvalue_ratio,
               lambda_max / cfg.condition_threshold);
  d.degenerate = !(lambda_min > floor_value);
  if (d.degenerate) {
    std::string labels;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (eig.eigenvalues()[i] > floor_value) continue;
      const Eigen::VectorXd direction = reduce * eig.eigenvectors().col(i);
      const std::string label = mixture_label(direction);
      d.near_null.emplace_back(direction, label);
      if (!labels.empty()) labels += "; ";
      labels += label;
    }
    d.verdict = "DEGENERATE: " + labels;
  } else {
    d.verdict = "IDENTIFIABLE";
  }
  return out;
}

}  // namespace

void CalibrationConfig::validate() const {
  icp.validate();
  if (!(initial_damping > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "initial_damping must be > 0");
  }
  if (!(damping_decrease > 0.0 && damping_decrease < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "damping_decrease must be in (0,1)");
  }
  if (!(damping_increase > 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "damping_increase must be > 1");
  }
  if (max_iterations < 1 || max_rejected_steps < 1 || repair_every < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "iteration controls must be >= 1");
  }
  if (!(parameter_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "parameter_tolerance must be > 0");
  }
  if (!(cost_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cost_tolerance must be non-negative");
  }
  if (!(condition_threshold > 1.0) || !(min_eigenvalue_ratio > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad identifiability gate");
  }
}

std::vector<AugmentedPair> augmented_residual_jacobian(
    const KinematicChain& chain, const std::vector<ContactRecord>& logs,
    const PointCloud& depth,
    const std::vector<Correspondence>& correspondences,
    const RigidTransform& t, const Eigen::VectorXd& biases) {
  const KinematicChain biased = chain.with_biases(biases);
  const Eigen::Index width = 6 + static_cast<Eigen::Index>(chain.dof());
  std::vector<AugmentedPair> pairs;
  pairs.reserve(correspondences.size());
  for (const Correspondence& c : correspondences) {
    if (c.weight <= 0.0) continue;
    const Eigen::VectorXd& joints = logs[c.source_index].joints;
    const Eigen::Vector3d a = contact_point(biased, joints);
    AugmentedPair pair;
    pair.source_index = c.source_index;
    pair.target_index = c.target_index;
    pair.residual = point_to_plane_residual(
        t, a, depth.points[c.target_index], c.normal);
    pair.jacobian.resize(width);
    pair.jacobian.head<6>() = residual_jacobian(t, a, c.normal);
    const Eigen::Matrix3Xd bias_cols = bias_jacobian(biased, joints);
    pair.jacobian.tail(chain.dof()) =
        (c.normal.transpose() * t.rotation() * bias_cols).transpose();
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

Eigen::VectorXd gauge_direction(const RigidTransform& t, size_t dof) {
  const Eigen::Vector3d u = t.rotation().col(2);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(6 + static_cast<Eigen::Index>(dof));
  v.segment<3>(0) = -(u.cross(t.translation()));
  v.segment<3>(3) = u;
  v[6] = 1.0;
  return v / v.norm();
}

CalibrationResult calibrate(const CalibrationProblem& problem, int threads) {
  problem.config.validate();
  if (problem.joint_logs.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "calibration needs joint logs");
  }
  const CalibrationConfig& cfg = problem.config;
  const size_t dof = problem.chain.dof();
  const Eigen::Index width = 6 + static_cast<Eigen::Index>(dof);

  PointCloud depth = problem.depth;
  if (!depth.has_normals()) {
    if (cfg.icp.normal_k < 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "depth cloud has no normals and normal_k < 3");
    }
    depth = estimate_normals(depth, static_cast<size_t>(cfg.icp.normal_k),
                             Eigen::Vector3d::Zero());
  }
  const NeighborIndex index(depth);

  // The rigid alignment seeds the pose before any bias is touched.
  Eigen::VectorXd biases = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof));
  const PointCloud nominal_cloud =
      build_contact_cloud(problem.chain, problem.joint_logs, threads);
  const IcpResult rigid =
      cfg.icp_restarts
          ? register_clouds_robust(
                nominal_cloud, depth,
                extrinsic_to_transform(problem.initial_extrinsic), cfg.icp,
                threads)
          : register_clouds(nominal_cloud, depth,
                            extrinsic_to_transform(problem.initial_extrinsic),
                            cfg.icp, threads);
  if (!rigid.diagnostic.empty()) {
    throw Error(ErrorCode::kDegenerateProblem,
                "rigid alignment underconstrained: " + rigid.diagnostic);
  }
  RigidTransform t = rigid.transform;

  // Free parameter set: pose always, biases unless pose-only or pinned.
  std::vector<Eigen::Index> free_idx{0, 1, 2, 3, 4, 5};
  if (problem.solve_biases) {
    for (size_t k = cfg.pin_joint1_bias ? 1 : 0; k < dof; ++k) {
      free_idx.push_back(6 + static_cast<Eigen::Index>(k));
    }
  }
  const Eigen::Index n_free = static_cast<Eigen::Index>(free_idx.size());

  CalibrationResult result;
  result.joint_biases = biases;

  auto pair_up = [&](const Eigen::VectorXd& b) {
    const PointCloud cloud = build_contact_cloud(
        problem.chain.with_biases(b), problem.joint_logs, threads);
    return find_correspondences(cloud, depth, index, t, cfg.icp, threads);
  };

  std::vector<Correspondence> corr = pair_up(biases);
  std::vector<AugmentedPair> pairs = augmented_residual_jacobian(
      problem.chain, problem.joint_logs, depth, corr, t, biases);
  Assembly assembly = assemble(pairs, static_cast<size_t>(width));
  result.history.push_back(assembly.cost);

  double damping = cfg.initial_damping;
  int rejected_streak = 0;
  int since_repair = 0;
  while (result.iterations < cfg.max_iterations) {
    Eigen::MatrixXd h_red(n_free, n_free);
    Eigen::VectorXd g_red(n_free);
    for (Eigen::Index i = 0; i < n_free; ++i) {
      g_red[i] = assembly.gradient[free_idx[static_cast<size_t>(i)]];
      for (Eigen::Index j = 0; j < n_free; ++j) {
        h_red(i, j) = assembly.hessian(free_idx[static_cast<size_t>(i)],
                                       free_idx[static_cast<size_t>(j)]);
      }
    }
    const double diag_floor = 1e-12 * std::max(h_red.diagonal().maxCoeff(), 0.0);
    Eigen::MatrixXd damped = h_red;
    for (Eigen::Index i = 0; i < n_free; ++i) {
      damped(i, i) += damping * std::max(h_red(i, i), diag_floor);
    }
    const Eigen::VectorXd step_red = damped.ldlt().solve(-g_red);
    if (!step_red.allFinite()) {
      throw Error(ErrorCode::kDegenerateNormalEquations,
                  "damped normal equations produced a non-finite step");
    }
    Eigen::VectorXd step = Eigen::VectorXd::Zero(width);
    for (Eigen::Index i = 0; i < n_free; ++i) {
      step[free_idx[static_cast<size_t>(i)]] = step_red[i];
    }
    TwistIncrement d;
    d.delta_translation = step.segment<3>(0);
    d.delta_rotation = step.segment<3>(3);
    const RigidTransform t_new = apply_increment(t, d).reorthonormalized();
    const Eigen::VectorXd biases_new =
        biases + step.tail(static_cast<Eigen::Index>(dof));
    const double cost_new = fixed_pair_cost(
        problem.chain, problem.joint_logs, depth, corr, t_new, biases_new);
    if (cost_new < assembly.cost) {
      t = t_new;
      biases = biases_new;
      damping = std::max(damping * cfg.damping_decrease, 1e-12);
      rejected_streak = 0;
      ++result.iterations;
      ++since_repair;
      result.history.push_back(cost_new);
      const bool small_step = step_red.norm() < cfg.parameter_tolerance;
      const bool flat = assembly.cost - cost_new <=
                        cfg.cost_tolerance * std::max(assembly.cost, 1e-300);
      if (since_repair >= cfg.repair_every) {
        corr = pair_up(biases);
        since_repair = 0;
      }
      pairs = augmented_residual_jacobian(problem.chain, problem.joint_logs,
                                          depth, corr, t, biases);
      assembly = assemble(pairs, static_cast<size_t>(width));
      if (small_step || flat) {
        result.converged = true;
        break;
      }
    } else {
      damping = std::min(damping * cfg.damping_increase, 1e12);
      ++rejected_streak;
      if (rejected_streak >= cfg.max_rejected_steps) {
        if (step_red.norm() < cfg.parameter_tolerance) {
          result.converged = true;
          break;
        }
        throw Error(ErrorCode::kNonDecreasingCost,
                    "cost failed to decrease over " +
                        std::to_string(rejected_streak) +
                        " consecutive proposals");
      }
    }
  }

  // Final state, spectrum, and verdict.
  corr = pair_up(biases);
  pairs = augmented_residual_jacobian(problem.chain, problem.joint_logs,
                                      depth, corr, t, biases);
  assembly = assemble(pairs, static_cast<size_t>(width));
  result.extrinsic = transform_to_extrinsic(t);
  result.joint_biases = biases;
  result.final_cost = assembly.cost;
  result.correspondences_used = assembly.pair_count;
  result.augmented_hessian = spec_hessian(pairs, static_cast<size_t>(width));

  Eigen::MatrixXd reduce;
  if (!problem.solve_biases) {
    reduce = Eigen::MatrixXd::Zero(width, 6);
    reduce.topLeftCorner(6, 6).setIdentity();
  } else if (cfg.pin_joint1_bias) {
    reduce = Eigen::MatrixXd::Zero(width, width - 1);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < width; ++i) {
      if (i == 6) continue;
      reduce(i, col++) = 1.0;
    }
  } else {
    reduce = complement_basis(gauge_direction(t, dof));
  }
  GateResult gate = run_gate(result.augmented_hessian, reduce, cfg);
  result.degeneracy = gate.diagnostic;
  if (problem.solve_biases) {
    result.degeneracy.gauge_direction = gauge_direction(t, dof);
  }

  if (result.degeneracy.degenerate && problem.solve_biases) {
    CalibrationProblem rigid_problem = problem;
    rigid_problem.solve_biases = false;
    CalibrationResult downgraded = calibrate(rigid_problem, threads);
    downgraded.augmented_hessian = result.augmented_hessian;
    downgraded.degeneracy = result.degeneracy;
    downgraded.downgraded_to_rigid = true;
    return downgraded;
  }
  return result;
}

IdentifiabilityReport identifiability_report(
    const KinematicChain& chain, const std::vector<ContactRecord>& logs,
    const PointCloud& depth, const RigidTransform& t,
    const Eigen::VectorXd& biases, const IcpConfig& icp,
    double rank_tolerance, int threads) {
  if (logs.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "identifiability needs joint logs");
  }
  PointCloud target = depth;
  if (!target.has_normals()) {
    if (icp.normal_k < 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "depth cloud has no normals and normal_k < 3");
    }
    target = estimate_normals(target, static_cast<size_t>(icp.normal_k),
                              Eigen::Vector3d::Zero());
  }
  const NeighborIndex index(target);
  const PointCloud cloud =
      build_contact_cloud(chain.with_biases(biases), logs, threads);
  const std::vector<Correspondence> corr =
      find_correspondences(cloud, target, index, t, icp, threads);
  const std::vector<AugmentedPair> pairs =
      augmented_residual_jacobian(chain, logs, target, corr, t, biases);
  const Eigen::Index width = 6 + static_cast<Eigen::Index>(chain.dof());
  IdentifiabilityReport report;
  report.hessian = spec_hessian(pairs, static_cast<size_t>(width));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(report.hessian);
  const double lambda_max = std::max(eig.eigenvalues()[width - 1], 0.0);
  const double lambda_min = eig.eigenvalues()[0];
  report.condition_number = lambda_min > 0.0
                                ? lambda_max / lambda_min
                                : std::numeric_limits<double>::infinity();
  const double tol = rank_tolerance * lambda_max;
  report.numeric_rank = 0;
  for (Eigen::Index i = width - 1; i >= 0; --i) {
    IdentifiabilityRow row;
    row.eigenvalue = eig.eigenvalues()[i];
    row.direction = eig.eigenvectors().col(i);
    if (row.eigenvalue > tol) {
      ++report.numeric_rank;
    } else {
      row.label = mixture_label(row.direction);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace ccal
