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

#include "core/registration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/pointcloud.hpp"
#include "core/runtime.hpp"

namespace ccal {

void IcpConfig::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  }
  if (!(translation_tolerance > 0.0) || !(rotation_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerances must be positive");
  }
  if (!(max_correspondence_distance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_correspondence_distance must be positive");
  }
  if (!(trim_ratio >= 0.0) || trim_ratio >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "trim_ratio must be in [0,1)");
  }
}

DegenerateNormalEquations::DegenerateNormalEquations(
    int rank, Eigen::Matrix<double, 6, -1> null_space, const std::string& what)
    : Error(ErrorCode::kDegenerateNormalEquations, what),
      rank_(rank),
      null_space_(std::move(null_space)) {}

double point_to_plane_residual(const RigidTransform& t,
                               const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b,
                               const Eigen::Vector3d& n) {
  return n.dot(t.apply(a) - b);
}

Vector6d residual_jacobian(const RigidTransform& t, const Eigen::Vector3d& a,
                           const Eigen::Vector3d& n) {
  const Eigen::Vector3d p = t.apply(a);
  Vector6d jac;
  jac.head<3>() = -n;
  jac.tail<3>() = -p.cross(n);
  return jac;
}

std::vector<Correspondence> find_correspondences(const PointCloud& contact,
                                                 const PointCloud& depth,
                                                 const NeighborIndex& index,
                                                 const RigidTransform& t,
                                                 const IcpConfig& cfg,
                                                 int threads) {
  if (contact.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "contact cloud is empty");
  }
  if (!depth.has_normals()) {
    throw Error(ErrorCode::kInvalidArgument, "depth cloud has no normals");
  }
  struct Candidate {
    size_t target{0};
    double distance{0.0};
    bool kept{false};
  };
  std::vector<Candidate> candidates(contact.size());
  parallel_for(contact.size(), threads, [&](size_t i) {
    const NeighborIndex::Hit hit = index.nearest(t.apply(contact.points[i]));
    Candidate& c = candidates[i];
    c.target = hit.index;
    c.distance = hit.distance;
    c.kept = hit.distance <= cfg.max_correspondence_distance &&
             depth.weights[hit.index] > 0.0;
  });
  std::vector<size_t> kept;
  kept.reserve(contact.size());
  for (size_t i = 0; i < contact.size(); ++i) {
    if (candidates[i].kept) kept.push_back(i);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kNoCorrespondences,
                "no contact point pairs within " +
                    std::to_string(cfg.max_correspondence_distance) + " m");
  }
  // Trim the largest-distance fraction; ties resolve toward the lower
  // source index so the same inputs always trim the same pairs.
  const size_t trim_count = static_cast<size_t>(
      std::floor(cfg.trim_ratio * static_cast<double>(kept.size())));
  std::vector<size_t> by_distance = kept;
  std::sort(by_distance.begin(), by_distance.end(),
            [&](size_t a, size_t b) {
              const double da = candidates[a].distance;
              const double db = candidates[b].distance;
              return da > db || (da == db && a < b);
            });
  std::vector<char> trimmed(contact.size(), 0);
  for (size_t i = 0; i < trim_count; ++i) trimmed[by_distance[i]] = 1;
  std::vector<Correspondence> out;
  out.reserve(kept.size());
  for (size_t i : kept) {
    Correspondence corr;
    corr.source_index = i;
    corr.target_index = candidates[i].target;
    corr.normal = depth.normals[candidates[i].target];
    corr.weight = trimmed[i] ? 0.0 : 1.0;
    out.push_back(corr);
  }
  return out;
}

IcpStep solve_icp_step(const std::vector<Correspondence>& correspondences,
                       const RigidTransform& t, const PointCloud& contact,
                       const PointCloud& depth) {
  size_t active = 0;
  for (const Correspondence& c : correspondences) {
    if (c.weight > 0.0) ++active;
  }
  if (active < 6) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need at least 6 weighted pairs, have " +
                    std::to_string(active));
  }
  IcpStep step;
  Vector6d gradient = Vector6d::Zero();
  for (const Correspondence& c : correspondences) {
    if (c.weight <= 0.0) continue;
    const Eigen::Vector3d& a = contact.points[c.source_index];
    const Eigen::Vector3d& b = depth.points[c.target_index];
    const double r = point_to_plane_residual(t, a, b, c.normal);
    const Vector6d jac = residual_jacobian(t, a, c.normal);
    step.hessian.noalias() += c.weight * jac * jac.transpose();
    gradient.noalias() += c.weight * jac * r;
    step.cost += c.weight * r * r;
  }
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(step.hessian);
  const Vector6d evals = eig.eigenvalues();
  const double lambda_max = evals[5];
  const double tol = 1e-10 * std::max(lambda_max, 0.0);
  int rank = 0;
  Vector6d solution = Vector6d::Zero();
  const Vector6d projected = eig.eigenvectors().transpose() * gradient;
  for (int i = 0; i < 6; ++i) {
    if (evals[i] > tol && evals[i] > 0.0) {
      solution += (projected[i] / evals[i]) * eig.eigenvectors().col(i);
      ++rank;
    }
  }
  step.rank = rank;
  if (rank < 6) {
    step.null_directions.resize(6, 6 - rank);
    int col = 0;
    for (int i = 0; i < 6; ++i) {
      if (!(evals[i] > tol && evals[i] > 0.0)) {
        step.null_directions.col(col++) = eig.eigenvectors().col(i);
      }
    }
  }
  step.increment.delta_translation = solution.head<3>();
  step.increment.delta_rotation = solution.tail<3>();
  return step;
}

TwistIncrement icp_step(const std::vector<Correspondence>& correspondences,
                        const RigidTransform& t, const PointCloud& contact,
                        const PointCloud& depth) {
  IcpStep step = solve_icp_step(correspondences, t, contact, depth);
  if (step.rank < 6) {
    throw DegenerateNormalEquations(
        step.rank, step.null_directions,
        "normal equations are rank " + std::to_string(step.rank) +
            " of 6; " + std::to_string(6 - step.rank) +
            " unconstrained direction(s)");
  }
  return step.increment;
}

IcpResult register_clouds(const PointCloud& contact, const PointCloud& depth,
                          const RigidTransform& initial, const IcpConfig& cfg,
                          int threads) {
  cfg.validate();
  if (contact.empty() || depth.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "registration needs two clouds");
  }
  PointCloud target = depth;
  if (!target.has_normals()) {
    if (cfg.normal_k < 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "depth cloud has no normals and normal_k < 3");
    }
    target = estimate_normals(target, static_cast<size_t>(cfg.normal_k),
                              Eigen::Vector3d::Zero());
  }
  const NeighborIndex index(target);
  IcpResult result;
  result.transform = initial;
  int last_rank = 6;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    const std::vector<Correspondence> corr = find_correspondences(
        contact, target, index, result.transform, cfg, threads);
    const IcpStep step =
        solve_icp_step(corr, result.transform, contact, target);
    result.iterations = iter;
    last_rank = step.rank;
    // A transiently rank-deficient iterate, e.g. every pair collapsed onto
    // one plane under a bad initial guess, still yields a useful
    // minimum-norm step; re-pairing afterwards can restore the missing
    // directions. Only a deficiency that persists at the stop matters.
    result.transform =
        apply_increment(result.transform, step.increment).reorthonormalized();
    if (step.increment.translation_norm() < cfg.translation_tolerance &&
        step.increment.rotation_norm() < cfg.rotation_tolerance) {
      result.converged = step.rank == 6;
      break;
    }
  }
  if (last_rank < 6) {
    result.converged = false;
    result.diagnostic = "normal equations rank " + std::to_string(last_rank) +
                        " of 6 at iteration " +
                        std::to_string(result.iterations);
  }
  const std::vector<Correspondence> final_corr = find_correspondences(
      contact, target, index, result.transform, cfg, threads);
  Matrix6d hessian = Matrix6d::Zero();
  double cost = 0.0;
  size_t used = 0;
  for (const Correspondence& c : final_corr) {
    if (c.weight <= 0.0) continue;
    const Eigen::Vector3d& a = contact.points[c.source_index];
    const Eigen::Vector3d& b = target.points[c.target_index];
    const double res = point_to_plane_residual(result.transform, a, b, c.normal);
    const Vector6d jac = residual_jacobian(result.transform, a, c.normal);
    hessian.noalias() += jac * jac.transpose();
    cost += res * res;
    ++used;
  }
  result.hessian = hessian;
  result.final_cost = cost;
  result.correspondences_used = used;
  return result;
}

IcpResult register_clouds_robust(const PointCloud& contact,
                                 const PointCloud& depth,
                                 const RigidTransform& initial,
                                 const IcpConfig& cfg, int threads) {
  constexpr double kOffset = 12.0 * std::numbers::pi / 180.0;
  constexpr double kExactFitMse = 1e-10;  // m^2, below any sensor noise
  const std::array<std::pair<double, double>, 9> grid{{{0.0, 0.0},
                                                       {0.0, -kOffset},
                                                       {0.0, kOffset},
                                                       {-kOffset, 0.0},
                                                       {kOffset, 0.0},
                                                       {-kOffset, -kOffset},
                                                       {-kOffset, kOffset},
                                                       {kOffset, -kOffset},
                                                       {kOffset, kOffset}}};
  IcpResult best;
  double best_mse = std::numeric_limits<double>::infinity();
  bool have_result = false;
  for (const auto& [droll, dyaw] : grid) {
    const RigidTransform start{
        rotation_z(dyaw) * initial.rotation() * rotation_x(droll),
        initial.translation()};
    IcpResult res = register_clouds(contact, depth, start, cfg, threads);
    const double mse =
        res.final_cost / std::max<size_t>(size_t{1}, res.correspondences_used);
    if (!have_result || mse < best_mse) {
      best = std::move(res);
      best_mse = mse;
      have_result = true;
    }
    if (best.converged && best_mse < kExactFitMse) break;
  }
  return best;
}

}  // namespace ccal
