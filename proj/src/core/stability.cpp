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

#include "core/stability.hpp"

#include <cmath>
#include <limits>

namespace ccal {

namespace {

const char* kAxisNames[3] = {"x", "y", "z"};

std::string direction_label(const Vector6d& v) {
  const double t2 = v.head<3>().squaredNorm();
  const double r2 = v.tail<3>().squaredNorm();
  const double total = t2 + r2;
  if (total <= 0.0) return "mixed";
  if (t2 / total > 0.9) {
    int axis = 0;
    v.head<3>().cwiseAbs().maxCoeff(&axis);
    if (v[axis] * v[axis] / total > 0.8) {
      return std::string("translation ") + kAxisNames[axis];
    }
    return "translation mixed";
  }
  if (r2 / total > 0.9) {
    int axis = 0;
    v.tail<3>().cwiseAbs().maxCoeff(&axis);
    if (v[3 + axis] * v[3 + axis] / total > 0.8) {
      return std::string("rotation about ") + kAxisNames[axis];
    }
    return "rotation mixed";
  }
  return "mixed";
}

}  // namespace

PairedSet active_pairs(const std::vector<Correspondence>& correspondences,
                       const RigidTransform& t, const PointCloud& contact,
                       const PointCloud& depth) {
  (void)depth;
  PairedSet out;
  out.points.reserve(correspondences.size());
  out.normals.reserve(correspondences.size());
  for (const Correspondence& c : correspondences) {
    if (c.weight <= 0.0) continue;
    out.points.push_back(t.apply(contact.points[c.source_index]));
    out.normals.push_back(c.normal);
  }
  if (out.points.empty()) {
    throw Error(ErrorCode::kNoActivePairs,
                "no weight-1 correspondences to analyze");
  }
  return out;
}

Matrix6d hessian_from_pairs(const PairedSet& pairs, bool center) {
  if (pairs.points.empty()) {
    throw Error(ErrorCode::kNoActivePairs, "no pairs to analyze");
  }
  if (pairs.normals.size() != pairs.points.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "paired set normals not parallel to points");
  }
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  if (center) {
    for (const Eigen::Vector3d& p : pairs.points) offset += p;
    offset /= static_cast<double>(pairs.points.size());
  }
  Matrix6d q = Matrix6d::Zero();
  const RigidTransform identity = RigidTransform::identity();
  for (size_t i = 0; i < pairs.points.size(); ++i) {
    const Vector6d jac =
        residual_jacobian(identity, pairs.points[i] - offset,
                          pairs.normals[i]);
    q.noalias() += jac * jac.transpose();
  }
  return q;
}

Matrix6d assemble_hessian(const std::vector<Correspondence>& correspondences,
                          const RigidTransform& t, const PointCloud& contact,
                          const PointCloud& depth) {
  return hessian_from_pairs(active_pairs(correspondences, t, contact, depth),
                            false);
}

StabilityReport analyze(const Matrix6d& q, double rank_tolerance) {
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kAsymmetricInput,
                "stability analysis needs a symmetric matrix");
  }
  StabilityReport report;
  report.hessian = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(report.hessian);
  // Eigen returns ascending order; reports use descending.
  for (int i = 0; i < 6; ++i) {
    report.eigenvalues[i] = eig.eigenvalues()[5 - i];
    report.eigenvectors.col(i) = eig.eigenvectors().col(5 - i);
  }
  const double lambda_max = report.eigenvalues[0];
  const double lambda_min = report.eigenvalues[5];
  report.condition_number = lambda_min > 0.0
                                ? lambda_max / lambda_min
                                : std::numeric_limits<double>::infinity();
  const double tol = rank_tolerance * std::max(lambda_max, 0.0);
  report.numeric_rank = 0;
  for (int i = 0; i < 6; ++i) {
    if (report.eigenvalues[i] > tol && report.eigenvalues[i] > 0.0) {
      ++report.numeric_rank;
    } else {
      report.null_directions.emplace_back(
          report.eigenvectors.col(i), direction_label(report.eigenvectors.col(i)));
    }
  }
  return report;
}

std::vector<SamplingRow> compare_sampling(
    const std::vector<std::pair<std::string, PairedSet>>& sets,
    double rank_tolerance) {
  if (sets.empty()) {
    throw Error(ErrorCode::kEmptySelection, "no sample sets to compare");
  }
  std::vector<SamplingRow> rows;
  rows.reserve(sets.size());
  for (const auto& [label, pairs] : sets) {
    if (pairs.points.empty()) {
      throw Error(ErrorCode::kEmptySelection,
                  "sample set '" + label + "' is empty");
    }
    const StabilityReport report =
        analyze(hessian_from_pairs(pairs, true), rank_tolerance);
    SamplingRow row;
    row.label = label;
    row.rank = report.numeric_rank;
    row.eigenvalues = report.eigenvalues;
    row.condition_number = report.condition_number;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ccal
