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
#include <utility>
#include <vector>

#include "core/registration.hpp"

namespace ccal {

/// Spectral summary of the 6x6 alignment quadratic form. Eigenvalues are
/// descending; eigenvector columns match that order. Directions are in
/// [translation; rotation] coordinates.
struct StabilityReport {
  Matrix6d hessian{Matrix6d::Zero()};
  Vector6d eigenvalues{Vector6d::Zero()};
  Matrix6d eigenvectors{Matrix6d::Identity()};
  double condition_number{0.0};  ///< largest/smallest, inf when singular
  int numeric_rank{0};
  std::vector<std::pair<Vector6d, std::string>> null_directions;
};

/// Matched surface samples expressed in one common frame: the transformed
/// contact points with the normals they were paired against.
struct PairedSet {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
};

/// Weight-1 pairs of a correspondence set, with contact points mapped into
/// the camera frame by T. Throws kNoActivePairs when every pair has
/// weight 0.
PairedSet active_pairs(const std::vector<Correspondence>& correspondences,
                       const RigidTransform& t, const PointCloud& contact,
                       const PointCloud& depth);

/// Sum of residual-Jacobian outer products over matched (point, normal)
/// samples, evaluated at identity. When `center` is set the points are
/// first shifted to their centroid, which makes the rotation block
/// independent of where the scene sits in the frame.
Matrix6d hessian_from_pairs(const PairedSet& pairs, bool center);

/// Quadratic form of a correspondence set at pose T over weight-1 pairs,
/// no centering.
Matrix6d assemble_hessian(const std::vector<Correspondence>& correspondences,
                          const RigidTransform& t, const PointCloud& contact,
                          const PointCloud& depth);

/// Eigen-analysis of a symmetric 6x6 form: descending spectrum, numeric
/// rank at rank_tolerance (relative to the largest eigenvalue), ratio
/// condition number, and labeled near-null directions such as
/// "translation y" or "rotation about z". Throws kAsymmetricInput.
StabilityReport analyze(const Matrix6d& q, double rank_tolerance = 1e-8);

/// One row of a sampling-choice comparison.
struct SamplingRow {
  std::string label;
  int rank{0};
  Vector6d eigenvalues{Vector6d::Zero()};  ///< descending
  double condition_number{0.0};
};

/// Condition numbers of ground-truth-paired sample sets, one row per
/// labeled set, input order kept. Each set is centered at its own
/// centroid before analysis. Throws kEmptySelection on an empty list or
/// an empty member.
std::vector<SamplingRow> compare_sampling(
    const std::vector<std::pair<std::string, PairedSet>>& sets,
    double rank_tolerance = 1e-8);

}  // namespace ccal
