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

#include "core/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/runtime.hpp"

namespace ccal {

Eigen::Vector3d PointCloud::centroid() const {
  if (points.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "centroid of an empty cloud");
  }
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

void PointCloud::validate() const {
  if (weights.size() != points.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weights not parallel to points");
  }
  if (!normals.empty() && normals.size() != points.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "normals not parallel to points");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite point at index " + std::to_string(i));
    }
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "invalid weight at index " + std::to_string(i));
    }
    if (!normals.empty() && weights[i] > 0.0) {
      if (!normals[i].allFinite() ||
          std::abs(normals[i].norm() - 1.0) > 1e-6) {
        throw Error(ErrorCode::kInvalidArgument,
                    "non-unit normal at index " + std::to_string(i));
      }
    }
  }
}

PointCloud random_downsample(const PointCloud& cloud, size_t n,
                             uint64_t seed) {
  if (cloud.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "downsample of an empty cloud");
  }
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "downsample target is zero");
  }
  if (n > cloud.size()) {
    throw Error(ErrorCode::kTargetTooLarge,
                "downsample target " + std::to_string(n) +
                    " exceeds cloud size " + std::to_string(cloud.size()));
  }
  std::vector<size_t> indices(cloud.size());
  std::iota(indices.begin(), indices.end(), size_t{0});
  std::mt19937_64 engine(derive_seed(seed, 0x5a3c9d1u));
  for (size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<size_t> pick(i, indices.size() - 1);
    std::swap(indices[i], indices[pick(engine)]);
  }
  indices.resize(n);
  std::sort(indices.begin(), indices.end());
  PointCloud out;
  out.reserve(n);
  if (cloud.has_normals()) out.normals.reserve(n);
  for (size_t idx : indices) {
    out.points.push_back(cloud.points[idx]);
    out.weights.push_back(cloud.weights[idx]);
    if (cloud.has_normals()) out.normals.push_back(cloud.normals[idx]);
  }
  return out;
}

PointCloud estimate_normals(const PointCloud& cloud, size_t k,
                            const Eigen::Vector3d& viewpoint) {
  if (k < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "normal estimation needs k >= 3");
  }
  if (cloud.size() < k + 1) {
    throw Error(ErrorCode::kTargetTooLarge,
                "normal estimation needs at least k+1 points");
  }
  NeighborIndex index(cloud);
  PointCloud out = cloud;
  out.normals.assign(cloud.size(), Eigen::Vector3d::Zero());
  for (size_t i = 0; i < cloud.size(); ++i) {
    const auto hits = index.k_nearest(cloud.points[i], k + 1);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& h : hits) mean += cloud.points[h.index];
    mean /= static_cast<double>(hits.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& h : hits) {
      const Eigen::Vector3d d = cloud.points[h.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d evals = eig.eigenvalues();
    // Rank < 2 neighbourhood: no plane is defined, reject the point.
    if (!(evals[1] > 1e-12 * std::max(evals[2], 1e-300))) {
      out.weights[i] = 0.0;
      continue;
    }
    Eigen::Vector3d normal = eig.eigenvectors().col(0);
    const Eigen::Vector3d to_view = viewpoint - cloud.points[i];
    const double align = normal.dot(to_view);
    // Grazing view: the sign of the normal is not decidable.
    if (std::abs(align) <= 1e-9 * to_view.norm()) {
      out.weights[i] = 0.0;
      continue;
    }
    if (align < 0.0) normal = -normal;
    out.normals[i] = normal.normalized();
  }
  return out;
}

}  // namespace ccal
