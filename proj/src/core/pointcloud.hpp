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
#include <cstdint>
#include <string>
#include <vector>

namespace ccal {

/// Point list with optional per-point normals and per-point weights.
/// `normals` is either empty or parallel to `points`; `weights` is always
/// parallel (default 1.0). Weight 0 marks an outlier-rejected point; such a
/// point may carry an all-zero (invalid) normal, every other normal is unit
/// length within 1e-6.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> weights;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  void reserve(size_t n) {
    points.reserve(n);
    weights.reserve(n);
  }

  void add_point(const Eigen::Vector3d& p, double weight = 1.0) {
    points.push_back(p);
    weights.push_back(weight);
  }

  void add_point(const Eigen::Vector3d& p, const Eigen::Vector3d& n,
                 double weight = 1.0) {
    points.push_back(p);
    normals.push_back(n);
    weights.push_back(weight);
  }

  Eigen::Vector3d centroid() const;

  /// Checks parallel-array sizes, finiteness, weight signs, and unit normals
  /// on weight>0 points. Throws on violation.
  void validate() const;
};

/// One contact-to-depth pairing. `normal` is the depth point's surface
/// normal; weight 0 marks a trimmed outlier that stays listed for
/// diagnostics but does not enter any sum.
struct Correspondence {
  size_t source_index{0};
  size_t target_index{0};
  Eigen::Vector3d normal{Eigen::Vector3d::Zero()};
  double weight{1.0};
};

/// Uniform without-replacement subset of `n` points, input order preserved.
/// Deterministic for a fixed seed. Normals and weights travel with their
/// points. Throws kTargetTooLarge when n exceeds the cloud size.
PointCloud random_downsample(const PointCloud& cloud, size_t n, uint64_t seed);

/// PCA normals from the k nearest neighbours of each point, oriented so
/// normal . (viewpoint - point) >= 0. Collinear neighbourhoods and grazing
/// orientations produce an invalid (zero) normal with weight 0 instead of a
/// guess. Requires cloud.size() >= k+1 and k >= 3.
PointCloud estimate_normals(const PointCloud& cloud, size_t k,
                            const Eigen::Vector3d& viewpoint);

}  // namespace ccal
