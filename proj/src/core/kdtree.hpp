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
#include <vector>

#include "core/pointcloud.hpp"

namespace ccal {

/// Exact nearest-neighbour index over a fixed point set (kd-tree, median
/// split on the widest axis). Ties break toward the lower point index, so
/// queries are deterministic regardless of build order or thread count.
/// The index copies the points it is built from.
class NeighborIndex {
 public:
  struct Hit {
    size_t index{0};
    double distance{0.0};
  };

  explicit NeighborIndex(const PointCloud& cloud);
  explicit NeighborIndex(std::vector<Eigen::Vector3d> points);

  size_t size() const { return points_.size(); }

  /// Closest indexed point to `query` (exact).
  Hit nearest(const Eigen::Vector3d& query) const;

  /// The k closest indexed points, sorted by (distance, index). Throws
  /// kTargetTooLarge when k exceeds the indexed size, kInvalidArgument on
  /// k == 0.
  std::vector<Hit> k_nearest(const Eigen::Vector3d& query, size_t k) const;

 private:
  struct Node {
    // Leaf when axis < 0; then [begin, end) indexes order_.
    int32_t axis{-1};
    double split{0.0};
    uint32_t left{0};
    uint32_t right{0};
    uint32_t begin{0};
    uint32_t end{0};
  };

  uint32_t build(uint32_t begin, uint32_t end);
  void search(uint32_t node, const Eigen::Vector3d& query, Hit& best) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<uint32_t> order_;
  std::vector<Node> nodes_;
  uint32_t root_{0};
};

}  // namespace ccal
