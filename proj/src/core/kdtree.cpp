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

#include "core/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "core/error.hpp"

namespace ccal {

namespace {
constexpr uint32_t kLeafSize = 16;
}

NeighborIndex::NeighborIndex(const PointCloud& cloud)
    : NeighborIndex(cloud.points) {}

NeighborIndex::NeighborIndex(std::vector<Eigen::Vector3d> points)
    : points_(std::move(points)) {
  if (points_.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "neighbour index over empty cloud");
  }
  for (const Eigen::Vector3d& p : points_) {
    if (!p.allFinite()) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "neighbour index input has non-finite point");
    }
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<uint32_t>(points_.size()));
}

uint32_t NeighborIndex::build(uint32_t begin, uint32_t end) {
  const uint32_t id = static_cast<uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    // Sorted leaves make tie handling independent of build history.
    std::sort(order_.begin() + begin, order_.begin() + end);
    nodes_[id].axis = -1;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Eigen::Vector3d lo = points_[order_[begin]];
  Eigen::Vector3d hi = lo;
  for (uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](uint32_t a, uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const uint32_t left = build(begin, mid);
  const uint32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NeighborIndex::search(uint32_t node, const Eigen::Vector3d& query,
                           Hit& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (uint32_t i = n.begin; i < n.end; ++i) {
      const uint32_t idx = order_[i];
      const double dist = (points_[idx] - query).norm();
      if (dist < best.distance ||
          (dist == best.distance && idx < best.index)) {
        best.distance = dist;
        best.index = idx;
      }
    }
    return;
  }
  const double delta = query[n.axis] - n.split;
  const uint32_t near = delta < 0.0 ? n.left : n.right;
  const uint32_t far = delta < 0.0 ? n.right : n.left;
  search(near, query, best);
  if (std::abs(delta) <= best.distance) search(far, query, best);
}

NeighborIndex::Hit NeighborIndex::nearest(const Eigen::Vector3d& query) const {
  Hit best;
  best.index = points_.size();
  best.distance = std::numeric_limits<double>::infinity();
  search(root_, query, best);
  return best;
}

std::vector<NeighborIndex::Hit> NeighborIndex::k_nearest(
    const Eigen::Vector3d& query, size_t k) const {
  if (k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "k_nearest with k == 0");
  }
  if (k > points_.size()) {
    throw Error(ErrorCode::kTargetTooLarge,
                "k_nearest asked for " + std::to_string(k) + " of " +
                    std::to_string(points_.size()) + " points");
  }
  // (distance, index) max-heap keeps the current best k.
  auto closer = [](const Hit& a, const Hit& b) {
    return a.distance < b.distance ||
           (a.distance == b.distance && a.index < b.index);
  };
  std::priority_queue<Hit, std::vector<Hit>, decltype(closer)> heap(closer);
  // Iterative traversal, nearest subtree first.
  std::vector<uint32_t> stack{root_};
  while (!stack.empty()) {
    const uint32_t node = stack.back();
    stack.pop_back();
    const Node& n = nodes_[node];
    if (n.axis >= 0) {
      const double delta = query[n.axis] - n.split;
      const uint32_t near = delta < 0.0 ? n.left : n.right;
      const uint32_t far = delta < 0.0 ? n.right : n.left;
      if (heap.size() < k || std::abs(delta) <= heap.top().distance) {
        stack.push_back(far);
      }
      stack.push_back(near);
      continue;
    }
    for (uint32_t i = n.begin; i < n.end; ++i) {
      const uint32_t idx = order_[i];
      Hit hit{idx, (points_[idx] - query).norm()};
      if (heap.size() < k) {
        heap.push(hit);
      } else if (closer(hit, heap.top())) {
        heap.pop();
        heap.push(hit);
      }
    }
  }
  std::vector<Hit> hits(heap.size());
  for (size_t i = hits.size(); i-- > 0;) {
    hits[i] = heap.top();
    heap.pop();
  }
  return hits;
}

}  // namespace ccal
