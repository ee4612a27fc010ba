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
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/pointcloud.hpp"
#include "core/se3.hpp"

namespace ccal::testing {

inline constexpr double kTestPi = 3.141592653589793238462643383279502884;

/// Five-point central difference, error O(h^4). Kept independent of any
/// analytic derivative in the library so the two can cross-check.
inline double central_difference(const std::function<double(double)>& f,
                                 double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) /
         (12 * h);
}

/// Exhaustive nearest neighbour; the reference the kd-tree must agree with.
inline size_t brute_force_nearest(const std::vector<Eigen::Vector3d>& points,
                                  const Eigen::Vector3d& query) {
  size_t best = 0;
  double best_d = (points[0] - query).squaredNorm();
  for (size_t i = 1; i < points.size(); ++i) {
    const double d = (points[i] - query).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline Eigen::Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Eigen::Vector3d(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-kTestPi, kTestPi);
  return rotation_exp(random_unit_vector(rng) * a(rng));
}

inline RigidTransform random_transform(std::mt19937_64& rng, double span) {
  std::uniform_real_distribution<double> u(-span, span);
  return RigidTransform(random_rotation(rng),
                        Eigen::Vector3d(u(rng), u(rng), u(rng)));
}

/// Uniform samples on a z-up rectangle at the origin, exact +z normals.
inline PointCloud plane_cloud(size_t n, double side, uint64_t seed,
                              double z = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-side / 2, side / 2);
  PointCloud cloud;
  for (size_t i = 0; i < n; ++i) {
    cloud.add_point(Eigen::Vector3d(u(rng), u(rng), z),
                    Eigen::Vector3d::UnitZ());
  }
  return cloud;
}

/// Scratch directory unique to a test name, wiped on construction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("contactcal_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::string sub(const std::string& leaf) const {
    return (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline double angle_between(const Eigen::Matrix3d& a,
                            const Eigen::Matrix3d& b) {
  return Eigen::AngleAxisd(a.transpose() * b).angle();
}

inline double angle_between(const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b) {
  const double c = a.normalized().dot(b.normalized());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace ccal::testing
