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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "core/commands.hpp"
#include "core/error.hpp"
#include "core/kinematics.hpp"
#include "support.hpp"

using namespace ccal;
using namespace ccal::testing;

namespace {

/// Independent homogeneous-matrix reference for one link, built from raw
/// 4x4 products rather than the RigidTransform algebra.
Eigen::Matrix4d dh_reference(double theta, const DHRow& row) {
  auto rz = [](double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 0) = std::cos(a);
    m(0, 1) = -std::sin(a);
    m(1, 0) = std::sin(a);
    m(1, 1) = std::cos(a);
    return m;
  };
  auto rx = [](double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(1, 1) = std::cos(a);
    m(1, 2) = -std::sin(a);
    m(2, 1) = std::sin(a);
    m(2, 2) = std::cos(a);
    return m;
  };
  Eigen::Matrix4d tz = Eigen::Matrix4d::Identity();
  tz(2, 3) = row.d;
  Eigen::Matrix4d tx = Eigen::Matrix4d::Identity();
  tx(0, 3) = row.r;
  return rz(theta) * tz * tx * rx(row.alpha);
}

KinematicChain random_chain(std::mt19937_64& rng, size_t dof) {
  std::uniform_real_distribution<double> a(-kTestPi, kTestPi);
  std::uniform_real_distribution<double> len(-0.5, 0.5);
  std::vector<DHRow> rows;
  for (size_t i = 0; i < dof; ++i) {
    rows.push_back(DHRow{a(rng), len(rng), len(rng)});
  }
  return KinematicChain(std::move(rows));
}

Eigen::VectorXd random_joints(std::mt19937_64& rng, size_t dof) {
  std::uniform_real_distribution<double> a(-kTestPi, kTestPi);
  Eigen::VectorXd q(static_cast<Eigen::Index>(dof));
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = a(rng);
  return q;
}

}  // namespace

TEST_CASE("dh_matrix equals the raw homogeneous product") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> a(-kTestPi, kTestPi);
  std::uniform_real_distribution<double> len(-0.8, 0.8);
  for (int i = 0; i < 100; ++i) {
    const DHRow row{a(rng), len(rng), len(rng)};
    const double theta = a(rng);
    const RigidTransform t = dh_matrix(theta, row);
    const Eigen::Matrix4d ref = dh_reference(theta, row);
    CHECK((t.rotation() - ref.block<3, 3>(0, 0)).norm() < 1e-13);
    CHECK((t.translation() - ref.block<3, 1>(0, 3)).norm() < 1e-13);
  }
}

TEST_CASE("forward kinematics is the ordered link product") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const KinematicChain chain = random_chain(rng, 6);
    const Eigen::VectorXd q = random_joints(rng, 6);
    Eigen::Matrix4d ref = Eigen::Matrix4d::Identity();
    for (size_t k = 0; k < 6; ++k) {
      ref = ref * dh_reference(q[static_cast<Eigen::Index>(k)],
                               chain.rows()[k]);
    }
    const RigidTransform t = forward_kinematics(chain, q);
    CHECK((t.rotation() - ref.block<3, 3>(0, 0)).norm() < 1e-12);
    CHECK((t.translation() - ref.block<3, 1>(0, 3)).norm() < 1e-12);
  }
}

TEST_CASE("link_frames ends at forward_kinematics and starts at identity") {
  std::mt19937_64 rng(23);
  const KinematicChain chain = random_chain(rng, 6);
  const Eigen::VectorXd q = random_joints(rng, 6);
  const auto frames = link_frames(chain, q);
  REQUIRE(frames.size() == 7);
  CHECK((frames.front().rotation() - Eigen::Matrix3d::Identity()).norm() == 0);
  CHECK(frames.front().translation().norm() == 0);
  const RigidTransform end = forward_kinematics(chain, q);
  CHECK((frames.back().rotation() - end.rotation()).norm() < 1e-13);
  CHECK((frames.back().translation() - end.translation()).norm() < 1e-13);
}

TEST_CASE("biases shift the joint angles additively") {
  std::mt19937_64 rng(24);
  const KinematicChain chain = random_chain(rng, 6);
  const Eigen::VectorXd q = random_joints(rng, 6);
  Eigen::VectorXd biases(6);
  biases << 0.01, -0.02, 0.005, 0.03, -0.015, 0.02;
  const RigidTransform biased =
      forward_kinematics(chain.with_biases(biases), q);
  const RigidTransform shifted = forward_kinematics(chain, q + biases);
  CHECK((biased.rotation() - shifted.rotation()).norm() < 1e-13);
  CHECK((biased.translation() - shifted.translation()).norm() < 1e-13);
}

TEST_CASE("with_biases rejects a wrong-sized vector") {
  std::mt19937_64 rng(25);
  const KinematicChain chain = random_chain(rng, 6);
  CHECK_THROWS_AS(chain.with_biases(Eigen::VectorXd::Zero(5)), Error);
}

TEST_CASE("bias jacobian matches central differences on random chains") {
  std::mt19937_64 rng(26);
  const double h = 1e-5;
  int checks = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const KinematicChain chain = random_chain(rng, 6);
    const Eigen::VectorXd q = random_joints(rng, 6);
    const Eigen::Matrix3Xd jac = bias_jacobian(chain, q);
    REQUIRE(jac.cols() == 6);
    for (Eigen::Index k = 0; k < 6; ++k) {
      for (int axis = 0; axis < 3; ++axis) {
        const double fd = central_difference(
            [&](double v) {
              Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
              b[k] = v;
              return contact_point(chain.with_biases(b), q)[axis];
            },
            0.0, h);
        CHECK(jac(axis, k) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        ++checks;
      }
    }
  }
  CHECK(checks >= 450);
}

TEST_CASE("bias jacobian columns are axis cross lever arms") {
  std::mt19937_64 rng(27);
  const KinematicChain chain = random_chain(rng, 6);
  const Eigen::VectorXd q = random_joints(rng, 6);
  const auto frames = link_frames(chain, q);
  const Eigen::Vector3d tip = frames.back().translation();
  const Eigen::Matrix3Xd jac = bias_jacobian(chain, q);
  for (size_t k = 0; k < 6; ++k) {
    const Eigen::Vector3d axis = frames[k].rotation().col(2);
    const Eigen::Vector3d origin = frames[k].translation();
    const Eigen::Vector3d expected = axis.cross(tip - origin);
    CHECK((jac.col(static_cast<Eigen::Index>(k)) - expected).norm() < 1e-12);
  }
}

TEST_CASE("build_contact_cloud is identical for any thread count") {
  std::mt19937_64 rng(28);
  const KinematicChain chain = default_chain();
  std::vector<ContactRecord> logs;
  for (int i = 0; i < 200; ++i) logs.push_back({random_joints(rng, 6)});
  const PointCloud one = build_contact_cloud(chain, logs, 1);
  const PointCloud four = build_contact_cloud(chain, logs, 4);
  REQUIRE(one.size() == four.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK((one.points[i] - four.points[i]).norm() == 0.0);
  }
}

TEST_CASE("build_contact_cloud rejects empty and mismatched logs") {
  const KinematicChain chain = default_chain();
  CHECK_THROWS_AS(build_contact_cloud(chain, {}, 1), Error);
  std::vector<ContactRecord> bad{{Eigen::VectorXd::Zero(4)}};
  CHECK_THROWS_AS(build_contact_cloud(chain, bad, 1), Error);
}

TEST_CASE("chain file round-trips the default arm") {
  TempDir dir("chain_roundtrip");
  const KinematicChain chain = default_chain();
  const std::string path = dir.sub("chain.txt");
  save_chain_file(chain, path);
  const KinematicChain back = load_chain_file(path);
  REQUIRE(back.dof() == chain.dof());
  for (size_t i = 0; i < chain.dof(); ++i) {
    CHECK(back.rows()[i].alpha ==
          doctest::Approx(chain.rows()[i].alpha).epsilon(1e-15));
    CHECK(back.rows()[i].r == doctest::Approx(chain.rows()[i].r));
    CHECK(back.rows()[i].d == doctest::Approx(chain.rows()[i].d));
  }
}

TEST_CASE("joint log csv round-trips") {
  TempDir dir("joint_log");
  std::mt19937_64 rng(29);
  std::vector<ContactRecord> logs;
  for (int i = 0; i < 50; ++i) logs.push_back({random_joints(rng, 6)});
  const std::string path = dir.sub("joints.csv");
  write_joint_log(logs, path);
  const auto back = read_joint_log(path);
  REQUIRE(back.size() == logs.size());
  for (size_t i = 0; i < logs.size(); ++i) {
    CHECK((back[i].joints - logs[i].joints).norm() < 1e-14);
  }
}

TEST_CASE("default chain has six revolute joints with a wrist singularity") {
  const KinematicChain chain = default_chain();
  REQUIRE(chain.dof() == 6);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(6);
  q << 0.3, -0.4, 0.8, 0.5, 0.0, 0.7;
  const auto frames = link_frames(chain, q);
  const Eigen::Vector3d z3 = frames[3].rotation().col(2);
  const Eigen::Vector3d z5 = frames[5].rotation().col(2);
  // Joint five at zero folds the wrist axes onto each other.
  CHECK(std::abs(std::abs(z3.dot(z5)) - 1.0) < 1e-9);
}
