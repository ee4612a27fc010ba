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

#include <cmath>
#include <random>

#include "core/calibration.hpp"
#include "core/commands.hpp"
#include "core/error.hpp"
#include "core/simulator.hpp"
#include "support.hpp"

using namespace ccal;
using namespace ccal::testing;

namespace {

constexpr double kDeg = kTestPi / 180.0;

Eigen::VectorXd random_joints(std::mt19937_64& rng, size_t dof) {
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  Eigen::VectorXd q(dof);
  for (size_t i = 0; i < dof; ++i) q[static_cast<Eigen::Index>(i)] = u(rng);
  return q;
}

/// Logs plus a synthetic depth target with hand-built identity pairing,
/// for derivative checks that need full control of every pair.
struct FixedPairs {
  KinematicChain chain{default_chain()};
  std::vector<ContactRecord> logs;
  PointCloud depth;
  std::vector<Correspondence> corr;
};

FixedPairs make_fixed_pairs(size_t count, uint64_t seed) {
  FixedPairs out;
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < count; ++i) {
    out.logs.push_back({random_joints(rng, out.chain.dof())});
    out.depth.add_point(random_unit_vector(rng) * 0.8, random_unit_vector(rng));
    Correspondence c;
    c.source_index = i;
    c.target_index = i;
    c.normal = out.depth.normals[i];
    c.weight = 1.0;
    out.corr.push_back(c);
  }
  return out;
}

Dataset clean_dataset(const KinematicChain& nominal,
                      const Eigen::VectorXd& true_biases,
                      const RigidTransform& truth, bool wrist_locked,
                      uint64_t seed) {
  const Scene scene = make_benchmark_scene("two_prisms_table");
  DatasetConfig cfg;
  cfg.depth.extrinsic = truth;
  cfg.depth.point_density = 9000.0;
  cfg.depth.gaussian_sigma = 0.0;
  cfg.depth.seed = seed;
  cfg.contact.selected_patches = scene.labels();
  cfg.contact.raster_spacing = 0.05;
  cfg.contact.contact_noise_sigma = 0.0;
  cfg.contact.seed = seed + 1;
  cfg.seed_mode = IkSeedMode::kJitter;
  cfg.wrist_locked = wrist_locked;
  cfg.seed = seed + 2;
  return generate_dataset(scene, nominal, true_biases, cfg, 2);
}

ExtrinsicParams perturbed(const ExtrinsicParams& truth) {
  ExtrinsicParams p = truth;
  p.x += 0.02;
  p.y -= 0.03;
  p.z += 0.02;
  p.phi += 3.0 * kDeg;
  p.theta -= 2.0 * kDeg;
  p.psi += 3.0 * kDeg;
  return p;
}

}  // namespace

TEST_CASE("augmented rows start with the rigid jacobian") {
  const FixedPairs fp = make_fixed_pairs(20, 101);
  std::mt19937_64 rng(102);
  const RigidTransform t = random_transform(rng, 0.5);
  const Eigen::VectorXd biases =
      0.01 * random_joints(rng, fp.chain.dof());
  const auto pairs = augmented_residual_jacobian(fp.chain, fp.logs, fp.depth,
                                                 fp.corr, t, biases);
  REQUIRE(pairs.size() == fp.corr.size());
  const KinematicChain biased = fp.chain.with_biases(biases);
  for (const auto& pair : pairs) {
    const Eigen::Vector3d a = contact_point(biased, fp.logs[pair.source_index].joints);
    const Vector6d rigid =
        residual_jacobian(t, a, fp.depth.normals[pair.target_index]);
    CHECK((pair.jacobian.head<6>() - rigid).norm() == 0.0);
    CHECK(pair.residual ==
          doctest::Approx(point_to_plane_residual(
              t, a, fp.depth.points[pair.target_index],
              fp.depth.normals[pair.target_index])));
  }
}

TEST_CASE("augmented bias columns match finite differences") {
  const FixedPairs fp = make_fixed_pairs(12, 103);
  std::mt19937_64 rng(104);
  const RigidTransform t = random_transform(rng, 0.5);
  const Eigen::VectorXd biases = 0.02 * random_joints(rng, fp.chain.dof());
  const auto pairs = augmented_residual_jacobian(fp.chain, fp.logs, fp.depth,
                                                 fp.corr, t, biases);
  const size_t dof = fp.chain.dof();
  for (const auto& pair : pairs) {
    for (size_t k = 0; k < dof; ++k) {
      const double fd = central_difference(
          [&](double v) {
            Eigen::VectorXd b = biases;
            b[static_cast<Eigen::Index>(k)] += v;
            const Eigen::Vector3d a = contact_point(
                fp.chain.with_biases(b), fp.logs[pair.source_index].joints);
            return point_to_plane_residual(
                t, a, fp.depth.points[pair.target_index],
                fp.depth.normals[pair.target_index]);
          },
          0.0, 1e-5);
      // Bias columns carry the direct sensitivity: r' = r + B db.
      CHECK(pair.jacobian[6 + static_cast<Eigen::Index>(k)] ==
            doctest::Approx(fd).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("a base joint bias is exactly a base-frame spin") {
  std::mt19937_64 rng(105);
  const KinematicChain chain = default_chain();
  const double delta = 0.3;
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd q = random_joints(rng, chain.dof());
    Eigen::VectorXd b = 0.05 * random_joints(rng, chain.dof());
    const Eigen::Vector3d base = contact_point(chain.with_biases(b), q);
    b[0] += delta;
    const Eigen::Vector3d spun = contact_point(chain.with_biases(b), q);
    CHECK((spun - rotation_z(delta) * base).norm() < 1e-12);
  }
}

TEST_CASE("camera yaw compensates a base joint bias at full residual "
          "level") {
  const FixedPairs fp = make_fixed_pairs(15, 106);
  std::mt19937_64 rng(107);
  const RigidTransform t = random_transform(rng, 0.5);
  const Eigen::VectorXd biases = 0.02 * random_joints(rng, fp.chain.dof());
  const double delta = 0.2;
  Eigen::VectorXd biases_g = biases;
  biases_g[0] += delta;
  const RigidTransform t_g{t.rotation() * rotation_z(-delta).eval(),
                           t.translation()};
  const auto before = augmented_residual_jacobian(fp.chain, fp.logs, fp.depth,
                                                  fp.corr, t, biases);
  const auto after = augmented_residual_jacobian(fp.chain, fp.logs, fp.depth,
                                                 fp.corr, t_g, biases_g);
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i].residual ==
          doctest::Approx(before[i].residual).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("the gauge direction annihilates every augmented row") {
  const FixedPairs fp = make_fixed_pairs(25, 108);
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 5; ++trial) {
    const RigidTransform t = random_transform(rng, 0.6);
    const Eigen::VectorXd biases = 0.03 * random_joints(rng, fp.chain.dof());
    const Eigen::VectorXd v = gauge_direction(t, fp.chain.dof());
    CHECK(v.norm() == doctest::Approx(1.0));
    const auto pairs = augmented_residual_jacobian(fp.chain, fp.logs, fp.depth,
                                                   fp.corr, t, biases);
    double lambda_scale = 0.0;
    double quad = 0.0;
    for (const auto& pair : pairs) {
      CHECK(std::abs(pair.jacobian.dot(v)) < 1e-10);
      lambda_scale += pair.jacobian.squaredNorm();
      const double rv = pair.jacobian.dot(v);
      quad += rv * rv;
    }
    CHECK(quad < 1e-12 * lambda_scale);
  }
}

TEST_CASE("calibrate recovers injected joint biases from clean data") {
  const KinematicChain nominal = default_chain();
  Eigen::VectorXd truth_biases(6);
  truth_biases << 0.0, -0.8, 0.3, 1.0, -0.5, 0.7;
  truth_biases *= kDeg;
  const ExtrinsicParams truth = benchmark_extrinsic();
  const Dataset ds = clean_dataset(nominal, truth_biases,
                                   extrinsic_to_transform(truth), false, 40);
  REQUIRE(ds.logs.size() > 200);
  CalibrationProblem problem(nominal, ds.logs, ds.depth, perturbed(truth));
  problem.config.pin_joint1_bias = true;
  const CalibrationResult result = calibrate(problem, 2);
  CHECK(result.converged);
  CHECK_FALSE(result.degeneracy.degenerate);
  CHECK(result.degeneracy.verdict == "IDENTIFIABLE");
  // Joint 1 is pinned and its true bias is zero, so the whole vector is
  // comparable directly.
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(result.joint_biases[k] - truth_biases[k]) < 0.05 * kDeg);
  }
  CHECK(std::abs(result.extrinsic.x - truth.x) < 1e-3);
  CHECK(std::abs(result.extrinsic.y - truth.y) < 1e-3);
  CHECK(std::abs(result.extrinsic.z - truth.z) < 1e-3);
  CHECK(std::abs(normalize_angle(result.extrinsic.phi - truth.phi)) <
        0.05 * kDeg);
  CHECK(std::abs(normalize_angle(result.extrinsic.theta - truth.theta)) <
        0.05 * kDeg);
  CHECK(std::abs(normalize_angle(result.extrinsic.psi - truth.psi)) <
        0.05 * kDeg);
  // The history records accepted steps only, so it cannot rise.
  for (size_t i = 1; i < result.history.size(); ++i) {
    CHECK(result.history[i] <= result.history[i - 1]);
  }
  // Gauge direction sits in the numeric null space of the reported system.
  const Eigen::VectorXd v = result.degeneracy.gauge_direction;
  REQUIRE(v.size() == 12);
  const double rayleigh = v.dot(result.augmented_hessian * v);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      result.augmented_hessian);
  CHECK(rayleigh < 1e-10 * eig.eigenvalues().maxCoeff());
}

TEST_CASE("zero true biases keep the joint solve near the rigid solve") {
  const KinematicChain nominal = default_chain();
  const ExtrinsicParams truth = benchmark_extrinsic();
  const Dataset ds = clean_dataset(nominal, Eigen::VectorXd::Zero(6),
                                   extrinsic_to_transform(truth), false, 41);
  CalibrationProblem joint(nominal, ds.logs, ds.depth, perturbed(truth));
  joint.config.pin_joint1_bias = true;
  const CalibrationResult with_biases = calibrate(joint, 2);
  CalibrationProblem rigid(nominal, ds.logs, ds.depth, perturbed(truth));
  rigid.solve_biases = false;
  const CalibrationResult rigid_only = calibrate(rigid, 2);
  CHECK(with_biases.converged);
  CHECK(rigid_only.converged);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(with_biases.joint_biases[k]) < 0.02 * kDeg);
  }
  CHECK(std::abs(with_biases.extrinsic.x - rigid_only.extrinsic.x) < 1e-3);
  CHECK(std::abs(with_biases.extrinsic.y - rigid_only.extrinsic.y) < 1e-3);
  CHECK(std::abs(with_biases.extrinsic.z - rigid_only.extrinsic.z) < 1e-3);
}

TEST_CASE("an unpinned base bias only moves along the gauge orbit") {
  const KinematicChain nominal = default_chain();
  Eigen::VectorXd truth_biases(6);
  truth_biases << 0.4, -0.6, 0.2, 0.8, -0.4, 0.5;
  truth_biases *= kDeg;
  const ExtrinsicParams truth = benchmark_extrinsic();
  const RigidTransform t_truth = extrinsic_to_transform(truth);
  const Dataset ds =
      clean_dataset(nominal, truth_biases, t_truth, false, 42);
  CalibrationProblem problem(nominal, ds.logs, ds.depth, perturbed(truth));
  problem.config.pin_joint1_bias = true;
  const CalibrationResult result = calibrate(problem, 2);
  CHECK(result.converged);
  // Joints 2..6 are gauge-free and must match even though joint 1 is held
  // at zero while its true bias is not.
  for (int k = 1; k < 6; ++k) {
    CHECK(std::abs(result.joint_biases[k] - truth_biases[k]) < 0.05 * kDeg);
  }
  // The physical prediction is gauge-invariant: solved pose and biases
  // must land every logged touch on the same camera-frame point as the
  // truth.
  const KinematicChain solved = nominal.with_biases(result.joint_biases);
  const KinematicChain real = nominal.with_biases(truth_biases);
  const RigidTransform t_solved = extrinsic_to_transform(result.extrinsic);
  double worst = 0.0;
  for (const ContactRecord& rec : ds.logs) {
    const Eigen::Vector3d predicted =
        t_solved.apply(contact_point(solved, rec.joints));
    const Eigen::Vector3d actual =
        t_truth.apply(contact_point(real, rec.joints));
    worst = std::max(worst, (predicted - actual).norm());
  }
  CHECK(worst < 5e-4);
}

TEST_CASE("calibrate is reproducible and thread-count independent") {
  const KinematicChain nominal = default_chain();
  const ExtrinsicParams truth = benchmark_extrinsic();
  Eigen::VectorXd truth_biases(6);
  truth_biases << 0.0, 0.3, -0.2, 0.4, -0.3, 0.2;
  truth_biases *= kDeg;
  const Dataset ds = clean_dataset(nominal, truth_biases,
                                   extrinsic_to_transform(truth), false, 43);
  CalibrationProblem problem(nominal, ds.logs, ds.depth, perturbed(truth));
  problem.config.pin_joint1_bias = true;
  const CalibrationResult a = calibrate(problem, 1);
  const CalibrationResult b = calibrate(problem, 1);
  const CalibrationResult c = calibrate(problem, 3);
  CHECK(a.extrinsic.x == b.extrinsic.x);
  CHECK(a.extrinsic.psi == b.extrinsic.psi);
  CHECK((a.joint_biases - b.joint_biases).norm() == 0.0);
  CHECK(a.final_cost == b.final_cost);
  CHECK(a.extrinsic.x == c.extrinsic.x);
  CHECK((a.joint_biases - c.joint_biases).norm() == 0.0);
  CHECK(a.history.size() == c.history.size());
}

TEST_CASE("a locked wrist downgrades the solve to rigid only") {
  const KinematicChain nominal = default_chain();
  const ExtrinsicParams truth = benchmark_extrinsic();
  Eigen::VectorXd truth_biases(6);
  truth_biases << 0.0, 0.5, -0.4, 0.6, -0.2, 0.3;
  truth_biases *= kDeg;
  const Dataset ds = clean_dataset(nominal, truth_biases,
                                   extrinsic_to_transform(truth), true, 44);
  CalibrationProblem problem(nominal, ds.logs, ds.depth, perturbed(truth));
  problem.config.pin_joint1_bias = true;
  const CalibrationResult result = calibrate(problem, 2);
  CHECK(result.degeneracy.degenerate);
  CHECK(result.degeneracy.verdict.rfind("DEGENERATE:", 0) == 0);
  CHECK(result.degeneracy.verdict.find("dtheta_6") != std::string::npos);
  CHECK(result.downgraded_to_rigid);
  CHECK(result.converged);
  CHECK(result.joint_biases.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a single plane cannot seed the calibration") {
  const Scene scene = make_benchmark_scene("single_plane");
  const KinematicChain nominal = default_chain();
  DatasetConfig cfg;
  const ExtrinsicParams truth = benchmark_extrinsic();
  cfg.depth.extrinsic = extrinsic_to_transform(truth);
  cfg.depth.point_density = 6000.0;
  cfg.depth.seed = 5;
  cfg.contact.selected_patches = scene.labels();
  cfg.contact.raster_spacing = 0.08;
  cfg.contact.contact_noise_sigma = 0.0;
  cfg.contact.seed = 6;
  cfg.seed_mode = IkSeedMode::kRaster;
  cfg.seed = 7;
  const Dataset ds =
      generate_dataset(scene, nominal, Eigen::VectorXd::Zero(6), cfg, 2);
  CalibrationProblem problem(nominal, ds.logs, ds.depth, truth);
  try {
    calibrate(problem, 2);
    FAIL("expected kDegenerateProblem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateProblem);
    CHECK(std::string(e.what()).find("rank") != std::string::npos);
  }
}

TEST_CASE("identifiability report flags the yaw gauge on healthy data") {
  const KinematicChain nominal = default_chain();
  const ExtrinsicParams truth = benchmark_extrinsic();
  Eigen::VectorXd truth_biases(6);
  truth_biases << 0.0, 0.4, -0.3, 0.5, -0.2, 0.4;
  truth_biases *= kDeg;
  const RigidTransform t_truth = extrinsic_to_transform(truth);
  const Dataset ds =
      clean_dataset(nominal, truth_biases, t_truth, false, 45);
  IcpConfig icp;
  const IdentifiabilityReport report = identifiability_report(
      nominal, ds.logs, ds.depth, t_truth, truth_biases, icp, 1e-8, 2);
  REQUIRE(report.rows.size() == 12);
  for (size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].eigenvalue <= report.rows[i - 1].eigenvalue);
  }
  // Everything is observable except the one-parameter yaw gauge.
  CHECK(report.numeric_rank == 11);
  const auto& null_row = report.rows.back();
  CHECK_FALSE(null_row.label.empty());
  CHECK(null_row.label.find("dtheta_1") != std::string::npos);
  CHECK(null_row.label.find("trade-off") != std::string::npos);
  // The flagged direction is the analytic gauge up to sign.
  const Eigen::VectorXd v = gauge_direction(t_truth, 6);
  CHECK(std::abs(std::abs(null_row.direction.dot(v)) - 1.0) < 1e-6);
}

TEST_CASE("calibration config validation") {
  CalibrationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.cost_tolerance = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CalibrationConfig{};
  cfg.initial_damping = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CalibrationConfig{};
  cfg.damping_decrease = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CalibrationConfig{};
  cfg.condition_threshold = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
