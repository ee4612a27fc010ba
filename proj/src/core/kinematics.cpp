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

#include "core/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/runtime.hpp"
#include "core/textio.hpp"

namespace ccal {

namespace {

void check_finite_rows(const std::vector<DHRow>& rows) {
  for (const DHRow& row : rows) {
    if (!std::isfinite(row.alpha) || !std::isfinite(row.r) ||
        !std::isfinite(row.d)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "chain parameters must be finite");
    }
  }
}

void check_joint_size(const KinematicChain& chain,
                      const Eigen::VectorXd& joints) {
  if (static_cast<size_t>(joints.size()) != chain.dof()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "joint vector has " + std::to_string(joints.size()) +
                    " entries, chain has " + std::to_string(chain.dof()) +
                    " joints");
  }
}

}  // namespace

KinematicChain::KinematicChain(std::vector<DHRow> rows)
    : KinematicChain(std::move(rows), Eigen::VectorXd()) {}

KinematicChain::KinematicChain(std::vector<DHRow> rows,
                               Eigen::VectorXd joint_biases)
    : rows_(std::move(rows)), joint_biases_(std::move(joint_biases)) {
  if (rows_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "kinematic chain needs at least one joint");
  }
  check_finite_rows(rows_);
  if (joint_biases_.size() == 0) {
    joint_biases_ = Eigen::VectorXd::Zero(static_cast<int>(rows_.size()));
  } else if (static_cast<size_t>(joint_biases_.size()) != rows_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "bias vector has " + std::to_string(joint_biases_.size()) +
                    " entries, chain has " + std::to_string(rows_.size()) +
                    " joints");
  }
  if (!joint_biases_.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, "joint biases must be finite");
  }
}

KinematicChain KinematicChain::with_biases(
    const Eigen::VectorXd& joint_biases) const {
  return KinematicChain(rows_, joint_biases);
}

RigidTransform dh_matrix(double theta, const DHRow& row) {
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double ca = std::cos(row.alpha);
  const double sa = std::sin(row.alpha);
  Eigen::Matrix3d rot;
  rot << ct, -st * ca, st * sa,  //
      st, ct * ca, -ct * sa,     //
      0.0, sa, ca;
  Eigen::Vector3d trans(row.r * ct, row.r * st, row.d);
  return RigidTransform(rot, trans);
}

std::vector<RigidTransform> link_frames(const KinematicChain& chain,
                                        const Eigen::VectorXd& joints) {
  check_joint_size(chain, joints);
  std::vector<RigidTransform> frames;
  frames.reserve(chain.dof() + 1);
  frames.push_back(RigidTransform::identity());
  for (size_t k = 0; k < chain.dof(); ++k) {
    const double theta = joints[static_cast<int>(k)] +
                         chain.joint_biases()[static_cast<int>(k)];
    frames.push_back(frames.back().compose(dh_matrix(theta, chain.rows()[k])));
  }
  return frames;
}

RigidTransform forward_kinematics(const KinematicChain& chain,
                                  const Eigen::VectorXd& joints) {
  check_joint_size(chain, joints);
  RigidTransform pose = RigidTransform::identity();
  for (size_t k = 0; k < chain.dof(); ++k) {
    const double theta = joints[static_cast<int>(k)] +
                         chain.joint_biases()[static_cast<int>(k)];
    pose = pose.compose(dh_matrix(theta, chain.rows()[k]));
  }
  return pose;
}

Eigen::Vector3d contact_point(const KinematicChain& chain,
                              const Eigen::VectorXd& joints) {
  return forward_kinematics(chain, joints).translation();
}

PointCloud build_contact_cloud(const KinematicChain& chain,
                               const std::vector<ContactRecord>& records,
                               int threads) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "contact log has no records");
  }
  for (const ContactRecord& rec : records) check_joint_size(chain, rec.joints);
  PointCloud cloud;
  cloud.points.resize(records.size());
  cloud.weights.assign(records.size(), 1.0);
  parallel_for(records.size(), threads, [&](size_t i) {
    cloud.points[i] = contact_point(chain, records[i].joints);
  });
  return cloud;
}

Eigen::Matrix3Xd bias_jacobian(const KinematicChain& chain,
                               const Eigen::VectorXd& joints) {
  const std::vector<RigidTransform> frames = link_frames(chain, joints);
  const Eigen::Vector3d tip = frames.back().translation();
  Eigen::Matrix3Xd jac(3, static_cast<int>(chain.dof()));
  for (size_t k = 0; k < chain.dof(); ++k) {
    const Eigen::Vector3d axis = frames[k].rotation().col(2);
    const Eigen::Vector3d origin = frames[k].translation();
    jac.col(static_cast<int>(k)) = axis.cross(tip - origin);
  }
  return jac;
}

KinematicChain load_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open chain file: " + path);
  }
  std::vector<DHRow> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const std::vector<std::string> tokens = split(body);
    if (tokens.size() != 3) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_no) +
                      ": expected 'alpha r d', got " +
                      std::to_string(tokens.size()) + " fields");
    }
    DHRow row;
    if (!parse_double(tokens[0], row.alpha) ||
        !parse_double(tokens[1], row.r) || !parse_double(tokens[2], row.d)) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) +
                                         ": malformed number");
    }
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kParse, path + ": chain file has no joint rows");
  }
  return KinematicChain(std::move(rows));
}

void save_chain_file(const KinematicChain& chain, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write chain file: " + path);
  }
  out << "# alpha r d (one revolute joint per row)\n";
  for (const DHRow& row : chain.rows()) {
    out << format_double(row.alpha) << ' ' << format_double(row.r) << ' '
        << format_double(row.d) << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

std::vector<ContactRecord> read_joint_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open joint log: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParse, path + ": empty joint log");
  }
  const std::vector<std::string> header = split(trim(line), ',');
  const size_t dof = header.size();
  if (dof == 0) {
    throw Error(ErrorCode::kParse, path + ":1: empty header");
  }
  for (size_t k = 0; k < dof; ++k) {
    const std::string expected = "theta_" + std::to_string(k + 1);
    if (trim(header[k]) != expected) {
      throw Error(ErrorCode::kParse, path + ":1: expected header column '" +
                                         expected + "', got '" +
                                         trim(header[k]) + "'");
    }
  }
  std::vector<ContactRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::vector<std::string> tokens = split(body, ',');
    if (tokens.size() != dof) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dof) + " angles, got " +
                      std::to_string(tokens.size()));
    }
    ContactRecord rec;
    rec.joints.resize(static_cast<int>(dof));
    for (size_t k = 0; k < dof; ++k) {
      double value = 0.0;
      if (!parse_double(trim(tokens[k]), value)) {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) +
                                           ": malformed number '" +
                                           trim(tokens[k]) + "'");
      }
      rec.joints[static_cast<int>(k)] = value;
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw Error(ErrorCode::kParse, path + ": joint log has no records");
  }
  return records;
}

void write_joint_log(const std::vector<ContactRecord>& records,
                     const std::string& path) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "refusing to write empty joint log");
  }
  const size_t dof = static_cast<size_t>(records.front().joints.size());
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write joint log: " + path);
  }
  for (size_t k = 0; k < dof; ++k) {
    out << (k ? "," : "") << "theta_" << (k + 1);
  }
  out << '\n';
  for (const ContactRecord& rec : records) {
    if (static_cast<size_t>(rec.joints.size()) != dof) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "joint log records disagree on joint count");
    }
    for (size_t k = 0; k < dof; ++k) {
      out << (k ? "," : "")
          << format_double(rec.joints[static_cast<int>(k)]);
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

}  // namespace ccal
