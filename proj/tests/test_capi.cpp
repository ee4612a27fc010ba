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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contactcal/contactcal.h"

// This suite goes through the installed C surface only, the way an
// external consumer would: no core headers, fixtures are written to
// disk by hand and results are read back as text.

namespace {

constexpr double kPi = 3.14159265358979323846;

class CTempDir {
 public:
  CTempDir() {
    std::random_device rd;
    std::ostringstream name;
    name << "ccal_capi_" << std::hex << rd() << rd();
    path_ = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~CTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string sub(const std::string& leaf) const {
    return (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << body;
  REQUIRE(out.good());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

struct XyzN {
  double x, y, z, nx, ny, nz;
};

// Axis-aligned unit planes through the origin; the span [lo, hi] on the
// two in-plane axes keeps samples off the coordinate axes themselves.
std::vector<XyzN> plane_grid(int fixed_axis, int per_side, double lo,
                             double hi) {
  std::vector<XyzN> rows;
  for (int i = 0; i < per_side; ++i) {
    for (int j = 0; j < per_side; ++j) {
      const double u = lo + (hi - lo) * i / (per_side - 1);
      const double v = lo + (hi - lo) * j / (per_side - 1);
      XyzN p{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
      double* coords = &p.x;
      double* normal = &p.nx;
      coords[(fixed_axis + 1) % 3] = u;
      coords[(fixed_axis + 2) % 3] = v;
      normal[fixed_axis] = 1.0;
      rows.push_back(p);
    }
  }
  return rows;
}

std::string to_ply(const std::vector<XyzN>& rows, bool with_normals) {
  std::ostringstream out;
  out.precision(17);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << rows.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (with_normals) {
    out << "property double nx\nproperty double ny\nproperty double nz\n";
  }
  out << "end_header\n";
  for (const XyzN& p : rows) {
    out << p.x << ' ' << p.y << ' ' << p.z;
    if (with_normals) out << ' ' << p.nx << ' ' << p.ny << ' ' << p.nz;
    out << '\n';
  }
  return out.str();
}

std::string to_csv(const std::vector<XyzN>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,z\n";
  for (const XyzN& p : rows) {
    out << p.x << ',' << p.y << ',' << p.z << '\n';
  }
  return out.str();
}

std::vector<XyzN> three_planes(int per_side, double lo, double hi) {
  std::vector<XyzN> all;
  for (int axis = 0; axis < 3; ++axis) {
    const std::vector<XyzN> one = plane_grid(axis, per_side, lo, hi);
    all.insert(all.end(), one.begin(), one.end());
  }
  return all;
}

struct CloudHandle {
  ccal_cloud* ptr{nullptr};
  ~CloudHandle() { ccal_cloud_free(ptr); }
};

ccal_cloud* must_load(const std::string& path) {
  ccal_cloud* out = nullptr;
  REQUIRE(ccal_cloud_load(path.c_str(), &out) == CCAL_OK);
  REQUIRE(out != nullptr);
  return out;
}

double max_abs_diff(const ccal_transform& a, const ccal_transform& b) {
  double worst = 0.0;
  for (int i = 0; i < 9; ++i) {
    worst = std::max(worst, std::abs(a.rotation[i] - b.rotation[i]));
  }
  for (int i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(a.translation[i] - b.translation[i]));
  }
  return worst;
}

const char* kSimulateConfig =
    "preset = two_prisms_table\n"
    "depth_density = 7000\n"
    "depth_sigma = 0\n"
    "raster_spacing = 0.055\n"
    "contact_sigma = 0\n"
    "ik_seed_mode = jitter\n"
    "true_biases_deg = 0, 0.4, -0.3, 0.6, 0.25, -0.5\n";

const char* kRigidOnlyConfig =
    "initial_extrinsic_position = 0.86, 0.23, 0.71\n"
    "initial_extrinsic_angles_deg = -117.5, 3.0, 17.8\n"
    "solve_biases = false\n";

const char* kPlaneOnlyConfig =
    "preset = single_plane\n"
    "depth_density = 6000\n"
    "depth_sigma = 0\n"
    "raster_spacing = 0.08\n"
    "contact_sigma = 0\n"
    "ik_seed_mode = raster\n";

}  // namespace

TEST_CASE("version and error slot basics") {
  const char* version = ccal_version();
  REQUIRE(version != nullptr);
  CHECK(std::strcmp(version, "0.1.0") == 0);

  ccal_transform t;
  REQUIRE(ccal_transform_identity(&t) == CCAL_OK);
  CHECK(std::strlen(ccal_last_error()) == 0);

  CHECK(ccal_transform_identity(nullptr) == CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "null"));

  REQUIRE(ccal_transform_identity(&t) == CCAL_OK);
  CHECK(std::strlen(ccal_last_error()) == 0);
}

TEST_CASE("identity transform has exact entries") {
  ccal_transform t;
  REQUIRE(ccal_transform_identity(&t) == CCAL_OK);
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      CHECK(t.rotation[row * 3 + col] == (row == col ? 1.0 : 0.0));
    }
  }
  for (int i = 0; i < 3; ++i) CHECK(t.translation[i] == 0.0);
}

TEST_CASE("extrinsic to transform uses yaw pitch roll composition") {
  ccal_extrinsic e{0.0, 0.0, 0.0, 0.0, 0.0, kPi / 2.0};
  ccal_transform t;
  REQUIRE(ccal_transform_from_extrinsic(&e, &t) == CCAL_OK);
  CHECK(std::abs(t.rotation[0] - 0.0) < 1e-12);
  CHECK(std::abs(t.rotation[1] + 1.0) < 1e-12);
  CHECK(std::abs(t.rotation[3] - 1.0) < 1e-12);
  CHECK(std::abs(t.rotation[8] - 1.0) < 1e-12);

  e = ccal_extrinsic{0.3, -0.2, 0.5, 0.4, -0.3, 1.1};
  REQUIRE(ccal_transform_from_extrinsic(&e, &t) == CCAL_OK);
  ccal_extrinsic back;
  REQUIRE(ccal_extrinsic_from_transform(&t, &back) == CCAL_OK);
  CHECK(std::abs(back.x - e.x) < 1e-12);
  CHECK(std::abs(back.y - e.y) < 1e-12);
  CHECK(std::abs(back.z - e.z) < 1e-12);
  CHECK(std::abs(back.phi - e.phi) < 1e-12);
  CHECK(std::abs(back.theta - e.theta) < 1e-12);
  CHECK(std::abs(back.psi - e.psi) < 1e-12);
}

TEST_CASE("euler extraction fails at straight-up pitch") {
  ccal_extrinsic e{0.0, 0.0, 0.0, 0.2, kPi / 2.0, -0.1};
  ccal_transform t;
  REQUIRE(ccal_transform_from_extrinsic(&e, &t) == CCAL_OK);
  ccal_extrinsic back;
  CHECK(ccal_extrinsic_from_transform(&t, &back) == CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "pitch"));

  CHECK(ccal_transform_from_extrinsic(nullptr, &t) == CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "null"));
}

TEST_CASE("cloud load, inspect and save round trip") {
  CTempDir dir;
  const std::vector<XyzN> rows = plane_grid(2, 12, 0.05, 0.95);
  write_text(dir.sub("plane.ply"), to_ply(rows, true));

  CloudHandle cloud;
  cloud.ptr = must_load(dir.sub("plane.ply"));
  CHECK(ccal_cloud_size(cloud.ptr) == rows.size());
  CHECK(ccal_cloud_has_normals(cloud.ptr) == 1);

  REQUIRE(ccal_cloud_save(cloud.ptr, dir.sub("copy.ply").c_str()) == CCAL_OK);
  CloudHandle copy;
  copy.ptr = must_load(dir.sub("copy.ply"));
  CHECK(ccal_cloud_size(copy.ptr) == rows.size());
  CHECK(ccal_cloud_has_normals(copy.ptr) == 1);
  REQUIRE(ccal_cloud_save(copy.ptr, dir.sub("copy2.ply").c_str()) == CCAL_OK);
  CHECK(slurp(dir.sub("copy.ply")) == slurp(dir.sub("copy2.ply")));

  REQUIRE(ccal_cloud_save(cloud.ptr, dir.sub("copy.csv").c_str()) == CCAL_OK);
  const std::string csv = slurp(dir.sub("copy.csv"));
  CHECK(contains(csv, "x,y,z,nx,ny,nz"));
  CloudHandle from_csv;
  from_csv.ptr = must_load(dir.sub("copy.csv"));
  CHECK(ccal_cloud_size(from_csv.ptr) == rows.size());
}

TEST_CASE("cloud loader rejects broken inputs") {
  CTempDir dir;
  ccal_cloud* out = nullptr;

  CHECK(ccal_cloud_load(dir.sub("absent.ply").c_str(), &out) == CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "cannot open"));

  write_text(dir.sub("binary.ply"),
             "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
             "property double x\nend_header\n");
  CHECK(ccal_cloud_load(dir.sub("binary.ply").c_str(), &out) == CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "binary PLY"));

  write_text(dir.sub("bad.csv"), "foo,bar\n1,2\n");
  CHECK(ccal_cloud_load(dir.sub("bad.csv").c_str(), &out) == CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "expected header"));

  CHECK(ccal_cloud_load(nullptr, &out) == CCAL_ERROR);
  CHECK(ccal_cloud_size(nullptr) == 0);
  CHECK(ccal_cloud_has_normals(nullptr) == 0);
}

TEST_CASE("downsample is seeded and bounds checked") {
  CTempDir dir;
  const std::vector<XyzN> rows = plane_grid(2, 12, 0.05, 0.95);
  write_text(dir.sub("plane.ply"), to_ply(rows, true));
  CloudHandle cloud;
  cloud.ptr = must_load(dir.sub("plane.ply"));

  CloudHandle a, b, c;
  REQUIRE(ccal_cloud_downsample(cloud.ptr, 20, 77, &a.ptr) == CCAL_OK);
  REQUIRE(ccal_cloud_downsample(cloud.ptr, 20, 77, &b.ptr) == CCAL_OK);
  REQUIRE(ccal_cloud_downsample(cloud.ptr, 20, 78, &c.ptr) == CCAL_OK);
  CHECK(ccal_cloud_size(a.ptr) == 20);
  CHECK(ccal_cloud_has_normals(a.ptr) == 1);
  REQUIRE(ccal_cloud_save(a.ptr, dir.sub("a.ply").c_str()) == CCAL_OK);
  REQUIRE(ccal_cloud_save(b.ptr, dir.sub("b.ply").c_str()) == CCAL_OK);
  REQUIRE(ccal_cloud_save(c.ptr, dir.sub("c.ply").c_str()) == CCAL_OK);
  CHECK(slurp(dir.sub("a.ply")) == slurp(dir.sub("b.ply")));
  CHECK(slurp(dir.sub("a.ply")) != slurp(dir.sub("c.ply")));

  ccal_cloud* too_many = nullptr;
  CHECK(ccal_cloud_downsample(cloud.ptr, rows.size() + 1, 1, &too_many) ==
        CCAL_ERROR);
  CHECK(contains(ccal_last_error(), "exceeds"));
}

TEST_CASE("normal estimation orients toward the viewpoint") {
  CTempDir dir;
  const std::vector<XyzN> rows = plane_grid(2, 12, 0.05, 0.95);
  write_text(dir.sub("plane.csv"), to_csv(rows));
  CloudHandle cloud;
  cloud.ptr = must_load(dir.sub("plane.csv"));
  CHECK(ccal_cloud_has_normals(cloud.ptr) == 0);

  const double above[3] = {0.0, 0.0, 5.0};
  REQUIRE(ccal_cloud_estimate_normals(cloud.ptr, 12, above) == CCAL_OK);
  CHECK(ccal_cloud_has_normals(cloud.ptr) == 1);
  REQUIRE(ccal_cloud_save(cloud.ptr, dir.sub("with_n.csv").c_str()) ==
          CCAL_OK);
  std::ifstream in(dir.sub("with_n.csv"));
  std::string line;
  REQUIRE(std::getline(in, line));
  size_t checked = 0;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, y, z, nx, ny, nz;
    REQUIRE((row >> x >> y >> z >> nx >> ny >> nz));
    CHECK(std::abs(nz - 1.0) < 1e-9);
    ++checked;
  }
  CHECK(checked == rows.size());

  CHECK(ccal_cloud_estimate_normals(cloud.ptr, 12, nullptr) == CCAL_ERROR);
  CHECK(ccal_cloud_estimate_normals(cloud.ptr, 2, above) == CCAL_ERROR);
}

TEST_CASE("registration recovers a small offset on three planes") {
  CTempDir dir;
  write_text(dir.sub("depth.ply"), to_ply(three_planes(21, 0.05, 0.95), true));
  write_text(dir.sub("contact.ply"),
             to_ply(three_planes(5, 0.15, 0.85), false));
  CloudHandle contact, depth;
  contact.ptr = must_load(dir.sub("contact.ply"));
  depth.ptr = must_load(dir.sub("depth.ply"));

  ccal_extrinsic init{0.012, -0.02, 0.015, 1.2 * kPi / 180.0,
                      -0.8 * kPi / 180.0, 1.5 * kPi / 180.0};
  ccal_transform initial;
  REQUIRE(ccal_transform_from_extrinsic(&init, &initial) == CCAL_OK);

  ccal_transform identity;
  REQUIRE(ccal_transform_identity(&identity) == CCAL_OK);

  ccal_transform pose;
  double cost = -1.0;
  int iterations = 0;
  int converged = 0;
  REQUIRE(ccal_register_clouds(contact.ptr, depth.ptr, &initial, nullptr, 2,
                               &pose, &cost, &iterations, &converged) ==
          CCAL_OK);
  CHECK(converged == 1);
  CHECK(iterations <= 50);
  CHECK(cost < 1e-10);
  CHECK(max_abs_diff(pose, identity) < 2e-6);

  ccal_icp_options options;
  ccal_icp_options_init(&options);
  CHECK(options.max_iterations == 100);
  CHECK(options.translation_tolerance == 1e-7);
  CHECK(options.rotation_tolerance == 1e-7);
  CHECK(options.max_correspondence_distance == 0.75);
  CHECK(options.trim_ratio == 0.10);
  CHECK(options.normal_k == 20);

  ccal_transform pose_b;
  REQUIRE(ccal_register_clouds(contact.ptr, depth.ptr, &initial, &options, 2,
                               &pose_b, nullptr, nullptr, nullptr) == CCAL_OK);
  CHECK(std::memcmp(&pose, &pose_b, sizeof(pose)) == 0);

  CHECK(ccal_register_clouds(nullptr, depth.ptr, &initial, nullptr, 1, &pose,
                             nullptr, nullptr, nullptr) == CCAL_ERROR);
}

TEST_CASE("registration reports rank loss on a single plane") {
  CTempDir dir;
  write_text(dir.sub("depth.ply"), to_ply(plane_grid(2, 15, 0.05, 0.95), true));
  write_text(dir.sub("contact.ply"),
             to_ply(plane_grid(2, 5, 0.15, 0.85), false));
  CloudHandle contact, depth;
  contact.ptr = must_load(dir.sub("contact.ply"));
  depth.ptr = must_load(dir.sub("depth.ply"));

  ccal_transform initial;
  REQUIRE(ccal_transform_identity(&initial) == CCAL_OK);
  ccal_transform pose;
  int converged = 1;
  CHECK(ccal_register_clouds(contact.ptr, depth.ptr, &initial, nullptr, 1,
                             &pose, nullptr, nullptr, &converged) ==
        CCAL_DEGENERATE);
  CHECK(converged == 0);
  CHECK(contains(ccal_last_error(), "rank 3"));
  for (int i = 0; i < 9; ++i) CHECK(std::isfinite(pose.rotation[i]));
}

TEST_CASE("simulate and rigid calibrate commands succeed end to end") {
  CTempDir dir;
  write_text(dir.sub("sim.cfg"), kSimulateConfig);
  std::filesystem::create_directories(dir.sub("sim"));

  ccal_simulate_args sim{};
  const std::string sim_cfg = dir.sub("sim.cfg");
  const std::string sim_out = dir.sub("sim");
  sim.config_path = sim_cfg.c_str();
  sim.out_dir = sim_out.c_str();
  sim.seed = 5;
  sim.threads = 2;
  REQUIRE(ccal_cmd_simulate(&sim) == CCAL_OK);
  CHECK(std::filesystem::exists(dir.sub("sim/depth.ply")));
  CHECK(std::filesystem::exists(dir.sub("sim/joints.csv")));
  CHECK(std::filesystem::exists(dir.sub("sim/manifest.txt")));

  write_text(dir.sub("cal.cfg"), kRigidOnlyConfig);
  std::filesystem::create_directories(dir.sub("cal"));
  ccal_calibrate_args cal{};
  const std::string depth = dir.sub("sim/depth.ply");
  const std::string joints = dir.sub("sim/joints.csv");
  const std::string cal_cfg = dir.sub("cal.cfg");
  const std::string cal_out = dir.sub("cal");
  cal.depth_path = depth.c_str();
  cal.joints_path = joints.c_str();
  cal.chain_path = nullptr;
  cal.config_path = cal_cfg.c_str();
  cal.out_dir = cal_out.c_str();
  cal.seed = 5;
  cal.threads = 2;
  REQUIRE(ccal_cmd_calibrate(&cal) == CCAL_OK);
  CHECK(std::filesystem::exists(dir.sub("cal/rigid_report.txt")));
  CHECK(std::filesystem::exists(dir.sub("cal/rigid_extrinsic.txt")));

  CHECK(ccal_cmd_simulate(nullptr) == CCAL_ERROR);
  CHECK(ccal_cmd_calibrate(nullptr) == CCAL_ERROR);
}

TEST_CASE("calibrate command surfaces degeneracy as its own status") {
  CTempDir dir;
  write_text(dir.sub("sim.cfg"), kPlaneOnlyConfig);
  std::filesystem::create_directories(dir.sub("sim"));
  ccal_simulate_args sim{};
  const std::string sim_cfg = dir.sub("sim.cfg");
  const std::string sim_out = dir.sub("sim");
  sim.config_path = sim_cfg.c_str();
  sim.out_dir = sim_out.c_str();
  sim.seed = 11;
  sim.threads = 2;
  REQUIRE(ccal_cmd_simulate(&sim) == CCAL_OK);

  write_text(dir.sub("cal.cfg"), kRigidOnlyConfig);
  std::filesystem::create_directories(dir.sub("cal"));
  ccal_calibrate_args cal{};
  const std::string depth = dir.sub("sim/depth.ply");
  const std::string joints = dir.sub("sim/joints.csv");
  const std::string cal_cfg = dir.sub("cal.cfg");
  const std::string cal_out = dir.sub("cal");
  cal.depth_path = depth.c_str();
  cal.joints_path = joints.c_str();
  cal.config_path = cal_cfg.c_str();
  cal.out_dir = cal_out.c_str();
  cal.seed = 11;
  cal.threads = 2;
  CHECK(ccal_cmd_calibrate(&cal) == CCAL_DEGENERATE);
  CHECK(contains(ccal_last_error(), "rank"));
}

TEST_CASE("stability self test writes its table") {
  CTempDir dir;
  std::filesystem::create_directories(dir.sub("out"));
  ccal_stability_args args{};
  const std::string out = dir.sub("out");
  args.config_path = nullptr;
  args.out_dir = out.c_str();
  args.self_test = 1;
  args.seed = 3;
  args.threads = 1;
  REQUIRE(ccal_cmd_stability(&args) == CCAL_OK);
  const std::string table = slurp(dir.sub("out/stability.csv"));
  CHECK(contains(table, "label,rank,condition_number"));
  CHECK(contains(table, "self_test"));

  CHECK(ccal_cmd_stability(nullptr) == CCAL_ERROR);
}

TEST_CASE("study command rejects missing inputs") {
  CTempDir dir;
  ccal_study_args args{};
  const std::string out = dir.str();
  args.depth_path = "/nonexistent/depth.ply";
  args.joints_path = "/nonexistent/joints.csv";
  args.out_dir = out.c_str();
  args.seed = 1;
  args.threads = 1;
  CHECK(ccal_cmd_downsample_study(&args) == CCAL_ERROR);
  CHECK(std::strlen(ccal_last_error()) > 0);

  CHECK(ccal_cmd_downsample_study(nullptr) == CCAL_ERROR);
}
