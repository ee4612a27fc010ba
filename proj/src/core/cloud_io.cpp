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

#include "core/cloud_io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace ccal {

namespace {

[[noreturn]] void parse_fail(const std::string& path, size_t line_no,
                             const std::string& what) {
  throw Error(ErrorCode::kParse,
              path + ":" + std::to_string(line_no) + ": " + what);
}

bool is_scalar_type(const std::string& t) {
  return t == "float" || t == "float32" || t == "double" || t == "float64" ||
         t == "char" || t == "uchar" || t == "int8" || t == "uint8" ||
         t == "short" || t == "ushort" || t == "int16" || t == "uint16" ||
         t == "int" || t == "uint" || t == "int32" || t == "uint32";
}

PointCloud read_ply(std::ifstream& in, const std::string& path) {
  std::string line;
  size_t line_no = 1;  // the "ply" magic was already consumed
  bool have_format = false;
  size_t vertex_count = 0;
  bool in_vertex_element = false;
  bool seen_vertex_element = false;
  std::vector<std::string> vertex_props;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> tokens = split(trim(line));
    if (tokens.empty()) parse_fail(path, line_no, "blank line in header");
    const std::string& kw = tokens[0];
    if (kw == "comment" || kw == "obj_info") continue;
    if (kw == "format") {
      if (tokens.size() < 2) parse_fail(path, line_no, "malformed format");
      if (tokens[1] != "ascii") {
        parse_fail(path, line_no,
                   "binary PLY is not supported, convert to ascii 1.0");
      }
      have_format = true;
      continue;
    }
    if (kw == "element") {
      if (tokens.size() != 3) parse_fail(path, line_no, "malformed element");
      double count = 0.0;
      if (!parse_double(tokens[2], count) || count < 0.0 ||
          count != std::floor(count)) {
        parse_fail(path, line_no, "malformed element count");
      }
      if (tokens[1] == "vertex") {
        if (seen_vertex_element) {
          parse_fail(path, line_no, "duplicate vertex element");
        }
        seen_vertex_element = true;
        in_vertex_element = true;
        vertex_count = static_cast<size_t>(count);
      } else {
        if (count != 0.0) {
          parse_fail(path, line_no, "only vertex elements are supported");
        }
        in_vertex_element = false;
      }
      continue;
    }
    if (kw == "property") {
      if (!in_vertex_element) continue;
      if (tokens.size() != 3 || tokens[1] == "list" ||
          !is_scalar_type(tokens[1])) {
        parse_fail(path, line_no, "unsupported vertex property");
      }
      vertex_props.push_back(tokens[2]);
      continue;
    }
    if (kw == "end_header") {
      header_done = true;
      break;
    }
    parse_fail(path, line_no, "unknown header keyword '" + kw + "'");
  }
  if (!header_done) parse_fail(path, line_no, "missing end_header");
  if (!have_format) parse_fail(path, line_no, "missing format line");
  if (!seen_vertex_element) parse_fail(path, line_no, "missing vertex element");

  auto prop_index = [&](const char* name) -> int {
    for (size_t i = 0; i < vertex_props.size(); ++i) {
      if (vertex_props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const std::array<int, 3> xyz{prop_index("x"), prop_index("y"),
                               prop_index("z")};
  if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0) {
    parse_fail(path, line_no, "vertex element lacks x, y, z properties");
  }
  const std::array<int, 3> nxyz{prop_index("nx"), prop_index("ny"),
                                prop_index("nz")};
  const bool with_normals = nxyz[0] >= 0 && nxyz[1] >= 0 && nxyz[2] >= 0;
  if ((nxyz[0] >= 0 || nxyz[1] >= 0 || nxyz[2] >= 0) && !with_normals) {
    parse_fail(path, line_no, "incomplete nx, ny, nz property set");
  }

  PointCloud cloud;
  cloud.reserve(vertex_count);
  if (with_normals) cloud.normals.reserve(vertex_count);
  std::vector<double> values(vertex_props.size());
  for (size_t v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) {
      parse_fail(path, line_no, "vertex data ends early, expected " +
                                    std::to_string(vertex_count) + " rows");
    }
    ++line_no;
    const std::vector<std::string> tokens = split(trim(line));
    if (tokens.size() != vertex_props.size()) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(vertex_props.size()) +
                     " values, got " + std::to_string(tokens.size()));
    }
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (!parse_double(tokens[i], values[i])) {
        parse_fail(path, line_no, "malformed number '" + tokens[i] + "'");
      }
      if (!std::isfinite(values[i])) {
        parse_fail(path, line_no, "non-finite value");
      }
    }
    cloud.add_point(
        Eigen::Vector3d(values[xyz[0]], values[xyz[1]], values[xyz[2]]));
    if (with_normals) {
      cloud.normals.emplace_back(values[nxyz[0]], values[nxyz[1]],
                                 values[nxyz[2]]);
    }
  }
  return cloud;
}

PointCloud read_csv(std::ifstream& in, const std::string& path,
                    const std::string& header_line) {
  const std::vector<std::string> header = split(trim(header_line), ',');
  std::vector<std::string> names;
  for (const std::string& h : header) names.push_back(trim(h));
  bool with_normals = false;
  if (names == std::vector<std::string>{"x", "y", "z"}) {
    with_normals = false;
  } else if (names ==
             std::vector<std::string>{"x", "y", "z", "nx", "ny", "nz"}) {
    with_normals = true;
  } else {
    parse_fail(path, 1, "expected header 'x,y,z' or 'x,y,z,nx,ny,nz'");
  }
  PointCloud cloud;
  std::string line;
  size_t line_no = 1;
  const size_t width = with_normals ? 6 : 3;
  std::vector<double> values(width);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::vector<std::string> tokens = split(body, ',');
    if (tokens.size() != width) {
      parse_fail(path, line_no, "expected " + std::to_string(width) +
                                    " fields, got " +
                                    std::to_string(tokens.size()));
    }
    for (size_t i = 0; i < width; ++i) {
      if (!parse_double(trim(tokens[i]), values[i])) {
        parse_fail(path, line_no,
                   "malformed number '" + trim(tokens[i]) + "'");
      }
      if (!std::isfinite(values[i])) {
        parse_fail(path, line_no, "non-finite value");
      }
    }
    cloud.add_point(Eigen::Vector3d(values[0], values[1], values[2]));
    if (with_normals) {
      cloud.normals.emplace_back(values[3], values[4], values[5]);
    }
  }
  return cloud;
}

}  // namespace

PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open cloud file: " + path);
  }
  std::string first;
  if (!std::getline(in, first)) {
    throw Error(ErrorCode::kParse, path + ": empty cloud file");
  }
  PointCloud cloud;
  if (trim(first) == "ply") {
    cloud = read_ply(in, path);
  } else {
    cloud = read_csv(in, path, first);
  }
  if (cloud.empty()) {
    throw Error(ErrorCode::kEmptyCloud, path + ": cloud file has no points");
  }
  // An all-zero normal marks a point whose normal could not be estimated;
  // it round-trips as weight 0. Anything else must be unit length.
  for (size_t i = 0; i < cloud.normals.size(); ++i) {
    const double norm = cloud.normals[i].norm();
    if (norm <= 1e-9) {
      cloud.weights[i] = 0.0;
    } else if (std::abs(norm - 1.0) > 1e-6) {
      throw Error(ErrorCode::kParse,
                  path + ": non-unit normal at vertex " + std::to_string(i));
    }
  }
  cloud.validate();
  return cloud;
}

void write_cloud(const PointCloud& cloud, const std::string& path) {
  if (cloud.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "refusing to write empty cloud");
  }
  cloud.validate();
  const bool ply = path.size() >= 4 &&
                   path.compare(path.size() - 4, 4, ".ply") == 0;
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write cloud file: " + path);
  }
  const bool with_normals = cloud.has_normals();
  if (ply) {
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << '\n';
    out << "property double x\nproperty double y\nproperty double z\n";
    if (with_normals) {
      out << "property double nx\nproperty double ny\nproperty double nz\n";
    }
    out << "end_header\n";
    for (size_t i = 0; i < cloud.size(); ++i) {
      out << format_double(cloud.points[i].x()) << ' '
          << format_double(cloud.points[i].y()) << ' '
          << format_double(cloud.points[i].z());
      if (with_normals) {
        out << ' ' << format_double(cloud.normals[i].x()) << ' '
            << format_double(cloud.normals[i].y()) << ' '
            << format_double(cloud.normals[i].z());
      }
      out << '\n';
    }
  } else {
    out << (with_normals ? "x,y,z,nx,ny,nz" : "x,y,z") << '\n';
    for (size_t i = 0; i < cloud.size(); ++i) {
      out << format_double(cloud.points[i].x()) << ','
          << format_double(cloud.points[i].y()) << ','
          << format_double(cloud.points[i].z());
      if (with_normals) {
        out << ',' << format_double(cloud.normals[i].x()) << ','
            << format_double(cloud.normals[i].y()) << ','
            << format_double(cloud.normals[i].z());
      }
      out << '\n';
    }
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

}  // namespace ccal
