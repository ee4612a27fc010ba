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

#include <string>

#include "core/pointcloud.hpp"

namespace ccal {

/// Reads a cloud from ASCII PLY (first line "ply") or from CSV with an
/// x,y,z[,nx,ny,nz] header. Binary PLY is rejected with a clear message.
/// Parse failures throw kParse and name the offending line.
PointCloud read_cloud(const std::string& path);

/// Writes ASCII PLY when `path` ends in .ply, CSV otherwise. Normals are
/// written when the cloud carries them. Weights are a runtime annotation
/// and are not serialized.
void write_cloud(const PointCloud& cloud, const std::string& path);

}  // namespace ccal
