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
#include <utility>
#include <vector>

#include "core/calibration.hpp"
#include "core/registration.hpp"
#include "core/stability.hpp"

namespace ccal {

/// Writes via a temporary file in the same directory plus rename, so a
/// reader never observes a half-written report.
void write_text_atomic(const std::string& path, const std::string& content);

/// Human-readable summary of a rigid alignment: pose, cost, and the
/// spectrum of the quadratic form both raw and shifted to the scene
/// centroid.
std::string rigid_report_text(const IcpResult& result,
                              const StabilityReport& centered,
                              const StabilityReport& raw);

std::string calibration_report_text(const CalibrationResult& result);

std::string cost_history_csv(const std::vector<double>& history);

std::string stability_csv(const std::vector<SamplingRow>& rows);

/// One row of the correspondence-count study.
struct StudyRow {
  size_t count{0};   ///< contact points kept, 0 means all
  size_t trials{0};
  double mean_translation_error{0.0};  ///< m, vs ground truth
  double max_translation_error{0.0};
  double mean_rotation_error_deg{0.0};
  double max_rotation_error_deg{0.0};
  double mean_cost{0.0};
};

std::string study_csv(const std::vector<StudyRow>& rows);

/// Key/value run log with a wall-clock stamp; the one output that is not
/// reproducible byte for byte.
std::string manifest_text(
    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace ccal
