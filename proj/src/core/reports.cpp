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

#include "core/reports.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace ccal {

namespace {

constexpr double kRadToDeg = 57.29577951308232;

std::string spectrum_line(const Eigen::VectorXd& values) {
  std::vector<double> v(values.data(), values.data() + values.size());
  return join_doubles(v);
}

void append_directions(
    std::ostringstream& out,
    const std::vector<std::pair<Vector6d, std::string>>& dirs) {
  for (const auto& [direction, label] : dirs) {
    std::vector<double> v(direction.data(), direction.data() + 6);
    out << "unconstrained direction (" << label << "): " << join_doubles(v)
        << '\n';
  }
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot open for writing: " + tmp);
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error(ErrorCode::kIo, "write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::kIo, "cannot move report into place: " + path);
  }
}

std::string rigid_report_text(const IcpResult& result,
                              const StabilityReport& centered,
                              const StabilityReport& raw) {
  std::ostringstream out;
  out << "rigid alignment report\n";
  out << "converged: " << (result.converged ? "yes" : "no") << '\n';
  out << "iterations: " << result.iterations << '\n';
  out << "correspondences: " << result.correspondences_used << '\n';
  out << "final cost: " << format_double(result.final_cost) << '\n';
  std::string extrinsic_line = "unavailable (pitch at gimbal lock)";
  try {
    extrinsic_line = extrinsic_to_line(transform_to_extrinsic(result.transform));
  } catch (const Error&) {
  }
  out << "extrinsic x y z phi theta psi: " << extrinsic_line << '\n';
  out << "transform r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz: "
      << result.transform.to_line() << '\n';
  out << "eigenvalues centered: " << spectrum_line(centered.eigenvalues)
      << '\n';
  out << "condition number centered: "
      << format_double(centered.condition_number) << '\n';
  out << "eigenvalues raw: " << spectrum_line(raw.eigenvalues) << '\n';
  out << "condition number raw: " << format_double(raw.condition_number)
      << '\n';
  out << "numeric rank centered: " << centered.numeric_rank << '\n';
  append_directions(out, centered.null_directions);
  if (!result.diagnostic.empty()) {
    out << "diagnostic: " << result.diagnostic << '\n';
  }
  return out.str();
}

std::string calibration_report_text(const CalibrationResult& result) {
  std::ostringstream out;
  out << "calibration report\n";
  out << "converged: " << (result.converged ? "yes" : "no") << '\n';
  out << "iterations: " << result.iterations << '\n';
  out << "correspondences: " << result.correspondences_used << '\n';
  out << "final cost: " << format_double(result.final_cost) << '\n';
  out << "extrinsic x y z phi theta psi: "
      << extrinsic_to_line(result.extrinsic) << '\n';
  for (Eigen::Index k = 0; k < result.joint_biases.size(); ++k) {
    out << "joint " << (k + 1)
        << " bias: " << format_double(result.joint_biases[k]) << " rad ("
        << format_double(result.joint_biases[k] * kRadToDeg, 6) << " deg)\n";
  }
  if (result.downgraded_to_rigid) {
    out << "note: bias estimation was not identifiable, extrinsic above is "
           "a rigid-only fit and biases are zero\n";
  }
  const DegeneracyDiagnostic& d = result.degeneracy;
  out << "verdict: " << d.verdict << '\n';
  out << "condition number (gauge excluded): "
      << format_double(d.condition_number) << '\n';
  out << "eigenvalue range (gauge excluded): "
      << format_double(d.min_eigenvalue) << " .. "
      << format_double(d.max_eigenvalue) << '\n';
  out << "determinant (full matrix): " << format_double(d.determinant)
      << '\n';
  for (const auto& [direction, label] : d.near_null) {
    std::vector<double> v(direction.data(),
                          direction.data() + direction.size());
    out << "weak direction (" << label << "): " << join_doubles(v) << '\n';
  }
  if (d.gauge_direction.size() > 0) {
    std::vector<double> v(d.gauge_direction.data(),
                          d.gauge_direction.data() + d.gauge_direction.size());
    out << "gauge direction (base-joint bias vs camera yaw): "
        << join_doubles(v) << '\n';
  }
  return out.str();
}

std::string cost_history_csv(const std::vector<double>& history) {
  std::ostringstream out;
  out << "step,cost\n";
  for (size_t i = 0; i < history.size(); ++i) {
    out << i << ',' << format_double(history[i]) << '\n';
  }
  return out.str();
}

std::string stability_csv(const std::vector<SamplingRow>& rows) {
  std::ostringstream out;
  out << "label,rank,condition_number,lambda_1,lambda_2,lambda_3,lambda_4,"
         "lambda_5,lambda_6\n";
  for (const SamplingRow& row : rows) {
    out << row.label << ',' << row.rank << ','
        << format_double(row.condition_number);
    for (int i = 0; i < 6; ++i) {
      out << ',' << format_double(row.eigenvalues[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string study_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  out << "count,trials,mean_translation_error_m,max_translation_error_m,"
         "mean_rotation_error_deg,max_rotation_error_deg,mean_cost\n";
  for (const StudyRow& row : rows) {
    out << row.count << ',' << row.trials << ','
        << format_double(row.mean_translation_error) << ','
        << format_double(row.max_translation_error) << ','
        << format_double(row.mean_rotation_error_deg) << ','
        << format_double(row.max_rotation_error_deg) << ','
        << format_double(row.mean_cost) << '\n';
  }
  return out.str();
}

std::string manifest_text(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ostringstream out;
  std::time_t now = std::time(nullptr);
  char stamp[64] = "unknown";
  std::tm tm_utc{};
  if (gmtime_r(&now, &tm_utc) != nullptr) {
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  }
  out << "generated_at: " << stamp << '\n';
  for (const auto& [key, value] : entries) {
    out << key << ": " << value << '\n';
  }
  return out.str();
}

}  // namespace ccal
