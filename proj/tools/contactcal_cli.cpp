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

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "contactcal/contactcal.h"

namespace {

const char* c_str_or_null(const std::string& s) {
  return s.empty() ? nullptr : s.c_str();
}

int finish(const char* command, ccal_status status) {
  if (status == CCAL_OK) {
    std::cout << command << ": ok\n";
  } else if (status == CCAL_DEGENERATE) {
    std::cerr << command << ": degenerate";
    const std::string message = ccal_last_error();
    if (!message.empty()) std::cerr << " (" << message << ")";
    std::cerr << "\n";
  } else {
    std::cerr << command << ": error: " << ccal_last_error() << "\n";
  }
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-based extrinsic and joint-bias calibration"};
  app.set_version_flag("--version", std::string(ccal_version()));
  app.require_subcommand(1);

  uint64_t seed = 1;
  int threads = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master random seed")
        ->capture_default_str();
    sub->add_option("--threads", threads, "Worker thread count")
        ->capture_default_str();
  };

  std::string config;
  std::string out_dir;
  std::string depth;
  std::string joints;
  std::string chain;
  std::string extrinsic;
  std::string ground_truth;
  bool self_test = false;

  CLI::App* simulate =
      app.add_subcommand("simulate", "Render a synthetic dataset");
  simulate->add_option("--config", config, "Simulation config file")
      ->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  add_common(simulate);

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Align a contact map to a depth cloud, then solve biases");
  calibrate->add_option("--depth", depth, "Depth cloud (PLY or CSV)")
      ->required();
  calibrate->add_option("--joints", joints, "Joint log CSV")->required();
  calibrate->add_option("--chain", chain,
                        "Chain description file (default: built-in arm)");
  calibrate->add_option("--config", config, "Calibration config file")
      ->required();
  calibrate->add_option("--out", out_dir, "Output directory")->required();
  add_common(calibrate);

  CLI::App* stability = app.add_subcommand(
      "stability", "Spectral stability of sampling choices");
  stability->add_option("--config", config, "Stability config file");
  stability->add_option("--out", out_dir, "Output directory")->required();
  stability->add_option("--depth", depth, "Depth cloud (dataset mode)");
  stability->add_option("--joints", joints, "Joint log CSV (dataset mode)");
  stability->add_option("--chain", chain, "Chain file (dataset mode)");
  stability->add_option("--extrinsic", extrinsic,
                        "Extrinsic file, one 'x y z phi theta psi' line");
  stability->add_flag("--self-test", self_test,
                      "Analyze the identity form and exit");
  add_common(stability);

  CLI::App* study = app.add_subcommand(
      "downsample-study", "Registration error versus contact-point count");
  study->add_option("--depth", depth, "Depth cloud")->required();
  study->add_option("--joints", joints, "Joint log CSV")->required();
  study->add_option("--chain", chain, "Chain file (default: built-in arm)");
  study->add_option("--config", config, "Study config file")->required();
  study
      ->add_option("--ground-truth", ground_truth,
                   "Ground-truth bundle directory (evaluation only)")
      ->required();
  study->add_option("--out", out_dir, "Output directory")->required();
  add_common(study);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    ccal_simulate_args args{config.c_str(), out_dir.c_str(), seed, threads};
    return finish("simulate", ccal_cmd_simulate(&args));
  }
  if (calibrate->parsed()) {
    ccal_calibrate_args args{depth.c_str(),  joints.c_str(),
                             c_str_or_null(chain), config.c_str(),
                             out_dir.c_str(), seed,
                             threads};
    return finish("calibrate", ccal_cmd_calibrate(&args));
  }
  if (stability->parsed()) {
    if (!self_test && config.empty()) {
      std::cerr << "stability: error: --config is required unless "
                   "--self-test is given\n";
      return 1;
    }
    ccal_stability_args args{c_str_or_null(config),
                             out_dir.c_str(),
                             c_str_or_null(depth),
                             c_str_or_null(joints),
                             c_str_or_null(chain),
                             c_str_or_null(extrinsic),
                             self_test ? 1 : 0,
                             seed,
                             threads};
    return finish("stability", ccal_cmd_stability(&args));
  }
  if (study->parsed()) {
    ccal_study_args args{depth.c_str(),        joints.c_str(),
                         c_str_or_null(chain), config.c_str(),
                         ground_truth.c_str(), out_dir.c_str(),
                         seed,                 threads};
    return finish("downsample-study", ccal_cmd_downsample_study(&args));
  }
  return 1;
}
