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

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ccal {

// Flat "key = value" files with '#' comments. Every key must be consumed:
// check_all_consumed() turns typos into hard errors instead of silently
// ignored settings.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig load(const std::string& path);
  static KeyValueConfig from_string(const std::string& text,
                                    const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<std::string> get_string_list(
      const std::string& key, const std::vector<std::string>& fallback) const;

  std::string require_string(const std::string& key) const;
  double require_double(const std::string& key) const;

  // Throws if any key was never read by one of the accessors above.
  void check_all_consumed() const;

  const std::string& origin() const { return origin_; }

 private:
  std::string raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string origin_ = "<empty>";
};

}  // namespace ccal
