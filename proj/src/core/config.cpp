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

#include "core/config.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace ccal {

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text,
                                           const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, origin + ":" + std::to_string(line_no) +
                                         ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::kParse,
                  origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (cfg.values_.count(key) != 0) {
      throw Error(ErrorCode::kParse, origin + ":" + std::to_string(line_no) +
                                         ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValueConfig::raw(const std::string& key) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double value = 0.0;
  if (!parse_double(it->second, value)) {
    throw Error(ErrorCode::kParse,
                origin_ + ": key '" + key + "' is not a number: " + it->second);
  }
  return value;
}

int64_t KeyValueConfig::get_int(const std::string& key,
                                int64_t fallback) const {
  const double value = get_double(key, static_cast<double>(fallback));
  const auto rounded = static_cast<int64_t>(value);
  if (static_cast<double>(rounded) != value) {
    throw Error(ErrorCode::kParse,
                origin_ + ": key '" + key + "' is not an integer");
  }
  return rounded;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::kParse,
              origin_ + ": key '" + key + "' is not a boolean: " + v);
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& token : split(it->second, ',')) {
    const std::string body = trim(token);
    if (body.empty()) continue;
    double value = 0.0;
    if (!parse_double(body, value)) {
      throw Error(ErrorCode::kParse, origin_ + ": key '" + key +
                                         "' has a malformed entry: " + body);
    }
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  for (const std::string& token : split(it->second, ',')) {
    const std::string body = trim(token);
    if (!body.empty()) out.push_back(body);
  }
  return out;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  return raw(key);
}

double KeyValueConfig::require_double(const std::string& key) const {
  const std::string text = raw(key);
  double value = 0.0;
  if (!parse_double(text, value)) {
    throw Error(ErrorCode::kParse,
                origin_ + ": key '" + key + "' is not a number: " + text);
  }
  return value;
}

void KeyValueConfig::check_all_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (consumed_.count(key) == 0) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                origin_ + ": unknown keys: " + unknown);
  }
}

}  // namespace ccal
