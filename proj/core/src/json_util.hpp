// Copyright 2026 The mixsim Authors
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

// Helpers for reading JSON documents with error messages that carry the
// offending field path ("scenario.overlap_range[1]").

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "mixsim/error.hpp"

namespace mixsim::detail {

using nlohmann::json;

inline std::string join_path(const std::string& parent, std::string_view key) {
  if (parent.empty()) return std::string(key);
  return parent + "." + std::string(key);
}

inline std::string index_path(const std::string& parent, std::size_t index) {
  return parent + "[" + std::to_string(index) + "]";
}

template <typename T>
T as(const json& value, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!value.is_number()) throw Error(path, "expected a number");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!value.is_number_integer()) throw Error(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (value.is_number_integer() && !value.is_number_unsigned() && value.get<std::int64_t>() < 0) {
          throw Error(path, "expected a non-negative integer");
        }
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!value.is_string()) throw Error(path, "expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!value.is_boolean()) throw Error(path, "expected a boolean");
    }
    return value.get<T>();
  } catch (const json::exception& e) {
    throw Error(path, e.what());
  }
}

inline const json& require(const json& object, std::string_view key, const std::string& path) {
  if (!object.is_object()) throw Error(path, "expected an object");
  auto it = object.find(std::string(key));
  if (it == object.end()) throw Error(join_path(path, key), "missing required field");
  return *it;
}

template <typename T>
T require_as(const json& object, std::string_view key, const std::string& path) {
  return as<T>(require(object, key, path), join_path(path, key));
}

template <typename T>
T value_or(const json& object, std::string_view key, T fallback, const std::string& path) {
  auto it = object.find(std::string(key));
  if (it == object.end() || it->is_null()) return fallback;
  return as<T>(*it, join_path(path, key));
}

inline bool has(const json& object, std::string_view key) {
  auto it = object.find(std::string(key));
  return it != object.end() && !it->is_null();
}

// Reads [lo, hi]; a bare number n is accepted as [n, n]. Requires lo <= hi.
inline std::pair<double, double> as_range(const json& value, const std::string& path) {
  if (value.is_number()) {
    const double v = value.get<double>();
    return {v, v};
  }
  if (!value.is_array() || value.size() != 2) throw Error(path, "expected [lo, hi]");
  const double lo = as<double>(value[0], index_path(path, 0));
  const double hi = as<double>(value[1], index_path(path, 1));
  if (!(lo <= hi)) throw Error(path, "range lower bound exceeds upper bound");
  return {lo, hi};
}

inline json range_to_json(std::pair<double, double> range) {
  return json::array({range.first, range.second});
}

}  // namespace mixsim::detail
