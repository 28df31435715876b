/*
   Copyright 2026 The cim-model Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Internal helpers shared by the YAML readers.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cimmodel/common.hpp"

namespace cim::yaml {

[[noreturn]] inline void fail(const YAML::Node& node, const std::string& message) {
  const auto mark = node.Mark();
  if (mark.is_null()) throw ParseError(message);
  throw ParseError(message, mark.line + 1, mark.column + 1);
}

inline YAML::Node load(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("syntax error: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

inline std::vector<YAML::Node> load_all(const std::string& text) {
  try {
    return YAML::LoadAll(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("syntax error: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

template <typename T>
T as(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "invalid value for " + what);
  }
}

inline std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  return node.Scalar();
}

inline std::int64_t integer(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be an integer");
  return as<std::int64_t>(node, what);
}

inline double number(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a number");
  return as<double>(node, what);
}

inline std::vector<std::string> string_list(const YAML::Node& node, const std::string& what) {
  if (node.IsScalar()) return {node.Scalar()};
  if (!node.IsSequence()) fail(node, what + " must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar(item, what));
  return out;
}

}  // namespace cim::yaml
