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

#include "cimmodel/common.hpp"

namespace cim {

std::string_view to_string(TensorRole role) {
  switch (role) {
    case TensorRole::Inputs:
      return "Inputs";
    case TensorRole::Weights:
      return "Weights";
    case TensorRole::Outputs:
      return "Outputs";
  }
  return "?";
}

std::optional<TensorRole> parse_role(std::string_view text) {
  for (auto role : kTensorRoles) {
    if (text == to_string(role)) return role;
  }
  return std::nullopt;
}

namespace {

std::string with_position(const std::string& message, int line, int column) {
  if (line <= 0) return message;
  return message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
}

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : Error(with_position(message, line, column)), message_(message), line_(line), column_(column) {}

}  // namespace cim
