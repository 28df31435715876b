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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cim {

enum class TensorRole : std::uint8_t { Inputs = 0, Weights = 1, Outputs = 2 };

inline constexpr std::size_t kNumTensors = 3;
inline constexpr std::array<TensorRole, kNumTensors> kTensorRoles{
    TensorRole::Inputs, TensorRole::Weights, TensorRole::Outputs};

constexpr std::size_t index(TensorRole role) { return static_cast<std::size_t>(role); }

std::string_view to_string(TensorRole role);
std::optional<TensorRole> parse_role(std::string_view text);

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid input text. Carries a 1-based position
/// when one is known (line 0 means "no position").
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line = 0, int column = 0);

  int line() const { return line_; }
  int column() const { return column_; }
  /// The message without the position suffix.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

/// The mapping search space for a layer contains no valid mapping.
class EmptySpaceError : public Error {
 public:
  using Error::Error;
};

/// A problem found by a validator. Validators return these instead of
/// throwing so that every problem can be reported at once.
struct Diagnostic {
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace cim
