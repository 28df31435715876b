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

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cimmodel/workload.hpp"

namespace cim {

enum class EncodingKind : std::uint8_t { TwosComplement, Offset, Differential, Xnor, MagnitudeOnly };

std::string_view to_string(EncodingKind kind);
/// Accepts twos_complement, offset, differential, xnor, magnitude_only.
std::optional<EncodingKind> parse_encoding(std::string_view name);

struct Encoding {
  EncodingKind kind = EncodingKind::TwosComplement;
  int bits = 8;
};

/// Encoded levels of one tensor. `companion` holds the negative line for
/// Differential and the sign bit (0 = non-negative) for MagnitudeOnly.
struct EncodedPMF {
  ValuePMF levels;
  std::optional<ValuePMF> companion;
  int bits = 0;
};

/// Bit widths LSB-first.
struct SliceScheme {
  std::vector<int> widths;

  static SliceScheme whole(int bits) { return SliceScheme{{bits}}; }
  int total() const;
  std::vector<int> offsets() const;
  std::size_t count() const { return widths.size(); }
};

EncodedPMF encode_pmf(const ValuePMF& pmf, const Encoding& enc);

/// Exact marginals of (level >> offset_i) & (2^w_i - 1), one per slice.
std::vector<ValuePMF> slice_pmf(const EncodedPMF& enc, const SliceScheme& scheme);
std::vector<ValuePMF> slice_pmf(const ValuePMF& levels, int bits, const SliceScheme& scheme);

// Per-value counterparts used by the oracle. They agree with the PMF
// transforms above on every support point.
struct EncodedValue {
  std::int64_t level = 0;
  std::int64_t companion = 0;
};
EncodedValue encode_value(std::int64_t value, const Encoding& enc);
std::int64_t slice_value(std::int64_t level, const SliceScheme& scheme, std::size_t slice);

enum class MapKind : std::uint8_t { Voltage, Conductance };

/// Affine level -> physical quantity map.
///   Voltage:     V(x) = vdd * x / (levels - 1)
///   Conductance: G(y) = g_min + (g_max - g_min) * y / (levels - 1)
struct PhysicalMap {
  MapKind kind = MapKind::Voltage;
  double vdd = 1.0;
  double g_min = 0.0;
  double g_max = 0.0;
  std::int64_t levels = 2;

  static PhysicalMap voltage(double vdd, std::int64_t levels);
  static PhysicalMap conductance(double g_min, double g_max, std::int64_t levels);

  void check() const;
  double operator()(std::int64_t level) const;
  Eigen::ArrayXd operator()(const Eigen::ArrayXd& levels) const;
};

/// Sum over the support of P(x) * map(x)^power, power in {1, 2}.
double expected_moment(const ValuePMF& pmf, const PhysicalMap& map, int power);

/// Expected fraction of set bits, assuming return-to-zero between values.
double switching_rate(const ValuePMF& pmf, int bits);

/// Support values as a double array.
Eigen::ArrayXd support_array(const ValuePMF& pmf);

}  // namespace cim
