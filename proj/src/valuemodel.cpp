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

#include "cimmodel/valuemodel.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <numeric>

namespace cim {

std::string_view to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::TwosComplement:
      return "twos_complement";
    case EncodingKind::Offset:
      return "offset";
    case EncodingKind::Differential:
      return "differential";
    case EncodingKind::Xnor:
      return "xnor";
    case EncodingKind::MagnitudeOnly:
      return "magnitude_only";
  }
  return "?";
}

std::optional<EncodingKind> parse_encoding(std::string_view name) {
  for (auto k : {EncodingKind::TwosComplement, EncodingKind::Offset, EncodingKind::Differential, EncodingKind::Xnor,
                 EncodingKind::MagnitudeOnly}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

int SliceScheme::total() const { return std::accumulate(widths.begin(), widths.end(), 0); }

std::vector<int> SliceScheme::offsets() const {
  std::vector<int> out(widths.size(), 0);
  for (std::size_t i = 1; i < widths.size(); ++i) out[i] = out[i - 1] + widths[i - 1];
  return out;
}

namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > 62) throw Error("encoding width must lie in [1, 62], got " + std::to_string(bits));
}

std::string unrepresentable(std::int64_t v, const Encoding& enc) {
  return "value " + std::to_string(v) + " is not representable in " + std::to_string(enc.bits) + "-bit " +
         std::string(to_string(enc.kind)) + " encoding";
}

}  // namespace

EncodedValue encode_value(std::int64_t v, const Encoding& enc) {
  check_bits(enc.bits);
  const std::int64_t full = std::int64_t{1} << enc.bits;
  const std::int64_t half = full >> 1;
  switch (enc.kind) {
    case EncodingKind::TwosComplement:
      if (v < -half || v >= full) throw Error(unrepresentable(v, enc));
      return {v & (full - 1), 0};
    case EncodingKind::Offset:
      if (v < -half || v >= half) throw Error(unrepresentable(v, enc));
      return {v + half, 0};
    case EncodingKind::Xnor:
      if (v != -1 && v != 1) throw Error("xnor encoding requires values in {-1, +1}, got " + std::to_string(v));
      return {v > 0 ? 1 : 0, 0};
    case EncodingKind::MagnitudeOnly: {
      const std::int64_t mag = v < 0 ? -v : v;
      if (mag >= full) throw Error(unrepresentable(v, enc));
      return {mag, v < 0 ? 1 : 0};
    }
    case EncodingKind::Differential:
      if (v >= full || -v >= full) throw Error(unrepresentable(v, enc));
      return {std::max<std::int64_t>(v, 0), std::max<std::int64_t>(-v, 0)};
  }
  throw Error("unknown encoding");
}

EncodedPMF encode_pmf(const ValuePMF& pmf, const Encoding& enc) {
  std::map<std::int64_t, double> levels;
  std::map<std::int64_t, double> companion;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const auto e = encode_value(pmf.support()[i], enc);
    const double p = pmf.probs()[static_cast<Eigen::Index>(i)];
    levels[e.level] += p;
    companion[e.companion] += p;
  }
  EncodedPMF out{ValuePMF::from_masses(levels), std::nullopt, enc.bits};
  if (enc.kind == EncodingKind::MagnitudeOnly) {
    companion.try_emplace(0, 0.0);
    companion.try_emplace(1, 0.0);
    out.companion = ValuePMF::from_masses(companion);
  } else if (enc.kind == EncodingKind::Differential) {
    out.companion = ValuePMF::from_masses(companion);
  }
  return out;
}

std::int64_t slice_value(std::int64_t level, const SliceScheme& scheme, std::size_t slice) {
  if (slice >= scheme.count()) throw Error("slice index out of range");
  const int offset = scheme.offsets()[slice];
  return (level >> offset) & ((std::int64_t{1} << scheme.widths[slice]) - 1);
}

std::vector<ValuePMF> slice_pmf(const ValuePMF& levels, int bits, const SliceScheme& scheme) {
  for (int w : scheme.widths) {
    if (w < 1) throw Error("slice widths must be positive");
  }
  if (scheme.total() != bits) {
    throw Error("slice widths sum to " + std::to_string(scheme.total()) + " but the encoding has " +
                std::to_string(bits) + " bits");
  }
  if (levels.min() < 0 || (bits < 63 && levels.max() >= (std::int64_t{1} << bits)))
    throw Error("encoded level outside the " + std::to_string(bits) + "-bit range");
  std::vector<ValuePMF> out;
  out.reserve(scheme.count());
  for (std::size_t s = 0; s < scheme.count(); ++s) {
    std::map<std::int64_t, double> masses;
    for (std::size_t i = 0; i < levels.size(); ++i)
      masses[slice_value(levels.support()[i], scheme, s)] += levels.probs()[static_cast<Eigen::Index>(i)];
    out.push_back(ValuePMF::from_masses(masses));
  }
  return out;
}

std::vector<ValuePMF> slice_pmf(const EncodedPMF& enc, const SliceScheme& scheme) {
  return slice_pmf(enc.levels, enc.bits, scheme);
}

PhysicalMap PhysicalMap::voltage(double vdd, std::int64_t levels) {
  PhysicalMap m;
  m.kind = MapKind::Voltage;
  m.vdd = vdd;
  m.levels = levels;
  m.check();
  return m;
}

PhysicalMap PhysicalMap::conductance(double g_min, double g_max, std::int64_t levels) {
  PhysicalMap m;
  m.kind = MapKind::Conductance;
  m.g_min = g_min;
  m.g_max = g_max;
  m.levels = levels;
  m.check();
  return m;
}

void PhysicalMap::check() const {
  if (levels < 2) throw Error("physical map needs at least 2 levels");
  if (kind == MapKind::Voltage && !(vdd > 0)) throw Error("voltage map needs vdd > 0");
  if (kind == MapKind::Conductance && !(g_min >= 0 && g_min < g_max))
    throw Error("conductance map needs 0 <= g_min < g_max");
}

double PhysicalMap::operator()(std::int64_t level) const {
  const double x = static_cast<double>(level) / static_cast<double>(levels - 1);
  return kind == MapKind::Voltage ? vdd * x : g_min + (g_max - g_min) * x;
}

Eigen::ArrayXd PhysicalMap::operator()(const Eigen::ArrayXd& x) const {
  const Eigen::ArrayXd frac = x / static_cast<double>(levels - 1);
  if (kind == MapKind::Voltage) return vdd * frac;
  return g_min + (g_max - g_min) * frac;
}

Eigen::ArrayXd support_array(const ValuePMF& pmf) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(pmf.size()));
  for (std::size_t i = 0; i < pmf.size(); ++i) out[static_cast<Eigen::Index>(i)] = static_cast<double>(pmf.support()[i]);
  return out;
}

double expected_moment(const ValuePMF& pmf, const PhysicalMap& map, int power) {
  if (power != 1 && power != 2) throw Error("expected_moment supports power 1 or 2");
  map.check();
  if (pmf.min() < 0 || pmf.max() >= map.levels) {
    throw Error("PMF support [" + std::to_string(pmf.min()) + ", " + std::to_string(pmf.max()) +
                "] exceeds the " + std::to_string(map.levels) + " levels of the physical map");
  }
  const Eigen::ArrayXd q = map(support_array(pmf));
  return power == 1 ? (pmf.probs() * q).sum() : (pmf.probs() * q.square()).sum();
}

double switching_rate(const ValuePMF& pmf, int bits) {
  check_bits(bits);
  if (pmf.min() < 0 || pmf.max() >= (std::int64_t{1} << bits))
    throw Error("PMF support is not representable in " + std::to_string(bits) + " unsigned bits");
  Eigen::ArrayXd ones(static_cast<Eigen::Index>(pmf.size()));
  for (std::size_t i = 0; i < pmf.size(); ++i)
    ones[static_cast<Eigen::Index>(i)] = std::popcount(static_cast<std::uint64_t>(pmf.support()[i]));
  return (pmf.probs() * ones).sum() / bits;
}

}  // namespace cim
