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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cimmodel/common.hpp"

namespace cim {

/// Probability mass function over integer operand values.
///
/// The support is strictly increasing and the probabilities are
/// non-negative and sum to one (within kPmfTolerance). Instances are
/// immutable once built; all constructors validate.
class ValuePMF {
 public:
  static constexpr double kPmfTolerance = 1e-9;

  /// Throws Error if the invariants do not hold.
  ValuePMF(std::vector<std::int64_t> support, Eigen::ArrayXd probs);
  ValuePMF(std::vector<std::int64_t> support, const std::vector<double>& probs);

  /// Accumulates (value, mass) pairs; duplicate values are merged. The
  /// masses must already be normalized.
  static ValuePMF from_masses(const std::map<std::int64_t, double>& masses);

  const std::vector<std::int64_t>& support() const { return support_; }
  const Eigen::ArrayXd& probs() const { return probs_; }
  std::size_t size() const { return support_.size(); }

  std::int64_t min() const { return support_.front(); }
  std::int64_t max() const { return support_.back(); }
  double mean() const;

  /// Probability of a value (0 when outside the support).
  double prob(std::int64_t value) const;

  friend bool operator==(const ValuePMF& a, const ValuePMF& b) {
    return a.support_ == b.support_ && (a.probs_ == b.probs_).all();
  }

 private:
  std::vector<std::int64_t> support_;
  Eigen::ArrayXd probs_;
};

ValuePMF build_pmf(std::span<const std::int64_t> samples);

enum class SynthKind { Uniform, Delta, TwoPoint };

/// Synthetic low-fidelity distributions.
///   Uniform:  params = {lo, hi}        (inclusive, lo <= hi)
///   Delta:    params = {v}
///   TwoPoint: params = {a, b, p}       (P(a) = p, P(b) = 1 - p)
ValuePMF synth_pmf(SynthKind kind, std::span<const double> params);

ValuePMF uniform_pmf(std::int64_t lo, std::int64_t hi);
ValuePMF delta_pmf(std::int64_t value);
ValuePMF two_point_pmf(std::int64_t a, std::int64_t b, double p);

/// Reads one integer per line (blank lines and '#' comments skipped).
std::vector<std::int64_t> read_samples(const std::filesystem::path& path);

struct Dim {
  std::string name;
  std::int64_t size = 1;
};

struct EinsumSpec {
  std::vector<Dim> dims;
  /// Dim indices indexing each tensor, ordered as declared.
  std::array<std::vector<std::size_t>, kNumTensors> projections;

  std::optional<std::size_t> dim_index(std::string_view name) const;
  const std::vector<std::size_t>& projection(TensorRole role) const {
    return projections[index(role)];
  }
  bool indexes(TensorRole role, std::size_t dim) const;
  /// Number of distinct elements of a tensor.
  std::uint64_t tensor_size(TensorRole role) const;

  /// Throws Error describing the first broken invariant.
  void check() const;
};

struct WorkloadLayer {
  std::string name;
  EinsumSpec einsum;
  /// One PMF per tensor (independent distributions; never a joint table).
  std::array<std::optional<ValuePMF>, kNumTensors> pmfs;
  std::array<int, kNumTensors> bits{8, 8, 8};
  std::array<bool, kNumTensors> is_signed{false, false, false};
  /// True when the Outputs PMF was not supplied and was defaulted to
  /// uniform over the output bit range.
  bool outputs_pmf_defaulted = false;
  /// Number of samples behind each file-backed PMF (0 when synthetic).
  std::array<std::size_t, kNumTensors> sample_counts{0, 0, 0};

  const ValuePMF& pmf(TensorRole role) const;
  std::size_t stored_pmf_count() const;

  /// Throws Error describing the first broken invariant.
  void check() const;
};

std::uint64_t mac_count(const WorkloadLayer& layer);

/// Inclusive representable range for a width and signedness.
std::pair<std::int64_t, std::int64_t> representable_range(int bits, bool is_signed);

/// Parses the `layers:` document. Relative PMF sample files resolve against
/// `base_dir`.
std::vector<WorkloadLayer> parse_workload(std::string_view text,
                                          const std::filesystem::path& base_dir = ".");

std::vector<WorkloadLayer> load_workload(const std::filesystem::path& path);

}  // namespace cim
