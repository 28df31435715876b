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
#include <string>
#include <vector>

#include "cimmodel/archspec.hpp"
#include "cimmodel/components.hpp"
#include "cimmodel/mapping.hpp"
#include "cimmodel/valuemodel.hpp"
#include "cimmodel/workload.hpp"

namespace cim {

inline constexpr std::string_view kInputSliceDim = "Islice";
inline constexpr std::string_view kWeightSliceDim = "Wslice";
inline constexpr double kDefaultClockPeriod = 1e-9;

/// A layer as the engine sees it on one architecture: encodings and slice
/// schemes resolved, slice dims appended, operand views built.
struct PreparedLayer {
  WorkloadLayer layer;       // with Islice/Wslice dims when sliced
  WorkloadLayer original;
  std::array<Encoding, kNumTensors> encodings;
  std::array<SliceScheme, kNumTensors> slicing;
  std::array<OperandView, kNumTensors> operands;
  std::array<std::optional<std::size_t>, kNumTensors> slice_dim;  // Inputs, Weights only

  std::uint64_t original_macs() const { return mac_count(original); }
};

/// Reads `<role>_encoding` / `<role>_slices` (role = inputs | weights) or
/// the unqualified `encoding` / `slices` from node attributes.
PreparedLayer prepare_layer(const ArchTree& arch, const WorkloadLayer& layer);

/// One model call per (node, action, tensor) the node's directives can
/// produce. Independent of mappings and instance counts.
EnergyTable precompute_energy_table(const ArchTree& arch, const PreparedLayer& layer, const ModelRegistry& registry);

struct BreakdownEntry {
  std::size_t node = 0;
  Action action = Action::Read;
  std::optional<TensorRole> tensor;
  std::uint64_t count = 0;
  double unit_energy = 0.0;
  double energy = 0.0;
};

struct LeakageEntry {
  std::size_t node = 0;
  double power = 0.0;  // all instances
  double energy = 0.0;
};

struct EvalResult {
  std::string layer;
  std::vector<BreakdownEntry> breakdown;
  std::vector<LeakageEntry> leakage;
  AccessCounts counts;
  double total_energy = 0.0;
  std::uint64_t cycles = 0;
  double latency = 0.0;
  std::vector<double> node_area;  // all instances of each node
  double area = 0.0;
  double utilization = 0.0;
  std::uint64_t macs = 0;  // original-layer MACs
  double objective = 0.0;
  Mapping mapping;

  double energy_of(std::size_t node, Action action) const;
};

double objective_value(Objective o, double energy, double latency, std::uint64_t macs);

/// Throws Error when a counted action has no table entry.
EvalResult evaluate(const Mapping& m, const EnergyTable& table, const ArchTree& arch, const PreparedLayer& layer,
                    Objective objective = Objective::Energy);

struct SearchResult {
  EvalResult best;
  std::vector<EvalResult> top;  // best first, at most cfg.top_k
  std::uint64_t evaluated = 0;
  std::uint64_t raw_space = 0;
};

/// Minimizes cfg.objective over the enumerated space, ties broken by
/// enumeration index. Throws EmptySpaceError when nothing is valid.
SearchResult search(const ArchTree& arch, const PreparedLayer& layer, const EnergyTable& table,
                    const MapperConfig& cfg);
SearchResult search(const ArchTree& arch, const PreparedLayer& layer, const ModelRegistry& registry,
                    const MapperConfig& cfg);

struct LayerSummary {
  std::string name;
  double energy = 0.0;
  std::uint64_t cycles = 0;
  std::uint64_t macs = 0;
  double energy_per_mac = 0.0;
};

struct WorkloadSummary {
  std::vector<LayerSummary> layers;
  double total_energy = 0.0;
  std::uint64_t total_cycles = 0;
  std::uint64_t total_macs = 0;
  double energy_per_mac = 0.0;
};

WorkloadSummary aggregate(const std::vector<EvalResult>& results);

// ---------------------------------------------------------------------------
// Value-level oracle

/// Concrete Inputs and Weights, row-major over the original layer's
/// projection dims in declaration order.
struct OracleTensors {
  std::vector<std::int64_t> inputs;
  std::vector<std::int64_t> weights;
};

enum class DrawMode : std::uint8_t { Pmf, Uniform };

/// Inverse-CDF sampling from mt19937_64 with 53-bit uniforms. Uniform mode
/// draws uniformly over each tensor's PMF support instead.
OracleTensors draw_tensors(const WorkloadLayer& layer, std::uint64_t seed, DrawMode mode = DrawMode::Pmf);

struct OracleResult {
  AccessCounts counts;
  double total_energy = 0.0;
  /// Energy per (node, action, slot), same layout as AccessCounts.
  std::vector<double> energy;
  std::vector<std::int64_t> outputs;  // Einsum result, row-major over Outputs dims
};

/// Executes the loop nest literally, tracking every request, and prices
/// every event with the component's per-value energy.
OracleResult oracle_evaluate(const ArchTree& arch, const Mapping& m, const PreparedLayer& layer,
                             const OracleTensors& tensors, const ModelRegistry& registry);

/// Counts only; no tensors or models needed.
AccessCounts oracle_counts(const ArchTree& arch, const Mapping& m, const PreparedLayer& layer);

}  // namespace cim
