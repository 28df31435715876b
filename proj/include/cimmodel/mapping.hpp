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
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cimmodel/archspec.hpp"
#include "cimmodel/components.hpp"
#include "cimmodel/workload.hpp"

namespace cim {

enum class LoopKind : std::uint8_t { Temporal, SpatialX, SpatialY };

std::string_view to_string(LoopKind kind);
std::optional<LoopKind> parse_loop_kind(std::string_view text);

struct Loop {
  std::size_t dim = 0;  // index into the layer's dims
  std::int64_t bound = 1;
  LoopKind kind = LoopKind::Temporal;

  bool spatial() const { return kind != LoopKind::Temporal; }
  friend bool operator==(const Loop&, const Loop&) = default;
};

/// Loops per architecture node, outermost node first. Spatial loops at a
/// node spread work over that node's mesh; temporal loops at a node run
/// inside it, outermost first.
struct Mapping {
  std::vector<std::vector<Loop>> levels;

  friend bool operator==(const Mapping&, const Mapping&) = default;
};

/// Counts per (node, action, tensor slot), dense like EnergyTable.
struct AccessCounts {
  std::size_t num_nodes = 0;
  std::vector<std::uint64_t> values;

  explicit AccessCounts(std::size_t nodes = 0) : num_nodes(nodes), values(nodes * kNumActions * kNumSlots, 0) {}

  std::uint64_t& at(std::size_t node, Action a, std::size_t s) { return values[EnergyTable::offset(node, a, s)]; }
  std::uint64_t at(std::size_t node, Action a, std::size_t s) const { return values[EnergyTable::offset(node, a, s)]; }
  std::uint64_t at(std::size_t node, Action a, TensorRole t) const { return at(node, a, index(t)); }

  friend bool operator==(const AccessCounts&, const AccessCounts&) = default;
};

enum class Objective : std::uint8_t { Energy, Edp, EnergyPerMac };
std::string_view to_string(Objective o);
std::optional<Objective> parse_objective(std::string_view text);

struct MapperConfig {
  Objective objective = Objective::Energy;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  std::uint64_t budget = 1000;
  std::size_t top_k = 5;
  std::size_t jobs = 1;
  bool allow_padding = false;
  /// Replace a node's constraints for this search.
  std::map<std::string, Constraints> constraint_overrides;
};

/// Factorization, mesh, capacity, and constraint problems.
Diagnostics check_valid(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer,
                        bool allow_padding = false, const std::map<std::string, Constraints>* overrides = nullptr);

AccessCounts analyze_access_counts(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer);
/// Same, reusing `out` (resized and zeroed) to avoid allocation.
void analyze_access_counts_into(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer,
                                AccessCounts& out);

/// Spatial occupancy over all meshed nodes, scaled by real/padded MACs.
double utilization(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer);

/// Product of all temporal bounds.
std::uint64_t cycles(const Mapping& m);
/// Per-dim product of bounds (equals the dim size unless padded).
std::vector<std::int64_t> mapped_sizes(const Mapping& m, const WorkloadLayer& layer);

/// Mapping file: `layers: [{layer, levels: [{node, loops: [{dim, bound, kind}]}]}]`.
/// Nodes absent from `levels` get no loops.
Mapping mapping_from_yaml(const std::string& text, const ArchTree& arch, const WorkloadLayer& layer);
std::string mapping_to_yaml(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer);
struct LayerMapping {
  const WorkloadLayer* layer;
  const Mapping* mapping;
};
std::string mappings_to_yaml(const std::vector<LayerMapping>& entries, const ArchTree& arch);
/// Names of the layers present in a mapping file.
std::vector<std::string> mapping_file_layers(const std::string& text);

/// Lazy, deterministic sequence of valid mappings.
///
/// Exhaustive mode walks every ordered factorization of every dim over the
/// mapping slots, times every order of the temporal loops at each slot.
/// Random mode shuffles that space when it is small and samples it with
/// replacement otherwise; both are reproducible from the seed.
class MappingEnumerator {
 public:
  MappingEnumerator(const ArchTree& arch, const WorkloadLayer& layer, const MapperConfig& cfg);

  /// False once the sequence is exhausted.
  bool next(Mapping& out);

  /// Size of the unfiltered space, saturating at UINT64_MAX.
  std::uint64_t raw_size() const { return raw_size_; }

  static constexpr std::uint64_t kMaterializeLimit = 200'000;

 private:
  struct Slot {
    std::size_t level;
    LoopKind kind;
  };
  struct Choice {
    std::vector<std::uint32_t> factorization;  // per dim, index into factorizations_[dim]
    std::vector<std::uint64_t> permutation;    // per temporal slot, permutation rank
  };

  void build_slots();
  void build_factorizations();
  std::uint64_t permutations_for(const std::vector<std::uint32_t>& fact, std::size_t tslot) const;
  Mapping assemble(const Choice& c) const;
  bool valid(const Mapping& m) const;
  bool advance_exhaustive();
  void materialize();

  const ArchTree& arch_;
  const WorkloadLayer& layer_;
  MapperConfig cfg_;
  std::vector<Slot> slots_;
  std::vector<std::size_t> temporal_slots_;  // indices into slots_
  // factorizations_[dim] = list of bound vectors, one bound per slot
  std::vector<std::vector<std::vector<std::int64_t>>> factorizations_;
  std::uint64_t raw_size_ = 0;

  // exhaustive state
  Choice cursor_;
  bool started_ = false;
  bool done_ = false;

  // random state
  std::mt19937_64 rng_;
  bool sampled_ = false;
  std::vector<Choice> materialized_;
  std::size_t next_index_ = 0;
  std::uint64_t emitted_ = 0;
};

}  // namespace cim
