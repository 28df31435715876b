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

#include "cimmodel/mapping.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "internal.hpp"
#include "yaml_util.hpp"

namespace cim {

std::string_view to_string(LoopKind kind) {
  switch (kind) {
    case LoopKind::Temporal:
      return "temporal";
    case LoopKind::SpatialX:
      return "spatial_x";
    case LoopKind::SpatialY:
      return "spatial_y";
  }
  return "?";
}

std::optional<LoopKind> parse_loop_kind(std::string_view text) {
  for (auto k : {LoopKind::Temporal, LoopKind::SpatialX, LoopKind::SpatialY}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::Energy:
      return "energy";
    case Objective::Edp:
      return "edp";
    case Objective::EnergyPerMac:
      return "energy_per_mac";
  }
  return "?";
}

std::optional<Objective> parse_objective(std::string_view text) {
  for (auto o : {Objective::Energy, Objective::Edp, Objective::EnergyPerMac}) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

std::uint64_t cycles(const Mapping& m) {
  std::uint64_t c = 1;
  for (const auto& level : m.levels) {
    for (const auto& l : level) {
      if (!l.spatial()) c *= static_cast<std::uint64_t>(l.bound);
    }
  }
  return c;
}

std::vector<std::int64_t> mapped_sizes(const Mapping& m, const WorkloadLayer& layer) {
  std::vector<std::int64_t> sizes(layer.einsum.dims.size(), 1);
  for (const auto& level : m.levels) {
    for (const auto& l : level) {
      if (l.dim < sizes.size()) sizes[l.dim] *= l.bound;
    }
  }
  return sizes;
}

// ---------------------------------------------------------------------------
// Loop nest in global order: for each node, its spatial loops (above the
// node) and then its temporal loops (inside the node). Loops of bound 1
// never change a count and are dropped.

namespace {

constexpr std::size_t kMaxNest = 128;

struct NestLoop {
  std::uint32_t level;
  bool spatial;
  std::int64_t bound;
  std::uint64_t dim_bit;
};

struct Nest {
  std::array<NestLoop, kMaxNest> loops;
  std::size_t size = 0;
};

void build_nest(const Mapping& m, Nest& nest) {
  nest.size = 0;
  for (std::size_t j = 0; j < m.levels.size(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& l : m.levels[j]) {
        if (l.spatial() != (pass == 0) || l.bound == 1) continue;
        if (nest.size == kMaxNest) throw Error("mapping has more than 128 non-trivial loops");
        nest.loops[nest.size++] = {static_cast<std::uint32_t>(j), l.spatial(), l.bound, std::uint64_t{1} << l.dim};
      }
    }
  }
}

std::uint64_t projection_mask(const WorkloadLayer& layer, TensorRole role) {
  std::uint64_t mask = 0;
  for (auto d : layer.einsum.projection(role)) mask |= std::uint64_t{1} << d;
  return mask;
}

// Extent per instance of node j: relevant temporal loops at levels >= j and
// relevant spatial loops below j's own mesh.
std::uint64_t tile_at(const Nest& nest, std::size_t j, std::uint64_t mask) {
  std::uint64_t tile = 1;
  for (std::size_t i = 0; i < nest.size; ++i) {
    const auto& l = nest.loops[i];
    if (!(l.dim_bit & mask)) continue;
    if (l.spatial ? l.level > j : l.level >= j) tile *= static_cast<std::uint64_t>(l.bound);
  }
  return tile;
}

// Number of distinct tiles node j holds over time, one tile at a time:
// outer temporal loops up to and including the innermost relevant one.
std::uint64_t residencies_at(const Nest& nest, std::size_t j, std::uint64_t mask) {
  std::uint64_t prod = 1;
  std::uint64_t res = 1;
  for (std::size_t i = 0; i < nest.size; ++i) {
    const auto& l = nest.loops[i];
    if (l.spatial || l.level >= j) continue;
    prod *= static_cast<std::uint64_t>(l.bound);
    if (l.dim_bit & mask) res = prod;
  }
  return res;
}

}  // namespace

void analyze_access_counts_into(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer,
                                AccessCounts& out) {
  const std::size_t L = arch.nodes.size();
  if (m.levels.size() != L) throw Error("mapping has " + std::to_string(m.levels.size()) + " levels, architecture has " + std::to_string(L));
  if (layer.einsum.dims.size() > 64) throw Error("layers with more than 64 dims are not supported");
  out.num_nodes = L;
  out.values.assign(L * kNumActions * kNumSlots, 0);

  Nest nest;
  build_nest(m, nest);

  std::uint64_t temporal_total = 1;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < nest.size; ++i) {
    total *= static_cast<std::uint64_t>(nest.loops[i].bound);
    if (!nest.loops[i].spatial) temporal_total *= static_cast<std::uint64_t>(nest.loops[i].bound);
  }
  out.at(L - 1, Action::Compute, kNoTensorSlot) = total;

  if (L > kMaxNest) throw Error("architecture too deep");
  std::array<std::uint64_t, kMaxNest> inst_prefix{};  // instances of node j
  {
    std::uint64_t p = 1;
    std::size_t i = 0;
    for (std::size_t j = 0; j < L; ++j) {
      for (; i < nest.size && nest.loops[i].level == j; ++i) {
        if (nest.loops[i].spatial) p *= static_cast<std::uint64_t>(nest.loops[i].bound);
      }
      inst_prefix[j] = p;
    }
  }

  enum : std::uint8_t { Distinct, Merged, Payload };
  std::array<std::uint8_t, kMaxNest> state{};

  for (auto role : kTensorRoles) {
    const std::uint64_t mask = projection_mask(layer, role);
    const std::size_t s = index(role);
    state.fill(Distinct);
    std::uint64_t events = temporal_total;
    std::uint64_t payload = 1;

    auto count = [&]() {
      std::uint64_t c = events * payload;
      for (std::size_t i = 0; i < nest.size; ++i) {
        const auto& l = nest.loops[i];
        if (!l.spatial) continue;
        if (state[i] == Distinct || (state[i] == Merged && (l.dim_bit & mask))) c *= static_cast<std::uint64_t>(l.bound);
      }
      return c;
    };

    for (std::size_t jj = L; jj-- > 0;) {
      const auto& node = arch.nodes[jj];
      switch (node.reuse(role)) {
        case Reuse::TemporalReuse: {
          const std::uint64_t incoming = count();
          const std::uint64_t res = residencies_at(nest, jj, mask);
          const std::uint64_t tile = tile_at(nest, jj, mask);
          if (role == TensorRole::Outputs) {
            const std::uint64_t written = res * inst_prefix[jj] * tile;
            out.at(jj, Action::Write, s) += written;
            out.at(jj, Action::Update, s) += incoming - written;
            out.at(jj, Action::Read, s) += written;
          } else {
            out.at(jj, Action::Read, s) += incoming;
          }
          // The node now sources its own tiles (fills or drains).
          events = res;
          payload = tile;
          for (std::size_t i = 0; i < nest.size; ++i) {
            if (nest.loops[i].spatial) state[i] = nest.loops[i].level <= jj ? Distinct : Payload;
          }
          if (role != TensorRole::Outputs) out.at(jj, Action::Fill, s) += count();
          break;
        }
        case Reuse::NoCoalesce:
          out.at(jj, Action::Convert, s) += count();
          break;
        case Reuse::Coalesce:
          out.at(jj, Action::Convert, s) += count();
          for (std::size_t i = 0; i < nest.size; ++i) {
            if (nest.loops[i].spatial && nest.loops[i].level > jj && state[i] == Distinct) state[i] = Merged;
          }
          break;
        case Reuse::Bypass:
          break;
      }
      if (node.spatial_reuse[s]) {
        for (std::size_t i = 0; i < nest.size; ++i) {
          if (nest.loops[i].spatial && nest.loops[i].level == jj && state[i] == Distinct) state[i] = Merged;
        }
      }
    }
  }
}

AccessCounts analyze_access_counts(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer) {
  AccessCounts out(arch.nodes.size());
  analyze_access_counts_into(m, arch, layer, out);
  return out;
}

double utilization(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer) {
  // The padded iteration space is the product of every loop bound.
  double used = 1.0, padded = 1.0;
  for (const auto& level : m.levels) {
    for (const auto& l : level) {
      if (l.spatial()) used *= static_cast<double>(l.bound);
      padded *= static_cast<double>(l.bound);
    }
  }
  double capacity = 1.0;
  for (const auto& n : arch.nodes) capacity *= static_cast<double>(n.mesh());
  return used / capacity * (static_cast<double>(mac_count(layer)) / padded);
}

// ---------------------------------------------------------------------------
// Validity

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Returns true when valid. With `diags` null, stops at the first problem
// without formatting messages.
bool check_core(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer, bool allow_padding,
                const std::map<std::string, Constraints>* overrides, Diagnostics* diags) {
  bool ok = true;
  auto fail = [&](auto&& make_message) {
    ok = false;
    if (diags) diags->push_back({make_message()});
    return diags != nullptr;  // keep going only when collecting
  };
  const auto& dims = layer.einsum.dims;
  const std::size_t L = arch.nodes.size();
  if (m.levels.size() != L) {
    fail([&] { return "mapping has " + std::to_string(m.levels.size()) + " levels but the architecture has " + std::to_string(L) + " nodes"; });
    return false;
  }
  for (std::size_t j = 0; j < L; ++j) {
    for (const auto& l : m.levels[j]) {
      if (l.dim >= dims.size()) {
        fail([&] { return "node " + arch.nodes[j].name + ": loop references unknown dim index " + std::to_string(l.dim); });
        return false;
      }
      if (l.bound < 1) {
        if (!fail([&] { return "node " + arch.nodes[j].name + ": loop over " + dims[l.dim].name + " has bound " + std::to_string(l.bound); }))
          return false;
      }
    }
  }
  if (!ok) return false;

  const auto sizes = mapped_sizes(m, layer);
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const bool exact = sizes[d] == dims[d].size;
    if (exact || (allow_padding && sizes[d] > dims[d].size)) continue;
    if (!fail([&] {
          return "factorization mismatch for dim " + dims[d].name + ": bounds multiply to " + std::to_string(sizes[d]) +
                 ", size is " + std::to_string(dims[d].size);
        }))
      return false;
  }

  std::array<std::uint64_t, kNumTensors> masks{};
  for (auto r : kTensorRoles) masks[index(r)] = projection_mask(layer, r);

  for (std::size_t j = 0; j < L; ++j) {
    const auto& node = arch.nodes[j];
    const Constraints* c = &node.constraints;
    if (overrides) {
      auto it = overrides->find(node.name);
      if (it != overrides->end()) c = &it->second;
    }
    std::int64_t x = 1, y = 1;
    for (const auto& l : m.levels[j]) {
      if (l.kind == LoopKind::SpatialX) x *= l.bound;
      if (l.kind == LoopKind::SpatialY) y *= l.bound;
      if (l.bound == 1) continue;
      if (l.spatial() && c->spatial_dims && !contains(*c->spatial_dims, dims[l.dim].name)) {
        if (!fail([&] { return "node " + node.name + ": dim " + dims[l.dim].name + " is not allowed on this mesh (spatial_dims)"; }))
          return false;
      }
      if (!l.spatial() && c->keep_dims && !contains(*c->keep_dims, dims[l.dim].name)) {
        if (!fail([&] { return "node " + node.name + ": dim " + dims[l.dim].name + " may not iterate here (keep_dims)"; }))
          return false;
      }
    }
    if (x > node.mesh_x) {
      if (!fail([&] { return "mesh overflow at node " + node.name + ": spatial_x bounds multiply to " + std::to_string(x) + " > meshX " + std::to_string(node.mesh_x); }))
        return false;
    }
    if (y > node.mesh_y) {
      if (!fail([&] { return "mesh overflow at node " + node.name + ": spatial_y bounds multiply to " + std::to_string(y) + " > meshY " + std::to_string(node.mesh_y); }))
        return false;
    }
    if (!c->max_tile.empty()) {
      for (const auto& [dim_name, limit] : c->max_tile) {
        auto d = layer.einsum.dim_index(dim_name);
        if (!d) continue;
        std::int64_t extent = 1;
        for (std::size_t k = j; k < L; ++k) {
          for (const auto& l : m.levels[k]) {
            if (l.dim == *d && (l.spatial() ? k > j : true)) extent *= l.bound;
          }
        }
        if (extent > limit) {
          if (!fail([&] { return "node " + node.name + ": tile of dim " + dim_name + " is " + std::to_string(extent) + " > max_tile " + std::to_string(limit); }))
            return false;
        }
      }
    }
    if (auto cap = attr_number(node.attributes, "capacity")) {
      Nest nest;
      build_nest(m, nest);
      std::uint64_t footprint = 0;
      for (auto r : kTensorRoles) {
        if (node.reuse(r) == Reuse::TemporalReuse) footprint += tile_at(nest, j, masks[index(r)]);
      }
      if (static_cast<double>(footprint) > *cap) {
        if (!fail([&] {
              return "capacity exceeded at node " + node.name + ": tile footprint " + std::to_string(footprint) +
                     " words > capacity " + format_attr(*cap) + " words";
            }))
          return false;
      }
    }
  }
  return ok;
}

}  // namespace

Diagnostics check_valid(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer, bool allow_padding,
                        const std::map<std::string, Constraints>* overrides) {
  Diagnostics diags;
  check_core(m, arch, layer, allow_padding, overrides, &diags);
  return diags;
}

namespace detail {
bool mapping_is_valid(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer, bool allow_padding,
                      const std::map<std::string, Constraints>* overrides) {
  return check_core(m, arch, layer, allow_padding, overrides, nullptr);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Mapping files

namespace {

YAML::Node find_layer_entry(const YAML::Node& root, const std::string& layer_name) {
  if (!root.IsMap()) throw ParseError("mapping document must be a map", 1, 1);
  if (root["levels"]) return root;
  const auto layers = root["layers"];
  if (!layers || !layers.IsSequence()) yaml::fail(root, "mapping document needs a 'layers:' list");
  for (const auto& entry : layers) {
    if (entry["layer"] && yaml::scalar(entry["layer"], "layer") == layer_name) return entry;
  }
  yaml::fail(layers, "mapping file has no entry for layer " + layer_name);
}

}  // namespace

Mapping mapping_from_yaml(const std::string& text, const ArchTree& arch, const WorkloadLayer& layer) {
  const auto root = yaml::load(text);
  const auto entry = find_layer_entry(root, layer.name);
  const auto levels = entry["levels"];
  if (!levels || !levels.IsSequence()) yaml::fail(entry, "mapping entry needs a 'levels:' list");
  Mapping m;
  m.levels.resize(arch.nodes.size());
  std::vector<bool> seen(arch.nodes.size(), false);
  for (const auto& lvl : levels) {
    if (!lvl["node"]) yaml::fail(lvl, "mapping level is missing 'node'");
    const auto name = yaml::scalar(lvl["node"], "node");
    auto j = arch.find(name);
    if (!j) yaml::fail(lvl["node"], "mapping references unknown node " + name);
    if (seen[*j]) yaml::fail(lvl["node"], "node " + name + " listed twice in the mapping");
    seen[*j] = true;
    const auto loops = lvl["loops"];
    if (!loops) continue;
    if (!loops.IsSequence()) yaml::fail(loops, "'loops' must be a list");
    for (const auto& ln : loops) {
      if (!ln.IsMap() || !ln["dim"] || !ln["bound"]) yaml::fail(ln, "loop needs 'dim' and 'bound'");
      const auto dim = yaml::scalar(ln["dim"], "dim");
      auto d = layer.einsum.dim_index(dim);
      if (!d) yaml::fail(ln["dim"], "loop references unknown dim " + dim + " (layer " + layer.name + ")");
      Loop loop;
      loop.dim = *d;
      loop.bound = yaml::integer(ln["bound"], "bound");
      if (loop.bound < 1) yaml::fail(ln["bound"], "loop bound must be positive");
      if (ln["kind"]) {
        const auto kind = yaml::scalar(ln["kind"], "kind");
        auto k = parse_loop_kind(kind);
        if (!k) yaml::fail(ln["kind"], "unknown loop kind '" + kind + "' (expected temporal, spatial_x or spatial_y)");
        loop.kind = *k;
      }
      m.levels[*j].push_back(loop);
    }
  }
  return m;
}

std::vector<std::string> mapping_file_layers(const std::string& text) {
  const auto root = yaml::load(text);
  std::vector<std::string> out;
  if (root.IsMap() && root["layers"] && root["layers"].IsSequence()) {
    for (const auto& entry : root["layers"]) {
      if (entry["layer"]) out.push_back(yaml::scalar(entry["layer"], "layer"));
    }
  }
  return out;
}

std::string mappings_to_yaml(const std::vector<LayerMapping>& entries, const ArchTree& arch) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : entries) {
    out << YAML::BeginMap << YAML::Key << "layer" << YAML::Value << e.layer->name;
    out << YAML::Key << "levels" << YAML::Value << YAML::BeginSeq;
    for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
      out << YAML::BeginMap << YAML::Key << "node" << YAML::Value << arch.nodes[j].name;
      out << YAML::Key << "loops" << YAML::Value << YAML::BeginSeq;
      for (const auto& l : e.mapping->levels.at(j)) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "dim" << YAML::Value << e.layer->einsum.dims.at(l.dim).name;
        out << YAML::Key << "bound" << YAML::Value << l.bound;
        out << YAML::Key << "kind" << YAML::Value << std::string(to_string(l.kind));
        out << YAML::EndMap;
      }
      out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string mapping_to_yaml(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer) {
  return mappings_to_yaml({{&layer, &m}}, arch);
}

}  // namespace cim
