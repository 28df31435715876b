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

#include "cimmodel/engine.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace cim {

// ---------------------------------------------------------------------------
// Layer preparation

namespace {

std::string role_prefix(TensorRole r) { return r == TensorRole::Inputs ? "inputs" : "weights"; }

struct Declared {
  std::string node;
  std::string key;
};

// Finds the attribute governing `role` at `node`: the qualified key, or the
// unqualified one when the node carries exactly one of Inputs/Weights.
const AttrValue* lookup_role_attr(const ArchNode& node, TensorRole role, const std::string& suffix, std::string& key) {
  key = role_prefix(role) + "_" + suffix;
  if (auto it = node.attributes.find(key); it != node.attributes.end()) return &it->second;
  auto it = node.attributes.find(suffix);
  if (it == node.attributes.end()) return nullptr;
  const bool in = node.uses(TensorRole::Inputs);
  const bool w = node.uses(TensorRole::Weights);
  if (in == w) {
    throw Error("node " + node.name + ": unqualified '" + suffix + "' is ambiguous here; use inputs_" + suffix +
                " or weights_" + suffix);
  }
  if ((role == TensorRole::Inputs) != in) return nullptr;
  key = suffix;
  return &it->second;
}

}  // namespace

PreparedLayer prepare_layer(const ArchTree& arch, const WorkloadLayer& layer) {
  PreparedLayer p;
  p.original = layer;
  p.layer = layer;
  const std::string where = "layer " + layer.name;

  for (auto role : kTensorRoles) {
    p.encodings[index(role)] = Encoding{EncodingKind::TwosComplement, layer.bits[index(role)]};
    p.slicing[index(role)] = SliceScheme::whole(layer.bits[index(role)]);
  }

  for (auto role : {TensorRole::Inputs, TensorRole::Weights}) {
    std::optional<EncodingKind> enc;
    std::optional<std::vector<int>> widths;
    std::string enc_from, widths_from;
    for (const auto& node : arch.nodes) {
      std::string key;
      if (const auto* v = lookup_role_attr(node, role, "encoding", key)) {
        const auto* s = std::get_if<std::string>(v);
        auto kind = s ? parse_encoding(*s) : std::nullopt;
        if (!kind) throw Error("node " + node.name + ": unknown encoding '" + format_attr(*v) + "' in " + key);
        if (enc && *enc != *kind) {
          throw Error("conflicting encodings for " + std::string(to_string(role)) + ": " + std::string(to_string(*enc)) +
                      " at node " + enc_from + ", " + std::string(to_string(*kind)) + " at node " + node.name);
        }
        enc = kind;
        enc_from = node.name;
      }
      if (const auto* v = lookup_role_attr(node, role, "slices", key)) {
        std::vector<int> w;
        if (const auto* list = std::get_if<std::vector<double>>(v)) {
          for (double d : *list) w.push_back(static_cast<int>(d));
        } else if (const double* d = std::get_if<double>(v)) {
          w.push_back(static_cast<int>(*d));
        } else {
          throw Error("node " + node.name + ": " + key + " must be a list of slice widths");
        }
        if (widths && *widths != w)
          throw Error("conflicting slice schemes for " + std::string(to_string(role)) + " at nodes " + widths_from + " and " + node.name);
        widths = std::move(w);
        widths_from = node.name;
      }
    }
    const auto i = index(role);
    if (enc) p.encodings[i].kind = *enc;
    if (widths) p.slicing[i].widths = *widths;
  }

  for (auto role : kTensorRoles) {
    const auto i = index(role);
    auto& view = p.operands[i];
    try {
      const auto encoded = encode_pmf(layer.pmf(role), p.encodings[i]);
      view.encoding = p.encodings[i].kind;
      view.widths = p.slicing[i].widths;
      view.slices = slice_pmf(encoded, p.slicing[i]);
      if (p.encodings[i].kind == EncodingKind::Differential)
        view.companion_slices = slice_pmf(*encoded.companion, encoded.bits, p.slicing[i]);
    } catch (const Error& e) {
      throw Error(where + ", " + std::string(to_string(role)) + ": " + e.what());
    }
    if (role == TensorRole::Outputs || p.slicing[i].count() == 1) continue;
    const std::string dim_name(role == TensorRole::Inputs ? kInputSliceDim : kWeightSliceDim);
    if (p.layer.einsum.dim_index(dim_name)) throw Error(where + " already has a dim named " + dim_name);
    p.slice_dim[i] = p.layer.einsum.dims.size();
    p.layer.einsum.dims.push_back({dim_name, static_cast<std::int64_t>(p.slicing[i].count())});
    p.layer.einsum.projections[i].push_back(*p.slice_dim[i]);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Energy table

EnergyTable precompute_energy_table(const ArchTree& arch, const PreparedLayer& layer, const ModelRegistry& registry) {
  EnergyTable table;
  table.resize(arch.nodes.size());
  for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
    const auto& node = arch.nodes[j];
    table.node_names[j] = node.name;

    std::vector<std::pair<Action, std::optional<TensorRole>>> needed;
    if (j == arch.leaf_index()) needed.emplace_back(Action::Compute, std::nullopt);
    for (auto role : kTensorRoles) {
      switch (node.reuse(role)) {
        case Reuse::TemporalReuse:
          if (role == TensorRole::Outputs) {
            needed.emplace_back(Action::Read, role);
            needed.emplace_back(Action::Write, role);
            needed.emplace_back(Action::Update, role);
          } else {
            needed.emplace_back(Action::Read, role);
            needed.emplace_back(Action::Fill, role);
          }
          break;
        case Reuse::Coalesce:
        case Reuse::NoCoalesce:
          needed.emplace_back(Action::Convert, role);
          break;
        case Reuse::Bypass:
          break;
      }
    }
    if (needed.empty() && node.class_name.empty()) continue;
    const auto& model = registry.resolve(node);

    ActionContext ctx;
    ctx.layer = layer.layer.name;
    ctx.node = node.name;
    ctx.attributes = &node.attributes;
    for (auto role : kTensorRoles) ctx.operands[index(role)] = &layer.operands[index(role)];

    for (const auto& [action, role] : needed) {
      if (!model.supports(action)) {
        throw Error("node " + node.name + " (class " + node.class_name + ") does not support " +
                    std::string(to_string(action)) + (role ? " of " + std::string(to_string(*role)) : std::string()));
      }
      const double e = model.energy(action, role, ctx);
      if (!std::isfinite(e) || e < 0) {
        throw Error("node " + node.name + ": model returned invalid energy for " + std::string(to_string(action)));
      }
      table.set(j, action, slot(role), e);
    }
    table.area_per_instance[j] = model.area(node.attributes);
    table.leakage_per_instance[j] = model.leakage_power(node.attributes);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Evaluation

double objective_value(Objective o, double energy, double latency, std::uint64_t macs) {
  switch (o) {
    case Objective::Energy:
      return energy;
    case Objective::Edp:
      return energy * latency;
    case Objective::EnergyPerMac:
      return macs ? energy / static_cast<double>(macs) : energy;
  }
  return energy;
}

double EvalResult::energy_of(std::size_t node, Action action) const {
  double e = 0.0;
  for (const auto& b : breakdown) {
    if (b.node == node && b.action == action) e += b.energy;
  }
  return e;
}

namespace {

double clock_period(const ArchTree& arch) { return attr_number_or(arch.leaf().attributes, "clock_period", kDefaultClockPeriod); }

double leakage_power_total(const ArchTree& arch, const EnergyTable& table) {
  double p = 0.0;
  for (std::size_t j = 0; j < arch.nodes.size(); ++j)
    p += table.leakage_per_instance[j] * static_cast<double>(instances(arch, j));
  return p;
}

[[noreturn]] void missing_entry(const EnergyTable& table, std::size_t j, Action a, std::size_t s) {
  throw Error("energy table has no entry for node " + table.node_names[j] + " action " + std::string(to_string(a)) +
              (s == kNoTensorSlot ? std::string() : " of " + std::string(to_string(static_cast<TensorRole>(s)))));
}

// Dynamic energy only: a flat multiply-accumulate over the dense arrays.
double dynamic_energy(const AccessCounts& counts, const EnergyTable& table) {
  double total = 0.0;
  for (std::size_t k = 0; k < counts.values.size(); ++k) {
    const auto c = counts.values[k];
    if (c == 0) continue;
    if (!table.present[k]) {
      const std::size_t s = k % kNumSlots;
      const std::size_t a = (k / kNumSlots) % kNumActions;
      missing_entry(table, k / (kNumSlots * kNumActions), kActions[a], s);
    }
    total += static_cast<double>(c) * table.energy[k];
  }
  return total;
}

}  // namespace

EvalResult evaluate(const Mapping& m, const EnergyTable& table, const ArchTree& arch, const PreparedLayer& layer,
                    Objective objective) {
  EvalResult r;
  r.layer = layer.layer.name;
  r.mapping = m;
  r.counts = analyze_access_counts(m, arch, layer.layer);
  r.cycles = cycles(m);
  r.latency = static_cast<double>(r.cycles) * clock_period(arch);
  r.macs = layer.original_macs();
  r.utilization = utilization(m, arch, layer.layer);

  const auto& values = r.counts.values;
  std::size_t nonzero = 0;
  for (auto c : values) nonzero += c != 0;
  r.breakdown.reserve(nonzero);
  // Flat index order is node, action, slot, matching the nested order.
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto c = values[k];
    if (c == 0) continue;
    const std::size_t s = k % kNumSlots;
    const std::size_t a = (k / kNumSlots) % kNumActions;
    const std::size_t j = k / (kNumSlots * kNumActions);
    if (!table.present[k]) missing_entry(table, j, kActions[a], s);
    BreakdownEntry b;
    b.node = j;
    b.action = kActions[a];
    if (s != kNoTensorSlot) b.tensor = static_cast<TensorRole>(s);
    b.count = c;
    b.unit_energy = table.energy[k];
    b.energy = static_cast<double>(c) * b.unit_energy;
    r.total_energy += b.energy;
    r.breakdown.push_back(b);
  }
  r.node_area.assign(arch.nodes.size(), 0.0);
  double n = 1.0;
  for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
    n *= static_cast<double>(arch.nodes[j].mesh());
    r.node_area[j] = table.area_per_instance[j] * n;
    r.area += r.node_area[j];
    if (table.leakage_per_instance[j] > 0) {
      LeakageEntry l{j, table.leakage_per_instance[j] * n, table.leakage_per_instance[j] * n * r.latency};
      r.total_energy += l.energy;
      r.leakage.push_back(l);
    }
  }
  r.objective = objective_value(objective, r.total_energy, r.latency, r.macs);
  return r;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct Scored {
  double objective;
  std::uint64_t index;
  Mapping mapping;
};

bool better(const Scored& a, const Scored& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  return a.index < b.index;
}

}  // namespace

SearchResult search(const ArchTree& arch, const PreparedLayer& layer, const EnergyTable& table,
                    const MapperConfig& cfg) {
  MappingEnumerator en(arch, layer.layer, cfg);
  const double period = clock_period(arch);
  const double leak = leakage_power_total(arch, table);
  const std::uint64_t macs = layer.original_macs();
  const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  const std::size_t top_k = std::max<std::size_t>(1, cfg.top_k);
  constexpr std::size_t kChunk = 2048;

  SearchResult result;
  result.raw_space = en.raw_size();
  std::vector<Scored> top;
  std::vector<Mapping> chunk;
  std::vector<double> scores;
  std::uint64_t index = 0;
  bool more = true;
  while (more) {
    chunk.clear();
    Mapping m;
    while (chunk.size() < kChunk && (more = en.next(m))) chunk.push_back(std::move(m));
    if (chunk.empty()) break;
    scores.assign(chunk.size(), 0.0);

    auto work = [&](std::size_t begin, std::size_t end) {
      AccessCounts counts(arch.nodes.size());
      for (std::size_t i = begin; i < end; ++i) {
        analyze_access_counts_into(chunk[i], arch, layer.layer, counts);
        const double latency = static_cast<double>(cycles(chunk[i])) * period;
        const double energy = dynamic_energy(counts, table) + leak * latency;
        scores[i] = objective_value(cfg.objective, energy, latency, macs);
      }
    };
    const std::size_t workers = std::min(jobs, chunk.size());
    if (workers <= 1) {
      work(0, chunk.size());
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      const std::size_t per = (chunk.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * per, e = std::min(chunk.size(), b + per);
        pool.emplace_back([&, w, b, e] {
          try {
            work(b, e);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    // Merge in enumeration order so ties resolve to the earliest mapping.
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      Scored s{scores[i], index + i, {}};
      if (top.size() == top_k && !better(s, top.back())) continue;
      s.mapping = std::move(chunk[i]);
      top.insert(std::upper_bound(top.begin(), top.end(), s, better), std::move(s));
      if (top.size() > top_k) top.pop_back();
    }
    index += chunk.size();
  }
  result.evaluated = index;
  if (top.empty()) {
    throw EmptySpaceError("layer " + layer.layer.name + ": no valid mapping in the search space (" +
                          std::to_string(result.raw_space) + " candidates before filtering)");
  }
  for (const auto& s : top) result.top.push_back(evaluate(s.mapping, table, arch, layer, cfg.objective));
  result.best = result.top.front();
  return result;
}

SearchResult search(const ArchTree& arch, const PreparedLayer& layer, const ModelRegistry& registry,
                    const MapperConfig& cfg) {
  return search(arch, layer, precompute_energy_table(arch, layer, registry), cfg);
}

WorkloadSummary aggregate(const std::vector<EvalResult>& results) {
  WorkloadSummary s;
  for (const auto& r : results) {
    LayerSummary l;
    l.name = r.layer;
    l.energy = r.total_energy;
    l.cycles = r.cycles;
    l.macs = r.macs;
    l.energy_per_mac = r.macs ? r.total_energy / static_cast<double>(r.macs) : 0.0;
    s.total_energy += l.energy;
    s.total_cycles += l.cycles;
    s.total_macs += l.macs;
    s.layers.push_back(std::move(l));
  }
  s.energy_per_mac = s.total_macs ? s.total_energy / static_cast<double>(s.total_macs) : 0.0;
  return s;
}

}  // namespace cim
