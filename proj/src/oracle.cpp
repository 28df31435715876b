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

// The value-level oracle. It shares no counting code with the analytical
// model: it steps the temporal odometer one iteration at a time, emits one
// request per MAC operand, and pushes every request up the hierarchy,
// letting buffers hold real tiles and pass-through nodes merge real
// duplicates.

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <unordered_set>

#include "cimmodel/engine.hpp"

namespace cim {

OracleTensors draw_tensors(const WorkloadLayer& layer, std::uint64_t seed, DrawMode mode) {
  std::mt19937_64 rng(seed);
  auto draw = [&](const ValuePMF& pmf) -> std::int64_t {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (mode == DrawMode::Uniform) {
      const auto i = std::min(pmf.size() - 1, static_cast<std::size_t>(u * static_cast<double>(pmf.size())));
      return pmf.support()[i];
    }
    double cum = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      cum += pmf.probs()[static_cast<Eigen::Index>(i)];
      if (u < cum) return pmf.support()[i];
    }
    return pmf.max();
  };
  OracleTensors t;
  t.inputs.resize(layer.einsum.tensor_size(TensorRole::Inputs));
  for (auto& v : t.inputs) v = draw(layer.pmf(TensorRole::Inputs));
  t.weights.resize(layer.einsum.tensor_size(TensorRole::Weights));
  for (auto& v : t.weights) v = draw(layer.pmf(TensorRole::Weights));
  return t;
}

namespace {

struct NestLoop {
  std::size_t dim;
  std::int64_t bound;
  bool spatial;
  std::size_t level;
  std::int64_t stride;  // weight of this loop's coordinate in its dim index
};

// Row-major element index of a tensor from a full dim-index vector.
std::int64_t element_of(const EinsumSpec& e, TensorRole role, const std::vector<std::int64_t>& idx) {
  std::int64_t el = 0;
  for (auto d : e.projection(role)) el = el * e.dims[d].size + idx[d];
  return el;
}

enum class Phase { Boundary, Mac, Final };

class Oracle {
 public:
  Oracle(const ArchTree& arch, const Mapping& m, const PreparedLayer& p, const OracleTensors* tensors,
         const ModelRegistry* registry)
      : arch_(arch), p_(p), e_(p.layer.einsum), tensors_(tensors), registry_(registry), counts_(arch.nodes.size()) {
    if (m.levels.size() != arch.nodes.size()) throw Error("oracle: mapping has the wrong number of levels");
    const auto sizes = mapped_sizes(m, p.layer);
    for (std::size_t d = 0; d < e_.dims.size(); ++d) {
      if (sizes[d] != e_.dims[d].size) {
        throw Error("oracle: mapping covers " + std::to_string(sizes[d]) + " of dim " + e_.dims[d].name + " (size " +
                    std::to_string(e_.dims[d].size) + "); padded mappings are not executable");
      }
    }
    for (std::size_t j = 0; j < m.levels.size(); ++j) {
      for (bool spatial : {true, false}) {
        for (const auto& l : m.levels[j]) {
          if (l.spatial() == spatial) nest_.push_back({l.dim, l.bound, spatial, j, 1});
        }
      }
    }
    // Outer loops are more significant within each dim.
    std::vector<std::int64_t> running(e_.dims.size(), 1);
    for (std::size_t i = nest_.size(); i-- > 0;) {
      nest_[i].stride = running[nest_[i].dim];
      running[nest_[i].dim] *= nest_[i].bound;
    }
    std::uint64_t radix = 1;
    for (std::size_t i = 0; i < nest_.size(); ++i) {
      if (nest_[i].spatial) {
        spatial_.push_back(i);
        radix_.push_back(radix);
        radix = checked_mul(radix, static_cast<std::uint64_t>(nest_[i].bound + 1));
      } else {
        temporal_.push_back(i);
      }
    }
    for (auto role : kTensorRoles) {
      elems_[index(role)] = e_.tensor_size(role);
      checked_mul(radix, elems_[index(role)]);
    }
    coords_.assign(nest_.size(), 0);
    idx_.assign(e_.dims.size(), 0);
    for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
      std::size_t k = 0;
      while (k < temporal_.size() && nest_[temporal_[k]].level < j) ++k;
      outer_temporal_.push_back(k);
    }
    if (tensors_) {
      price_ = true;
      prepare_values();
      energy_.assign(counts_.values.size(), 0.0);
      attrs_.resize(arch.nodes.size());
      models_.assign(arch.nodes.size(), nullptr);
    }
  }

  void run() {
    // The temporal odometer: carry = position of the outermost loop that
    // changed at this step; everything inside it changed too.
    std::vector<std::int64_t> tc(temporal_.size(), 0);
    std::size_t carry = 0;
    bool first = true;
    while (true) {
      for (std::size_t k = 0; k < temporal_.size(); ++k) coords_[temporal_[k]] = tc[k];
      for (auto role : kTensorRoles) {
        std::vector<std::uint64_t> pending;
        flow(role, pending, Phase::Boundary, first ? 0 : carry, first);
      }
      mac_phase();
      first = false;
      bool wrapped = true;
      std::size_t k = temporal_.size();
      while (k-- > 0) {
        if (++tc[k] < nest_[temporal_[k]].bound) {
          wrapped = false;
          break;
        }
        tc[k] = 0;
      }
      if (wrapped) break;
      carry = k;
    }
    for (auto role : kTensorRoles) {
      std::vector<std::uint64_t> pending;
      flow(role, pending, Phase::Final, 0, false);
    }
  }

  AccessCounts& counts() { return counts_; }
  std::vector<double>& energy() { return energy_; }

 private:
  static std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a / 2)
      throw Error("oracle: instance too large to track");
    return a * b;
  }

  void compute_index() {
    std::fill(idx_.begin(), idx_.end(), 0);
    for (std::size_t i = 0; i < nest_.size(); ++i) idx_[nest_[i].dim] += coords_[i] * nest_[i].stride;
  }

  // Request key: element id plus one digit per spatial loop (0 = merged).
  std::uint64_t key(TensorRole role, std::int64_t elem, std::size_t max_level) const {
    std::uint64_t s = 0;
    for (std::size_t k = 0; k < spatial_.size(); ++k) {
      if (nest_[spatial_[k]].level <= max_level) s += static_cast<std::uint64_t>(coords_[spatial_[k]] + 1) * radix_[k];
    }
    return static_cast<std::uint64_t>(elem) + elems_[index(role)] * s;
  }
  std::int64_t elem_of_key(TensorRole role, std::uint64_t k) const {
    return static_cast<std::int64_t>(k % elems_[index(role)]);
  }
  std::uint64_t instance_of_key(TensorRole role, std::uint64_t k, std::size_t level) const {
    std::uint64_t s = k / elems_[index(role)], inst = 0;
    for (std::size_t i = 0; i < spatial_.size(); ++i) {
      const std::uint64_t digit = (s / radix_[i]) % static_cast<std::uint64_t>(nest_[spatial_[i]].bound + 1);
      if (nest_[spatial_[i]].level <= level) inst += digit * radix_[i];
    }
    return inst;
  }

  // Clears the spatial digits selected by `pred`, then removes duplicates.
  template <class Pred>
  void merge(TensorRole role, std::vector<std::uint64_t>& pending, Pred pred) const {
    const std::uint64_t n = elems_[index(role)];
    for (auto& k : pending) {
      std::uint64_t s = k / n;
      const std::uint64_t el = k % n;
      for (std::size_t i = 0; i < spatial_.size(); ++i) {
        if (!pred(nest_[spatial_[i]].level)) continue;
        const std::uint64_t digit = (s / radix_[i]) % static_cast<std::uint64_t>(nest_[spatial_[i]].bound + 1);
        s -= digit * radix_[i];
      }
      k = el + n * s;
    }
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  }

  // Elements a node instance needs for the current outer temporal coords:
  // free loops are temporal at levels >= j and spatial at levels > j.
  std::vector<std::int64_t> needed_tile(TensorRole role, std::size_t j) {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < nest_.size(); ++i) {
      if (nest_[i].spatial ? nest_[i].level > j : nest_[i].level >= j) free.push_back(i);
    }
    std::vector<std::int64_t> saved;
    for (auto i : free) saved.push_back(coords_[i]);
    for (auto i : free) coords_[i] = 0;
    std::vector<std::int64_t> out;
    while (true) {
      compute_index();
      out.push_back(element_of(e_, role, idx_));
      bool wrapped = true;
      for (std::size_t k = free.size(); k-- > 0;) {
        if (++coords_[free[k]] < nest_[free[k]].bound) {
          wrapped = false;
          break;
        }
        coords_[free[k]] = 0;
      }
      if (wrapped) break;
    }
    for (std::size_t n = 0; n < free.size(); ++n) coords_[free[n]] = saved[n];
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Calls fn() once per assignment of the spatial loops selected by pred.
  template <class Pred, class Fn>
  void for_spatial(Pred pred, Fn fn) {
    std::vector<std::size_t> sel;
    for (auto i : spatial_) {
      if (pred(nest_[i].level)) sel.push_back(i);
    }
    std::vector<std::int64_t> saved;
    for (auto i : sel) saved.push_back(coords_[i]);
    for (auto i : sel) coords_[i] = 0;
    while (true) {
      fn();
      std::size_t k = sel.size();
      bool done = sel.empty();
      while (!done) {
        --k;
        if (++coords_[sel[k]] < nest_[sel[k]].bound) break;
        coords_[sel[k]] = 0;
        if (k == 0) done = true;
      }
      if (done) break;
    }
    for (std::size_t n = 0; n < sel.size(); ++n) coords_[sel[n]] = saved[n];
  }

  struct Buffer {
    std::map<std::uint64_t, std::vector<std::int64_t>> resident;
    std::map<std::uint64_t, std::unordered_set<std::int64_t>> written;
  };

  Buffer& buffer(std::size_t j, TensorRole role) { return buffers_[{j, index(role)}]; }

  void count(std::size_t j, Action a, std::optional<TensorRole> role, std::uint64_t n = 1) {
    counts_.at(j, a, slot(role)) += n;
  }

  void absorb(std::size_t j, TensorRole role, const std::vector<std::uint64_t>& pending) {
    if (role != TensorRole::Outputs) {
      for (auto k : pending) event(j, Action::Read, role, elem_of_key(role, k));
      return;
    }
    auto& buf = buffer(j, role);
    for (auto k : pending) {
      const auto el = elem_of_key(role, k);
      if (buf.written[instance_of_key(role, k, j)].insert(el).second) {
        event(j, Action::Write, role, el);
      } else {
        event(j, Action::Update, role, el);
      }
    }
  }

  void drain(std::size_t j, TensorRole role, std::uint64_t inst, std::vector<std::uint64_t>& pending) {
    auto& buf = buffer(j, role);
    auto it = buf.written.find(inst);
    if (it == buf.written.end()) return;
    std::vector<std::int64_t> els(it->second.begin(), it->second.end());
    std::sort(els.begin(), els.end());
    for (auto el : els) {
      event(j, Action::Read, role, el);
      pending.push_back(key(role, el, j));
    }
    buf.written.erase(it);
  }

  // New residency check for every instance of node j.
  void refresh(std::size_t j, TensorRole role, std::vector<std::uint64_t>& pending) {
    auto& buf = buffer(j, role);
    for_spatial([j](std::size_t lvl) { return lvl <= j; }, [&] {
      const std::uint64_t inst = instance_of_key(role, key(role, 0, j), j);
      auto need = needed_tile(role, j);
      auto& cur = buf.resident[inst];
      if (need == cur) return;
      if (role == TensorRole::Outputs) {
        drain(j, role, inst, pending);
      } else {
        std::vector<std::int64_t> diff;
        std::set_difference(need.begin(), need.end(), cur.begin(), cur.end(), std::back_inserter(diff));
        for (auto el : diff) {
          event(j, Action::Fill, role, el);
          pending.push_back(key(role, el, j));
        }
      }
      cur = std::move(need);
    });
  }

  void flow(TensorRole role, std::vector<std::uint64_t>& pending, Phase phase, std::size_t carry, bool first) {
    for (std::size_t j = arch_.nodes.size(); j-- > 0;) {
      const auto& node = arch_.nodes[j];
      switch (node.reuse(role)) {
        case Reuse::TemporalReuse:
          absorb(j, role, pending);
          pending.clear();
          if (phase == Phase::Boundary && (first || carry < outer_temporal_[j])) refresh(j, role, pending);
          if (phase == Phase::Final && role == TensorRole::Outputs) {
            std::vector<std::uint64_t> insts;
            for (const auto& [inst, _] : buffer(j, role).written) insts.push_back(inst);
            for (auto inst : insts) drain_instance_key(j, role, inst, pending);
          }
          break;
        case Reuse::NoCoalesce:
          for (auto k : pending) event(j, Action::Convert, role, elem_of_key(role, k));
          break;
        case Reuse::Coalesce:
          for (auto k : pending) event(j, Action::Convert, role, elem_of_key(role, k));
          merge(role, pending, [j](std::size_t lvl) { return lvl > j; });
          break;
        case Reuse::Bypass:
          break;
      }
      if (node.spatial_reuse[index(role)]) merge(role, pending, [j](std::size_t lvl) { return lvl == j; });
    }
  }

  // Drain for the final phase, where the instance's coordinates are not
  // loaded: decode them from the instance key first.
  void drain_instance_key(std::size_t j, TensorRole role, std::uint64_t inst, std::vector<std::uint64_t>& pending) {
    for (std::size_t i = 0; i < spatial_.size(); ++i) {
      const std::uint64_t digit = (inst / radix_[i]) % static_cast<std::uint64_t>(nest_[spatial_[i]].bound + 1);
      if (nest_[spatial_[i]].level <= j) coords_[spatial_[i]] = static_cast<std::int64_t>(digit) - 1;
    }
    drain(j, role, inst, pending);
  }

  void mac_phase() {
    const std::size_t leaf = arch_.leaf_index();
    std::array<std::vector<std::uint64_t>, kNumTensors> pending;
    for_spatial([](std::size_t) { return true; }, [&] {
      compute_index();
      std::array<std::int64_t, kNumTensors> el{};
      for (auto role : kTensorRoles) {
        el[index(role)] = element_of(e_, role, idx_);
        pending[index(role)].push_back(key(role, el[index(role)], leaf));
      }
      count(leaf, Action::Compute, std::nullopt);
      if (price_) {
        ValueContext ctx = context(leaf);
        ctx.operands[index(TensorRole::Inputs)] = value(TensorRole::Inputs, el[0]);
        ctx.operands[index(TensorRole::Weights)] = value(TensorRole::Weights, el[1]);
        energy_[EnergyTable::offset(leaf, Action::Compute, kNoTensorSlot)] +=
            model(leaf).value_energy(Action::Compute, std::nullopt, ctx);
      }
    });
    for (auto role : kTensorRoles) flow(role, pending[index(role)], Phase::Mac, 0, false);
  }

  // --- pricing ------------------------------------------------------------

  void prepare_values() {
    const auto& orig = p_.original.einsum;
    for (auto role : kTensorRoles) {
      const auto i = index(role);
      const auto& scheme = p_.slicing[i];
      const std::size_t k = role == TensorRole::Outputs ? 1 : scheme.count();
      std::vector<std::int64_t> raw;
      if (role == TensorRole::Inputs) raw = tensors_->inputs;
      if (role == TensorRole::Weights) raw = tensors_->weights;
      if (role != TensorRole::Outputs && raw.size() != orig.tensor_size(role)) {
        throw Error("oracle: " + std::string(to_string(role)) + " tensor has " + std::to_string(raw.size()) +
                    " elements, layer needs " + std::to_string(orig.tensor_size(role)));
      }
      if (role == TensorRole::Outputs) raw = einsum_outputs();
      auto& vals = values_[i];
      vals.resize(raw.size() * k);
      for (std::size_t e = 0; e < raw.size(); ++e) {
        EncodedValue ev;
        if (role == TensorRole::Outputs) {
          const int bits = p_.encodings[i].bits;
          ev.level = bits >= 63 ? raw[e] : (raw[e] & ((std::int64_t{1} << bits) - 1));
        } else {
          ev = encode_value(raw[e], p_.encodings[i]);
        }
        for (std::size_t s = 0; s < k; ++s) {
          OperandValue v;
          v.width = role == TensorRole::Outputs ? p_.encodings[i].bits : scheme.widths[s];
          v.level = role == TensorRole::Outputs ? ev.level : slice_value(ev.level, scheme, s);
          if (p_.encodings[i].kind == EncodingKind::Differential && role != TensorRole::Outputs) {
            v.has_companion = true;
            v.companion = slice_value(ev.companion, scheme, s);
          }
          vals[e * k + s] = v;
        }
      }
    }
  }

  std::vector<std::int64_t> einsum_outputs() {
    const auto& orig = p_.original.einsum;
    std::vector<std::int64_t> out(orig.tensor_size(TensorRole::Outputs), 0);
    std::vector<std::int64_t> idx(orig.dims.size(), 0);
    while (true) {
      out[element_of(orig, TensorRole::Outputs, idx)] +=
          tensors_->inputs[element_of(orig, TensorRole::Inputs, idx)] *
          tensors_->weights[element_of(orig, TensorRole::Weights, idx)];
      std::size_t d = idx.size();
      bool done = idx.empty();
      while (!done) {
        --d;
        if (++idx[d] < orig.dims[d].size) break;
        idx[d] = 0;
        if (d == 0) done = true;
      }
      if (done) break;
    }
    outputs_ = out;
    return out;
  }

  // Expanded element ids put the slice index last, so the original element
  // is elem / slices and the slice is elem % slices.
  OperandValue value(TensorRole role, std::int64_t elem) const { return values_[index(role)][static_cast<std::size_t>(elem)]; }

  ValueContext context(std::size_t j) {
    if (!attrs_[j]) attrs_[j] = &arch_.nodes[j].attributes;
    ValueContext ctx;
    ctx.node = arch_.nodes[j].name;
    ctx.attributes = attrs_[j];
    return ctx;
  }

  const ComponentModel& model(std::size_t j) {
    if (!models_[j]) models_[j] = &registry_->resolve(arch_.nodes[j]);
    return *models_[j];
  }

  void event(std::size_t j, Action a, TensorRole role, std::int64_t elem) {
    count(j, a, role);
    if (!price_) return;
    ValueContext ctx = context(j);
    ctx.operands[index(role)] = value(role, elem);
    energy_[EnergyTable::offset(j, a, index(role))] += model(j).value_energy(a, role, ctx);
  }

 public:
  std::vector<std::int64_t> outputs_;

 private:
  const ArchTree& arch_;
  const PreparedLayer& p_;
  const EinsumSpec& e_;
  const OracleTensors* tensors_;
  const ModelRegistry* registry_;
  AccessCounts counts_;
  std::vector<double> energy_;
  bool price_ = false;

  std::vector<NestLoop> nest_;
  std::vector<std::size_t> spatial_, temporal_;
  std::vector<std::uint64_t> radix_;
  std::array<std::uint64_t, kNumTensors> elems_{};
  std::vector<std::size_t> outer_temporal_;  // per node: temporal loops at levels above it
  std::vector<std::int64_t> coords_, idx_;
  std::map<std::pair<std::size_t, std::size_t>, Buffer> buffers_;

  std::array<std::vector<OperandValue>, kNumTensors> values_;
  std::vector<const Attributes*> attrs_;
  std::vector<const ComponentModel*> models_;
};

}  // namespace

OracleResult oracle_evaluate(const ArchTree& arch, const Mapping& m, const PreparedLayer& layer,
                             const OracleTensors& tensors, const ModelRegistry& registry) {
  Oracle o(arch, m, layer, &tensors, &registry);
  o.run();
  OracleResult r;
  r.counts = o.counts();
  r.energy = o.energy();
  for (double e : r.energy) r.total_energy += e;
  r.outputs = o.outputs_;
  return r;
}

AccessCounts oracle_counts(const ArchTree& arch, const Mapping& m, const PreparedLayer& layer) {
  Oracle o(arch, m, layer, nullptr, nullptr);
  o.run();
  return o.counts();
}

}  // namespace cim
