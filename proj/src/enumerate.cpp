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

#include <algorithm>
#include <limits>
#include <set>

#include "cimmodel/mapping.hpp"
#include "internal.hpp"

namespace cim {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

std::uint64_t factorial(std::size_t k) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f = sat_mul(f, i);
  return f;
}

bool allowed(const std::optional<std::vector<std::string>>& list, const std::string& dim) {
  return !list || std::find(list->begin(), list->end(), dim) != list->end();
}

// All ordered ways to write `n` as a product over `caps.size()` slots,
// with slot i bounded by caps[i] (0 = slot closed to this dim).
void factorize(std::int64_t n, const std::vector<std::int64_t>& caps, std::size_t i, std::vector<std::int64_t>& cur,
               std::vector<std::vector<std::int64_t>>& out) {
  if (i == caps.size()) {
    if (n == 1) out.push_back(cur);
    return;
  }
  const std::int64_t cap = caps[i];
  for (std::int64_t f = 1; f <= n && f <= std::max<std::int64_t>(cap, 1); ++f) {
    if (n % f != 0) continue;
    cur[i] = f;
    factorize(n / f, caps, i + 1, cur, out);
  }
  cur[i] = 1;
}

}  // namespace

MappingEnumerator::MappingEnumerator(const ArchTree& arch, const WorkloadLayer& layer, const MapperConfig& cfg)
    : arch_(arch), layer_(layer), cfg_(cfg), rng_(cfg.seed) {
  if (!cfg_.exhaustive && cfg_.budget < 1) throw Error("random search needs a budget of at least 1");
  build_slots();
  build_factorizations();

  // Raw size: sum over factorization choices of the temporal orderings.
  std::uint64_t combos = 1;
  for (const auto& f : factorizations_) combos = sat_mul(combos, f.size());
  if (combos == 0) {
    raw_size_ = 0;
  } else if (combos <= kMaterializeLimit) {
    std::vector<std::uint32_t> f(factorizations_.size(), 0);
    raw_size_ = 0;
    bool wrapped = false;
    while (!wrapped) {
      std::uint64_t perms = 1;
      for (std::size_t t = 0; t < temporal_slots_.size(); ++t) perms = sat_mul(perms, permutations_for(f, t));
      raw_size_ = sat_add(raw_size_, perms);
      wrapped = true;
      for (std::size_t d = f.size(); d-- > 0;) {
        if (++f[d] < factorizations_[d].size()) {
          wrapped = false;
          break;
        }
        f[d] = 0;
      }
    }
  } else {
    raw_size_ = combos;
    for (std::size_t t = 0; t < temporal_slots_.size(); ++t) raw_size_ = sat_mul(raw_size_, factorial(layer_.einsum.dims.size()));
  }
}

void MappingEnumerator::build_slots() {
  for (std::size_t j = 0; j < arch_.nodes.size(); ++j) {
    const auto& node = arch_.nodes[j];
    if (node.mesh_x > 1) slots_.push_back({j, LoopKind::SpatialX});
    if (node.mesh_y > 1) slots_.push_back({j, LoopKind::SpatialY});
    bool temporal = j == 0;
    for (auto r : kTensorRoles) temporal = temporal || node.reuse(r) == Reuse::TemporalReuse;
    if (temporal) {
      temporal_slots_.push_back(slots_.size());
      slots_.push_back({j, LoopKind::Temporal});
    }
  }
}

void MappingEnumerator::build_factorizations() {
  const auto& dims = layer_.einsum.dims;
  factorizations_.assign(dims.size(), {});
  for (std::size_t d = 0; d < dims.size(); ++d) {
    std::vector<std::int64_t> caps(slots_.size(), 0);
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      const auto& node = arch_.nodes[slots_[s].level];
      const Constraints* c = &node.constraints;
      if (auto it = cfg_.constraint_overrides.find(node.name); it != cfg_.constraint_overrides.end()) c = &it->second;
      switch (slots_[s].kind) {
        case LoopKind::Temporal:
          caps[s] = allowed(c->keep_dims, dims[d].name) ? std::numeric_limits<std::int64_t>::max() : 0;
          break;
        case LoopKind::SpatialX:
          caps[s] = allowed(c->spatial_dims, dims[d].name) ? node.mesh_x : 0;
          break;
        case LoopKind::SpatialY:
          caps[s] = allowed(c->spatial_dims, dims[d].name) ? node.mesh_y : 0;
          break;
      }
    }
    std::set<std::int64_t> targets{dims[d].size};
    if (cfg_.allow_padding) {
      for (std::size_t s = 0; s < slots_.size(); ++s) {
        if (slots_[s].kind == LoopKind::Temporal || caps[s] <= 1) continue;
        targets.insert((dims[d].size + caps[s] - 1) / caps[s] * caps[s]);
      }
    }
    std::vector<std::int64_t> cur(slots_.size(), 1);
    for (auto n : targets) factorize(n, caps, 0, cur, factorizations_[d]);
  }
}

std::uint64_t MappingEnumerator::permutations_for(const std::vector<std::uint32_t>& fact, std::size_t tslot) const {
  const std::size_t s = temporal_slots_[tslot];
  std::size_t k = 0;
  for (std::size_t d = 0; d < fact.size(); ++d) k += factorizations_[d][fact[d]][s] > 1;
  return factorial(k);
}

Mapping MappingEnumerator::assemble(const Choice& c) const {
  Mapping m;
  m.levels.resize(arch_.nodes.size());
  std::size_t tslot = 0;
  std::vector<std::size_t> active;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    active.clear();
    for (std::size_t d = 0; d < c.factorization.size(); ++d) {
      if (factorizations_[d][c.factorization[d]][s] > 1) active.push_back(d);
    }
    auto& level = m.levels[slots_[s].level];
    if (slots_[s].kind != LoopKind::Temporal) {
      for (auto d : active) level.push_back({d, factorizations_[d][c.factorization[d]][s], slots_[s].kind});
      continue;
    }
    // Decode the permutation rank (factorial number system).
    std::uint64_t rank = c.permutation.empty() ? 0 : c.permutation[tslot];
    ++tslot;
    std::vector<std::size_t> pool = active;
    for (std::size_t k = pool.size(); k > 0; --k) {
      const std::uint64_t f = factorial(k - 1);
      const std::size_t pick = static_cast<std::size_t>(rank / f);
      rank %= f;
      const auto d = pool[pick];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      level.push_back({d, factorizations_[d][c.factorization[d]][s], LoopKind::Temporal});
    }
  }
  return m;
}

bool MappingEnumerator::valid(const Mapping& m) const {
  return detail::mapping_is_valid(m, arch_, layer_, cfg_.allow_padding, &cfg_.constraint_overrides);
}

// Steps the odometer: permutations fastest, then factorizations with the
// last dim fastest. Returns false when the space is exhausted.
bool MappingEnumerator::advance_exhaustive() {
  for (std::size_t t = temporal_slots_.size(); t-- > 0;) {
    if (++cursor_.permutation[t] < permutations_for(cursor_.factorization, t)) return true;
    cursor_.permutation[t] = 0;
  }
  for (std::size_t d = factorizations_.size(); d-- > 0;) {
    if (++cursor_.factorization[d] < factorizations_[d].size()) return true;
    cursor_.factorization[d] = 0;
  }
  return false;
}

void MappingEnumerator::materialize() {
  // Small space: list every valid point, shuffle, keep the first `budget`.
  cursor_.factorization.assign(factorizations_.size(), 0);
  cursor_.permutation.assign(temporal_slots_.size(), 0);
  do {
    if (valid(assemble(cursor_))) materialized_.push_back(cursor_);
  } while (advance_exhaustive());
  for (std::size_t i = materialized_.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng_() % i);
    std::swap(materialized_[i - 1], materialized_[j]);
  }
  if (materialized_.size() > cfg_.budget) materialized_.resize(static_cast<std::size_t>(cfg_.budget));
}

bool MappingEnumerator::next(Mapping& out) {
  if (raw_size_ == 0) return false;
  if (cfg_.exhaustive) {
    if (done_) return false;
    if (!started_) {
      started_ = true;
      cursor_.factorization.assign(factorizations_.size(), 0);
      cursor_.permutation.assign(temporal_slots_.size(), 0);
    } else if (!advance_exhaustive()) {
      done_ = true;
      return false;
    }
    while (true) {
      Mapping m = assemble(cursor_);
      if (valid(m)) {
        out = std::move(m);
        return true;
      }
      if (!advance_exhaustive()) {
        done_ = true;
        return false;
      }
    }
  }

  if (raw_size_ <= kMaterializeLimit) {
    if (!sampled_) {
      sampled_ = true;
      materialize();
    }
    if (next_index_ >= materialized_.size()) return false;
    out = assemble(materialized_[next_index_++]);
    return true;
  }

  // Large space: sample with replacement, rejecting invalid points.
  if (emitted_ >= cfg_.budget) return false;
  const std::uint64_t max_attempts = std::max<std::uint64_t>(10'000, sat_mul(cfg_.budget, 200));
  Choice c;
  c.factorization.resize(factorizations_.size());
  c.permutation.resize(temporal_slots_.size());
  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t d = 0; d < factorizations_.size(); ++d)
      c.factorization[d] = static_cast<std::uint32_t>(rng_() % factorizations_[d].size());
    for (std::size_t t = 0; t < temporal_slots_.size(); ++t) c.permutation[t] = rng_() % permutations_for(c.factorization, t);
    Mapping m = assemble(c);
    if (valid(m)) {
      ++emitted_;
      out = std::move(m);
      return true;
    }
  }
  return false;
}

}  // namespace cim
