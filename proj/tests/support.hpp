// Shared fixtures and random instance generators for the test binaries.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cimmodel/engine.hpp"

namespace cim::testing {

inline std::filesystem::path source_dir() {
#ifdef CIM_SOURCE_DIR
  return CIM_SOURCE_DIR;
#else
  return std::filesystem::current_path();
#endif
}

inline std::string data_path(const std::string& name) { return (source_dir() / "data" / name).string(); }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ArchTree load_fixture_arch(const std::string& name) {
  auto t = load_arch(data_path(name));
  return resolve_attributes(t, t.defaults);
}

inline WorkloadLayer load_fixture_layer(const std::string& name, std::size_t i = 0) {
  return load_workload(data_path(name)).at(i);
}

inline Mapping load_fixture_mapping(const std::string& name, const ArchTree& arch, const WorkloadLayer& layer) {
  return mapping_from_yaml(slurp(data_path(name)), arch, layer);
}

// ---------------------------------------------------------------------------
// Random (arch, layer, mapping) triples

struct Coverage {
  std::set<std::pair<int, int>> directives;  // (Reuse, tensor)
  std::set<int> spatial_reuse;               // tensor
  bool container = false;
  bool sliced = false;
  bool temporal_at_pass_through = false;

  bool complete() const {
    return directives.size() == 4 * kNumTensors && spatial_reuse.size() == kNumTensors && container && sliced &&
           temporal_at_pass_through;
  }
};

inline ArchTree random_arch(std::mt19937_64& rng, Coverage* cov = nullptr) {
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };
  ArchTree t;
  const std::size_t n = 2 + pick(4);
  for (std::size_t j = 0; j < n; ++j) {
    ArchNode node;
    node.name = "n" + std::to_string(j);
    const bool leaf = j + 1 == n;
    if (j == 0) {
      node.class_name = "buffer";
      for (auto r : kTensorRoles) node.declared[index(r)] = {Reuse::TemporalReuse};
    } else if (!leaf && pick(5) == 0) {
      node.kind = NodeKind::Container;
      if (cov) cov->container = true;
    } else {
      node.class_name = leaf ? "memory_cell" : "buffer";
      for (auto r : kTensorRoles) {
        const auto reuse = static_cast<Reuse>(pick(4));
        if (reuse != Reuse::Bypass) node.declared[index(r)] = {reuse};
      }
    }
    if (j > 0) {
      const std::int64_t mx[] = {1, 1, 2, 3, 4};
      const std::int64_t my[] = {1, 1, 2, 3};
      node.mesh_x = mx[pick(5)];
      node.mesh_y = my[pick(4)];
      for (auto r : kTensorRoles) node.spatial_reuse[index(r)] = pick(2) == 0;
    }
    if (cov) {
      for (auto r : kTensorRoles) {
        cov->directives.insert({static_cast<int>(node.reuse(r)), static_cast<int>(index(r))});
        if (node.spatial_reuse[index(r)] && node.mesh() > 1) cov->spatial_reuse.insert(static_cast<int>(index(r)));
      }
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

inline WorkloadLayer random_layer(std::mt19937_64& rng, std::uint64_t max_macs = 2000, std::size_t max_dims = 4) {
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::int64_t sizes[] = {1, 2, 2, 3, 4, 4, 6, 8};
  const char* names[] = {"A", "B", "C", "D", "E", "F"};
  while (true) {
    WorkloadLayer l;
    l.name = "rand";
    const std::size_t nd = 1 + pick(std::min<std::size_t>(max_dims, 6));
    for (std::size_t d = 0; d < nd; ++d) l.einsum.dims.push_back({names[d], sizes[pick(8)]});
    for (auto r : {TensorRole::Inputs, TensorRole::Weights}) {
      for (std::size_t d = 0; d < nd; ++d) {
        if (pick(3) != 0) l.einsum.projections[index(r)].push_back(d);
      }
    }
    for (std::size_t d = 0; d < nd; ++d) {
      const bool in_union = l.einsum.indexes(TensorRole::Inputs, d) || l.einsum.indexes(TensorRole::Weights, d);
      if (in_union && pick(2) == 0) l.einsum.projections[index(TensorRole::Outputs)].push_back(d);
    }
    if (mac_count(l) > max_macs) continue;
    l.bits = {2, 2, 8};
    l.pmfs[0] = uniform_pmf(0, 3);
    l.pmfs[1] = uniform_pmf(0, 3);
    l.pmfs[2] = uniform_pmf(0, 255);
    return l;
  }
}

/// Splits every dim's prime factors over random slots (a temporal slot at
/// every node, spatial slots wherever a mesh exists), then shuffles the
/// temporal order at each node.
inline Mapping random_mapping(std::mt19937_64& rng, const ArchTree& arch, const WorkloadLayer& layer) {
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::size_t L = arch.nodes.size();
  const std::size_t D = layer.einsum.dims.size();
  // bound[j][kind][d]
  std::vector<std::array<std::vector<std::int64_t>, 3>> bound(L);
  std::vector<std::array<std::int64_t, 3>> used(L, {1, 1, 1});
  for (auto& b : bound) {
    for (auto& v : b) v.assign(D, 1);
  }
  for (std::size_t d = 0; d < D; ++d) {
    std::int64_t n = layer.einsum.dims[d].size;
    std::vector<std::int64_t> primes;
    for (std::int64_t p = 2; n > 1; ++p) {
      while (n % p == 0) {
        primes.push_back(p);
        n /= p;
      }
    }
    for (auto p : primes) {
      const std::size_t j = pick(L);
      std::size_t kind = pick(3);
      const std::int64_t cap = kind == 0 ? 0 : kind == 1 ? arch.nodes[j].mesh_x : arch.nodes[j].mesh_y;
      if (kind != 0 && used[j][kind] * p > cap) kind = 0;
      bound[j][kind][d] *= p;
      used[j][kind] *= p;
    }
  }
  Mapping m;
  m.levels.resize(L);
  for (std::size_t j = 0; j < L; ++j) {
    for (std::size_t kind : {1, 2}) {
      for (std::size_t d = 0; d < D; ++d) {
        if (bound[j][kind][d] > 1) m.levels[j].push_back({d, bound[j][kind][d], static_cast<LoopKind>(kind)});
      }
    }
    std::vector<Loop> temporal;
    for (std::size_t d = 0; d < D; ++d) {
      if (bound[j][0][d] > 1) temporal.push_back({d, bound[j][0][d], LoopKind::Temporal});
    }
    std::shuffle(temporal.begin(), temporal.end(), rng);
    m.levels[j].insert(m.levels[j].end(), temporal.begin(), temporal.end());
  }
  return m;
}

struct RandomTriple {
  ArchTree arch;
  PreparedLayer layer;
  Mapping mapping;
};

/// One random instance; optionally slices Inputs and/or Weights into two
/// 1-bit slices declared on the leaf.
inline RandomTriple random_triple(std::mt19937_64& rng, Coverage* cov = nullptr, std::uint64_t max_macs = 2000,
                                  std::size_t max_dims = 4) {
  auto arch = random_arch(rng, cov);
  auto layer = random_layer(rng, max_macs, max_dims);
  auto& leaf = arch.nodes.back();
  if (rng() % 3 == 0) {
    leaf.attributes["inputs_slices"] = std::vector<double>{1, 1};
    if (cov) cov->sliced = true;
  }
  if (rng() % 3 == 0) leaf.attributes["weights_slices"] = std::vector<double>{1, 1};
  auto prepared = prepare_layer(arch, layer);
  auto m = random_mapping(rng, arch, prepared.layer);
  if (cov) {
    for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
      bool tr = false;
      for (auto r : kTensorRoles) tr = tr || arch.nodes[j].reuse(r) == Reuse::TemporalReuse;
      for (const auto& l : m.levels[j]) {
        if (!l.spatial() && !tr) cov->temporal_at_pass_through = true;
      }
    }
  }
  return {std::move(arch), std::move(prepared), std::move(m)};
}

inline std::string describe_counts(const AccessCounts& a, const AccessCounts& b, const ArchTree& arch) {
  std::ostringstream ss;
  for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
    for (auto act : kActions) {
      for (std::size_t s = 0; s < kNumSlots; ++s) {
        if (a.at(j, act, s) != b.at(j, act, s)) {
          ss << arch.nodes[j].name << " " << to_string(act) << " slot " << s << ": " << a.at(j, act, s) << " vs "
             << b.at(j, act, s) << "\n";
        }
      }
    }
  }
  return ss.str();
}

}  // namespace cim::testing
