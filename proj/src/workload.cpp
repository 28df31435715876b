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

#include "cimmodel/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "yaml_util.hpp"

namespace cim {

// ---------------------------------------------------------------------------
// ValuePMF

ValuePMF::ValuePMF(std::vector<std::int64_t> support, Eigen::ArrayXd probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty()) throw Error("PMF support is empty");
  if (static_cast<Eigen::Index>(support_.size()) != probs_.size())
    throw Error("PMF support and probabilities differ in length");
  for (std::size_t i = 1; i < support_.size(); ++i) {
    if (support_[i] <= support_[i - 1])
      throw Error("PMF support must be strictly increasing");
  }
  if ((probs_ < 0.0).any() || !probs_.isFinite().all())
    throw Error("PMF probabilities must be finite and non-negative");
  const double total = probs_.sum();
  if (std::abs(total - 1.0) > kPmfTolerance)
    throw Error("PMF probabilities sum to " + std::to_string(total) + ", not 1");
}

ValuePMF::ValuePMF(std::vector<std::int64_t> support, const std::vector<double>& probs)
    : ValuePMF(std::move(support),
               Eigen::Map<const Eigen::ArrayXd>(probs.data(), static_cast<Eigen::Index>(probs.size()))) {}

ValuePMF ValuePMF::from_masses(const std::map<std::int64_t, double>& masses) {
  std::vector<std::int64_t> support;
  Eigen::ArrayXd probs(static_cast<Eigen::Index>(masses.size()));
  support.reserve(masses.size());
  Eigen::Index i = 0;
  for (const auto& [value, mass] : masses) {
    support.push_back(value);
    probs[i++] = mass;
  }
  return ValuePMF(std::move(support), std::move(probs));
}

double ValuePMF::mean() const {
  Eigen::ArrayXd values(probs_.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = static_cast<double>(support_[i]);
  return (values * probs_).sum();
}

double ValuePMF::prob(std::int64_t value) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), value);
  if (it == support_.end() || *it != value) return 0.0;
  return probs_[it - support_.begin()];
}

ValuePMF build_pmf(std::span<const std::int64_t> samples) {
  if (samples.empty()) throw Error("cannot build a PMF from an empty sample list");
  std::map<std::int64_t, std::size_t> counts;
  for (auto v : samples) ++counts[v];
  std::vector<std::int64_t> support;
  Eigen::ArrayXd probs(static_cast<Eigen::Index>(counts.size()));
  const double n = static_cast<double>(samples.size());
  Eigen::Index i = 0;
  for (const auto& [value, count] : counts) {
    support.push_back(value);
    probs[i++] = static_cast<double>(count) / n;
  }
  return ValuePMF(std::move(support), std::move(probs));
}

ValuePMF uniform_pmf(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw Error("uniform PMF requires lo <= hi");
  const auto n = hi - lo + 1;
  if (n > (std::int64_t{1} << 24)) throw Error("uniform PMF support too large");
  std::vector<std::int64_t> support(static_cast<std::size_t>(n));
  std::iota(support.begin(), support.end(), lo);
  return ValuePMF(std::move(support), Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n)));
}

ValuePMF delta_pmf(std::int64_t value) { return ValuePMF({value}, std::vector<double>{1.0}); }

ValuePMF two_point_pmf(std::int64_t a, std::int64_t b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("two-point weight must lie in [0, 1]");
  if (a == b) return delta_pmf(a);
  if (a > b) {
    std::swap(a, b);
    p = 1.0 - p;
  }
  return ValuePMF({a, b}, std::vector<double>{p, 1.0 - p});
}

namespace {

std::int64_t integral_param(double x, const char* what) {
  if (std::floor(x) != x) throw Error(std::string(what) + " must be an integer");
  return static_cast<std::int64_t>(x);
}

}  // namespace

ValuePMF synth_pmf(SynthKind kind, std::span<const double> params) {
  switch (kind) {
    case SynthKind::Uniform:
      if (params.size() != 2) throw Error("uniform PMF takes [lo, hi]");
      return uniform_pmf(integral_param(params[0], "uniform lo"), integral_param(params[1], "uniform hi"));
    case SynthKind::Delta:
      if (params.size() != 1) throw Error("delta PMF takes one value");
      return delta_pmf(integral_param(params[0], "delta value"));
    case SynthKind::TwoPoint:
      if (params.size() != 3) throw Error("two-point PMF takes [a, b, p]");
      return two_point_pmf(integral_param(params[0], "two-point a"),
                           integral_param(params[1], "two-point b"), params[2]);
  }
  throw Error("unknown PMF kind");
}

std::vector<std::int64_t> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("file not found: " + path.string());
  std::vector<std::int64_t> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::int64_t v = 0;
    std::string rest;
    if (!(ss >> v) || (ss >> rest))
      throw ParseError(path.string() + ": expected one integer per line", lineno, 1);
    samples.push_back(v);
  }
  return samples;
}

// ---------------------------------------------------------------------------
// EinsumSpec / WorkloadLayer

std::optional<std::size_t> EinsumSpec::dim_index(std::string_view name) const {
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i].name == name) return i;
  }
  return std::nullopt;
}

bool EinsumSpec::indexes(TensorRole role, std::size_t dim) const {
  const auto& p = projections[index(role)];
  return std::find(p.begin(), p.end(), dim) != p.end();
}

std::uint64_t EinsumSpec::tensor_size(TensorRole role) const {
  std::uint64_t n = 1;
  for (auto d : projection(role)) n *= static_cast<std::uint64_t>(dims[d].size);
  return n;
}

void EinsumSpec::check() const {
  std::set<std::string> names;
  for (const auto& d : dims) {
    if (d.name.empty()) throw Error("dimension with empty name");
    if (d.size < 1) throw Error("dimension " + d.name + " must have a positive size");
    if (!names.insert(d.name).second) throw Error("duplicate dimension " + d.name);
  }
  for (auto role : kTensorRoles) {
    std::set<std::size_t> seen;
    for (auto d : projection(role)) {
      if (d >= dims.size()) throw Error("projection of " + std::string(to_string(role)) + " references an unknown dimension");
      if (!seen.insert(d).second)
        throw Error("projection of " + std::string(to_string(role)) + " repeats dimension " + dims[d].name);
    }
  }
  for (auto d : projection(TensorRole::Outputs)) {
    if (!indexes(TensorRole::Inputs, d) && !indexes(TensorRole::Weights, d))
      throw Error("Outputs dimension " + dims[d].name + " indexes neither Inputs nor Weights");
  }
}

const ValuePMF& WorkloadLayer::pmf(TensorRole role) const {
  const auto& p = pmfs[index(role)];
  if (!p) throw Error("layer " + name + " has no PMF for " + std::string(to_string(role)));
  return *p;
}

std::size_t WorkloadLayer::stored_pmf_count() const {
  return static_cast<std::size_t>(std::count_if(pmfs.begin(), pmfs.end(), [](const auto& p) { return p.has_value(); }));
}

std::pair<std::int64_t, std::int64_t> representable_range(int bits, bool is_signed) {
  if (bits < 1 || bits > 62) throw Error("bit width must lie in [1, 62]");
  if (is_signed) return {-(std::int64_t{1} << (bits - 1)), (std::int64_t{1} << (bits - 1)) - 1};
  return {0, (std::int64_t{1} << bits) - 1};
}

void WorkloadLayer::check() const {
  einsum.check();
  for (auto role : {TensorRole::Inputs, TensorRole::Weights}) {
    if (!pmfs[index(role)]) throw Error("layer " + name + " has no PMF for " + std::string(to_string(role)));
  }
  for (auto role : kTensorRoles) {
    const auto& p = pmfs[index(role)];
    if (!p) continue;
    const auto [lo, hi] = representable_range(bits[index(role)], is_signed[index(role)]);
    if (p->min() < lo || p->max() > hi) {
      throw Error("layer " + name + ": " + std::string(to_string(role)) + " PMF values [" +
                  std::to_string(p->min()) + ", " + std::to_string(p->max()) + "] do not fit " +
                  std::to_string(bits[index(role)]) + (is_signed[index(role)] ? " signed" : " unsigned") + " bits");
    }
  }
}

std::uint64_t mac_count(const WorkloadLayer& layer) {
  std::uint64_t n = 1;
  for (const auto& d : layer.einsum.dims) n *= static_cast<std::uint64_t>(d.size);
  return n;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

TensorRole role_key(const YAML::Node& key) {
  auto text = yaml::scalar(key, "tensor role");
  auto role = parse_role(text);
  if (!role) yaml::fail(key, "unknown tensor role '" + text + "' (expected Inputs, Weights or Outputs)");
  return *role;
}

ValuePMF parse_pmf(const YAML::Node& node, const std::filesystem::path& base_dir, std::size_t& sample_count) {
  if (!node.IsMap() || node.size() == 0) yaml::fail(node, "PMF must be a map with one of file/uniform/delta/two_point/support");
  auto numbers = [](const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) yaml::fail(n, what + " must be a list");
    std::vector<double> out;
    for (const auto& x : n) out.push_back(yaml::number(x, what));
    return out;
  };
  try {
    if (node["file"]) {
      auto path = std::filesystem::path(yaml::scalar(node["file"], "PMF file"));
      if (path.is_relative()) path = base_dir / path;
      auto samples = read_samples(path);
      sample_count = samples.size();
      return build_pmf(samples);
    }
    if (node["uniform"]) return synth_pmf(SynthKind::Uniform, numbers(node["uniform"], "uniform"));
    if (node["delta"]) {
      double v = yaml::number(node["delta"], "delta");
      return synth_pmf(SynthKind::Delta, std::span<const double>(&v, 1));
    }
    if (node["two_point"]) return synth_pmf(SynthKind::TwoPoint, numbers(node["two_point"], "two_point"));
    if (node["support"]) {
      if (!node["probs"]) yaml::fail(node, "explicit PMF needs both support and probs");
      std::vector<std::int64_t> support;
      for (const auto& x : node["support"]) support.push_back(yaml::integer(x, "support value"));
      return ValuePMF(std::move(support), numbers(node["probs"], "probs"));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    yaml::fail(node, e.what());
  }
  yaml::fail(node, "PMF must use one of file/uniform/delta/two_point/support");
}

WorkloadLayer parse_layer(const YAML::Node& node, const std::filesystem::path& base_dir) {
  if (!node.IsMap()) yaml::fail(node, "layer must be a map");
  WorkloadLayer layer;
  if (!node["name"]) yaml::fail(node, "layer is missing 'name'");
  layer.name = yaml::scalar(node["name"], "layer name");
  const std::string where = "layer " + layer.name;

  const auto dims = node["dims"];
  if (!dims || !dims.IsMap()) yaml::fail(dims ? dims : node, where + ": 'dims' must be a map of name -> size");
  for (const auto& kv : dims) {
    Dim d{yaml::scalar(kv.first, "dim name"), yaml::integer(kv.second, "dim size")};
    if (d.size < 1) yaml::fail(kv.second, where + ": dimension " + d.name + " must be positive");
    if (layer.einsum.dim_index(d.name)) yaml::fail(kv.first, where + ": duplicate dimension " + d.name);
    layer.einsum.dims.push_back(std::move(d));
  }

  const auto projections = node["projections"];
  if (!projections || !projections.IsMap()) yaml::fail(projections ? projections : node, where + ": 'projections' must be a map");
  std::array<bool, kNumTensors> seen{};
  for (const auto& kv : projections) {
    auto role = role_key(kv.first);
    if (seen[index(role)]) yaml::fail(kv.first, where + ": duplicate projection for " + std::string(to_string(role)));
    seen[index(role)] = true;
    for (const auto& name_node : kv.second) {
      auto name = yaml::scalar(name_node, "dimension name");
      auto d = layer.einsum.dim_index(name);
      if (!d) yaml::fail(name_node, where + ": projection of " + std::string(to_string(role)) + " references undeclared dimension " + name);
      layer.einsum.projections[index(role)].push_back(*d);
    }
  }
  for (auto role : kTensorRoles) {
    if (!seen[index(role)]) yaml::fail(projections, where + ": missing projection for " + std::string(to_string(role)));
  }

  std::array<bool, kNumTensors> has_bits{};
  if (const auto bits = node["bits"]) {
    for (const auto& kv : bits) {
      auto role = role_key(kv.first);
      auto b = yaml::integer(kv.second, "bit width");
      if (b < 1 || b > 62) yaml::fail(kv.second, where + ": bit width must lie in [1, 62]");
      layer.bits[index(role)] = static_cast<int>(b);
      has_bits[index(role)] = true;
    }
  }
  if (!has_bits[index(TensorRole::Outputs)]) {
    layer.bits[index(TensorRole::Outputs)] =
        std::max(layer.bits[index(TensorRole::Inputs)], layer.bits[index(TensorRole::Weights)]);
  }

  std::array<std::optional<bool>, kNumTensors> declared_signed;
  if (const auto s = node["signed"]) {
    for (const auto& kv : s) declared_signed[index(role_key(kv.first))] = yaml::as<bool>(kv.second, "signedness");
  }

  const auto pmf = node["pmf"];
  if (!pmf || !pmf.IsMap()) yaml::fail(pmf ? pmf : node, where + ": 'pmf' must be a map of role -> distribution");
  std::array<YAML::Node, kNumTensors> pmf_nodes;
  for (const auto& kv : pmf) {
    auto role = role_key(kv.first);
    pmf_nodes[index(role)] = kv.second;
    try {
      layer.pmfs[index(role)] = parse_pmf(kv.second, base_dir, layer.sample_counts[index(role)]);
    } catch (const ParseError& e) {
      throw ParseError(where + ", " + std::string(to_string(role)) + " PMF: " + e.message(), e.line(), e.column());
    }
  }
  for (auto role : {TensorRole::Inputs, TensorRole::Weights}) {
    if (!layer.pmfs[index(role)]) yaml::fail(pmf, where + ": missing PMF for " + std::string(to_string(role)));
  }

  for (auto role : kTensorRoles) {
    const auto i = index(role);
    if (declared_signed[i]) {
      layer.is_signed[i] = *declared_signed[i];
    } else if (layer.pmfs[i]) {
      layer.is_signed[i] = layer.pmfs[i]->min() < 0;
    } else {
      layer.is_signed[i] = layer.is_signed[index(TensorRole::Inputs)] || layer.is_signed[index(TensorRole::Weights)];
    }
  }

  if (!layer.pmfs[index(TensorRole::Outputs)]) {
    const auto [lo, hi] = representable_range(layer.bits[index(TensorRole::Outputs)], layer.is_signed[index(TensorRole::Outputs)]);
    if (hi - lo + 1 > (std::int64_t{1} << 20))
      yaml::fail(pmf, where + ": Outputs bit range too wide for the uniform default; supply an Outputs PMF");
    layer.pmfs[index(TensorRole::Outputs)] = uniform_pmf(lo, hi);
    layer.outputs_pmf_defaulted = true;
  }

  for (auto role : kTensorRoles) {
    const auto i = index(role);
    const auto [lo, hi] = representable_range(layer.bits[i], layer.is_signed[i]);
    const auto& p = *layer.pmfs[i];
    if (p.min() < lo || p.max() > hi) {
      yaml::fail(pmf_nodes[i] ? pmf_nodes[i] : pmf,
                 where + ": " + std::string(to_string(role)) + " PMF values do not fit " + std::to_string(layer.bits[i]) +
                     (layer.is_signed[i] ? " signed" : " unsigned") + " bits");
    }
  }

  try {
    layer.check();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    yaml::fail(node, e.what());
  }
  return layer;
}

}  // namespace

std::vector<WorkloadLayer> parse_workload(std::string_view text, const std::filesystem::path& base_dir) {
  auto root = yaml::load(std::string(text));
  if (!root.IsMap() || !root["layers"]) throw ParseError("workload document must have a top-level 'layers:' list", 1, 1);
  const auto layers = root["layers"];
  if (!layers.IsSequence()) yaml::fail(layers, "'layers' must be a list");
  std::vector<WorkloadLayer> out;
  std::set<std::string> names;
  for (const auto& node : layers) {
    out.push_back(parse_layer(node, base_dir));
    if (!names.insert(out.back().name).second) yaml::fail(node, "duplicate layer name " + out.back().name);
  }
  if (out.empty()) yaml::fail(layers, "workload declares no layers");
  return out;
}

std::vector<WorkloadLayer> load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_workload(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace cim
