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

#include "cimmodel/components.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace cim {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Read:
      return "read";
    case Action::Write:
      return "write";
    case Action::Fill:
      return "fill";
    case Action::Update:
      return "update";
    case Action::Convert:
      return "convert";
    case Action::Compute:
      return "compute";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view text) {
  for (auto a : kActions) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

namespace {

const Attributes kNoAttributes;

double required(const Attributes& attrs, std::string_view key, std::string_view node) {
  auto v = attr_number(attrs, key);
  if (!v) throw Error("node " + std::string(node) + ": missing attribute " + std::string(key));
  return *v;
}

std::int64_t levels_for(int bits) { return std::int64_t{1} << bits; }

}  // namespace

const Attributes& ActionContext::attrs() const { return attributes ? *attributes : kNoAttributes; }

const OperandView& ActionContext::operand(TensorRole role) const {
  const auto* op = operands[index(role)];
  if (!op || op->slices.empty())
    throw Error("node " + node + ": no " + std::string(to_string(role)) + " distribution available");
  return *op;
}

const Attributes& ValueContext::attrs() const { return attributes ? *attributes : kNoAttributes; }

const OperandValue& ValueContext::operand(TensorRole role) const {
  const auto& op = operands[index(role)];
  if (!op) throw Error("node " + std::string(node) + ": no " + std::string(to_string(role)) + " value available");
  return *op;
}

// ---------------------------------------------------------------------------
// Base class defaults

double ComponentModel::value_energy(Action action, std::optional<TensorRole> role, const ValueContext& ctx) const {
  std::array<OperandView, kNumTensors> views;
  ActionContext actx;
  actx.node = std::string(ctx.node);
  actx.attributes = ctx.attributes;
  for (auto r : kTensorRoles) {
    const auto& v = ctx.operands[index(r)];
    if (!v) continue;
    auto& view = views[index(r)];
    view.widths = {v->width};
    view.slices = {delta_pmf(v->level)};
    if (v->has_companion) {
      view.encoding = EncodingKind::Differential;
      view.companion_slices = {delta_pmf(v->companion)};
    }
    actx.operands[index(r)] = &view;
  }
  return energy(action, role, actx);
}

double ComponentModel::area(const Attributes& attrs) const { return attr_number_or(attrs, "area", 0.0); }

double ComponentModel::leakage_power(const Attributes& attrs) const {
  return attr_number_or(attrs, "leakage_power", 0.0);
}

// ---------------------------------------------------------------------------
// Built-in formulas

namespace {

struct CellParams {
  double vdd;
  double g_min;
  double g_max;
  double t_read;
};

CellParams cell_params(const Attributes& attrs, std::string_view node) {
  CellParams p{};
  auto v = attr_number(attrs, "v_read");
  if (!v) v = attr_number(attrs, "vdd");
  if (!v) throw Error("node " + std::string(node) + ": missing attribute v_read (or vdd)");
  p.vdd = *v;
  p.g_min = attr_number_or(attrs, "g_min", 0.0);
  p.g_max = required(attrs, "g_max", node);
  p.t_read = required(attrs, "t_read", node);
  return p;
}

// Mean over slices of a per-slice moment, summing the differential line.
template <typename Moment>
double mean_over_slices(const OperandView& op, Moment&& moment) {
  double total = 0.0;
  for (std::size_t i = 0; i < op.slices.size(); ++i) {
    total += moment(op.slices[i], op.widths.at(i));
    if (!op.companion_slices.empty()) total += moment(op.companion_slices.at(i), op.widths.at(i));
  }
  return total / static_cast<double>(op.slices.size());
}

double cell_value_energy(const CellParams& p, const OperandValue& in, const OperandValue& w) {
  const auto vmap = PhysicalMap::voltage(p.vdd, levels_for(in.width));
  const auto gmap = PhysicalMap::conductance(p.g_min, p.g_max, levels_for(w.width));
  double v2 = std::pow(vmap(in.level), 2);
  if (in.has_companion) v2 += std::pow(vmap(in.companion), 2);
  double g = gmap(w.level);
  if (w.has_companion) g += gmap(w.companion);
  return g * v2 * p.t_read;
}

struct DacParams {
  bool switching;
  double e_full_scale;
  std::optional<double> resolution;
};

DacParams dac_params(const Attributes& attrs, std::string_view node) {
  DacParams p{};
  const auto model = attr_string(attrs, "model").value_or("value_proportional");
  if (model == "value_proportional") {
    p.switching = false;
  } else if (model == "switching") {
    p.switching = true;
  } else {
    throw Error("node " + std::string(node) + ": unknown DAC model '" + model + "'");
  }
  p.e_full_scale = required(attrs, "e_full_scale", node);
  p.resolution = attr_number(attrs, "resolution");
  return p;
}

int dac_bits(const DacParams& p, int width) {
  const int bits = p.resolution ? static_cast<int>(*p.resolution) : width;
  if (bits < 1) throw Error("DAC resolution must be positive");
  return bits;
}

double dac_level_energy(const DacParams& p, std::int64_t level, int width) {
  const int bits = dac_bits(p, width);
  if (level < 0 || level >= levels_for(bits))
    throw Error("DAC input level " + std::to_string(level) + " exceeds " + std::to_string(bits) + "-bit resolution");
  if (p.switching) return p.e_full_scale * std::popcount(static_cast<std::uint64_t>(level)) / bits;
  return p.e_full_scale * static_cast<double>(level) / static_cast<double>(levels_for(bits) - 1);
}

}  // namespace

double memcell_compute_energy(const ActionContext& ctx) {
  const auto p = cell_params(ctx.attrs(), ctx.node);
  const double v2 = mean_over_slices(ctx.operand(TensorRole::Inputs), [&](const ValuePMF& pmf, int width) {
    return expected_moment(pmf, PhysicalMap::voltage(p.vdd, levels_for(width)), 2);
  });
  const double g = mean_over_slices(ctx.operand(TensorRole::Weights), [&](const ValuePMF& pmf, int width) {
    return expected_moment(pmf, PhysicalMap::conductance(p.g_min, p.g_max, levels_for(width)), 1);
  });
  return g * v2 * p.t_read;
}

double dac_convert_energy(const ActionContext& ctx, TensorRole role) {
  const auto p = dac_params(ctx.attrs(), ctx.node);
  return mean_over_slices(ctx.operand(role), [&](const ValuePMF& pmf, int width) {
    const int bits = dac_bits(p, width);
    if (p.switching) return p.e_full_scale * switching_rate(pmf, bits);
    if (pmf.min() < 0 || pmf.max() >= levels_for(bits))
      throw Error("node " + ctx.node + ": DAC input levels exceed " + std::to_string(bits) + "-bit resolution");
    const double mean_level = (pmf.probs() * support_array(pmf)).sum();
    return p.e_full_scale * mean_level / static_cast<double>(levels_for(bits) - 1);
  });
}

namespace {

int adc_bits(const Attributes& attrs) {
  auto b = attr_number(attrs, "resolution");
  if (!b) throw Error("ADC is missing attribute resolution");
  if (*b <= 0) throw Error("ADC resolution must be positive");
  return static_cast<int>(*b);
}

}  // namespace

double adc_convert_energy(const Attributes& attrs) {
  const int bits = adc_bits(attrs);
  const double fs = attr_number_or(attrs, "sample_rate", kDefaultAdcSampleRate);
  if (fs <= 0) throw Error("ADC sample_rate must be positive");
  return attr_number_or(attrs, "fom", kDefaultAdcFom) * std::ldexp(1.0, bits);
}

double adc_area(const Attributes& attrs) {
  if (auto a = attr_number(attrs, "area")) return *a;
  const int bits = adc_bits(attrs);
  const double fs = attr_number_or(attrs, "sample_rate", kDefaultAdcSampleRate);
  if (fs <= 0) throw Error("ADC sample_rate must be positive");
  return attr_number_or(attrs, "a0", kDefaultAdcAreaA0) + attr_number_or(attrs, "a1", kDefaultAdcAreaA1) * std::ldexp(1.0, bits) +
         attr_number_or(attrs, "a2", kDefaultAdcAreaA2) * fs;
}

double buffer_access_energy(const Attributes& attrs) {
  return required(attrs, "e_per_bit", "buffer") * required(attrs, "width", "buffer");
}

double adder_energy(const Attributes& attrs) { return required(attrs, "e_per_add", "adder"); }

double wire_energy(const Attributes& attrs) {
  return required(attrs, "e_per_bit", "wire") * required(attrs, "width", "wire");
}

// ---------------------------------------------------------------------------
// Built-in models

namespace {

constexpr bool is_storage(Action a) {
  return a == Action::Read || a == Action::Write || a == Action::Fill || a == Action::Update;
}

// Cells hold their operand; reading or rewriting the stored value is priced
// separately from the MAC itself.
double cell_storage_energy(Action a, const Attributes& attrs) {
  return a == Action::Read ? attr_number_or(attrs, "e_read", 0.0) : attr_number_or(attrs, "e_write", 0.0);
}

class MemoryCellModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return a == Action::Compute || is_storage(a); }
  double energy(Action a, std::optional<TensorRole>, const ActionContext& ctx) const override {
    if (a == Action::Compute) return memcell_compute_energy(ctx);
    return cell_storage_energy(a, ctx.attrs());
  }
  double value_energy(Action a, std::optional<TensorRole>, const ValueContext& ctx) const override {
    if (a != Action::Compute) return cell_storage_energy(a, ctx.attrs());
    return cell_value_energy(cell_params(ctx.attrs(), ctx.node), ctx.operand(TensorRole::Inputs),
                             ctx.operand(TensorRole::Weights));
  }
};

class SramCellModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return a == Action::Compute || is_storage(a); }
  double energy(Action a, std::optional<TensorRole>, const ActionContext& ctx) const override {
    if (a == Action::Compute) return required(ctx.attrs(), "e_mac", ctx.node);
    return cell_storage_energy(a, ctx.attrs());
  }
  double value_energy(Action a, std::optional<TensorRole>, const ValueContext& ctx) const override {
    if (a == Action::Compute) return required(ctx.attrs(), "e_mac", ctx.node);
    return cell_storage_energy(a, ctx.attrs());
  }
};

class DacModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return a == Action::Convert; }
  double energy(Action, std::optional<TensorRole> role, const ActionContext& ctx) const override {
    return dac_convert_energy(ctx, role.value_or(TensorRole::Inputs));
  }
  double value_energy(Action, std::optional<TensorRole> role, const ValueContext& ctx) const override {
    const auto p = dac_params(ctx.attrs(), ctx.node);
    const auto& v = ctx.operand(role.value_or(TensorRole::Inputs));
    double e = dac_level_energy(p, v.level, v.width);
    if (v.has_companion) e += dac_level_energy(p, v.companion, v.width);
    return e;
  }
};

class AdcModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return a == Action::Convert; }
  double energy(Action, std::optional<TensorRole>, const ActionContext& ctx) const override {
    return adc_convert_energy(ctx.attrs());
  }
  double value_energy(Action, std::optional<TensorRole>, const ValueContext& ctx) const override {
    return adc_convert_energy(ctx.attrs());
  }
  double area(const Attributes& attrs) const override { return adc_area(attrs); }
};

class BufferModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return is_storage(a); }
  double energy(Action a, std::optional<TensorRole>, const ActionContext& ctx) const override {
    // An update is a read-modify-write.
    return (a == Action::Update ? 2.0 : 1.0) * buffer_access_energy(ctx.attrs());
  }
  double value_energy(Action a, std::optional<TensorRole>, const ValueContext& ctx) const override {
    return (a == Action::Update ? 2.0 : 1.0) * buffer_access_energy(ctx.attrs());
  }
};

class AdderModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return a == Action::Convert; }
  double energy(Action, std::optional<TensorRole>, const ActionContext& ctx) const override {
    return adder_energy(ctx.attrs());
  }
  double value_energy(Action, std::optional<TensorRole>, const ValueContext& ctx) const override {
    return adder_energy(ctx.attrs());
  }
};

class WireModel final : public ComponentModel {
 public:
  bool supports(Action a) const override { return a == Action::Convert; }
  double energy(Action, std::optional<TensorRole>, const ActionContext& ctx) const override {
    return wire_energy(ctx.attrs());
  }
  double value_energy(Action, std::optional<TensorRole>, const ValueContext& ctx) const override {
    return wire_energy(ctx.attrs());
  }
};

}  // namespace

ModelRegistry ModelRegistry::with_builtins() {
  ModelRegistry r;
  r.register_model("memory_cell", std::make_shared<MemoryCellModel>());
  r.register_model("sram_cell", std::make_shared<SramCellModel>());
  r.register_model("dac", std::make_shared<DacModel>());
  r.register_model("adc", std::make_shared<AdcModel>());
  r.register_model("buffer", std::make_shared<BufferModel>());
  r.register_model("adder", std::make_shared<AdderModel>());
  r.register_model("wire", std::make_shared<WireModel>());
  r.register_model("router", std::make_shared<WireModel>());
  return r;
}

void ModelRegistry::register_model(const std::string& name, ModelPtr model, bool override_existing) {
  if (!model) throw Error("cannot register a null model for class " + name);
  if (name.empty()) throw Error("model class name is empty");
  if (!override_existing && models_.count(name))
    throw Error("model class " + name + " is already registered (pass override to replace it)");
  models_[name] = std::move(model);
}

bool ModelRegistry::contains(std::string_view name) const { return models_.find(name) != models_.end(); }

ModelPtr ModelRegistry::find(std::string_view name) const {
  auto it = models_.find(name);
  return it == models_.end() ? nullptr : it->second;
}

const ComponentModel& ModelRegistry::resolve(const ArchNode& node) const {
  if (node.class_name.empty()) throw Error("node " + node.name + " has no class");
  auto it = models_.find(node.class_name);
  if (it == models_.end()) throw Error("node " + node.name + ": unknown class " + node.class_name);
  return *it->second;
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : models_) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------

void EnergyTable::resize(std::size_t n) {
  node_names.assign(n, {});
  energy.assign(n * kNumActions * kNumSlots, 0.0);
  present.assign(n * kNumActions * kNumSlots, 0);
  area_per_instance.assign(n, 0.0);
  leakage_per_instance.assign(n, 0.0);
}

bool EnergyTable::identical(const EnergyTable& other) const {
  auto same_bits = [](const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  };
  return node_names == other.node_names && present == other.present && same_bits(energy, other.energy) &&
         same_bits(area_per_instance, other.area_per_instance) &&
         same_bits(leakage_per_instance, other.leakage_per_instance);
}

}  // namespace cim
