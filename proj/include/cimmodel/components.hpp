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

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cimmodel/archspec.hpp"
#include "cimmodel/valuemodel.hpp"

namespace cim {

enum class Action : std::uint8_t { Read, Write, Fill, Update, Convert, Compute };
inline constexpr std::size_t kNumActions = 6;
inline constexpr std::array<Action, kNumActions> kActions{Action::Read,   Action::Write,   Action::Fill,
                                                          Action::Update, Action::Convert, Action::Compute};
constexpr std::size_t index(Action a) { return static_cast<std::size_t>(a); }
std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view text);

/// One tensor as a component sees it: encoded, then sliced.
struct OperandView {
  EncodingKind encoding = EncodingKind::TwosComplement;
  std::vector<int> widths;
  std::vector<ValuePMF> slices;
  /// Negative-line slices for Differential; empty otherwise.
  std::vector<ValuePMF> companion_slices;
};

struct ActionContext {
  std::string layer;
  std::string node;
  const Attributes* attributes = nullptr;
  std::array<const OperandView*, kNumTensors> operands{nullptr, nullptr, nullptr};

  const Attributes& attrs() const;
  /// Throws Error naming the node when the operand is absent.
  const OperandView& operand(TensorRole role) const;
};

/// The concrete slice value of one operand at one event.
struct OperandValue {
  std::int64_t level = 0;
  std::int64_t companion = 0;
  bool has_companion = false;
  int width = 1;
};

struct ValueContext {
  std::string_view node;
  const Attributes* attributes = nullptr;
  std::array<std::optional<OperandValue>, kNumTensors> operands;

  const Attributes& attrs() const;
  const OperandValue& operand(TensorRole role) const;
};

/// Energy/area model for one component class. Implementations must be
/// deterministic and must not depend on the mapping.
class ComponentModel {
 public:
  virtual ~ComponentModel() = default;

  virtual bool supports(Action action) const = 0;

  /// Average energy (J) of one action given operand distributions.
  /// `role` is the tensor the action moves; nullopt for compute.
  virtual double energy(Action action, std::optional<TensorRole> role, const ActionContext& ctx) const = 0;

  /// Energy (J) of one action on concrete values. The default builds delta
  /// distributions from the values and calls energy().
  virtual double value_energy(Action action, std::optional<TensorRole> role, const ValueContext& ctx) const;

  /// Area (m^2) of one instance. Default: the `area` attribute, else 0.
  virtual double area(const Attributes& attrs) const;
  /// Leakage (W) of one instance. Default: `leakage_power`, else 0.
  virtual double leakage_power(const Attributes& attrs) const;
};

using ModelPtr = std::shared_ptr<const ComponentModel>;

class ModelRegistry {
 public:
  /// Registry holding memory_cell, sram_cell, dac, adc, buffer, adder,
  /// wire and router.
  static ModelRegistry with_builtins();

  /// Throws Error when `name` is taken and `override_existing` is false.
  void register_model(const std::string& name, ModelPtr model, bool override_existing = false);
  bool contains(std::string_view name) const;
  ModelPtr find(std::string_view name) const;
  /// The model for a node's class; errors name the node and the class.
  const ComponentModel& resolve(const ArchNode& node) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ModelPtr, std::less<>> models_;
};

// Built-in energy formulas, exposed for direct use and testing.
double memcell_compute_energy(const ActionContext& ctx);
double dac_convert_energy(const ActionContext& ctx, TensorRole role = TensorRole::Inputs);
double adc_convert_energy(const Attributes& attrs);
double adc_area(const Attributes& attrs);
double buffer_access_energy(const Attributes& attrs);
double adder_energy(const Attributes& attrs);
double wire_energy(const Attributes& attrs);

/// Documented ADC defaults.
inline constexpr double kDefaultAdcFom = 10e-15;         // J per conversion step
inline constexpr double kDefaultAdcSampleRate = 1e9;     // Hz
inline constexpr double kDefaultAdcAreaA0 = 5e-11;       // m^2
inline constexpr double kDefaultAdcAreaA1 = 2e-12;       // m^2 per step
inline constexpr double kDefaultAdcAreaA2 = 1e-19;       // m^2 per Hz

/// Tensor slot used to key table entries: one per tensor plus one for
/// tensor-less actions (compute).
inline constexpr std::size_t kNumSlots = kNumTensors + 1;
inline constexpr std::size_t kNoTensorSlot = kNumTensors;
constexpr std::size_t slot(std::optional<TensorRole> role) { return role ? index(*role) : kNoTensorSlot; }

/// Average energy per (node, action, tensor) for one layer. Dense so that
/// evaluation is a flat multiply-accumulate.
struct EnergyTable {
  std::vector<std::string> node_names;
  std::vector<double> energy;           // [node][action][slot]
  std::vector<std::uint8_t> present;    // same layout
  std::vector<double> area_per_instance;
  std::vector<double> leakage_per_instance;

  void resize(std::size_t nodes);
  std::size_t nodes() const { return node_names.size(); }
  static std::size_t offset(std::size_t node, Action a, std::size_t s) {
    return (node * kNumActions + index(a)) * kNumSlots + s;
  }
  bool has(std::size_t node, Action a, std::size_t s) const { return present[offset(node, a, s)] != 0; }
  double at(std::size_t node, Action a, std::size_t s) const { return energy[offset(node, a, s)]; }
  void set(std::size_t node, Action a, std::size_t s, double e) {
    energy[offset(node, a, s)] = e;
    present[offset(node, a, s)] = 1;
  }

  /// Bit-level equality (NaN-safe), used by the mapping-invariance check.
  bool identical(const EnergyTable& other) const;
};

}  // namespace cim
