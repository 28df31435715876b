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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cimmodel/common.hpp"
#include "cimmodel/workload.hpp"

namespace cim {

// Attribute values are plain scalars or numeric lists. Plain YAML scalars
// that parse as numbers become doubles, `true`/`false` become bools, and
// quoted scalars always stay strings.
using AttrValue = std::variant<double, bool, std::string, std::vector<double>>;
using Attributes = std::map<std::string, AttrValue, std::less<>>;

/// Keys that every consumer reads as numbers. A non-numeric value under one
/// of these is a type error.
bool is_numeric_attribute(std::string_view key);

/// Throws Error if the key exists with a non-numeric value.
std::optional<double> attr_number(const Attributes& attrs, std::string_view key);
double attr_number_or(const Attributes& attrs, std::string_view key, double fallback);
std::optional<std::string> attr_string(const Attributes& attrs, std::string_view key);
/// A numeric scalar is returned as a one-element list.
std::optional<std::vector<double>> attr_list(const Attributes& attrs, std::string_view key);
std::string format_attr(const AttrValue& value);

enum class Reuse : std::uint8_t { Bypass, TemporalReuse, Coalesce, NoCoalesce };
enum class NodeKind : std::uint8_t { Component, Container };

std::string_view to_string(Reuse reuse);

struct Constraints {
  /// Dims allowed to iterate temporally at this node; nullopt = no limit.
  std::optional<std::vector<std::string>> keep_dims;
  /// Upper bound on the extent of a dim at or below this node.
  std::map<std::string, std::int64_t> max_tile;
  /// Dims allowed on this node's mesh; nullopt = no limit.
  std::optional<std::vector<std::string>> spatial_dims;

  bool empty() const { return !keep_dims && max_tile.empty() && !spatial_dims; }
  friend bool operator==(const Constraints&, const Constraints&) = default;
};

struct ArchNode {
  std::string name;
  NodeKind kind = NodeKind::Component;
  std::string class_name;  // empty when not declared
  Attributes attributes;
  // Every directive list that mentions each tensor, in declaration order.
  // More than one entry is a contradiction reported by validate().
  std::array<std::vector<Reuse>, kNumTensors> declared;
  std::int64_t mesh_x = 1;
  std::int64_t mesh_y = 1;
  std::array<bool, kNumTensors> spatial_reuse{false, false, false};
  Constraints constraints;
  int line = 0;  // source line, not part of equality

  /// Effective directive: the first declared one, Bypass when unlisted.
  Reuse reuse(TensorRole role) const {
    const auto& d = declared[index(role)];
    return d.empty() ? Reuse::Bypass : d.front();
  }
  bool uses(TensorRole role) const { return reuse(role) != Reuse::Bypass; }
  std::int64_t mesh() const { return mesh_x * mesh_y; }

  friend bool operator==(const ArchNode& a, const ArchNode& b) {
    return a.name == b.name && a.kind == b.kind && a.class_name == b.class_name &&
           a.attributes == b.attributes && a.declared == b.declared && a.mesh_x == b.mesh_x &&
           a.mesh_y == b.mesh_y && a.spatial_reuse == b.spatial_reuse && a.constraints == b.constraints;
  }
};

/// Nodes from outermost to innermost; each node contains every node after
/// it. The last node is the compute leaf.
struct ArchTree {
  std::vector<ArchNode> nodes;
  Attributes defaults;

  std::optional<std::size_t> find(std::string_view name) const;
  const ArchNode& node(std::string_view name) const;
  std::size_t leaf_index() const { return nodes.size() - 1; }
  const ArchNode& leaf() const { return nodes.back(); }

  friend bool operator==(const ArchTree&, const ArchTree&) = default;
};

ArchTree parse_arch(std::string_view text);
ArchTree load_arch(const std::filesystem::path& path);
std::string serialize_arch(const ArchTree& tree);

/// Structural problems. When `layer` is given, constraint dim names are
/// also checked against it (slice dims included).
Diagnostics validate(const ArchTree& tree, const WorkloadLayer* layer = nullptr);

std::int64_t instances(const ArchTree& tree, std::string_view node_name);
std::int64_t instances(const ArchTree& tree, std::size_t node_index);

/// Merges `defaults` under every node's attributes (node values win) and
/// type-checks the numeric keys.
ArchTree resolve_attributes(const ArchTree& tree, const Attributes& defaults);

}  // namespace cim
