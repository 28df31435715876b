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

#include "cimmodel/archspec.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "yaml_util.hpp"

namespace cim {

namespace {

constexpr std::string_view kNumericKeys[] = {
    "a0",           "a1",       "a2",          "area",         "capacity",   "clock_period",
    "e_full_scale", "e_mac",    "e_per_add",   "e_per_bit",    "e_read",     "e_write",
    "fom",          "g_max",    "g_min",       "leakage_power", "levels",    "node_nm",
    "resolution",   "rows",     "cols",        "sample_rate",  "t_read",     "vdd",
    "v_read",       "width",
};

const char* reuse_key(Reuse r) {
  switch (r) {
    case Reuse::TemporalReuse:
      return "temporal_reuse";
    case Reuse::Coalesce:
      return "coalesce";
    case Reuse::NoCoalesce:
      return "no_coalesce";
    case Reuse::Bypass:
      return "bypass";
  }
  return "?";
}

}  // namespace

bool is_numeric_attribute(std::string_view key) {
  return std::find(std::begin(kNumericKeys), std::end(kNumericKeys), key) != std::end(kNumericKeys);
}

std::optional<double> attr_number(const Attributes& attrs, std::string_view key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) return std::nullopt;
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  throw Error("attribute " + std::string(key) + " must be numeric, got '" + format_attr(it->second) + "'");
}

double attr_number_or(const Attributes& attrs, std::string_view key, double fallback) {
  return attr_number(attrs, key).value_or(fallback);
}

std::optional<std::string> attr_string(const Attributes& attrs, std::string_view key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error("attribute " + std::string(key) + " must be a string");
}

std::optional<std::vector<double>> attr_list(const Attributes& attrs, std::string_view key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) return std::nullopt;
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  if (const double* d = std::get_if<double>(&it->second)) return std::vector<double>{*d};
  throw Error("attribute " + std::string(key) + " must be a number or a list of numbers");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_attr(const AttrValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
          return out + "]";
        }
      },
      value);
}

std::string_view to_string(Reuse reuse) { return reuse_key(reuse); }

std::optional<std::size_t> ArchTree::find(std::string_view name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == name) return i;
  }
  return std::nullopt;
}

const ArchNode& ArchTree::node(std::string_view name) const {
  auto i = find(name);
  if (!i) throw Error("unknown node " + std::string(name));
  return nodes[*i];
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

// The published syntax starts each node with a bare `!Component` line
// instead of a `---` document marker. Turn those into document starts so
// the stream loads as one YAML document per node, keeping line numbers.
std::string normalize_tags(std::string_view text) {
  static const std::regex bare_tag(R"(^!(Component|Container|Defaults)\b)");
  std::string out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (std::regex_search(line, bare_tag)) out += "--- ";
    out += line;
    out += '\n';
  }
  return out;
}

AttrValue parse_attr_value(const YAML::Node& node, const std::string& key) {
  if (node.IsSequence()) {
    std::vector<double> values;
    for (const auto& item : node) values.push_back(yaml::number(item, "attribute " + key));
    return values;
  }
  if (!node.IsScalar()) yaml::fail(node, "attribute " + key + " must be a scalar or a list of numbers");
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted
  if (text == "true" || text == "false") return text == "true";
  double d = 0;
  if (YAML::convert<double>::decode(node, d)) return d;
  return text;
}

Attributes parse_attributes(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) yaml::fail(node, where + ": attributes must be a map");
  Attributes attrs;
  for (const auto& kv : node) {
    auto key = yaml::scalar(kv.first, "attribute name");
    attrs[key] = parse_attr_value(kv.second, key);
  }
  return attrs;
}

std::vector<TensorRole> parse_roles(const YAML::Node& node, const std::string& where) {
  std::vector<TensorRole> roles;
  for (const auto& name : yaml::string_list(node, where)) {
    auto role = parse_role(name);
    if (!role) yaml::fail(node, where + ": unknown tensor '" + name + "'");
    roles.push_back(*role);
  }
  return roles;
}

std::int64_t parse_mesh(const YAML::Node& node, const std::string& what) {
  auto v = yaml::integer(node, what);
  if (v < 1) yaml::fail(node, what + " must be a positive integer");
  return v;
}

Constraints parse_constraints(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) yaml::fail(node, where + ": constraints must be a map");
  Constraints c;
  for (const auto& kv : node) {
    auto key = yaml::scalar(kv.first, "constraint");
    if (key == "keep_dims") {
      c.keep_dims = yaml::string_list(kv.second, "keep_dims");
    } else if (key == "spatial_dims") {
      c.spatial_dims = yaml::string_list(kv.second, "spatial_dims");
    } else if (key == "max_tile") {
      if (!kv.second.IsMap()) yaml::fail(kv.second, where + ": max_tile must be a map of dim -> bound");
      for (const auto& m : kv.second) {
        auto bound = yaml::integer(m.second, "max_tile bound");
        if (bound < 1) yaml::fail(m.second, where + ": max_tile bounds must be positive");
        c.max_tile[yaml::scalar(m.first, "dim name")] = bound;
      }
    } else {
      yaml::fail(kv.first, where + ": unknown constraint '" + key + "'");
    }
  }
  return c;
}

ArchNode parse_node(const YAML::Node& doc, NodeKind kind) {
  if (!doc.IsMap()) yaml::fail(doc, "node document must be a map");
  ArchNode node;
  node.kind = kind;
  node.line = doc.Mark().line + 1;
  if (!doc["name"]) yaml::fail(doc, "node is missing 'name'");
  node.name = yaml::scalar(doc["name"], "node name");
  if (node.name.empty()) yaml::fail(doc["name"], "node name is empty");
  const std::string where = "node " + node.name;
  const bool container = kind == NodeKind::Container;

  for (const auto& kv : doc) {
    const auto key = yaml::scalar(kv.first, "key");
    const auto& value = kv.second;
    if (key == "name") continue;
    if (key == "class") {
      if (container) yaml::fail(kv.first, where + ": a Container cannot have a class");
      node.class_name = yaml::scalar(value, "class");
    } else if (key == "attributes") {
      node.attributes = parse_attributes(value, where);
    } else if (key == "temporal_reuse" || key == "coalesce" || key == "no_coalesce" || key == "bypass") {
      if (container) yaml::fail(kv.first, where + ": a Container cannot declare " + key);
      const Reuse r = key == "temporal_reuse" ? Reuse::TemporalReuse
                      : key == "coalesce"     ? Reuse::Coalesce
                      : key == "no_coalesce"  ? Reuse::NoCoalesce
                                              : Reuse::Bypass;
      for (auto role : parse_roles(value, where + " " + key)) node.declared[index(role)].push_back(r);
    } else if (key == "spatial") {
      if (!value.IsMap()) yaml::fail(value, where + ": spatial must be a map {meshX, meshY}");
      for (const auto& m : value) {
        auto axis = yaml::scalar(m.first, "mesh axis");
        if (axis == "meshX") {
          node.mesh_x = parse_mesh(m.second, where + " meshX");
        } else if (axis == "meshY") {
          node.mesh_y = parse_mesh(m.second, where + " meshY");
        } else {
          yaml::fail(m.first, where + ": unknown spatial key '" + axis + "'");
        }
      }
    } else if (key == "spatial_reuse") {
      for (auto role : parse_roles(value, where + " spatial_reuse")) node.spatial_reuse[index(role)] = true;
    } else if (key == "constraints") {
      node.constraints = parse_constraints(value, where);
    } else {
      yaml::fail(kv.first, where + ": unknown directive or key '" + key + "'");
    }
  }
  return node;
}

}  // namespace

ArchTree parse_arch(std::string_view text) {
  ArchTree tree;
  std::set<std::string> names;
  for (const auto& doc : yaml::load_all(normalize_tags(text))) {
    if (doc.IsNull()) continue;
    const auto& tag = doc.Tag();
    if (tag == "!Defaults") {
      for (auto& [k, v] : parse_attributes(doc, "defaults")) tree.defaults[k] = std::move(v);
      continue;
    }
    NodeKind kind;
    if (tag == "!Component") {
      kind = NodeKind::Component;
    } else if (tag == "!Container") {
      kind = NodeKind::Container;
    } else {
      yaml::fail(doc, "node must be tagged !Component or !Container" + (tag.empty() || tag == "?" ? std::string() : ", got " + tag));
    }
    auto node = parse_node(doc, kind);
    if (!names.insert(node.name).second) yaml::fail(doc["name"], "duplicate node name " + node.name);
    tree.nodes.push_back(std::move(node));
  }
  if (tree.nodes.empty()) throw ParseError("architecture declares no nodes", 1, 1);
  return tree;
}

ArchTree load_arch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_arch(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void emit_attr(YAML::Emitter& out, const AttrValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    out << YAML::DoubleQuoted << *s;
  } else if (const auto* list = std::get_if<std::vector<double>>(&v)) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double d : *list) out << format_double(d);
    out << YAML::EndSeq;
  } else {
    out << format_attr(v);
  }
}

void emit_attributes(YAML::Emitter& out, const Attributes& attrs) {
  out << YAML::BeginMap;
  for (const auto& [k, v] : attrs) {
    out << YAML::Key << k << YAML::Value;
    emit_attr(out, v);
  }
  out << YAML::EndMap;
}

}  // namespace

std::string serialize_arch(const ArchTree& tree) {
  // One emitter per block, written in the same tag-per-block layout the
  // parser reads.
  std::string text;
  if (!tree.defaults.empty()) {
    YAML::Emitter out;
    emit_attributes(out, tree.defaults);
    text += "!Defaults\n" + std::string(out.c_str()) + "\n\n";
  }
  for (const auto& node : tree.nodes) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << node.name;
    if (!node.class_name.empty()) out << YAML::Key << "class" << YAML::Value << YAML::DoubleQuoted << node.class_name;
    if (!node.attributes.empty()) {
      out << YAML::Key << "attributes" << YAML::Value;
      emit_attributes(out, node.attributes);
    }
    // Declaration order per tensor is kept by emitting one list per
    // position in each tensor's directive list.
    std::size_t depth = 0;
    for (const auto& d : node.declared) depth = std::max(depth, d.size());
    for (std::size_t pos = 0; pos < depth; ++pos) {
      for (auto r : {Reuse::TemporalReuse, Reuse::Coalesce, Reuse::NoCoalesce, Reuse::Bypass}) {
        std::vector<std::string> roles;
        for (auto role : kTensorRoles) {
          const auto& d = node.declared[index(role)];
          if (pos < d.size() && d[pos] == r) roles.emplace_back(to_string(role));
        }
        if (roles.empty()) continue;
        out << YAML::Key << reuse_key(r) << YAML::Value << YAML::Flow << roles;
      }
    }
    if (node.mesh_x != 1 || node.mesh_y != 1) {
      out << YAML::Key << "spatial" << YAML::Value << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "meshX" << YAML::Value << node.mesh_x;
      out << YAML::Key << "meshY" << YAML::Value << node.mesh_y;
      out << YAML::EndMap;
    }
    std::vector<std::string> reused;
    for (auto role : kTensorRoles) {
      if (node.spatial_reuse[index(role)]) reused.emplace_back(to_string(role));
    }
    if (!reused.empty()) out << YAML::Key << "spatial_reuse" << YAML::Value << YAML::Flow << reused;
    if (!node.constraints.empty()) {
      const auto& c = node.constraints;
      out << YAML::Key << "constraints" << YAML::Value << YAML::BeginMap;
      if (c.keep_dims) out << YAML::Key << "keep_dims" << YAML::Value << YAML::Flow << *c.keep_dims;
      if (c.spatial_dims) out << YAML::Key << "spatial_dims" << YAML::Value << YAML::Flow << *c.spatial_dims;
      if (!c.max_tile.empty()) out << YAML::Key << "max_tile" << YAML::Value << YAML::Flow << c.max_tile;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
    if (!out.good()) throw Error("cannot serialize node " + node.name + ": " + out.GetLastError());
    text += node.kind == NodeKind::Component ? "!Component\n" : "!Container\n";
    text += std::string(out.c_str()) + "\n\n";
  }
  return text;
}

// ---------------------------------------------------------------------------
// Validation and queries

Diagnostics validate(const ArchTree& tree, const WorkloadLayer* layer) {
  Diagnostics diags;
  auto report = [&](std::string msg) { diags.push_back({std::move(msg)}); };

  if (tree.nodes.empty() || tree.leaf().kind != NodeKind::Component) {
    report("no compute leaf: the innermost node must be a Component");
  }

  std::set<std::string> names;
  for (const auto& node : tree.nodes) {
    if (!names.insert(node.name).second) report("duplicate node name " + node.name);
    if (node.kind == NodeKind::Container && !node.class_name.empty())
      report("container " + node.name + " has a class");
    if (node.mesh_x < 1 || node.mesh_y < 1) report("node " + node.name + " has a non-positive mesh");
    for (auto role : kTensorRoles) {
      const auto& d = node.declared[index(role)];
      for (std::size_t i = 1; i < d.size(); ++i) {
        if (d[i] == d[0]) continue;
        const bool bypassed = d[0] == Reuse::Bypass || d[i] == Reuse::Bypass;
        const Reuse other = d[0] == Reuse::Bypass ? d[i] : d[0];
        if (bypassed) {
          report("contradiction at node " + node.name + ": " + std::string(to_string(other)) + " declared on " +
                 std::string(to_string(role)) + " but " + std::string(to_string(role)) + " bypasses it");
        } else {
          report("contradiction at node " + node.name + ": " + std::string(to_string(role)) + " listed under both " +
                 std::string(to_string(d[0])) + " and " + std::string(to_string(d[i])));
        }
      }
    }
    for (const auto& [key, value] : node.attributes) {
      if (is_numeric_attribute(key) && !std::holds_alternative<double>(value))
        report("node " + node.name + ": attribute " + key + " must be numeric, got '" + format_attr(value) + "'");
    }
  }

  // Every tensor is used by the compute leaf, so every tensor needs a
  // backing store, and it must sit at or above the outermost node that
  // touches the tensor.
  if (!tree.nodes.empty()) {
    for (auto role : kTensorRoles) {
      std::optional<std::size_t> outermost_store;
      std::optional<std::size_t> outermost_user;
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        const bool user = n.uses(role) || i == tree.leaf_index();
        if (user && !outermost_user) outermost_user = i;
        if (n.reuse(role) == Reuse::TemporalReuse && !outermost_store) outermost_store = i;
      }
      if (!outermost_store) {
        report("no backing store for " + std::string(to_string(role)));
      } else if (*outermost_user < *outermost_store) {
        report("no backing store for " + std::string(to_string(role)) + " above node " +
               tree.nodes[*outermost_user].name);
      }
    }
  }

  if (layer) {
    auto known = [&](const std::string& dim) {
      return layer->einsum.dim_index(dim).has_value() || dim == "Islice" || dim == "Wslice";
    };
    for (const auto& node : tree.nodes) {
      const auto& c = node.constraints;
      std::vector<std::string> dims;
      if (c.keep_dims) dims.insert(dims.end(), c.keep_dims->begin(), c.keep_dims->end());
      if (c.spatial_dims) dims.insert(dims.end(), c.spatial_dims->begin(), c.spatial_dims->end());
      for (const auto& [d, _] : c.max_tile) dims.push_back(d);
      for (const auto& d : dims) {
        if (!known(d))
          report("node " + node.name + ": constraint references unknown dim " + d + " (layer " + layer->name + ")");
      }
    }
  }
  return diags;
}

std::int64_t instances(const ArchTree& tree, std::size_t node_index) {
  if (node_index >= tree.nodes.size()) throw Error("node index out of range");
  std::int64_t n = 1;
  for (std::size_t i = 0; i <= node_index; ++i) n *= tree.nodes[i].mesh();
  return n;
}

std::int64_t instances(const ArchTree& tree, std::string_view node_name) {
  auto i = tree.find(node_name);
  if (!i) throw Error("unknown node " + std::string(node_name));
  return instances(tree, *i);
}

ArchTree resolve_attributes(const ArchTree& tree, const Attributes& defaults) {
  ArchTree out = tree;
  for (auto& node : out.nodes) {
    for (const auto& [k, v] : defaults) node.attributes.try_emplace(k, v);
    for (const auto& [key, value] : node.attributes) {
      if (is_numeric_attribute(key) && !std::holds_alternative<double>(value))
        throw Error("node " + node.name + ": attribute " + key + " must be numeric, got '" + format_attr(value) + "'");
    }
  }
  return out;
}

}  // namespace cim
