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

#include "cimmodel/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <regex>
#include <sstream>
#include <thread>

#include "cimmodel/engine.hpp"
#include "yaml_util.hpp"

#ifndef CIM_MODEL_VERSION
#define CIM_MODEL_VERSION "0.0.0"
#endif

namespace cim {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kReportSchema = 1;
constexpr int kSweepSchema = 1;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  std::ostringstream ss;
  for (unsigned i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

json input_record(const std::string& path) { return {{"path", path}, {"sha256", sha256_hex(read_file(path))}}; }

std::size_t default_jobs() {
  if (const char* env = std::getenv("CIM_MODEL_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Error(std::string("CIM_MODEL_JOBS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Input loading shared by every command. Attribute defaults are merged
// here so the engine always sees resolved nodes.
ArchTree load_resolved_arch(const std::string& path) {
  const auto tree = load_arch(path);
  return resolve_attributes(tree, tree.defaults);
}

void check_diagnostics(const ArchTree& arch, const WorkloadLayer* layer) {
  const auto diags = validate(arch, layer);
  if (diags.empty()) return;
  std::string msg;
  for (const auto& d : diags) msg += (msg.empty() ? "" : "\n") + d.message;
  throw Error(msg);
}

// --- report records ---------------------------------------------------------

json mapping_record(const Mapping& m, const ArchTree& arch, const WorkloadLayer& layer) {
  json levels = json::array();
  for (std::size_t j = 0; j < m.levels.size(); ++j) {
    json loops = json::array();
    for (const auto& l : m.levels[j]) {
      loops.push_back({{"dim", layer.einsum.dims[l.dim].name}, {"bound", l.bound}, {"kind", to_string(l.kind)}});
    }
    levels.push_back({{"node", arch.nodes[j].name}, {"loops", loops}});
  }
  return levels;
}

json eval_record(const EvalResult& r, const ArchTree& arch, const PreparedLayer& layer) {
  json breakdown = json::array();
  for (const auto& b : r.breakdown) {
    breakdown.push_back({{"node", arch.nodes[b.node].name},
                         {"action", to_string(b.action)},
                         {"tensor", b.tensor ? json(to_string(*b.tensor)) : json(nullptr)},
                         {"count", b.count},
                         {"unit_energy_j", b.unit_energy},
                         {"energy_j", b.energy}});
  }
  json leakage = json::array();
  for (const auto& l : r.leakage)
    leakage.push_back({{"node", arch.nodes[l.node].name}, {"power_w", l.power}, {"energy_j", l.energy}});
  json area = json::array();
  for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
    area.push_back({{"node", arch.nodes[j].name}, {"instances", instances(arch, j)}, {"area_m2", r.node_area[j]}});
  }
  return {{"layer", r.layer},
          {"macs", r.macs},
          {"total_energy_j", r.total_energy},
          {"energy_per_mac_j", r.macs ? r.total_energy / static_cast<double>(r.macs) : 0.0},
          {"cycles", r.cycles},
          {"latency_s", r.latency},
          {"utilization", r.utilization},
          {"area_m2", r.area},
          {"objective", r.objective},
          {"breakdown", breakdown},
          {"leakage", leakage},
          {"area", area},
          {"mapping", mapping_record(r.mapping, arch, layer.layer)}};
}

json summary_record(const WorkloadSummary& s) {
  json layers = json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"layer", l.name},
                      {"energy_j", l.energy},
                      {"cycles", l.cycles},
                      {"macs", l.macs},
                      {"energy_per_mac_j", l.energy_per_mac}});
  }
  return {{"total_energy_j", s.total_energy},
          {"total_cycles", s.total_cycles},
          {"total_macs", s.total_macs},
          {"energy_per_mac_j", s.energy_per_mac},
          {"layers", layers}};
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

void print_result(std::ostream& out, const EvalResult& r, const ArchTree& arch) {
  out << "layer " << r.layer << ": energy " << fmt(r.total_energy) << " J";
  if (r.macs) out << " (" << fmt(r.total_energy / static_cast<double>(r.macs)) << " J/MAC)";
  out << ", cycles " << r.cycles << ", utilization " << fmt(r.utilization) << ", area " << fmt(r.area) << " m^2\n";
  for (const auto& b : r.breakdown) {
    out << "  " << std::left << std::setw(16) << arch.nodes[b.node].name << std::setw(8) << to_string(b.action)
        << std::setw(8) << (b.tensor ? to_string(*b.tensor) : std::string_view("-")) << std::right << std::setw(12)
        << b.count << "  x " << fmt(b.unit_energy) << " J = " << fmt(b.energy) << " J\n";
  }
  for (const auto& l : r.leakage) out << "  " << arch.nodes[l.node].name << " leakage " << fmt(l.energy) << " J\n";
}

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << "\n";
}

// --- commands -----------------------------------------------------------

struct SearchOptions {
  std::string objective = "energy";
  std::uint64_t budget = 1000;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::size_t top_k = 5;
  bool exhaustive = false;
  bool allow_padding = false;

  MapperConfig config() const {
    MapperConfig c;
    auto o = parse_objective(objective);
    if (!o) throw Error("unknown objective '" + objective + "' (expected energy, edp or energy_per_mac)");
    c.objective = *o;
    c.budget = budget;
    c.seed = seed;
    c.jobs = jobs ? jobs : default_jobs();
    c.top_k = top_k;
    c.exhaustive = exhaustive;
    c.allow_padding = allow_padding;
    return c;
  }
};

void add_search_flags(CLI::App* cmd, SearchOptions& o) {
  cmd->add_option("--objective", o.objective, "energy | edp | energy_per_mac")->capture_default_str();
  cmd->add_option("--budget", o.budget, "Mappings to evaluate per layer (random mode)")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Mapper seed")->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Worker threads (default: $CIM_MODEL_JOBS or all cores)");
  cmd->add_option("--top-k", o.top_k, "Mappings kept in the report's top list")->capture_default_str();
  cmd->add_flag("--exhaustive", o.exhaustive, "Walk the whole mapping space instead of sampling");
  cmd->add_flag("--allow-padding", o.allow_padding, "Allow padded factorizations");
}

struct EvalCommand {
  std::string arch, workload, mapping, out, dump_mapping;
  SearchOptions search;
  bool force_search = false;  // the `search` subcommand
};

int cmd_evaluate(const EvalCommand& c, std::ostream& out) {
  const auto arch = load_resolved_arch(c.arch);
  const auto layers = load_workload(c.workload);
  const auto cfg = c.search.config();
  const auto registry = ModelRegistry::with_builtins();
  std::string mapping_text;
  if (!c.mapping.empty()) mapping_text = read_file(c.mapping);

  json layer_records = json::array();
  std::vector<EvalResult> best;
  std::vector<Mapping> best_mappings;
  for (const auto& layer : layers) {
    check_diagnostics(arch, &layer);
    const auto prepared = prepare_layer(arch, layer);
    check_diagnostics(arch, &prepared.layer);
    const auto table = precompute_energy_table(arch, prepared, registry);
    json rec;
    if (!mapping_text.empty()) {
      const auto m = mapping_from_yaml(mapping_text, arch, prepared.layer);
      const auto diags = check_valid(m, arch, prepared.layer, cfg.allow_padding);
      if (!diags.empty()) {
        std::string msg = "mapping for layer " + layer.name + " is invalid:";
        for (const auto& d : diags) msg += "\n  " + d.message;
        throw Error(msg);
      }
      auto r = evaluate(m, table, arch, prepared, cfg.objective);
      rec = eval_record(r, arch, prepared);
      rec["mappings_evaluated"] = 1;
      best.push_back(std::move(r));
    } else {
      auto s = search(arch, prepared, table, cfg);
      rec = eval_record(s.best, arch, prepared);
      rec["mappings_evaluated"] = s.evaluated;
      rec["raw_space"] = s.raw_space;
      json top = json::array();
      for (std::size_t i = 0; i < s.top.size(); ++i) {
        top.push_back({{"rank", i + 1},
                       {"objective", s.top[i].objective},
                       {"total_energy_j", s.top[i].total_energy},
                       {"cycles", s.top[i].cycles},
                       {"utilization", s.top[i].utilization},
                       {"mapping", mapping_record(s.top[i].mapping, arch, prepared.layer)}});
      }
      rec["top"] = top;
      best.push_back(s.best);
    }
    best_mappings.push_back(best.back().mapping);
    print_result(out, best.back(), arch);
    layer_records.push_back(std::move(rec));
  }

  const auto summary = aggregate(best);
  out << "total: energy " << fmt(summary.total_energy) << " J, " << fmt(summary.energy_per_mac) << " J/MAC, cycles "
      << summary.total_cycles << "\n";

  if (!c.dump_mapping.empty()) {
    std::vector<PreparedLayer> prepared;
    for (const auto& l : layers) prepared.push_back(prepare_layer(arch, l));
    std::vector<LayerMapping> entries;
    for (std::size_t i = 0; i < layers.size(); ++i) entries.push_back({&prepared[i].layer, &best_mappings[i]});
    std::ofstream f(c.dump_mapping, std::ios::binary);
    if (!f) throw Error("cannot write " + c.dump_mapping);
    f << mappings_to_yaml(entries, arch);
  }
  if (!c.out.empty()) {
    json inputs{{"arch", input_record(c.arch)}, {"workload", input_record(c.workload)}};
    if (!c.mapping.empty()) inputs["mapping"] = input_record(c.mapping);
    json report{{"schema", kReportSchema},
                {"tool", "cim-model"},
                {"version", CIM_MODEL_VERSION},
                {"command", c.mapping.empty() ? "search" : "evaluate"},
                {"inputs", inputs},
                {"seed", cfg.seed},
                {"objective", to_string(cfg.objective)},
                {"search", {{"mode", cfg.exhaustive ? "exhaustive" : "random"}, {"budget", cfg.budget}}},
                {"layers", layer_records},
                {"summary", summary_record(summary)}};
    write_json(report, c.out);
  }
  return kExitOk;
}

// --- sweep -------------------------------------------------------------------

struct SweepParam {
  std::string name;
  std::vector<std::string> paths;  // all set to the same value
  std::vector<double> values;
};

std::vector<SweepParam> parse_sweep(const std::string& text) {
  const auto root = yaml::load(text);
  const auto params = root["parameters"];
  if (!params || !params.IsSequence() || params.size() == 0)
    yaml::fail(root, "sweep file needs a non-empty 'parameters:' list");
  std::vector<SweepParam> out;
  for (const auto& p : params) {
    SweepParam sp;
    if (p["path"]) sp.paths.push_back(yaml::scalar(p["path"], "path"));
    if (p["paths"]) {
      for (auto& s : yaml::string_list(p["paths"], "paths")) sp.paths.push_back(s);
    }
    if (sp.paths.empty()) yaml::fail(p, "sweep parameter needs 'path' or 'paths'");
    sp.name = p["name"] ? yaml::scalar(p["name"], "name") : sp.paths.front();
    const auto values = p["values"];
    if (!values || !values.IsSequence() || values.size() == 0) yaml::fail(p, "sweep parameter needs a 'values:' list");
    for (const auto& v : values) sp.values.push_back(yaml::number(v, "value"));
    out.push_back(std::move(sp));
  }
  return out;
}

void apply_param(ArchTree& arch, const std::string& path, double value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw Error("sweep parameter path '" + path + "' must be node.attribute");
  const auto node_name = path.substr(0, dot);
  const auto attr = path.substr(dot + 1);
  auto j = arch.find(node_name);
  if (!j) throw Error("sweep parameter path '" + path + "' does not resolve: no node " + node_name);
  auto& node = arch.nodes[*j];
  if (attr == "mesh_x" || attr == "mesh_y") {
    if (value < 1 || value != std::floor(value))
      throw Error("sweep parameter " + path + ": mesh extents must be positive integers");
    (attr == "mesh_x" ? node.mesh_x : node.mesh_y) = static_cast<std::int64_t>(value);
    return;
  }
  if (!node.attributes.count(attr) && !is_numeric_attribute(attr))
    throw Error("sweep parameter path '" + path + "' does not resolve: node " + node_name + " has no attribute " + attr);
  node.attributes[attr] = value;
}

std::string csv_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct SweepCommand {
  std::string arch, workload, sweep, out;
  SearchOptions search;
};

int cmd_sweep(const SweepCommand& c, std::ostream& out) {
  const auto base = load_resolved_arch(c.arch);
  const auto layers = load_workload(c.workload);
  const auto params = parse_sweep(read_file(c.sweep));
  const auto cfg = c.search.config();
  const auto registry = ModelRegistry::with_builtins();

  // Resolve every path up front so a typo fails before any work is done.
  for (const auto& p : params) {
    for (const auto& path : p.paths) {
      ArchTree probe = base;
      apply_param(probe, path, p.values.front());
    }
  }

  std::ostringstream csv;
  csv << "# cim-model sweep schema " << kSweepSchema << "\n";
  csv << "point";
  for (const auto& p : params) csv << "," << p.name;
  csv << ",layer,energy_j,energy_per_mac_j,cycles,utilization,area_m2,mappings_evaluated\n";

  std::vector<std::size_t> pos(params.size(), 0);
  std::size_t point = 0;
  while (true) {
    ArchTree arch = base;
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (const auto& path : params[i].paths) apply_param(arch, path, params[i].values[pos[i]]);
    }
    for (const auto& layer : layers) {
      check_diagnostics(arch, &layer);
      const auto prepared = prepare_layer(arch, layer);
      const auto s = search(arch, prepared, registry, cfg);
      const auto& r = s.best;
      csv << point;
      for (std::size_t i = 0; i < params.size(); ++i) csv << "," << csv_number(params[i].values[pos[i]]);
      csv << "," << layer.name << "," << csv_number(r.total_energy) << ","
          << csv_number(r.macs ? r.total_energy / static_cast<double>(r.macs) : 0.0) << "," << r.cycles << ","
          << csv_number(r.utilization) << "," << csv_number(r.area) << "," << s.evaluated << "\n";
    }
    ++point;
    // Cartesian product, last parameter fastest.
    std::size_t i = params.size();
    bool wrapped = true;
    while (i-- > 0) {
      if (++pos[i] < params[i].values.size()) {
        wrapped = false;
        break;
      }
      pos[i] = 0;
    }
    if (wrapped) break;
  }
  if (c.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Error("cannot write " + c.out);
    f << csv.str();
  }
  return kExitOk;
}

// --- oracle-compare --------------------------------------------------------

struct OracleCommand {
  std::string arch, workload, mapping, out, draw = "pmf";
  std::uint64_t seed = 0;
  std::uint64_t samples = 1;
  std::uint64_t max_macs = 100'000;
};

int cmd_oracle_compare(const OracleCommand& c, std::ostream& out, std::ostream& err) {
  const auto arch = load_resolved_arch(c.arch);
  const auto layers = load_workload(c.workload);
  const auto mapping_text = read_file(c.mapping);
  const auto registry = ModelRegistry::with_builtins();
  if (c.samples < 1) throw Error("--samples must be at least 1");
  DrawMode mode;
  if (c.draw == "pmf") {
    mode = DrawMode::Pmf;
  } else if (c.draw == "uniform") {
    mode = DrawMode::Uniform;
  } else {
    throw Error("--draw must be pmf or uniform");
  }

  bool all_match = true;
  json records = json::array();
  for (const auto& layer : layers) {
    if (mac_count(layer) > c.max_macs) {
      throw Error("layer " + layer.name + " has " + std::to_string(mac_count(layer)) +
                  " MACs, above the oracle limit of " + std::to_string(c.max_macs) + " (raise --max-macs)");
    }
    check_diagnostics(arch, &layer);
    const auto prepared = prepare_layer(arch, layer);
    const auto m = mapping_from_yaml(mapping_text, arch, prepared.layer);
    const auto diags = check_valid(m, arch, prepared.layer);
    if (!diags.empty()) throw Error("mapping for layer " + layer.name + " is invalid: " + diags.front().message);
    const auto table = precompute_energy_table(arch, prepared, registry);
    const auto stat = evaluate(m, table, arch, prepared);
    double stat_dynamic = 0.0;
    for (const auto& b : stat.breakdown) stat_dynamic += b.energy;

    double oracle_sum = 0.0;
    bool match = true;
    AccessCounts oracle_counts_seen;
    for (std::uint64_t s = 0; s < c.samples; ++s) {
      const auto tensors = draw_tensors(layer, c.seed + s, mode);
      const auto o = oracle_evaluate(arch, m, prepared, tensors, registry);
      oracle_sum += o.total_energy;
      if (o.counts != stat.counts) match = false;
      if (s == 0) oracle_counts_seen = o.counts;
    }
    const double oracle_mean = oracle_sum / static_cast<double>(c.samples);
    const double rel = oracle_mean != 0 ? std::abs(stat_dynamic - oracle_mean) / std::abs(oracle_mean)
                                        : (stat_dynamic == 0 ? 0.0 : INFINITY);
    all_match = all_match && match;

    out << "layer " << layer.name << ": counts " << (match ? "exact match" : "MISMATCH") << "\n";
    json counts = json::array();
    for (std::size_t j = 0; j < arch.nodes.size(); ++j) {
      for (auto a : kActions) {
        for (std::size_t sl = 0; sl < kNumSlots; ++sl) {
          const auto sc = stat.counts.at(j, a, sl), oc = oracle_counts_seen.at(j, a, sl);
          if (sc == 0 && oc == 0) continue;
          const std::string tensor =
              sl == kNoTensorSlot ? "-" : std::string(to_string(static_cast<TensorRole>(sl)));
          out << "  " << std::left << std::setw(16) << arch.nodes[j].name << std::setw(8) << to_string(a)
              << std::setw(8) << tensor << std::right << " statistical " << std::setw(10) << sc << "  oracle "
              << std::setw(10) << oc << (sc == oc ? "" : "  <-- differs") << "\n";
          counts.push_back({{"node", arch.nodes[j].name},
                            {"action", to_string(a)},
                            {"tensor", sl == kNoTensorSlot ? json(nullptr) : json(tensor)},
                            {"statistical", sc},
                            {"oracle", oc}});
        }
      }
    }
    out << "  energy: statistical " << fmt(stat_dynamic) << " J, oracle mean " << fmt(oracle_mean) << " J over "
        << c.samples << " draw(s), relative error " << fmt(rel) << "\n";
    records.push_back({{"layer", layer.name},
                       {"counts_match", match},
                       {"counts", counts},
                       {"statistical_energy_j", stat_dynamic},
                       {"oracle_mean_energy_j", oracle_mean},
                       {"relative_error", std::isfinite(rel) ? json(rel) : json(nullptr)}});
  }
  if (!c.out.empty()) {
    json report{{"schema", kReportSchema},
                {"tool", "cim-model"},
                {"version", CIM_MODEL_VERSION},
                {"command", "oracle-compare"},
                {"inputs",
                 {{"arch", input_record(c.arch)},
                  {"workload", input_record(c.workload)},
                  {"mapping", input_record(c.mapping)}}},
                {"seed", c.seed},
                {"samples", c.samples},
                {"draw", c.draw},
                {"rng", "mt19937_64"},
                {"layers", records}};
    write_json(report, c.out);
  }
  if (!all_match) {
    err << "error: statistical and oracle access counts differ\n";
    return kExitOracleMismatch;
  }
  return kExitOk;
}

// --- validate ----------------------------------------------------------------

int cmd_validate(const std::string& path, const std::string& kind, std::ostream& out, std::ostream& err) {
  const auto text = read_file(path);
  static const std::regex workload_re(R"(^layers\s*:)", std::regex::multiline);
  const bool is_workload = kind == "workload" || (kind == "auto" && std::regex_search(text, workload_re));
  Diagnostics diags;
  if (is_workload) {
    try {
      const auto layers = parse_workload(text, fs::path(path).parent_path());
      out << path << ": " << layers.size() << " layer(s)\n";
    } catch (const ParseError& e) {
      diags.push_back({e.what()});
    } catch (const Error& e) {
      diags.push_back({e.what()});
    }
  } else {
    try {
      const auto tree = parse_arch(text);
      diags = validate(tree);
      if (diags.empty()) {
        const auto resolved = resolve_attributes(tree, tree.defaults);
        out << path << ": " << resolved.nodes.size() << " node(s), leaf " << resolved.leaf().name << "\n";
      }
    } catch (const Error& e) {
      diags.push_back({e.what()});
    }
  }
  for (const auto& d : diags) err << path << ": " << d.message << "\n";
  if (!diags.empty()) return kExitInputError;
  out << "ok\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analytical energy, area and throughput model for compute-in-memory accelerators", "cim-model"};
  app.set_version_flag("--version", CIM_MODEL_VERSION);
  app.require_subcommand(1);

  EvalCommand eval;
  auto* ev = app.add_subcommand("evaluate", "Evaluate a mapping file, or search when none is given");
  ev->add_option("arch", eval.arch, "Architecture file")->required();
  ev->add_option("workload", eval.workload, "Workload file")->required();
  ev->add_option("--mapping", eval.mapping, "Mapping file to evaluate");
  ev->add_option("--out", eval.out, "Write the JSON report here");
  ev->add_option("--dump-mapping", eval.dump_mapping, "Write the chosen mappings here");
  add_search_flags(ev, eval.search);

  EvalCommand srch;
  auto* se = app.add_subcommand("search", "Search the mapping space of every layer");
  se->add_option("arch", srch.arch, "Architecture file")->required();
  se->add_option("workload", srch.workload, "Workload file")->required();
  se->add_option("--out", srch.out, "Write the JSON report here");
  se->add_option("--dump-mapping", srch.dump_mapping, "Write the best mappings here");
  add_search_flags(se, srch.search);

  SweepCommand sweep;
  auto* sw = app.add_subcommand("sweep", "Search every point of a parameter sweep and emit CSV");
  sw->add_option("arch", sweep.arch, "Architecture file")->required();
  sw->add_option("workload", sweep.workload, "Workload file")->required();
  sw->add_option("sweep", sweep.sweep, "Sweep file")->required();
  sw->add_option("--out", sweep.out, "Write the CSV here instead of stdout");
  add_search_flags(sw, sweep.search);

  OracleCommand orc;
  auto* oc = app.add_subcommand("oracle-compare", "Compare the statistical model with the value-level oracle");
  oc->add_option("arch", orc.arch, "Architecture file")->required();
  oc->add_option("workload", orc.workload, "Workload file")->required();
  oc->add_option("mapping", orc.mapping, "Mapping file")->required();
  oc->add_option("--seed", orc.seed, "Tensor sampling seed")->capture_default_str();
  oc->add_option("--samples", orc.samples, "Independent tensor draws to average")->capture_default_str();
  oc->add_option("--draw", orc.draw, "pmf (from the declared PMFs) or uniform (over the PMF support)")
      ->capture_default_str();
  oc->add_option("--max-macs", orc.max_macs, "Refuse layers above this many MACs")->capture_default_str();
  oc->add_option("--out", orc.out, "Write the JSON comparison here");

  std::string validate_path, validate_kind = "auto";
  auto* va = app.add_subcommand("validate", "Check an architecture or workload file");
  va->add_option("file", validate_path, "File to check")->required();
  va->add_option("--kind", validate_kind, "arch, workload or auto")
      ->check(CLI::IsMember({"arch", "workload", "auto"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*ev) return cmd_evaluate(eval, out);
    if (*se) return cmd_evaluate(srch, out);
    if (*sw) return cmd_sweep(sweep, out);
    if (*oc) return cmd_oracle_compare(orc, out, err);
    if (*va) return cmd_validate(validate_path, validate_kind, out, err);
  } catch (const EmptySpaceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEmptySpace;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace cim
