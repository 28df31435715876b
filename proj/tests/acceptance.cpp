// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Every tolerance and sample size is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "cimmodel/cli.hpp"
#include "support.hpp"

namespace cim {
namespace {

// C1
constexpr int kC1Triples = 300;
constexpr std::uint64_t kC1MaxMacs = 100'000;
constexpr std::size_t kC1MaxDims = 6;
constexpr double kC1BudgetSeconds = 300.0;
// C2
constexpr double kC2Tolerance = 0.01;
constexpr double kC2DeltaTolerance = 1e-9;
constexpr int kC2Samples = 20;
// C3
constexpr int kC3Mappings = 50;
// C4
constexpr int kC4Pmfs = 50;
constexpr double kC4Tolerance = 1e-12;
// C5
constexpr double kC5MaxRatio = 2.0;
// C6
constexpr int kC6Batch = 1000;
constexpr double kC6MaxBatchRatio = 10.0;
constexpr double kC6MinPerMappingSpeedup = 20.0;
// C7
constexpr int kC7Pmfs = 100;
constexpr double kC7MassTolerance = 1e-9;
constexpr double kC7MeanTolerance = 1e-12;
// Timing repeats (medians are compared).
constexpr int kTimingRepeats = 9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_time(int repeats, const std::function<void()>& fn) {
  std::vector<double> t;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    t.push_back(seconds_since(t0));
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

// Prevents the optimizer from dropping timed work.
volatile double g_sink = 0;

// Fixed per-action energy `e_<action>`; prices any node of a random tree.
struct AnyAction final : ComponentModel {
  bool supports(Action) const override { return true; }
  double energy(Action a, std::optional<TensorRole>, const ActionContext& ctx) const override {
    return attr_number_or(ctx.attrs(), "e_" + std::string(to_string(a)), 1e-15);
  }
};

WorkloadLayer matvec(std::int64_t m, std::int64_t n, ValuePMF in, ValuePMF w, int in_bits, int w_bits) {
  WorkloadLayer l;
  l.name = "matvec";
  l.einsum.dims = {{"M", m}, {"N", n}};
  l.einsum.projections = {std::vector<std::size_t>{1}, std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0}};
  l.bits = {in_bits, w_bits, 24};
  l.pmfs = {std::move(in), std::move(w), uniform_pmf(0, 255)};
  return l;
}

ValuePMF random_pmf(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, std::size_t max_points) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::map<std::int64_t, double> m;
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  const std::size_t n = 1 + rng() % std::min<std::uint64_t>(span, max_points);
  for (std::size_t i = 0; i < n; ++i) m[lo + static_cast<std::int64_t>(rng() % span)] += w(rng);
  double total = 0;
  for (auto& [k, v] : m) total += v;
  for (auto& [k, v] : m) v /= total;
  return ValuePMF::from_masses(m);
}

// ---------------------------------------------------------------------------

Outcome c1_oracle_counts() {
  const auto t0 = std::chrono::steady_clock::now();
  auto reg = ModelRegistry::with_builtins();
  reg.register_model("buffer", std::make_shared<AnyAction>(), true);
  reg.register_model("memory_cell", std::make_shared<AnyAction>(), true);
  std::mt19937_64 rng(2024);
  testing::Coverage cov;
  int mismatches = 0;
  std::uint64_t max_macs = 0;
  std::size_t max_dims = 0;
  std::string first;
  for (int t = 0; t < kC1Triples; ++t) {
    const auto tr = testing::random_triple(rng, &cov, kC1MaxMacs, kC1MaxDims);
    if (!check_valid(tr.mapping, tr.arch, tr.layer.layer).empty()) {
      // Capacity is never set on random trees, so every triple must be valid.
      return {false, "generated an invalid mapping at triple " + std::to_string(t)};
    }
    max_macs = std::max(max_macs, mac_count(tr.layer.layer));
    max_dims = std::max(max_dims, tr.layer.original.einsum.dims.size());
    const auto analytic = analyze_access_counts(tr.mapping, tr.arch, tr.layer.layer);
    const auto tensors = draw_tensors(tr.layer.original, static_cast<std::uint64_t>(t));
    const auto oracle = oracle_evaluate(tr.arch, tr.mapping, tr.layer, tensors, reg);
    if (!(analytic == oracle.counts)) {
      ++mismatches;
      if (first.empty()) first = "triple " + std::to_string(t) + ":\n" + testing::describe_counts(analytic, oracle.counts, tr.arch);
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << kC1Triples << " triples, " << mismatches << " mismatching, largest " << max_macs << " MACs / " << max_dims
    << " dims, coverage " << (cov.complete() ? "complete" : "INCOMPLETE") << ", " << fmt(secs) << " s";
  if (!first.empty()) d << "\n" << first;
  return {mismatches == 0 && cov.complete() && secs < kC1BudgetSeconds, d.str()};
}

// Row-wise dot products: every MAC sees its own input and weight, so the
// oracle's total is a sum of 10^4 independent draws.
struct C2Setup {
  ArchTree arch;
  WorkloadLayer layer;
};

C2Setup c2_setup(ValuePMF in, ValuePMF w) {
  auto arch = testing::load_fixture_arch("base_macro.yaml");
  arch.nodes[*arch.find("column")].mesh_x = 10;
  arch.nodes[*arch.find("memory_cell")].mesh_y = 10;
  WorkloadLayer l;
  l.name = "rowdot";
  l.einsum.dims = {{"M", 100}, {"N", 100}};
  l.einsum.projections = {std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{0}};
  l.bits = {4, 4, 16};
  l.pmfs = {std::move(in), std::move(w), uniform_pmf(0, 4095)};
  return {std::move(arch), std::move(l)};
}

Outcome c2_statistical_vs_oracle() {
  const auto reg = ModelRegistry::with_builtins();
  auto run = [&](const C2Setup& s, int samples, double& stat, double& oracle_mean) {
    const auto prepared = prepare_layer(s.arch, s.layer);
    const auto table = precompute_energy_table(s.arch, prepared, reg);
    MapperConfig cfg;
    cfg.budget = 200;
    cfg.seed = 1;
    const auto best = search(s.arch, prepared, table, cfg).best;
    stat = best.total_energy;
    for (const auto& l : best.leakage) stat -= l.energy;
    double sum = 0;
    for (int k = 0; k < samples; ++k) {
      const auto tensors = draw_tensors(prepared.original, 1000 + static_cast<std::uint64_t>(k));
      sum += oracle_evaluate(s.arch, best.mapping, prepared, tensors, reg).total_energy;
    }
    oracle_mean = sum / samples;
    return mac_count(prepared.original);
  };
  // Skewed, value-dependent operands.
  const auto in = ValuePMF({0, 3, 7, 12, 15}, std::vector<double>{0.35, 0.25, 0.2, 0.15, 0.05});
  const auto w = ValuePMF({0, 1, 8, 15}, std::vector<double>{0.4, 0.3, 0.2, 0.1});
  double stat = 0, oracle = 0;
  const auto macs = run(c2_setup(in, w), kC2Samples, stat, oracle);
  const double rel = std::abs(stat - oracle) / oracle;

  double dstat = 0, doracle = 0;
  run(c2_setup(ValuePMF({11}, std::vector<double>{1.0}), ValuePMF({6}, std::vector<double>{1.0})), 1, dstat, doracle);
  const double drel = std::abs(dstat - doracle) / doracle;
  return {macs == 10'000 && rel < kC2Tolerance && drel < kC2DeltaTolerance,
          std::to_string(macs) + " MACs, " + std::to_string(kC2Samples) + " draws: relative error " + fmt(rel) +
              " (limit " + fmt(kC2Tolerance) + "); delta PMFs: " + fmt(drel) + " (limit " + fmt(kC2DeltaTolerance) + ")"};
}

Outcome c3_mapping_invariance() {
  const auto arch = testing::load_fixture_arch("base_macro.yaml");
  const auto layer = matvec(96, 256, uniform_pmf(0, 255), random_pmf(*std::make_unique<std::mt19937_64>(3), 0, 255, 40), 8, 8);
  const auto reg = ModelRegistry::with_builtins();
  const auto prepared = prepare_layer(arch, layer);
  const auto reference = precompute_energy_table(arch, prepared, reg);
  MapperConfig cfg;
  cfg.seed = 5;
  cfg.budget = kC3Mappings;
  MappingEnumerator e(arch, prepared.layer, cfg);
  Mapping m;
  int n = 0, identical = 0, unit_mismatch = 0;
  while (e.next(m)) {
    ++n;
    const auto table = precompute_energy_table(arch, prepared, reg);
    if (table.identical(reference)) ++identical;
    const auto r = evaluate(m, table, arch, prepared);
    for (const auto& b : r.breakdown) {
      if (b.unit_energy != reference.at(b.node, b.action, slot(b.tensor))) ++unit_mismatch;
    }
  }
  return {n == kC3Mappings && identical == n && unit_mismatch == 0,
          std::to_string(identical) + "/" + std::to_string(n) + " tables bit-identical, " + std::to_string(unit_mismatch) +
              " unit-energy mismatches"};
}

Outcome c4_average_energy() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto reg = ModelRegistry::with_builtins();
  double worst = 0;
  for (int t = 0; t < kC4Pmfs; ++t) {
    const int bi = 1 + static_cast<int>(rng() % 8), bw = 1 + static_cast<int>(rng() % 4);
    const auto pi = random_pmf(rng, 0, (1 << bi) - 1, 16);
    const auto pw = random_pmf(rng, 0, (1 << bw) - 1, 16);
    const double vdd = 0.1 + unit(rng), gmin = 1e-6 * unit(rng), gmax = 1e-5 + 1e-4 * unit(rng), tr = 1e-9 + 1e-8 * unit(rng);
    auto arch = parse_arch(R"(
!Component
name: buffer
class: buffer
temporal_reuse: [Inputs, Weights, Outputs]
attributes: {width: 8, e_per_bit: 0}
!Component
name: cell
class: memory_cell
temporal_reuse: [Weights]
)");
    arch.nodes[1].attributes = {{"v_read", vdd}, {"g_min", gmin}, {"g_max", gmax}, {"t_read", tr}};
    const auto prepared = prepare_layer(arch, matvec(2, 2, pi, pw, bi, bw));
    const double engine = precompute_energy_table(arch, prepared, reg).at(1, Action::Compute, kNoTensorSlot);
    // E = (sum P_W(y) G(y)) * (sum P_I(x) V(x)^2) * T, written out by hand.
    double v2 = 0, g = 0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
      const double v = vdd * static_cast<double>(pi.support()[i]) / ((1 << bi) - 1);
      v2 += pi.probs()[static_cast<Eigen::Index>(i)] * v * v;
    }
    for (std::size_t j = 0; j < pw.size(); ++j) {
      g += pw.probs()[static_cast<Eigen::Index>(j)] * (gmin + (gmax - gmin) * static_cast<double>(pw.support()[j]) / ((1 << bw) - 1));
    }
    const double closed = g * v2 * tr;
    const double rel = closed == 0 ? std::abs(engine) : std::abs(engine - closed) / std::abs(closed);
    worst = std::max(worst, rel);
  }
  return {worst < kC4Tolerance, std::to_string(kC4Pmfs) + " PMF pairs, worst relative error " + fmt(worst) + " (limit " +
                                    fmt(kC4Tolerance) + ")"};
}

// One mapping structure at two array sizes: M across columns, N down the
// cells, the remainder temporal at the buffer.
double c5_eval_time(std::int64_t side) {
  auto arch = testing::load_fixture_arch("base_macro.yaml");
  arch.nodes[*arch.find("column")].mesh_x = side;
  arch.nodes[*arch.find("memory_cell")].mesh_y = side;
  const auto prepared = prepare_layer(arch, testing::load_fixture_layer("matvec_1024.yaml"));
  const auto table = precompute_energy_table(arch, prepared, ModelRegistry::with_builtins());
  const auto M = *prepared.layer.einsum.dim_index("M");
  const auto N = *prepared.layer.einsum.dim_index("N");
  Mapping m;
  m.levels.resize(arch.nodes.size());
  if (side < 1024) m.levels[0] = {{M, 1024 / side, LoopKind::Temporal}, {N, 1024 / side, LoopKind::Temporal}};
  m.levels[*arch.find("column")] = {{M, side, LoopKind::SpatialX}};
  m.levels[*arch.find("memory_cell")] = {{N, side, LoopKind::SpatialY}};
  if (!check_valid(m, arch, prepared.layer).empty()) throw Error("C5 mapping is invalid");
  constexpr int kInner = 2000;
  return median_time(kTimingRepeats, [&] {
           for (int i = 0; i < kInner; ++i) g_sink = g_sink + evaluate(m, table, arch, prepared).total_energy;
         }) /
         kInner;
}

Outcome c5_constant_scaling() {
  const double small = c5_eval_time(64);
  const double large = c5_eval_time(1024);
  const double ratio = large / small;
  return {ratio < kC5MaxRatio, "64x64: " + fmt(small * 1e6) + " us, 1024x1024: " + fmt(large * 1e6) + " us, ratio " +
                                   fmt(ratio) + " (limit " + fmt(kC5MaxRatio) + ")"};
}

Outcome c6_amortization() {
  const auto arch = testing::load_fixture_arch("base_macro.yaml");
  const auto layer = testing::load_fixture_layer("matvec_1024.yaml");
  const auto reg = ModelRegistry::with_builtins();
  std::vector<Mapping> mappings;
  {
    const auto prepared = prepare_layer(arch, layer);
    MapperConfig cfg;
    cfg.seed = 6;
    cfg.budget = kC6Batch;
    MappingEnumerator e(arch, prepared.layer, cfg);
    Mapping m;
    while (e.next(m)) mappings.push_back(m);
  }
  if (mappings.size() != static_cast<std::size_t>(kC6Batch)) return {false, "could not draw the mapping batch"};
  auto run = [&](std::size_t n) {
    const auto prepared = prepare_layer(arch, layer);
    const auto table = precompute_energy_table(arch, prepared, reg);
    for (std::size_t i = 0; i < n; ++i) g_sink = g_sink + evaluate(mappings[i], table, arch, prepared).total_energy;
  };
  const double one = median_time(kTimingRepeats, [&] { run(1); });
  const double batch = median_time(kTimingRepeats, [&] { run(mappings.size()); });
  const double ratio = batch / one;
  const double speedup = one / (batch / kC6Batch);
  return {ratio < kC6MaxBatchRatio && speedup >= kC6MinPerMappingSpeedup,
          "1 mapping: " + fmt(one * 1e3) + " ms, " + std::to_string(kC6Batch) + " mappings: " + fmt(batch * 1e3) +
              " ms, ratio " + fmt(ratio) + " (limit " + fmt(kC6MaxBatchRatio) + "), per-mapping speedup " + fmt(speedup) +
              " (minimum " + fmt(kC6MinPerMappingSpeedup) + ")"};
}

Outcome c7_encoding_invariants() {
  std::mt19937_64 rng(7);
  double worst_mass = 0, worst_mean = 0;
  int checked = 0;
  const EncodingKind kinds[] = {EncodingKind::TwosComplement, EncodingKind::Offset, EncodingKind::Differential,
                                EncodingKind::Xnor, EncodingKind::MagnitudeOnly};
  for (auto kind : kinds) {
    for (int t = 0; t < kC7Pmfs; ++t) {
      const int bits = kind == EncodingKind::Xnor ? 1 : 2 + static_cast<int>(rng() % 9);
      const std::int64_t half = std::int64_t{1} << (bits - 1);
      ValuePMF pmf = ValuePMF({0}, std::vector<double>{1.0});
      switch (kind) {
        case EncodingKind::Xnor: {
          const double p = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
          pmf = ValuePMF({-1, 1}, std::vector<double>{p, 1 - p});
          break;
        }
        case EncodingKind::TwosComplement:
        case EncodingKind::Offset:
          pmf = random_pmf(rng, -half, half - 1, 32);
          break;
        default:
          pmf = random_pmf(rng, -(2 * half - 1), 2 * half - 1, 32);
      }
      const auto enc = encode_pmf(pmf, {kind, bits});
      std::vector<int> widths;
      for (int left = bits; left > 0;) {
        const int w = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(left));
        widths.push_back(w);
        left -= w;
      }
      const SliceScheme scheme{widths};
      std::vector<const ValuePMF*> lines{&enc.levels};
      if (enc.companion && kind == EncodingKind::Differential) lines.push_back(&*enc.companion);
      worst_mass = std::max(worst_mass, std::abs(enc.levels.probs().sum() - 1.0));
      if (enc.companion) worst_mass = std::max(worst_mass, std::abs(enc.companion->probs().sum() - 1.0));
      for (const auto* line : lines) {
        const auto slices = slice_pmf(*line, bits, scheme);
        const auto offsets = scheme.offsets();
        double recon = 0;
        for (std::size_t i = 0; i < slices.size(); ++i) {
          worst_mass = std::max(worst_mass, std::abs(slices[i].probs().sum() - 1.0));
          recon += slices[i].mean() * std::ldexp(1.0, offsets[i]);
        }
        const double mean = line->mean();
        worst_mean = std::max(worst_mean, std::abs(recon - mean) / std::max(1.0, std::abs(mean)));
      }
      ++checked;
    }
  }
  return {worst_mass <= kC7MassTolerance && worst_mean <= kC7MeanTolerance,
          std::to_string(checked) + " PMFs over 5 encodings: worst mass error " + fmt(worst_mass) + " (limit " +
              fmt(kC7MassTolerance) + "), worst slice-mean error " + fmt(worst_mean) + " (limit " + fmt(kC7MeanTolerance) + ")"};
}

// ---------------------------------------------------------------------------
// CLI helpers for C8a and C9

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cim-model");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir() {
  auto d = std::filesystem::temp_directory_path() / "cim_acceptance";
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Outcome c8a_array_size_sweep() {
  const auto dir = scratch_dir();
  const auto csv = (dir / "sweep.csv").string();
  const auto r = cli({"sweep", testing::data_path("base_macro.yaml"), testing::data_path("matvec_1024.yaml"),
                      testing::data_path("array_size_sweep.yaml"), "--exhaustive", "--out", csv});
  if (r.code != kExitOk) return {false, "sweep failed: " + r.err};
  const auto rows = read_csv(testing::slurp(csv));
  if (rows.size() != 6) return {false, "expected 5 sweep points"};
  const auto& h = rows[0];
  const auto col = [&](const std::string& name) { return std::find(h.begin(), h.end(), name) - h.begin(); };
  const auto e_col = col("energy_per_mac_j"), u_col = col("utilization"), a_col = col("array");
  bool ok = true;
  std::string detail;
  double prev = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double e = std::stod(rows[i][static_cast<std::size_t>(e_col)]);
    const double u = std::stod(rows[i][static_cast<std::size_t>(u_col)]);
    ok = ok && e <= prev && u == 1.0;
    prev = e;
    detail += (i > 1 ? ", " : "") + rows[i][static_cast<std::size_t>(a_col)] + ": " + fmt(e * 1e12) + " pJ/MAC";
  }
  return {ok, "energy/MAC non-increasing at full utilization: " + detail};
}

Outcome c8b_output_reuse() {
  constexpr std::int64_t C = 24, R = 8;
  const std::int64_t ns[] = {1, 2, 3, 4, 6};
  const auto reg = ModelRegistry::with_builtins();
  std::vector<double> adc, dac;
  bool full = true;
  std::string detail;
  for (auto n : ns) {
    // Columns are grouped n at a time; each group's columns share one ADC
    // and reduce their outputs in analog before it.
    std::ostringstream a;
    a << "!Component\nname: buffer\nclass: buffer\ntemporal_reuse: [Inputs, Weights, Outputs]\n"
      << "attributes: {width: 8, e_per_bit: 20.0e-15}\n"
      << "!Component\nname: DAC_bank\nclass: dac\nno_coalesce: [Inputs]\nattributes: {e_full_scale: 0.2e-12}\n"
      << "!Container\nname: group\nspatial: {meshX: " << C / n << "}\nspatial_reuse: [Inputs]\n"
      << "!Component\nname: ADC\nclass: adc\nno_coalesce: [Outputs]\nattributes: {resolution: 8}\n"
      << "!Container\nname: column\nspatial: {meshX: " << n << "}\nspatial_reuse: [Outputs]\n"
      << "!Component\nname: memory_cell\nclass: memory_cell\nspatial: {meshY: " << R << "}\n"
      << "temporal_reuse: [Weights]\nspatial_reuse: [Outputs]\n"
      << "attributes: {v_read: 0.5, g_max: 100.0e-6, t_read: 10.0e-9, capacity: 1}\n";
    auto arch = parse_arch(a.str());
    arch = resolve_attributes(arch, arch.defaults);
    const auto layer = matvec(C / n, R * n, uniform_pmf(0, 255), uniform_pmf(0, 255), 8, 8);
    const auto prepared = prepare_layer(arch, layer);
    MapperConfig cfg;
    cfg.exhaustive = true;
    const auto best = search(arch, prepared, reg, cfg).best;
    const double macs = static_cast<double>(best.macs);
    adc.push_back(static_cast<double>(best.counts.at(*arch.find("ADC"), Action::Convert, TensorRole::Outputs)) / macs);
    dac.push_back(static_cast<double>(best.counts.at(*arch.find("DAC_bank"), Action::Convert, TensorRole::Inputs)) / macs);
    full = full && best.utilization == 1.0;
    detail += (detail.empty() ? "" : "; ") + std::string("N=") + std::to_string(n) + " ADC/MAC " + fmt(adc.back()) +
              " DAC/MAC " + fmt(dac.back());
  }
  bool trend = true;
  for (std::size_t i = 1; i < adc.size(); ++i) trend = trend && adc[i] < adc[i - 1] && dac[i] > dac[i - 1];
  return {trend && full, std::string(full ? "full utilization; " : "NOT at full utilization; ") + detail};
}

Outcome c9_determinism() {
  const auto dir = scratch_dir();
  auto file = [&](const std::string& name) { return (dir / name).string(); };
  const auto arch = testing::data_path("base_macro.yaml");
  const auto wl = testing::data_path("matvec_1024.yaml");
  struct Case {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Case> cases{
      {"search", {"search", arch, wl, "--budget", "500", "--seed", "42"}},
      {"sweep", {"sweep", arch, wl, testing::data_path("array_size_sweep.yaml"), "--budget", "200", "--seed", "3"}},
      {"oracle-compare",
       {"oracle-compare", testing::data_path("two_column.yaml"), testing::data_path("matvec_2x2.yaml"),
        testing::data_path("matvec_2x2_mapping.yaml"), "--seed", "5", "--samples", "4"}},
  };
  int identical = 0, total = 0;
  std::string bad;
  for (const auto& c : cases) {
    std::vector<std::string> bodies;
    for (const char* jobs : {"1", "1", "4"}) {
      auto args = c.args;
      const auto out = file(c.name + "_" + std::to_string(bodies.size()));
      args.insert(args.end(), {"--out", out});
      if (c.name != "oracle-compare") args.insert(args.end(), {"--jobs", jobs});
      const auto r = cli(args);
      if (r.code != kExitOk) return {false, c.name + " failed: " + r.err};
      bodies.push_back(testing::slurp(out));
    }
    for (std::size_t i = 1; i < bodies.size(); ++i) {
      ++total;
      if (bodies[i] == bodies[0] && !bodies[0].empty()) {
        ++identical;
      } else {
        bad += " " + c.name;
      }
    }
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " report pairs byte-identical (repeat runs and --jobs 1 vs 4)" +
                                  (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace
}  // namespace cim

int main() {
  using namespace cim;
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"C1 oracle count equivalence", c1_oracle_counts},
      {"C2 statistical vs oracle energy", c2_statistical_vs_oracle},
      {"C3 mapping invariance", c3_mapping_invariance},
      {"C4 average-energy closed form", c4_average_energy},
      {"C5 constant-runtime scaling", c5_constant_scaling},
      {"C6 amortization", c6_amortization},
      {"C7 encoding and slicing invariants", c7_encoding_invariants},
      {"C8a array-size sweep trend", c8a_array_size_sweep},
      {"C8b output-reuse trend", c8b_output_reuse},
      {"C9 determinism", c9_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
