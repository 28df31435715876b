#include <gtest/gtest.h>

#include <bit>
#include <map>
#include <random>

#include "support.hpp"

namespace cim {
namespace {

ValuePMF pmf_of(std::map<std::int64_t, double> m) { return ValuePMF::from_masses(m); }

// Random PMF over [lo, hi] with a random subset of support points.
ValuePMF random_pmf(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  std::map<std::int64_t, double> m;
  std::uniform_real_distribution<double> w(0.05, 1.0);
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  const std::size_t n = 1 + rng() % std::min<std::uint64_t>(span, 12);
  for (std::size_t i = 0; i < n; ++i) m[lo + static_cast<std::int64_t>(rng() % span)] += w(rng);
  double total = 0;
  for (auto& [k, v] : m) total += v;
  for (auto& [k, v] : m) v /= total;
  return pmf_of(m);
}

void expect_pmf(const ValuePMF& got, const std::map<std::int64_t, double>& want, double tol = 1e-12) {
  for (const auto& [v, p] : want) EXPECT_NEAR(got.prob(v), p, tol) << "value " << v;
  // Zero-mass support points (the sign companion keeps both signs) are fine.
  for (std::size_t k = 0; k < got.size(); ++k) {
    if (!want.count(got.support()[k])) EXPECT_EQ(got.probs()[static_cast<Eigen::Index>(k)], 0.0);
  }
}

TEST(EncodePmf, OffsetDelta) {
  const auto e = encode_pmf(pmf_of({{-1, 1.0}}), {EncodingKind::Offset, 4});
  expect_pmf(e.levels, {{7, 1.0}});
}

TEST(EncodePmf, Xnor) {
  const auto e = encode_pmf(pmf_of({{-1, 0.5}, {1, 0.5}}), {EncodingKind::Xnor, 1});
  expect_pmf(e.levels, {{0, 0.5}, {1, 0.5}});
  EXPECT_THROW(encode_pmf(pmf_of({{0, 0.5}, {1, 0.5}}), {EncodingKind::Xnor, 1}), Error);
}

TEST(EncodePmf, Differential) {
  const auto e = encode_pmf(pmf_of({{-2, 0.5}, {3, 0.5}}), {EncodingKind::Differential, 4});
  expect_pmf(e.levels, {{0, 0.5}, {3, 0.5}});
  ASSERT_TRUE(e.companion);
  expect_pmf(*e.companion, {{2, 0.5}, {0, 0.5}});
}

TEST(EncodePmf, TwosComplementAndMagnitude) {
  const auto tc = encode_pmf(pmf_of({{-1, 0.25}, {2, 0.75}}), {EncodingKind::TwosComplement, 4});
  expect_pmf(tc.levels, {{15, 0.25}, {2, 0.75}});
  const auto mag = encode_pmf(pmf_of({{-3, 0.25}, {3, 0.25}, {1, 0.5}}), {EncodingKind::MagnitudeOnly, 3});
  expect_pmf(mag.levels, {{3, 0.5}, {1, 0.5}});
  ASSERT_TRUE(mag.companion);
  expect_pmf(*mag.companion, {{0, 0.75}, {1, 0.25}});
}

TEST(EncodePmf, Unrepresentable) {
  EXPECT_THROW(encode_pmf(pmf_of({{8, 1.0}}), {EncodingKind::Offset, 4}), Error);
  EXPECT_THROW(encode_pmf(pmf_of({{-9, 1.0}}), {EncodingKind::TwosComplement, 4}), Error);
}

TEST(SlicePmf, UniformSplitsIntoUniformSlices) {
  const auto enc = encode_pmf(uniform_pmf(0, 15), {EncodingKind::TwosComplement, 4});
  const auto slices = slice_pmf(enc, SliceScheme{{2, 2}});
  ASSERT_EQ(slices.size(), 2u);
  for (const auto& s : slices) expect_pmf(s, {{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}});
}

TEST(SlicePmf, BitExtraction) {
  const auto slices = slice_pmf(pmf_of({{5, 1.0}}), 4, SliceScheme{{1, 1, 1, 1}});
  ASSERT_EQ(slices.size(), 4u);
  const std::int64_t want[] = {1, 0, 1, 0};
  for (std::size_t i = 0; i < 4; ++i) expect_pmf(slices[i], {{want[i], 1.0}});
}

TEST(SlicePmf, WidthsMustCoverBits) {
  EXPECT_THROW(slice_pmf(pmf_of({{5, 1.0}}), 4, SliceScheme{{3, 2}}), Error);
}

TEST(SlicePmf, MatchesMarginalizationOracle) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto pmf = random_pmf(rng, 0, 255);
    std::vector<int> widths;
    for (int left = 8; left > 0;) {
      const int w = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(left));
      widths.push_back(w);
      left -= w;
    }
    const auto slices = slice_pmf(pmf, 8, SliceScheme{widths});
    int offset = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      std::map<std::int64_t, double> want;
      for (std::size_t k = 0; k < pmf.size(); ++k) {
        want[(pmf.support()[k] >> offset) & ((1 << widths[i]) - 1)] += pmf.probs()[static_cast<Eigen::Index>(k)];
      }
      expect_pmf(slices[i], want, 1e-12);
      offset += widths[i];
    }
  }
}

TEST(ExpectedMoment, Examples) {
  EXPECT_NEAR(expected_moment(uniform_pmf(0, 3), PhysicalMap::voltage(1.0, 4), 2), (0 + 1.0 / 9 + 4.0 / 9 + 1) / 4, 1e-15);
  EXPECT_NEAR(expected_moment(uniform_pmf(0, 3), PhysicalMap::voltage(1.0, 4), 2), 0.38889, 1e-5);
  EXPECT_DOUBLE_EQ(expected_moment(pmf_of({{0, 1.0}}), PhysicalMap::voltage(0.7, 16), 2), 0.0);
  EXPECT_DOUBLE_EQ(expected_moment(pmf_of({{0, 1.0}}), PhysicalMap::conductance(2e-6, 1e-4, 16), 2), 4e-12);
  EXPECT_DOUBLE_EQ(expected_moment(pmf_of({{15, 1.0}}), PhysicalMap::voltage(0.7, 16), 1), 0.7);
  EXPECT_THROW(expected_moment(pmf_of({{4, 1.0}}), PhysicalMap::voltage(1.0, 4), 2), Error);
}

TEST(PhysicalMap, Invariants) {
  EXPECT_THROW(PhysicalMap::voltage(0.0, 4).check(), Error);
  EXPECT_THROW(PhysicalMap::voltage(1.0, 1).check(), Error);
  EXPECT_THROW(PhysicalMap::conductance(1e-4, 1e-4, 4).check(), Error);
  EXPECT_THROW(PhysicalMap::conductance(-1e-6, 1e-4, 4).check(), Error);
}

TEST(SwitchingRate, Examples) {
  EXPECT_DOUBLE_EQ(switching_rate(pmf_of({{0, 1.0}}), 8), 0.0);
  EXPECT_DOUBLE_EQ(switching_rate(pmf_of({{255, 1.0}}), 8), 1.0);
  for (int b = 1; b <= 10; ++b) {
    // Popcount-averaging oracle.
    double sum = 0;
    for (std::int64_t x = 0; x < (1 << b); ++x) sum += std::popcount(static_cast<std::uint64_t>(x));
    const double oracle = sum / b / (1 << b);
    EXPECT_NEAR(switching_rate(uniform_pmf(0, (1 << b) - 1), b), oracle, 1e-12);
    EXPECT_NEAR(oracle, 0.5, 1e-12);
  }
  EXPECT_THROW(switching_rate(pmf_of({{256, 1.0}}), 8), Error);
}

// ---------------------------------------------------------------------------
// Properties

TEST(Properties, EncodingPreservesMass) {
  std::mt19937_64 rng(1);
  const EncodingKind kinds[] = {EncodingKind::TwosComplement, EncodingKind::Offset, EncodingKind::Differential,
                                EncodingKind::MagnitudeOnly};
  for (auto kind : kinds) {
    for (int t = 0; t < 100; ++t) {
      const int bits = 2 + static_cast<int>(rng() % 7);
      const std::int64_t half = std::int64_t{1} << (bits - 1);
      const auto lo = kind == EncodingKind::MagnitudeOnly || kind == EncodingKind::Differential ? -(half * 2 - 1) : -half;
      const auto hi = kind == EncodingKind::MagnitudeOnly || kind == EncodingKind::Differential ? half * 2 - 1 : half - 1;
      const auto e = encode_pmf(random_pmf(rng, lo, hi), {kind, bits});
      EXPECT_NEAR(e.levels.probs().sum(), 1.0, 1e-9);
      if (e.companion) EXPECT_NEAR(e.companion->probs().sum(), 1.0, 1e-9);
    }
  }
  for (int t = 0; t < 100; ++t) {
    const auto e = encode_pmf(random_pmf(rng, 0, 1), {EncodingKind::TwosComplement, 1});
    EXPECT_NEAR(e.levels.probs().sum(), 1.0, 1e-9);
  }
}

TEST(Properties, PmfAndValueTransformsAgree) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto pmf = random_pmf(rng, -8, 7);
    for (auto kind : {EncodingKind::TwosComplement, EncodingKind::Offset, EncodingKind::Differential,
                      EncodingKind::MagnitudeOnly}) {
      const Encoding enc{kind, 4};
      const auto e = encode_pmf(pmf, enc);
      std::map<std::int64_t, double> levels, companion;
      for (std::size_t k = 0; k < pmf.size(); ++k) {
        const auto v = encode_value(pmf.support()[k], enc);
        levels[v.level] += pmf.probs()[static_cast<Eigen::Index>(k)];
        companion[v.companion] += pmf.probs()[static_cast<Eigen::Index>(k)];
      }
      expect_pmf(e.levels, levels, 1e-12);
      if (e.companion) expect_pmf(*e.companion, companion, 1e-12);
    }
  }
}

TEST(Properties, SliceMeansReconstructLevelMean) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto pmf = random_pmf(rng, 0, 1023);
    std::vector<int> widths;
    for (int left = 10; left > 0;) {
      const int w = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(left, 4)));
      widths.push_back(w);
      left -= w;
    }
    const SliceScheme scheme{widths};
    const auto slices = slice_pmf(pmf, 10, scheme);
    const auto offsets = scheme.offsets();
    double recon = 0;
    for (std::size_t i = 0; i < slices.size(); ++i) recon += slices[i].mean() * std::ldexp(1.0, offsets[i]);
    EXPECT_NEAR(recon, pmf.mean(), 1e-12 * std::max(1.0, pmf.mean()));
  }
}

TEST(Properties, MomentIsLinearInProbability) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_pmf(rng, 0, 15);
    const auto b = random_pmf(rng, 0, 15);
    const double alpha = unit(rng);
    std::map<std::int64_t, double> mix;
    for (std::size_t k = 0; k < a.size(); ++k) mix[a.support()[k]] += alpha * a.probs()[static_cast<Eigen::Index>(k)];
    for (std::size_t k = 0; k < b.size(); ++k) mix[b.support()[k]] += (1 - alpha) * b.probs()[static_cast<Eigen::Index>(k)];
    for (const auto& map : {PhysicalMap::voltage(0.9, 16), PhysicalMap::conductance(1e-6, 5e-5, 16)}) {
      for (int power : {1, 2}) {
        const double want = alpha * expected_moment(a, map, power) + (1 - alpha) * expected_moment(b, map, power);
        EXPECT_NEAR(expected_moment(pmf_of(mix), map, power), want, 1e-12 * std::abs(want) + 1e-300);
      }
    }
  }
}

TEST(Properties, OffsetSymmetry) {
  // A PMF symmetric about -1/2 (the centre of the signed range) lands
  // symmetric about 2^(B-1) - 1/2; one symmetric about 0 lands symmetric
  // about 2^(B-1).
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const int bits = 2 + static_cast<int>(rng() % 6);
    const std::int64_t half = std::int64_t{1} << (bits - 1);
    std::map<std::int64_t, double> range_sym, zero_sym;
    for (int k = 0; k < 4; ++k) {
      const auto x = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(half));
      range_sym[x] += 1;
      range_sym[-1 - x] += 1;
      const auto y = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(half));
      zero_sym[y] += 1;
      zero_sym[-y] += 1;
    }
    for (auto* m : {&range_sym, &zero_sym}) {
      double total = 0;
      for (auto& [k, v] : *m) total += v;
      for (auto& [k, v] : *m) v /= total;
    }
    const auto a = encode_pmf(pmf_of(range_sym), {EncodingKind::Offset, bits}).levels;
    for (auto level : a.support()) EXPECT_NEAR(a.prob(level), a.prob(2 * half - 1 - level), 1e-12);
    const auto b = encode_pmf(pmf_of(zero_sym), {EncodingKind::Offset, bits}).levels;
    for (auto level : b.support()) EXPECT_NEAR(b.prob(level), b.prob(2 * half - level), 1e-12);
  }
}

}  // namespace
}  // namespace cim
