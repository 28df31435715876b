#include <gtest/gtest.h>

#include "support.hpp"

namespace cim {
namespace {

TEST(OracleEquivalence, RandomTriplesMatchExactly) {
  std::mt19937_64 rng(2024);
  int failures = 0;
  for (int i = 0; i < 300 && failures < 5; ++i) {
    auto t = testing::random_triple(rng);
    auto diags = check_valid(t.mapping, t.arch, t.layer.layer);
    ASSERT_TRUE(diags.empty()) << diags.front().message;
    const auto analytic = analyze_access_counts(t.mapping, t.arch, t.layer.layer);
    const auto oracle = oracle_counts(t.arch, t.mapping, t.layer);
    if (analytic != oracle) {
      ++failures;
      ADD_FAILURE() << "triple " << i << "\n" << serialize_arch(t.arch) << "\n"
                    << mapping_to_yaml(t.mapping, t.arch, t.layer.layer) << "\n"
                    << testing::describe_counts(analytic, oracle, t.arch);
    }
  }
}

}  // namespace
}  // namespace cim
