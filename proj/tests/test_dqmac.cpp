#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trea/dqmac.hpp"
#include "trea/errors.hpp"

using namespace trea;

TEST(AccumulatorWidth, GoldenValues) {
  EXPECT_EQ(accumulator_width(8, 4), 10);
  EXPECT_EQ(accumulator_width(4, 4), 6);
  EXPECT_EQ(accumulator_width(8, 1), 8);
  EXPECT_EQ(conventional_accumulator_width(8, 9), 20);
  EXPECT_EQ(conventional_accumulator_width(4, 9), 12);
  EXPECT_EQ(conventional_accumulator_width(8, 1), 16);
}

TEST(Modes, LanesAndFormats) {
  EXPECT_EQ(lanes(MacMode::kFxP4Simd), 4);
  EXPECT_EQ(lanes(MacMode::kFxP8), 1);
  EXPECT_EQ(mode_format(MacMode::kFxP4Simd), kFxP4);
  EXPECT_EQ(mode_format(MacMode::kFxP8), kFxP8);
  EXPECT_EQ(mode_iterations(MacMode::kFxP4Simd), 3);
  EXPECT_EQ(mode_iterations(MacMode::kFxP8), 5);
  EXPECT_EQ(parse_mac_mode("fxp4"), MacMode::kFxP4Simd);
  EXPECT_EQ(parse_mac_mode(to_string(MacMode::kFxP8)), MacMode::kFxP8);
  EXPECT_THROW(parse_mac_mode("fxp16"), DomainError);
}

TEST(Accumulator, OverflowIsAnErrorAndLeavesStateUnchanged) {
  Accumulator acc(6, kFxP4);
  acc.add(31);
  EXPECT_THROW(acc.add(1), AccumulatorOverflow);
  EXPECT_EQ(acc.raw(), 31);
  acc.add(-63);
  EXPECT_EQ(acc.raw(), -32);
  EXPECT_THROW(acc.add(-1), AccumulatorOverflow);
  EXPECT_THROW(Accumulator(3, kFxP4), DomainError);
}

TEST(MacStep, Examples) {
  const Accumulator zero(10, kFxP8);
  EXPECT_EQ(mac_step(encode(0.5, kFxP8), PoTTerm{1, 1}, zero).raw(), 32);
  Accumulator a(10, kFxP8);
  a.add(17);
  EXPECT_EQ(mac_step(FxPValue(1, kFxP8), PoTTerm{1, 3}, a).raw(), 17);
  EXPECT_EQ(mac_step(FxPValue(-64, kFxP8), PoTTerm{-1, 2}, a).raw(), 33);
}

TEST(MacStep, RepeatedStepsReproducePotq) {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 20000; ++trial) {
    const FxPValue x(static_cast<std::int64_t>(g() % 256) - 128, kFxP8);
    const FxPValue w(static_cast<std::int64_t>(g() % 255) - 127, kFxP8);
    const int t = 1 + static_cast<int>(g() % 7);
    Accumulator acc(10, kFxP8);
    for (const auto& term : msd_decompose(w, t).terms) acc = mac_step(x, term, acc);
    EXPECT_EQ(acc.raw(), potq_multiply(x, w, t).raw());
  }
}

TEST(DotProduct, CyclesPerMode) {
  auto run = [](int k, MacMode mode) {
    const FxPFormat f = mode_format(mode);
    std::vector<FxPValue> xs(k, FxPValue(1, f)), ws(k, FxPValue(1, f));
    return dot_product(xs, ws, mode, FxPValue(0, f)).cycles;
  };
  EXPECT_EQ(run(4, MacMode::kFxP4Simd), 1);
  EXPECT_EQ(run(12, MacMode::kFxP4Simd), 3);
  EXPECT_EQ(run(9, MacMode::kFxP8), 9);
  EXPECT_EQ(run(9, MacMode::kFxP4Simd), 3);
  EXPECT_EQ(run(25, MacMode::kFxP4Simd), 7);
}

TEST(DotProduct, EqualsSumOfTruncatedProductsPlusBias) {
  std::mt19937_64 g(11);
  for (MacMode mode : {MacMode::kFxP4Simd, MacMode::kFxP8}) {
    const FxPFormat f = mode_format(mode);
    const std::int64_t one = std::int64_t{1} << f.frac_bits;
    for (int trial = 0; trial < 3000; ++trial) {
      const int k = 1 + static_cast<int>(g() % 16);
      std::vector<FxPValue> xs, ws;
      std::int64_t expect = static_cast<std::int64_t>(g() % (2 * one - 1)) - (one - 1);
      const FxPValue bias(expect, f);
      for (int i = 0; i < k; ++i) {
        xs.emplace_back(f.min_raw() + static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(2 * one * 1)), f);
        ws.emplace_back(static_cast<std::int64_t>(g() % (2 * one - 1)) - (one - 1), f);
        const auto [terms, r] = oracle::msd(decode(ws.back()), mode_iterations(mode));
        expect += oracle::shift_add(xs.back().raw(), terms);
      }
      const auto d = dot_product(xs, ws, mode, bias);
      EXPECT_EQ(d.value.raw(), expect);
      EXPECT_EQ(d.value.format().total_bits, accumulator_width(f.total_bits, k + 1));
      EXPECT_EQ(d.cycles, oracle::ceil_div(k, lanes(mode)));
    }
  }
}

TEST(DotProduct, SimdLanesAreIndependent) {
  // A lane's operands only affect the result through their own products.
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<FxPValue> xs, ws;
    for (int i = 0; i < 8; ++i) {
      xs.emplace_back(static_cast<std::int64_t>(g() % 16) - 8, kFxP4);
      ws.emplace_back(static_cast<std::int64_t>(g() % 15) - 7, kFxP4);
    }
    const auto base = dot_product(xs, ws, MacMode::kFxP4Simd, FxPValue(0, kFxP4));
    const std::size_t lane = g() % 8;
    const std::int64_t old_term = potq_multiply(xs[lane], ws[lane], 3).raw();
    xs[lane] = FxPValue(static_cast<std::int64_t>(g() % 16) - 8, kFxP4);
    const std::int64_t new_term = potq_multiply(xs[lane], ws[lane], 3).raw();
    const auto changed = dot_product(xs, ws, MacMode::kFxP4Simd, FxPValue(0, kFxP4));
    EXPECT_EQ(changed.value.raw() - base.value.raw(), new_term - old_term);
  }
}

TEST(DotProduct, Errors) {
  std::vector<FxPValue> a(3, FxPValue(1, kFxP8)), b(2, FxPValue(1, kFxP8));
  EXPECT_THROW(dot_product(a, b, MacMode::kFxP8, FxPValue(0, kFxP8)), LengthMismatch);
  std::vector<FxPValue> c(2, FxPValue(1, kFxP4));
  EXPECT_THROW(dot_product(c, c, MacMode::kFxP8, FxPValue(0, kFxP8)), DomainError);
}

TEST(DotProduct, WorstCaseOperandsFitTheDeclaredWidth) {
  for (MacMode mode : {MacMode::kFxP4Simd, MacMode::kFxP8}) {
    const FxPFormat f = mode_format(mode);
    for (int k : {1, 2, 4, 9, 12, 25}) {
      std::vector<FxPValue> xs(k, FxPValue(f.min_raw(), f));
      std::vector<FxPValue> ws(k, FxPValue(f.max_raw(), f));
      EXPECT_NO_THROW(dot_product(xs, ws, mode, FxPValue(f.min_raw(), f), f.frac_bits));
      std::vector<FxPValue> wn(k, FxPValue(-f.max_raw(), f));
      EXPECT_NO_THROW(dot_product(xs, wn, mode, FxPValue(f.max_raw(), f), f.frac_bits));
    }
  }
}

TEST(PipelineLatency, Examples) {
  using K = PipelineConfig::Kind;
  EXPECT_EQ(pipeline_latency(5, {5, K::kIterative}), (PipelineLatency{5, 5}));
  EXPECT_EQ(pipeline_latency(5, {5, K::kPipelined}), (PipelineLatency{5, 1}));
  EXPECT_EQ(pipeline_latency(1, {5, K::kIterative}), (PipelineLatency{1, 1}));
  EXPECT_EQ(pipeline_latency(1, {5, K::kPipelined}), (PipelineLatency{1, 1}));
  EXPECT_EQ(pipeline_latency(3, {5, K::kPipelined}), (PipelineLatency{3, 1}));
  EXPECT_THROW(pipeline_latency(0, {}), DomainError);
}
