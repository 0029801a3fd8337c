#include <gtest/gtest.h>

#include <cmath>

#include "trea/errors.hpp"
#include "trea/naf.hpp"

using namespace trea;

namespace {

const FxPFormat kWide7 = FxPFormat::make(32, 7);
const FxPFormat kFine12 = FxPFormat::make(16, 12);

double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Tolerances frozen from a double-precision sweep of this datapath over a
// 1e-3 grid on [-4, 4] (oracle evaluated at the decoded input):
//   F=7  worst tanh 0.00878 (2^-6.83), worst sigmoid 0.00972 (2^-6.69)
//   F=12 worst tanh 0.00397 (2^-7.98), worst sigmoid 0.00214 (2^-8.87)
// The F=7 figure is dominated by output truncation, the F=12 figure by the
// residual angle of the 9-stage schedule.
const double kTolF7 = std::ldexp(1.0, -6);
const double kTolF12 = std::ldexp(1.0, -7);

}  // namespace

TEST(Select, Codes) {
  EXPECT_EQ(af_select_from_code(0), AfSelect::kRelu);
  EXPECT_EQ(af_select_from_code(1), AfSelect::kSigmoid);
  EXPECT_EQ(af_select_from_code(2), AfSelect::kTanh);
  EXPECT_THROW(af_select_from_code(3), InvalidSelect);
  EXPECT_THROW(af_select_from_code(-1), InvalidSelect);
  for (AfSelect s : {AfSelect::kRelu, AfSelect::kSigmoid, AfSelect::kTanh}) {
    EXPECT_EQ(af_select_from_code(af_select_code(s)), s);
    EXPECT_EQ(parse_af_select(to_string(s)), s);
  }
  EXPECT_THROW(parse_af_select("gelu"), InvalidSelect);
}

TEST(ApplyCode, Examples) {
  EXPECT_EQ(apply_code(0, encode(-1.0, kFxP8)).raw(), 0);
  EXPECT_EQ(apply_code(2, FxPValue(0, kFxP8)).raw(), 0);
  EXPECT_THROW(apply_code(3, FxPValue(5, kFxP8)), InvalidSelect);
}

TEST(Cordic, ZeroIsExact) {
  const auto sc = cordic_sinh_cosh(FxPValue(0, naf::kInternalFormat));
  EXPECT_EQ(sc.sinh.raw(), 0);
  EXPECT_EQ(decode(sc.cosh), 1.0);
}

TEST(Cordic, MatchesLibraryWithinTolerance) {
  double worst = 0.0;
  const double bound = naf::convergence_bound();
  for (double z = -bound; z <= bound; z += 1e-3) {
    const auto sc = cordic_sinh_cosh(encode(z, naf::kInternalFormat));
    const double zd = decode(encode(z, naf::kInternalFormat));
    worst = std::max(worst, std::abs(decode(sc.sinh) - std::sinh(zd)));
    worst = std::max(worst, std::abs(decode(sc.cosh) - std::cosh(zd)));
  }
  EXPECT_LT(worst, std::ldexp(1.0, -7));
  const auto half = cordic_sinh_cosh(encode(0.5, naf::kInternalFormat));
  EXPECT_NEAR(decode(half.sinh), std::sinh(0.5), std::ldexp(1.0, -8));
  EXPECT_NEAR(decode(half.cosh), std::cosh(0.5), std::ldexp(1.0, -8));
}

TEST(Cordic, DomainBound) {
  const double b = naf::convergence_bound();
  EXPECT_NEAR(b, 1.11414, 1e-4);
  EXPECT_THROW(cordic_sinh_cosh(encode(b + 0.01, naf::kInternalFormat)), ConvergenceDomainError);
  EXPECT_NO_THROW(cordic_sinh_cosh(encode(b - 0.01, naf::kInternalFormat)));
}

TEST(Tanh, Examples) {
  EXPECT_EQ(af_tanh(FxPValue(0, kFxP8)).raw(), 0);
  EXPECT_NEAR(decode(af_tanh(encode(0.5, kFine12))), 0.4621, kTolF12);
  EXPECT_EQ(af_tanh(encode(7.99, kFine12)).raw(), 4095);
  EXPECT_EQ(af_tanh(encode(-8.0, kFine12)).raw(), -4095);
}

TEST(Tanh, SaturatesBelowOne) {
  for (int f : {7, 12}) {
    const FxPFormat fmt = FxPFormat::make(20, f);
    const std::int64_t top = (std::int64_t{1} << f) - 1;
    EXPECT_EQ(af_tanh(encode(10.0, fmt)).raw(), top);
    EXPECT_EQ(af_tanh(encode(-10.0, fmt)).raw(), -top);
    EXPECT_EQ(af_tanh(encode(naf::tanh_saturation_threshold(f) + 0.01, fmt)).raw(), top);
  }
}

TEST(Tanh, OddAtRawLevel) {
  for (std::int64_t r = -4095; r <= 4095; ++r) {
    EXPECT_EQ(af_tanh(FxPValue(r, kFine12)).raw(), -af_tanh(FxPValue(-r, kFine12)).raw());
  }
}

TEST(Sigmoid, Examples) {
  EXPECT_EQ(af_sigmoid(FxPValue(0, kFxP8)).raw(), 64);
  EXPECT_EQ(decode(af_sigmoid(FxPValue(0, kFine12))), 0.5);
  EXPECT_NEAR(decode(af_sigmoid(encode(1.0, kFine12))), 0.7311, kTolF12);
  EXPECT_EQ(af_sigmoid(encode(-8.0, kFine12)).raw(), 1);
  EXPECT_EQ(af_sigmoid(encode(-20.0, FxPFormat::make(20, 12))).raw(), 0);
  EXPECT_EQ(af_sigmoid(encode(-30.0, kWide7)).raw(), 0);
}

TEST(Relu, Examples) {
  EXPECT_EQ(af_relu(encode(-0.25, kFxP8)).raw(), 0);
  EXPECT_EQ(af_relu(encode(0.25, kFxP8)), encode(0.25, kFxP8));
  EXPECT_EQ(af_relu(FxPValue(0, kFxP8)).raw(), 0);
}

TEST(Monotonicity, ExhaustiveFxP8) {
  for (AfSelect s : {AfSelect::kRelu, AfSelect::kSigmoid, AfSelect::kTanh}) {
    std::int64_t prev = apply(s, FxPValue(-128, kFxP8)).raw();
    for (std::int64_t r = -127; r < 128; ++r) {
      const std::int64_t cur = apply(s, FxPValue(r, kFxP8)).raw();
      EXPECT_LE(prev, cur) << to_string(s) << " at raw " << r;
      prev = cur;
    }
  }
}

TEST(Monotonicity, ExhaustiveWide7) {
  // Activation input format of the network datapath.
  for (AfSelect s : {AfSelect::kSigmoid, AfSelect::kTanh}) {
    std::int64_t prev = apply(s, FxPValue(-2048, kWide7)).raw();
    for (std::int64_t r = -2047; r < 2048; ++r) {
      const std::int64_t cur = apply(s, FxPValue(r, kWide7)).raw();
      EXPECT_LE(prev, cur) << to_string(s) << " at raw " << r;
      prev = cur;
    }
  }
}

TEST(Monotonicity, Fine12StepsStayWithinTolerance) {
  // The uncorrected residual angle of the 9-stage schedule makes the output
  // a sawtooth at fine resolution (worst measured step down: 25 ulp tanh,
  // 13 ulp sigmoid at F=12). Steps down must stay inside the accuracy budget.
  for (AfSelect s : {AfSelect::kSigmoid, AfSelect::kTanh}) {
    std::int64_t prev = apply(s, FxPValue(kFine12.min_raw(), kFine12)).raw();
    std::int64_t worst = 0;
    for (std::int64_t r = kFine12.min_raw() + 1; r <= kFine12.max_raw(); ++r) {
      const std::int64_t cur = apply(s, FxPValue(r, kFine12)).raw();
      worst = std::max(worst, prev - cur);
      prev = cur;
    }
    EXPECT_LT(std::ldexp(static_cast<double>(worst), -12), kTolF12) << to_string(s);
  }
}

TEST(Accuracy, GridAgainstDoubleOracle) {
  for (auto [fmt, tol] : {std::pair{kWide7, kTolF7}, std::pair{kFine12, kTolF12}}) {
    double worst_t = 0.0, worst_s = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
      const FxPValue x = encode(i * 1e-3, fmt);
      const double xd = decode(x);
      worst_t = std::max(worst_t, std::abs(decode(af_tanh(x)) - std::tanh(xd)));
      worst_s = std::max(worst_s, std::abs(decode(af_sigmoid(x)) - ref_sigmoid(xd)));
    }
    EXPECT_LT(worst_t, tol) << "F=" << fmt.frac_bits;
    EXPECT_LT(worst_s, tol) << "F=" << fmt.frac_bits;
  }
}

TEST(Piso, Latency) {
  EXPECT_EQ(piso_latency(1), 10);
  EXPECT_EQ(piso_latency(100), 109);
  EXPECT_EQ(piso_latency(0), 0);
}
