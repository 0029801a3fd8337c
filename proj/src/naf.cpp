#include "trea/naf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "trea/errors.hpp"

namespace trea {

AfSelect af_select_from_code(int code) {
  switch (code) {
    case 0: return AfSelect::kRelu;
    case 1: return AfSelect::kSigmoid;
    case 2: return AfSelect::kTanh;
    default: throw InvalidSelect("activation select code " + std::to_string(code) + " is reserved");
  }
}

int af_select_code(AfSelect sel) { return static_cast<int>(sel); }

std::string_view to_string(AfSelect sel) {
  switch (sel) {
    case AfSelect::kRelu: return "relu";
    case AfSelect::kSigmoid: return "sigmoid";
    case AfSelect::kTanh: return "tanh";
  }
  return "?";
}

AfSelect parse_af_select(std::string_view name) {
  if (name == "relu") return AfSelect::kRelu;
  if (name == "sigmoid") return AfSelect::kSigmoid;
  if (name == "tanh") return AfSelect::kTanh;
  throw InvalidSelect("unknown activation '" + std::string(name) + "'");
}

namespace naf {
namespace {

constexpr std::int64_t kOne = std::int64_t{1} << kInternalFracBits;

// Hyperbolic CORDIC index sequence with the mandatory repeats at 4 and 13.
int schedule_index(int stage) {
  int k = 1;
  int emitted = 0;
  for (;;) {
    const int copies = (k == 4 || k == 13 || k == 40) ? 2 : 1;
    if (stage < emitted + copies) return k;
    emitted += copies;
    ++k;
  }
}

std::int64_t angle_raw(int k) {
  static const auto table = [] {
    std::array<std::int64_t, 64> t{};
    for (int i = 1; i < 64; ++i) t[i] = std::llround(std::atanh(std::ldexp(1.0, -i)) * static_cast<double>(kOne));
    return t;
  }();
  return k < 64 ? table[k] : 0;
}

std::int64_t bound_raw(int iterations) {
  std::int64_t sum = 0;
  for (int s = 0; s < iterations; ++s) sum += angle_raw(schedule_index(s));
  return sum;
}

// Full-precision PoT expansion of a constant in [0, 1) at internal precision.
std::vector<PoTTerm> constant_terms(std::int64_t raw) {
  return msd_decompose(FxPValue(raw, kInternalFormat), kInternalFracBits).terms;
}

// Terms of (1/K - 1) for the given schedule, K = prod sqrt(1 - 2^-2k).
std::vector<PoTTerm> gain_terms(int iterations) {
  double gain = 1.0;
  for (int s = 0; s < iterations; ++s) gain *= std::sqrt(1.0 - std::ldexp(1.0, -2 * schedule_index(s)));
  const std::int64_t inv = std::llround(static_cast<double>(kOne) / gain);
  return constant_terms(inv - kOne);
}

// floor(num * 2^16 / den) for 0 <= num < den by restoring shift-subtract.
std::int64_t shift_sub_divide(std::int64_t num, std::int64_t den) {
  std::int64_t q = 0;
  std::int64_t r = num;
  for (int i = 0; i < kInternalFracBits; ++i) {
    r <<= 1;
    q <<= 1;
    if (r >= den) {
      r -= den;
      q |= 1;
    }
  }
  return q;
}

// x * t for internal raw words with 0 <= t < 1, shift-add over t's digits.
std::int64_t shift_add_mul(std::int64_t x, std::int64_t t) {
  if (t == 0) return 0;
  return shift_add_raw(x, constant_terms(t));
}

std::pair<std::int64_t, std::int64_t> rotate(std::int64_t z, int iterations) {
  if (z == 0) return {0, kOne};
  std::int64_t x = kOne;
  std::int64_t y = 0;
  for (int s = 0; s < iterations; ++s) {
    const int k = schedule_index(s);
    const std::int64_t dx = y >> k;
    const std::int64_t dy = x >> k;
    if (z >= 0) {
      x += dx;
      y += dy;
      z -= angle_raw(k);
    } else {
      x -= dx;
      y -= dy;
      z += angle_raw(k);
    }
  }
  static const auto gain_fix = gain_terms(kPipelineStages);
  if (iterations == kPipelineStages) return {y + shift_add_raw(y, gain_fix), x + shift_add_raw(x, gain_fix)};
  const auto terms = gain_terms(iterations);
  return {y + shift_add_raw(y, terms), x + shift_add_raw(x, terms)};
}

// tanh(a) at internal precision for a >= 0, result in [0, 1).
std::int64_t tanh_internal(std::int64_t a) {
  static const double sat = tanh_saturation_threshold(kInternalFracBits);
  if (std::ldexp(static_cast<double>(a), -kInternalFracBits) > sat) return kOne - 1;
  static const std::int64_t bound = bound_raw(kPipelineStages);
  int doublings = 0;
  while (a > bound) {
    a >>= 1;
    ++doublings;
  }
  const auto [s, c] = rotate(a, kPipelineStages);
  std::int64_t t = s < c ? shift_sub_divide(s, c) : kOne - 1;
  // tanh(2a) = 2 tanh(a) / (1 + tanh(a)^2)
  for (int i = 0; i < doublings; ++i) {
    const std::int64_t num = 2 * t;
    const std::int64_t den = kOne + shift_add_mul(t, t);
    t = num < den ? shift_sub_divide(num, den) : kOne - 1;
  }
  return t;
}

// |x| re-expressed with 16 fractional bits (floor when x has more).
std::int64_t to_internal_magnitude(const FxPValue& x) {
  const std::int64_t mag = x.raw() < 0 ? -x.raw() : x.raw();
  const int f = x.format().frac_bits;
  return f <= kInternalFracBits ? mag << (kInternalFracBits - f) : mag >> (f - kInternalFracBits);
}

// Internal [0, 1) word -> raw at F fractional bits, floor, clamped below 1.
std::int64_t from_internal_unit(std::int64_t v, int frac_bits) {
  const std::int64_t out =
      frac_bits <= kInternalFracBits ? v >> (kInternalFracBits - frac_bits) : v << (frac_bits - kInternalFracBits);
  return std::min(out, (std::int64_t{1} << frac_bits) - 1);
}

}  // namespace

double convergence_bound(int iterations) {
  return std::ldexp(static_cast<double>(bound_raw(iterations)), -kInternalFracBits);
}

double tanh_saturation_threshold(int frac_bits) { return std::atanh(1.0 - std::ldexp(1.0, -frac_bits - 1)); }

}  // namespace naf

SinhCosh cordic_sinh_cosh(const FxPValue& z, int iterations) {
  if (iterations < 1) throw DomainError("CORDIC needs at least one iteration");
  const int f = z.format().frac_bits;
  const std::int64_t zi = f <= naf::kInternalFracBits ? z.raw() * (std::int64_t{1} << (naf::kInternalFracBits - f))
                                                      : z.raw() >> (f - naf::kInternalFracBits);
  const std::int64_t bound = naf::bound_raw(iterations);
  if (zi > bound || zi < -bound) {
    throw ConvergenceDomainError("|z| = " + std::to_string(std::abs(decode(z))) +
                                 " exceeds the CORDIC convergence bound " +
                                 std::to_string(naf::convergence_bound(iterations)));
  }
  const auto [s, c] = naf::rotate(zi, iterations);
  return SinhCosh{FxPValue(s, naf::kInternalFormat), FxPValue(c, naf::kInternalFormat)};
}

FxPValue af_tanh(const FxPValue& x) {
  const FxPFormat fmt = x.format();
  const std::int64_t max_out = (std::int64_t{1} << fmt.frac_bits) - 1;
  std::int64_t mag;
  if (std::abs(decode(x)) > naf::tanh_saturation_threshold(fmt.frac_bits)) {
    mag = max_out;
  } else {
    mag = naf::from_internal_unit(naf::tanh_internal(naf::to_internal_magnitude(x)), fmt.frac_bits);
  }
  mag = std::min(mag, std::min(max_out, fmt.max_raw()));
  return FxPValue(x.raw() < 0 ? -mag : mag, fmt);
}

FxPValue af_sigmoid(const FxPValue& x) {
  const FxPFormat fmt = x.format();
  const std::int64_t t = naf::tanh_internal(naf::to_internal_magnitude(x) >> 1);
  const std::int64_t s = x.raw() >= 0 ? (naf::kOne + t) >> 1 : (naf::kOne - t) >> 1;
  return FxPValue(std::min(naf::from_internal_unit(s, fmt.frac_bits), fmt.max_raw()), fmt);
}

FxPValue af_relu(const FxPValue& x) { return x.raw() < 0 ? FxPValue(0, x.format()) : x; }

FxPValue apply(AfSelect sel, const FxPValue& x) {
  switch (sel) {
    case AfSelect::kRelu: return af_relu(x);
    case AfSelect::kSigmoid: return af_sigmoid(x);
    case AfSelect::kTanh: return af_tanh(x);
  }
  throw InvalidSelect("bad activation select");
}

FxPValue apply_code(int code, const FxPValue& x) { return apply(af_select_from_code(code), x); }

std::int64_t piso_latency(std::int64_t n_outputs) {
  if (n_outputs < 0) throw DomainError("output count must be nonnegative");
  return n_outputs == 0 ? 0 : naf::kPipelineStages + n_outputs;
}

}  // namespace trea
