#include "trea/fxp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "trea/errors.hpp"

namespace trea {

FxPFormat FxPFormat::make(int total_bits, int frac_bits) {
  if (total_bits < 2 || total_bits > 32) {
    throw DomainError("fixed-point total bits must be in [2, 32], got " + std::to_string(total_bits));
  }
  if (frac_bits < 1 || frac_bits > total_bits - 1) {
    throw DomainError("fractional bits must be in [1, N-1], got " + std::to_string(frac_bits));
  }
  return FxPFormat{total_bits, frac_bits};
}

double FxPFormat::ulp() const { return std::ldexp(1.0, -frac_bits); }
double FxPFormat::min_value() const { return std::ldexp(static_cast<double>(min_raw()), -frac_bits); }
double FxPFormat::max_value() const { return std::ldexp(static_cast<double>(max_raw()), -frac_bits); }

FxPValue::FxPValue(std::int64_t raw, FxPFormat format) : raw_(raw), format_(format) {
  if (!format_.fits(raw_)) {
    throw RangeError("raw value " + std::to_string(raw_) + " does not fit in " +
                     std::to_string(format_.total_bits) + " bits");
  }
}

FxPValue encode(double value, FxPFormat format) {
  if (!std::isfinite(value)) throw RangeError("cannot encode a non-finite value");
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double scaled = std::nearbyint(std::ldexp(value, format.frac_bits));
  if (scaled < static_cast<double>(format.min_raw()) || scaled > static_cast<double>(format.max_raw())) {
    throw RangeError("value " + std::to_string(value) + " outside [" + std::to_string(format.min_value()) +
                     ", " + std::to_string(format.max_value()) + "]");
  }
  return FxPValue(static_cast<std::int64_t>(scaled), format);
}

double decode(const FxPValue& x) { return std::ldexp(static_cast<double>(x.raw()), -x.format().frac_bits); }

FxPValue trunc_shift(const FxPValue& x, int m) {
  if (m < 0) throw DomainError("shift amount must be nonnegative");
  const std::int64_t raw = m >= 63 ? (x.raw() < 0 ? -1 : 0) : (x.raw() >> m);
  return FxPValue(raw, x.format());
}

int ceil_log2(std::int64_t k) {
  if (k < 1) throw DomainError("ceil_log2 needs k >= 1");
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(k - 1)));
}

double PoTTerm::value() const { return sign * std::ldexp(1.0, -shift); }

double PoTDecomposition::residual() const { return std::ldexp(static_cast<double>(residual_raw), -frac_bits); }

double PoTDecomposition::approximation() const {
  double sum = 0.0;
  for (const auto& t : terms) sum += t.value();
  return sum;
}

PoTDecomposition msd_decompose(const FxPValue& w, int iterations) {
  if (iterations < 1) throw DomainError("decomposition needs T >= 1");
  const int frac = w.format().frac_bits;
  const std::int64_t one = std::int64_t{1} << frac;
  if (w.raw() >= one || w.raw() <= -one) throw DomainError("MSD decomposition requires |w| < 1");

  PoTDecomposition d;
  d.frac_bits = frac;
  d.iterations = iterations;
  d.terms.reserve(static_cast<std::size_t>(std::min(iterations, frac)));
  std::int64_t r = w.raw();
  for (int i = 0; i < iterations && r != 0; ++i) {
    const int sign = r < 0 ? -1 : 1;
    const auto mag = static_cast<std::uint64_t>(r < 0 ? -r : r);
    const int msb = static_cast<int>(std::bit_width(mag)) - 1;  // floor(log2 |r|)
    d.terms.push_back(PoTTerm{sign, frac - msb});
    r -= sign * (std::int64_t{1} << msb);
  }
  d.residual_raw = r;
  return d;
}

std::int64_t shift_add_raw(std::int64_t x_raw, std::span<const PoTTerm> terms) {
  std::int64_t acc = 0;
  for (const auto& t : terms) {
    const std::int64_t shifted = t.shift >= 63 ? (x_raw < 0 ? -1 : 0) : (x_raw >> t.shift);
    acc += t.sign > 0 ? shifted : -shifted;
  }
  return acc;
}

FxPValue potq_multiply(const FxPValue& x, const FxPValue& w, int iterations) {
  if (!(x.format() == w.format())) throw DomainError("potq_multiply operands must share a format");
  const auto d = msd_decompose(w, iterations);
  const std::int64_t acc = shift_add_raw(x.raw(), d.terms);
  if (!x.format().fits(acc)) {
    throw AccumulatorOverflow("truncated product " + std::to_string(acc) + " exceeds " +
                              std::to_string(x.format().total_bits) + " bits");
  }
  return FxPValue(acc, x.format());
}

double error_bound(const FxPValue& x, int iterations, int frac_bits) {
  return std::abs(decode(x)) * std::ldexp(1.0, -iterations) + iterations * std::ldexp(1.0, -frac_bits);
}

MnNormalized mn_normalize(std::span<const double> weights, int frac_bits) {
  double max_abs = 0.0;
  for (double w : weights) max_abs = std::max(max_abs, std::abs(w));
  if (max_abs == 0.0) throw AllZeroError("cannot max-normalise an all-zero weight set");
  MnNormalized out;
  out.scale = max_abs * (1.0 + std::ldexp(1.0, -frac_bits));
  out.values.reserve(weights.size());
  for (double w : weights) out.values.push_back(w / out.scale);
  return out;
}

}  // namespace trea
