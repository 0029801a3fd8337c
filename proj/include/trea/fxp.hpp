#pragma once

// Signed two's-complement fixed-point values and the MSD-first power-of-two
// weight decomposition that the DQ-MAC executes with shifts and adds.

#include <cstdint>
#include <span>
#include <vector>

namespace trea {

// N total bits (sign included), F of them fractional.
struct FxPFormat {
  int total_bits = 8;
  int frac_bits = 7;

  // Validating constructor: 2 <= N <= 32, 1 <= F <= N-1. Throws DomainError.
  static FxPFormat make(int total_bits, int frac_bits);

  constexpr std::int64_t min_raw() const { return -(std::int64_t{1} << (total_bits - 1)); }
  constexpr std::int64_t max_raw() const { return (std::int64_t{1} << (total_bits - 1)) - 1; }
  constexpr bool fits(std::int64_t raw) const { return raw >= min_raw() && raw <= max_raw(); }
  double ulp() const;
  double min_value() const;
  double max_value() const;

  friend constexpr bool operator==(const FxPFormat&, const FxPFormat&) = default;
};

inline constexpr FxPFormat kFxP4{4, 3};
inline constexpr FxPFormat kFxP8{8, 7};

class FxPValue {
 public:
  // Throws RangeError when raw does not fit in format.total_bits.
  FxPValue(std::int64_t raw, FxPFormat format);

  std::int64_t raw() const { return raw_; }
  FxPFormat format() const { return format_; }

  friend bool operator==(const FxPValue&, const FxPValue&) = default;

 private:
  std::int64_t raw_;
  FxPFormat format_;
};

// Round-to-nearest-even of value * 2^F. Out-of-range (after rounding) or
// non-finite input raises RangeError; there is no saturation.
FxPValue encode(double value, FxPFormat format);
double decode(const FxPValue& x);

// Arithmetic right shift of the raw word (floor semantics). m >= 0.
FxPValue trunc_shift(const FxPValue& x, int m);

// Smallest c with 2^c >= k, for k >= 1.
int ceil_log2(std::int64_t k);

// Signed power-of-two term s * 2^-m.
struct PoTTerm {
  int sign = 1;
  int shift = 0;

  double value() const;
  friend bool operator==(const PoTTerm&, const PoTTerm&) = default;
};

struct PoTDecomposition {
  std::vector<PoTTerm> terms;  // MSD first, shifts strictly increasing
  std::int64_t residual_raw = 0;  // exact remainder W_T in units of 2^-F
  int frac_bits = 0;
  int iterations = 0;  // requested T

  double residual() const;
  double approximation() const;  // sum of terms
};

// Greedy extraction of the largest power of two not exceeding the current
// residual magnitude. Stops after T terms or when the residual hits zero.
// Requires |w| < 1 (DomainError otherwise) and T >= 1.
PoTDecomposition msd_decompose(const FxPValue& w, int iterations);

// Sum of s_i * trunc(x >> m_i) for the raw word of x. No range check.
std::int64_t shift_add_raw(std::int64_t x_raw, std::span<const PoTTerm> terms);

// Truncated shift-and-add product of x and w (same format), T terms.
FxPValue potq_multiply(const FxPValue& x, const FxPValue& w, int iterations);

// |x| * 2^-T + T * 2^-F: worst-case error of potq_multiply.
double error_bound(const FxPValue& x, int iterations, int frac_bits);

struct MnNormalized {
  double scale = 0.0;
  std::vector<double> values;
};

// Divides by max|w| * (1 + 2^-F) so every value is strictly inside (-1, 1)
// and still encodes below +-1 at F fractional bits. AllZeroError if all zero.
MnNormalized mn_normalize(std::span<const double> weights, int frac_bits = 7);

}  // namespace trea
