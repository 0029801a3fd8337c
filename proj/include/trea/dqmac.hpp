#pragma once

// Dual-precision SIMD MAC unit: 4 x FxP4 lanes or 1 x FxP8 per cycle, bias
// preload, truncated shift-and-add accumulation at reduced width.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "trea/fxp.hpp"

namespace trea {

enum class MacMode { kFxP4Simd, kFxP8 };

int lanes(MacMode mode);
FxPFormat mode_format(MacMode mode);
// Default decomposition depth: 3 for FxP4 (full), 5 for FxP8.
int mode_iterations(MacMode mode);
std::string_view to_string(MacMode mode);
// Accepts "fxp4", "fxp4_simd", "fxp8". Throws DomainError otherwise.
MacMode parse_mac_mode(std::string_view name);

// N + ceil(log2 K'): accumulator width after pre-accumulation truncation.
int accumulator_width(int operand_bits, std::int64_t operands);
// 2N + ceil(log2 K): width needed behind a full-product multiplier.
int conventional_accumulator_width(int operand_bits, std::int64_t operands);

class Accumulator {
 public:
  // Zero accumulator of the given width. Width must cover format.total_bits.
  Accumulator(int width, FxPFormat format);

  std::int64_t raw() const { return raw_; }
  int width() const { return width_; }
  FxPFormat format() const { return format_; }

  // Adds a raw increment at operand scale. Throws AccumulatorOverflow if the
  // result leaves the signed width-bit range; the accumulator is unchanged then.
  void add(std::int64_t increment);
  // Loads the bias (same fractional bits) before any MAC step.
  void preload(const FxPValue& bias);
  // Current content as a fixed-point value of format (width, F).
  FxPValue value() const;

 private:
  std::int64_t raw_ = 0;
  int width_;
  FxPFormat format_;
};

// acc +/- trunc_shift(x, m) for one PoT term.
Accumulator mac_step(const FxPValue& x, const PoTTerm& term, Accumulator acc);

struct DotResult {
  FxPValue value;  // format (accumulator width, F)
  int cycles;
};

// Bias-preloaded dot product over K' operand pairs. The bias occupies one
// accumulator slot, so the accumulator is accumulator_width(N, K'+1) wide.
// cycles = ceil(K' / lanes); the preload is free.
DotResult dot_product(std::span<const FxPValue> xs, std::span<const FxPValue> ws, MacMode mode,
                      const FxPValue& bias, std::optional<int> iterations = std::nullopt);

struct PipelineConfig {
  enum class Kind { kIterative, kPipelined };
  int stages = 5;
  Kind kind = Kind::kPipelined;
};

struct PipelineLatency {
  int fill_cycles;
  int issue_interval;
  friend bool operator==(const PipelineLatency&, const PipelineLatency&) = default;
};

// Iterative: one shift/add stage reused T times -> (T, T).
// Pipelined: (min(T, P), 1); a unit deeper than T simply bypasses the spare
// stages. Throws DomainError when T < 1 or P < 1.
PipelineLatency pipeline_latency(int iterations, const PipelineConfig& cfg);

}  // namespace trea
