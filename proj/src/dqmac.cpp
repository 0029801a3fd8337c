#include "trea/dqmac.hpp"

#include <algorithm>
#include <string>

#include "trea/errors.hpp"

namespace trea {

int lanes(MacMode mode) { return mode == MacMode::kFxP4Simd ? 4 : 1; }

FxPFormat mode_format(MacMode mode) { return mode == MacMode::kFxP4Simd ? kFxP4 : kFxP8; }

int mode_iterations(MacMode mode) { return mode == MacMode::kFxP4Simd ? 3 : 5; }

std::string_view to_string(MacMode mode) { return mode == MacMode::kFxP4Simd ? "fxp4_simd" : "fxp8"; }

MacMode parse_mac_mode(std::string_view name) {
  if (name == "fxp4" || name == "fxp4_simd") return MacMode::kFxP4Simd;
  if (name == "fxp8") return MacMode::kFxP8;
  throw DomainError("unknown precision '" + std::string(name) + "'");
}

int accumulator_width(int operand_bits, std::int64_t operands) {
  if (operand_bits < 2) throw DomainError("operand width must be >= 2");
  return operand_bits + ceil_log2(operands);
}

int conventional_accumulator_width(int operand_bits, std::int64_t operands) {
  if (operand_bits < 2) throw DomainError("operand width must be >= 2");
  return 2 * operand_bits + ceil_log2(operands);
}

Accumulator::Accumulator(int width, FxPFormat format) : width_(width), format_(format) {
  if (width < format.total_bits || width > 62) {
    throw DomainError("accumulator width " + std::to_string(width) + " invalid for " +
                      std::to_string(format.total_bits) + "-bit operands");
  }
}

void Accumulator::add(std::int64_t increment) {
  const std::int64_t next = raw_ + increment;
  const std::int64_t lo = -(std::int64_t{1} << (width_ - 1));
  const std::int64_t hi = (std::int64_t{1} << (width_ - 1)) - 1;
  if (next < lo || next > hi) {
    throw AccumulatorOverflow("accumulator overflow: " + std::to_string(next) + " needs more than " +
                              std::to_string(width_) + " bits");
  }
  raw_ = next;
}

void Accumulator::preload(const FxPValue& bias) {
  if (bias.format().frac_bits > format_.frac_bits) {
    throw DomainError("bias has more fractional bits than the accumulator");
  }
  raw_ = 0;
  add(bias.raw() << (format_.frac_bits - bias.format().frac_bits));
}

FxPValue Accumulator::value() const { return FxPValue(raw_, FxPFormat{std::min(width_, 32), format_.frac_bits}); }

Accumulator mac_step(const FxPValue& x, const PoTTerm& term, Accumulator acc) {
  if (!(x.format() == acc.format())) throw DomainError("operand format differs from accumulator format");
  const std::int64_t shifted = trunc_shift(x, term.shift).raw();
  acc.add(term.sign > 0 ? shifted : -shifted);
  return acc;
}

DotResult dot_product(std::span<const FxPValue> xs, std::span<const FxPValue> ws, MacMode mode,
                      const FxPValue& bias, std::optional<int> iterations) {
  if (xs.size() != ws.size()) {
    throw LengthMismatch("dot product operands differ in length: " + std::to_string(xs.size()) + " vs " +
                         std::to_string(ws.size()));
  }
  const FxPFormat fmt = mode_format(mode);
  const int t = iterations.value_or(mode_iterations(mode));
  const auto k = static_cast<std::int64_t>(xs.size());
  Accumulator acc(accumulator_width(fmt.total_bits, k + 1), fmt);
  if (!(bias.format() == fmt)) throw DomainError("bias must be in the operand format");
  acc.preload(bias);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (!(xs[j].format() == fmt) || !(ws[j].format() == fmt)) {
      throw DomainError("dot product operand not in " + std::string(to_string(mode)) + " format");
    }
    const auto d = msd_decompose(ws[j], t);
    for (const auto& term : d.terms) acc = mac_step(xs[j], term, acc);
  }
  const int cycles = static_cast<int>((k + lanes(mode) - 1) / lanes(mode));
  return DotResult{acc.value(), cycles};
}

PipelineLatency pipeline_latency(int iterations, const PipelineConfig& cfg) {
  if (iterations < 1) throw DomainError("pipeline latency needs T >= 1");
  if (cfg.stages < 1) throw DomainError("pipeline needs at least one stage");
  if (cfg.kind == PipelineConfig::Kind::kIterative) return {iterations, iterations};
  return {std::min(iterations, cfg.stages), 1};
}

}  // namespace trea
