#pragma once

// RQ-NAF: runtime-selectable ReLU / Sigmoid / Tanh on a shared hyperbolic
// CORDIC datapath, plus the PISO timing law of the shared instance.

#include <cstdint>
#include <optional>
#include <string_view>

#include "trea/fxp.hpp"

namespace trea {

enum class AfSelect : std::uint8_t { kRelu = 0, kSigmoid = 1, kTanh = 2 };

// 2-bit select code -> function. Code 3 (reserved) and anything wider throws InvalidSelect.
AfSelect af_select_from_code(int code);
int af_select_code(AfSelect sel);
std::string_view to_string(AfSelect sel);
// "relu" | "sigmoid" | "tanh"; InvalidSelect otherwise.
AfSelect parse_af_select(std::string_view name);

namespace naf {

inline constexpr int kInternalFracBits = 16;
inline constexpr FxPFormat kInternalFormat{26, kInternalFracBits};
inline constexpr int kPipelineStages = 9;

// Largest |z| the rotation schedule of the given length can drive to a zero
// residual angle (sum of its elementary angles, internal precision).
double convergence_bound(int iterations = kPipelineStages);

// Input magnitude above which tanh saturates at F fractional bits: the
// reference tanh there exceeds 1 - 2^-(F+1).
double tanh_saturation_threshold(int frac_bits);

}  // namespace naf

struct SinhCosh {
  FxPValue sinh;  // naf::kInternalFormat
  FxPValue cosh;
};

// Rotation-mode hyperbolic CORDIC over indices 1, 2, 3, 4, 4, 5, ... (repeat at
// 4). The first `iterations` entries of that sequence are run; the gain is
// removed with a shift-add constant multiply. z == 0 yields exactly (0, 1).
// Throws ConvergenceDomainError when |z| exceeds convergence_bound(iterations).
SinhCosh cordic_sinh_cosh(const FxPValue& z, int iterations = naf::kPipelineStages);

// Results share the input format and are truncated (toward zero for tanh,
// floor for sigmoid) from the internal 16-bit path.
FxPValue af_tanh(const FxPValue& x);
FxPValue af_sigmoid(const FxPValue& x);
FxPValue af_relu(const FxPValue& x);

FxPValue apply(AfSelect sel, const FxPValue& x);
// Code-level dispatch, as the 2-bit control word drives it.
FxPValue apply_code(int code, const FxPValue& x);

// Shared single instance: 9-cycle fill then one output per cycle. 0 for n == 0.
std::int64_t piso_latency(std::int64_t n_outputs);

}  // namespace trea
