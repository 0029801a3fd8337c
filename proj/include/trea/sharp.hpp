#pragma once

// SHARP: SIMD-aligned structured pruning, greedy layer-wise 4/8-bit
// precision assignment and fixed-mask quantisation-aware fine-tuning.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trea/dataset.hpp"
#include "trea/dqmac.hpp"
#include "trea/mask.hpp"
#include "trea/netmodel.hpp"

namespace trea {

// 4 * floor(kh*kw / 8). Throws KernelTooSmall when kh*kw < 8.
int retained_count(int kernel_h, int kernel_w);

// Keeps the R largest-magnitude positions of one window; ties go to the
// lowest index. R > window size throws DomainError.
std::vector<std::uint8_t> prune_kernel(std::span<const double> window, int retained);

// Mask for one layer. Conv windows with N >= 8 keep retained_count(kh, kw);
// smaller windows (and dense layers) keep everything.
SparsityMask make_layer_mask(const LayerDescriptor& layer);

// Attaches masks to every layer, zeroes the pruned weights and refreshes
// mn_scale. Existing masks are replaced.
NetworkDescriptor prune_network(NetworkDescriptor model);

// ceil(K' / lanes(mode)).
std::int64_t kernel_cycles(std::int64_t operands, MacMode mode);

struct PrecisionAssignment {
  std::vector<MacMode> modes;  // one per layer
  double epsilon = 0.01;
  std::vector<double> accuracy_trace;  // running accuracy after each visited layer

  friend bool operator==(const PrecisionAssignment&, const PrecisionAssignment&) = default;
};

using AccuracyFn = std::function<double(const NetworkDescriptor&)>;

// Starts from all-FxP8, visits layers input to output, keeps FxP4 for a
// layer unless it lowers the running accuracy by more than epsilon.
PrecisionAssignment assign_precision(const NetworkDescriptor& model, const AccuracyFn& evaluate,
                                     double epsilon = 0.01);

// Sets each layer's precision and refreshes its mn_scale.
NetworkDescriptor apply_assignment(NetworkDescriptor model, const PrecisionAssignment& assignment);

struct FineTuneOptions {
  int epochs = 5;
  double lr = 0.01;
  int batch = 16;
  std::uint64_t seed = 1;
  QuantOptions quant;
};

// SGD with straight-through gradients through the bit-accurate forward pass.
// Masks and precisions are untouched; pruned weights stay exactly zero.
// Throws DivergenceError on a non-finite loss.
NetworkDescriptor fine_tune(NetworkDescriptor model, const Dataset& data, const FineTuneOptions& opts);

}  // namespace trea
