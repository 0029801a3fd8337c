#include "trea/sharp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trea/errors.hpp"
#include "trea/rng.hpp"
#include "trea/train.hpp"

namespace trea {

int retained_count(int kernel_h, int kernel_w) {
  if (kernel_h < 1 || kernel_w < 1) throw DomainError("kernel dimensions must be positive");
  const int n = kernel_h * kernel_w;
  if (n < 8) {
    throw KernelTooSmall(std::to_string(kernel_h) + "x" + std::to_string(kernel_w) +
                         " kernel has fewer than 8 weights; nothing SIMD-aligned to retain");
  }
  return 4 * (n / 8);
}

std::vector<std::uint8_t> prune_kernel(std::span<const double> window, int retained) {
  if (retained < 0 || static_cast<std::size_t>(retained) > window.size()) {
    throw DomainError("cannot retain " + std::to_string(retained) + " of " + std::to_string(window.size()) +
                      " weights");
  }
  std::vector<std::size_t> order(window.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(window[a]) > std::abs(window[b]); });
  std::vector<std::uint8_t> keep(window.size(), 0);
  for (int i = 0; i < retained; ++i) keep[order[static_cast<std::size_t>(i)]] = 1;
  return keep;
}

SparsityMask make_layer_mask(const LayerDescriptor& layer) {
  SparsityMask m;
  m.out_channels = layer.out_channels;
  m.in_channels = layer.in_channels;
  m.kernel_h = layer.kernel_h;
  m.kernel_w = layer.kernel_w;
  const int n = layer.window_size();
  const bool prunable = layer.kind == LayerKind::kConv2d && n >= 8;
  m.retained_per_window = prunable ? retained_count(layer.kernel_h, layer.kernel_w) : n;
  m.keep.reserve(layer.weight_count());
  for (std::size_t w = 0; w < m.window_count(); ++w) {
    const auto window = std::span<const double>(layer.weights).subspan(w * static_cast<std::size_t>(n), n);
    const auto keep = prune_kernel(window, m.retained_per_window);
    m.keep.insert(m.keep.end(), keep.begin(), keep.end());
  }
  return m;
}

NetworkDescriptor prune_network(NetworkDescriptor model) {
  for (auto& layer : model.layers) {
    layer.mask.reset();
    layer.mask = make_layer_mask(layer);
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      if (!layer.mask->retained(i)) layer.weights[i] = 0.0;
    }
    refresh_mn_scale(layer);
  }
  return model;
}

std::int64_t kernel_cycles(std::int64_t operands, MacMode mode) {
  if (operands < 1) throw DomainError("kernel needs at least one operand");
  return (operands + lanes(mode) - 1) / lanes(mode);
}

NetworkDescriptor apply_assignment(NetworkDescriptor model, const PrecisionAssignment& assignment) {
  if (assignment.modes.size() != model.layers.size()) {
    throw LengthMismatch("precision assignment covers " + std::to_string(assignment.modes.size()) + " of " +
                         std::to_string(model.layers.size()) + " layers");
  }
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    model.layers[i].precision = assignment.modes[i];
    refresh_mn_scale(model.layers[i]);
  }
  return model;
}

PrecisionAssignment assign_precision(const NetworkDescriptor& model, const AccuracyFn& evaluate, double epsilon) {
  PrecisionAssignment a;
  a.epsilon = epsilon;
  a.modes.assign(model.layers.size(), MacMode::kFxP8);
  double running = evaluate(apply_assignment(model, a));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    a.modes[l] = MacMode::kFxP4Simd;
    const double acc = evaluate(apply_assignment(model, a));
    if (running - acc > epsilon) {
      a.modes[l] = MacMode::kFxP8;
    } else {
      running = acc;
    }
    a.accuracy_trace.push_back(running);
  }
  return a;
}

NetworkDescriptor fine_tune(NetworkDescriptor model, const Dataset& data, const FineTuneOptions& opts) {
  if (opts.epochs <= 0 || data.train.empty()) return model;
  Rng rng(opts.seed);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t classes = static_cast<std::size_t>(model.layers.back().out_channels);
  std::vector<double> grad_scores(classes);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opts.batch));
      auto grads = zero_grads(model);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = data.train[order[k]];
        const QuantTrace t = forward_quant_trace(model, s.input, opts.quant);
        const double loss = softmax_xent(t.scores, s.label, grad_scores);
        if (!std::isfinite(loss)) throw DivergenceError("fine-tuning diverged at epoch " + std::to_string(epoch));
        backprop(model, t.inputs, t.outputs, grad_scores, grads);
      }
      apply_gradients(model, grads, opts.lr / static_cast<double>(end - start));
    }
  }
  return model;
}

}  // namespace trea
