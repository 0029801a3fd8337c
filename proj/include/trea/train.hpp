#pragma once

// Reference training (double precision, softmax cross-entropy, seeded SGD)
// and the gradient machinery shared with quantisation-aware fine-tuning.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trea/dataset.hpp"
#include "trea/netmodel.hpp"
#include "trea/rng.hpp"

namespace trea {

struct LayerSpec {
  LayerKind kind = LayerKind::kConv2d;
  int out_channels = 1;
  int kernel = 3;
  int stride = 1;
  Padding padding = Padding::kSame;
  std::optional<AfSelect> activation;
};

struct ArchSpec {
  std::vector<LayerSpec> layers;
};

// conv3x3(6, tanh) -> conv3x3/2(8, tanh) -> dense(classes, linear).
ArchSpec default_arch(int classes);

// Seeded uniform fan-in init, zero bias, mn_scale refreshed.
NetworkDescriptor init_network(const ArchSpec& arch, const Shape& input, std::uint64_t seed);

struct TrainOptions {
  int epochs = 12;
  double lr = 0.05;
  int batch = 16;
  std::uint64_t seed = 1;
};

// Throws DivergenceError if the loss or a parameter becomes non-finite.
NetworkDescriptor train_reference(const ArchSpec& arch, const Dataset& data, const TrainOptions& opts);

struct LayerGrad {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Softmax cross-entropy of one sample; writes dLoss/dScores into grad.
double softmax_xent(std::span<const double> scores, int label, std::span<double> grad);

// Backpropagates dLoss/dScores through the network given each layer's input
// and activated output from a forward pass (float or quantised: the
// quantised case is the straight-through estimator). Pruned positions get
// zero gradient. Gradients are added into `grads`.
void backprop(const NetworkDescriptor& model, const std::vector<std::vector<double>>& inputs,
              const std::vector<std::vector<double>>& outputs, std::span<const double> grad_scores,
              std::vector<LayerGrad>& grads);

std::vector<LayerGrad> zero_grads(const NetworkDescriptor& model);

// w -= scale * g on retained positions, then refresh every mn_scale.
// Throws DivergenceError once a parameter stops being finite.
void apply_gradients(NetworkDescriptor& model, const std::vector<LayerGrad>& grads, double scale);

double accuracy_float(const NetworkDescriptor& model, std::span<const Sample> samples);
double accuracy_quant(const NetworkDescriptor& model, std::span<const Sample> samples, const QuantOptions& opts = {});

}  // namespace trea
