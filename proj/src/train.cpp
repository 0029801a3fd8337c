#include "trea/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trea/errors.hpp"

namespace trea {

ArchSpec default_arch(int classes) {
  ArchSpec a;
  a.layers.push_back(LayerSpec{LayerKind::kConv2d, 6, 3, 1, Padding::kSame, AfSelect::kTanh});
  a.layers.push_back(LayerSpec{LayerKind::kConv2d, 8, 3, 2, Padding::kSame, AfSelect::kTanh});
  a.layers.push_back(LayerSpec{LayerKind::kDense, classes, 1, 1, Padding::kValid, std::nullopt});
  return a;
}

NetworkDescriptor init_network(const ArchSpec& arch, const Shape& input, std::uint64_t seed) {
  if (arch.layers.empty()) throw ShapeMismatch("architecture has no layers");
  Rng rng(seed);
  NetworkDescriptor net;
  net.name = "reference";
  net.seed = seed;
  net.input_shape = input;
  Shape s = input;
  for (const auto& spec : arch.layers) {
    LayerDescriptor l;
    l.kind = spec.kind;
    l.out_channels = spec.out_channels;
    l.activation = spec.activation;
    if (spec.kind == LayerKind::kDense) {
      l.in_channels = static_cast<int>(s.size());
    } else {
      l.in_channels = s.channels;
      l.kernel_h = l.kernel_w = spec.kernel;
      l.stride = spec.stride;
      l.padding = spec.padding;
    }
    const double fan_in = static_cast<double>(l.in_channels) * l.kernel_h * l.kernel_w;
    const double limit = std::sqrt(3.0 / fan_in);
    l.weights.resize(l.weight_count());
    for (double& w : l.weights) w = rng.uniform(-limit, limit);
    l.bias.assign(static_cast<std::size_t>(l.out_channels), 0.0);
    refresh_mn_scale(l);
    s = l.output_shape(s);
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

double softmax_xent(std::span<const double> scores, int label, std::span<double> grad) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - m);
  for (std::size_t i = 0; i < scores.size(); ++i) grad[i] = std::exp(scores[i] - m) / z;
  grad[static_cast<std::size_t>(label)] -= 1.0;
  return -(scores[static_cast<std::size_t>(label)] - m - std::log(z));
}

namespace {

double activation_slope(std::optional<AfSelect> act, double out) {
  if (!act) return 1.0;
  switch (*act) {
    case AfSelect::kRelu: return out > 0.0 ? 1.0 : 0.0;
    case AfSelect::kSigmoid: return out * (1.0 - out);
    case AfSelect::kTanh: return 1.0 - out * out;
  }
  return 1.0;
}

int pad_before(const LayerDescriptor& l, int in, int k) {
  if (l.padding != Padding::kSame) return 0;
  const int out = (in + l.stride - 1) / l.stride;
  return std::max((out - 1) * l.stride + k - in, 0) / 2;
}

// dLoss/dInput of one layer, accumulating weight/bias gradients.
std::vector<double> layer_backward(const LayerDescriptor& l, const Shape& in, std::span<const double> input,
                                   std::span<const double> grad_pre, LayerGrad& g) {
  std::vector<double> grad_in(input.size(), 0.0);
  if (l.kind == LayerKind::kDense) {
    for (int o = 0; o < l.out_channels; ++o) {
      const double go = grad_pre[o];
      g.bias[o] += go;
      const std::size_t row = static_cast<std::size_t>(o) * l.in_channels;
      for (int i = 0; i < l.in_channels; ++i) {
        if (!l.weight_retained(row + i)) continue;
        g.weights[row + i] += go * input[i];
        grad_in[i] += go * l.weights[row + i];
      }
    }
    return grad_in;
  }
  const Shape out = l.output_shape(in);
  const int py = pad_before(l, in.height, l.kernel_h);
  const int px = pad_before(l, in.width, l.kernel_w);
  for (int o = 0; o < out.channels; ++o) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        const double go = grad_pre[(static_cast<std::size_t>(o) * out.height + oy) * out.width + ox];
        g.bias[o] += go;
        for (int c = 0; c < l.in_channels; ++c) {
          for (int ky = 0; ky < l.kernel_h; ++ky) {
            const int iy = oy * l.stride + ky - py;
            if (iy < 0 || iy >= in.height) continue;
            for (int kx = 0; kx < l.kernel_w; ++kx) {
              const int ix = ox * l.stride + kx - px;
              if (ix < 0 || ix >= in.width) continue;
              const std::size_t wi = ((static_cast<std::size_t>(o) * l.in_channels + c) * l.kernel_h + ky) * l.kernel_w + kx;
              if (!l.weight_retained(wi)) continue;
              const std::size_t ii = (static_cast<std::size_t>(c) * in.height + iy) * in.width + ix;
              g.weights[wi] += go * input[ii];
              grad_in[ii] += go * l.weights[wi];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

}  // namespace

std::vector<LayerGrad> zero_grads(const NetworkDescriptor& model) {
  std::vector<LayerGrad> g;
  for (const auto& l : model.layers) g.push_back(LayerGrad{std::vector<double>(l.weights.size(), 0.0),
                                                           std::vector<double>(l.bias.size(), 0.0)});
  return g;
}

void backprop(const NetworkDescriptor& model, const std::vector<std::vector<double>>& inputs,
              const std::vector<std::vector<double>>& outputs, std::span<const double> grad_scores,
              std::vector<LayerGrad>& grads) {
  const auto shapes = model.shapes();
  std::vector<double> grad(grad_scores.begin(), grad_scores.end());
  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const auto& l = model.layers[li];
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= activation_slope(l.activation, outputs[li][i]);
    grad = layer_backward(l, shapes[li], inputs[li], grad, grads[li]);
  }
}

void apply_gradients(NetworkDescriptor& model, const std::vector<LayerGrad>& grads, double scale) {
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    auto& l = model.layers[li];
    for (std::size_t i = 0; i < l.weights.size(); ++i) {
      if (l.weight_retained(i)) l.weights[i] -= scale * grads[li].weights[i];
    }
    for (std::size_t o = 0; o < l.bias.size(); ++o) l.bias[o] -= scale * grads[li].bias[o];
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::ranges::all_of(l.weights, finite) || !std::ranges::all_of(l.bias, finite)) {
      throw DivergenceError("parameters of layer " + std::to_string(li) + " overflowed");
    }
    refresh_mn_scale(l);
  }
}

NetworkDescriptor train_reference(const ArchSpec& arch, const Dataset& data, const TrainOptions& opts) {
  NetworkDescriptor net = init_network(arch, data.input_shape(), opts.seed);
  Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t classes = static_cast<std::size_t>(net.layers.back().out_channels);
  std::vector<double> grad_scores(classes);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opts.batch));
      auto grads = zero_grads(net);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = data.train[order[k]];
        std::vector<std::vector<double>> ins;
        std::vector<std::vector<double>> outs;
        std::vector<double> x = s.input;
        Shape sh = net.input_shape;
        for (const auto& l : net.layers) {
          ins.push_back(x);
          auto pre = layer_preactivation(l, sh, x);
          for (double& v : pre) v = activate(l.activation, v);
          sh = l.output_shape(sh);
          outs.push_back(pre);
          x = std::move(pre);
        }
        const double loss = softmax_xent(x, s.label, grad_scores);
        if (!std::isfinite(loss)) throw DivergenceError("reference training diverged at epoch " + std::to_string(epoch));
        backprop(net, ins, outs, grad_scores, grads);
      }
      apply_gradients(net, grads, opts.lr / static_cast<double>(end - start));
    }
  }
  return net;
}

double accuracy_float(const NetworkDescriptor& model, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : samples) hits += argmax(forward_float(model, s.input)) == static_cast<std::size_t>(s.label);
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double accuracy_quant(const NetworkDescriptor& model, std::span<const Sample> samples, const QuantOptions& opts) {
  if (samples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : samples) {
    hits += argmax(forward_quant(model, s.input, opts)) == static_cast<std::size_t>(s.label);
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace trea
