#include "trea/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trea/errors.hpp"
#include "trea/sharp.hpp"

namespace trea {

std::string_view to_string(LayerKind kind) { return kind == LayerKind::kConv2d ? "conv2d" : "dense"; }
std::string_view to_string(Padding padding) { return padding == Padding::kSame ? "same" : "valid"; }

std::size_t LayerDescriptor::weight_count() const {
  return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels) *
         static_cast<std::size_t>(kernel_h) * static_cast<std::size_t>(kernel_w);
}

namespace {

int conv_out_dim(int in, int k, int stride, Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  return in >= k ? (in - k) / stride + 1 : 0;
}

int same_pad_before(int in, int k, int stride) {
  const int out = (in + stride - 1) / stride;
  const int total = std::max((out - 1) * stride + k - in, 0);
  return total / 2;
}

}  // namespace

Shape LayerDescriptor::output_shape(const Shape& in) const {
  if (kind == LayerKind::kDense) {
    if (static_cast<std::size_t>(in_channels) != in.size()) {
      throw ShapeMismatch("dense layer expects " + std::to_string(in_channels) + " inputs, got " +
                          std::to_string(in.size()));
    }
    return Shape{out_channels, 1, 1};
  }
  if (in.channels != in_channels) {
    throw ShapeMismatch("conv layer expects " + std::to_string(in_channels) + " input channels, got " +
                        std::to_string(in.channels));
  }
  const Shape out{out_channels, conv_out_dim(in.height, kernel_h, stride, padding),
                  conv_out_dim(in.width, kernel_w, stride, padding)};
  if (out.height < 1 || out.width < 1) throw ShapeMismatch("conv kernel larger than its input");
  return out;
}

void LayerDescriptor::validate(const Shape& in) const {
  if (in_channels < 1 || out_channels < 1 || kernel_h < 1 || kernel_w < 1 || stride < 1) {
    throw ShapeMismatch("layer dimensions must be positive");
  }
  if (kind == LayerKind::kDense && (kernel_h != 1 || kernel_w != 1)) {
    throw ShapeMismatch("dense layers have a 1x1 kernel");
  }
  output_shape(in);
  if (weights.size() != weight_count()) {
    throw ShapeMismatch("weight tensor has " + std::to_string(weights.size()) + " entries, expected " +
                        std::to_string(weight_count()));
  }
  if (bias.size() != static_cast<std::size_t>(out_channels)) throw ShapeMismatch("bias length differs from outputs");
  if (mask) {
    if (mask->out_channels != out_channels || mask->in_channels != in_channels || mask->kernel_h != kernel_h ||
        mask->kernel_w != kernel_w || mask->keep.size() != weight_count()) {
      throw ShapeMismatch("mask shape differs from weight shape");
    }
  }
  if (!(mn_scale > 0.0) || !std::isfinite(mn_scale)) throw DomainError("mn_scale must be positive");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weight_retained(i) && !(std::abs(weights[i] / mn_scale) < 1.0)) {
      throw DomainError("weight " + std::to_string(i) + " is not in mn-form");
    }
  }
  for (double b : bias) {
    if (!(std::abs(b / mn_scale) < 1.0)) throw DomainError("bias is not in mn-form");
  }
}

std::vector<Shape> NetworkDescriptor::shapes() const {
  std::vector<Shape> out{input_shape};
  for (const auto& layer : layers) out.push_back(layer.output_shape(out.back()));
  return out;
}

void NetworkDescriptor::validate() const {
  if (layers.empty()) throw ShapeMismatch("network has no layers");
  if (input_shape.size() == 0) throw ShapeMismatch("network input shape is empty");
  Shape s = input_shape;
  for (const auto& layer : layers) {
    layer.validate(s);
    s = layer.output_shape(s);
  }
}

std::int64_t output_dot_cycles(const LayerDescriptor& layer) {
  if (layer.kind == LayerKind::kDense) {
    std::int64_t longest = 1;
    for (int o = 0; o < layer.out_channels; ++o) {
      std::int64_t row = 0;
      for (int i = 0; i < layer.in_channels; ++i) {
        row += layer.weight_retained(static_cast<std::size_t>(o) * layer.in_channels + i);
      }
      longest = std::max(longest, row);
    }
    return kernel_cycles(longest, layer.precision);
  }
  const int per_window = layer.mask ? layer.mask->retained_per_window : layer.window_size();
  return static_cast<std::int64_t>(layer.in_channels) * kernel_cycles(std::max(per_window, 1), layer.precision);
}

void refresh_mn_scale(LayerDescriptor& layer) {
  std::vector<double> values;
  values.reserve(layer.weights.size() + layer.bias.size());
  for (std::size_t i = 0; i < layer.weights.size(); ++i) {
    if (layer.weight_retained(i)) values.push_back(layer.weights[i]);
  }
  values.insert(values.end(), layer.bias.begin(), layer.bias.end());
  try {
    layer.mn_scale = mn_normalize(values, mode_format(layer.precision).frac_bits).scale;
  } catch (const AllZeroError&) {
    layer.mn_scale = 1.0;
  }
}

double activate(std::optional<AfSelect> act, double v) {
  if (!act) return v;
  switch (*act) {
    case AfSelect::kRelu: return v > 0.0 ? v : 0.0;
    case AfSelect::kSigmoid: return 1.0 / (1.0 + std::exp(-v));
    case AfSelect::kTanh: return std::tanh(v);
  }
  return v;
}

std::vector<double> layer_preactivation(const LayerDescriptor& layer, const Shape& in, std::span<const double> input) {
  const Shape out = layer.output_shape(in);
  if (input.size() != in.size()) throw ShapeMismatch("input length differs from layer input shape");
  std::vector<double> pre(out.size());
  if (layer.kind == LayerKind::kDense) {
    for (int o = 0; o < layer.out_channels; ++o) {
      double acc = layer.bias[o];
      const std::size_t row = static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in_channels);
      for (int i = 0; i < layer.in_channels; ++i) {
        if (layer.weight_retained(row + i)) acc += layer.weights[row + i] * input[i];
      }
      pre[o] = acc;
    }
    return pre;
  }
  const int pad_y = layer.padding == Padding::kSame ? same_pad_before(in.height, layer.kernel_h, layer.stride) : 0;
  const int pad_x = layer.padding == Padding::kSame ? same_pad_before(in.width, layer.kernel_w, layer.stride) : 0;
  for (int o = 0; o < out.channels; ++o) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        double acc = layer.bias[o];
        for (int c = 0; c < layer.in_channels; ++c) {
          for (int ky = 0; ky < layer.kernel_h; ++ky) {
            const int iy = oy * layer.stride + ky - pad_y;
            if (iy < 0 || iy >= in.height) continue;
            for (int kx = 0; kx < layer.kernel_w; ++kx) {
              const int ix = ox * layer.stride + kx - pad_x;
              if (ix < 0 || ix >= in.width) continue;
              const std::size_t wi =
                  ((static_cast<std::size_t>(o) * layer.in_channels + c) * layer.kernel_h + ky) * layer.kernel_w + kx;
              if (!layer.weight_retained(wi)) continue;
              acc += layer.weights[wi] * input[(static_cast<std::size_t>(c) * in.height + iy) * in.width + ix];
            }
          }
        }
        pre[(static_cast<std::size_t>(o) * out.height + oy) * out.width + ox] = acc;
      }
    }
  }
  return pre;
}

std::vector<double> forward_float(const NetworkDescriptor& model, std::span<const double> input) {
  if (input.size() != model.input_shape.size()) throw ShapeMismatch("input does not match the network input shape");
  std::vector<double> x(input.begin(), input.end());
  Shape s = model.input_shape;
  for (const auto& layer : model.layers) {
    auto pre = layer_preactivation(layer, s, x);
    for (double& v : pre) v = activate(layer.activation, v);
    s = layer.output_shape(s);
    x = std::move(pre);
  }
  return x;
}

// ---- bit-accurate path ----

int QuantOptions::iterations(MacMode mode) const {
  const auto& o = mode == MacMode::kFxP4Simd ? fxp4_iterations : fxp8_iterations;
  return o.value_or(mode_iterations(mode));
}

FxPFormat wide_format(const QuantOptions& opts) { return FxPFormat{32, opts.boundary_format().frac_bits}; }

QuantLayer::QuantLayer(const LayerDescriptor& layer, const Shape& in, const QuantOptions& opts)
    : layer_(&layer),
      in_shape_(in),
      out_shape_(layer.output_shape(in)),
      opts_(opts),
      mode_(layer.precision),
      wide_(wide_format(opts)) {
  const FxPFormat fmt = mode_format(mode_);
  const auto encode_normalized = [&](double v, const char* what) {
    try {
      return encode(v / layer.mn_scale, fmt);
    } catch (const RangeError&) {
      throw RangeError(std::string(what) + " not representable after mn-normalisation; refresh mn_scale");
    }
  };
  operands_.resize(static_cast<std::size_t>(layer.out_channels));
  for (int o = 0; o < layer.out_channels; ++o) {
    auto& ops = operands_[o];
    for (int c = 0; c < layer.in_channels; ++c) {
      for (int ky = 0; ky < layer.kernel_h; ++ky) {
        for (int kx = 0; kx < layer.kernel_w; ++kx) {
          const std::size_t wi =
              ((static_cast<std::size_t>(o) * layer.in_channels + c) * layer.kernel_h + ky) * layer.kernel_w + kx;
          if (!layer.weight_retained(wi)) continue;
          ops.push_back(Operand{c, ky, kx, encode_normalized(layer.weights[wi], "weight")});
        }
      }
    }
    bias_.push_back(encode_normalized(layer.bias[o], "bias"));
  }
  output_cycles_ = output_dot_cycles(layer);
}

FxPValue QuantLayer::accumulate(std::span<const FxPValue> input, std::size_t out_index) const {
  const LayerDescriptor& layer = *layer_;
  const FxPFormat fmt = mode_format(mode_);
  const int shift = opts_.boundary_format().frac_bits - fmt.frac_bits;
  // Boundary words re-expressed in the operand format of this layer.
  const auto operand = [&](const FxPValue& v) {
    return FxPValue(shift >= 0 ? v.raw() >> shift : v.raw() * (std::int64_t{1} << -shift), fmt);
  };
  const FxPValue zero(0, fmt);

  std::size_t channel = out_index;
  int oy = 0;
  int ox = 0;
  if (layer.kind == LayerKind::kConv2d) {
    const std::size_t plane = static_cast<std::size_t>(out_shape_.height) * out_shape_.width;
    channel = out_index / plane;
    oy = static_cast<int>((out_index % plane) / out_shape_.width);
    ox = static_cast<int>(out_index % out_shape_.width);
  }
  const auto& ops = operands_[channel];
  std::vector<FxPValue> xs;
  std::vector<FxPValue> ws;
  xs.reserve(ops.size());
  ws.reserve(ops.size());
  if (layer.kind == LayerKind::kDense) {
    for (const auto& op : ops) {
      xs.push_back(operand(input[op.channel]));
      ws.push_back(op.weight);
    }
  } else {
    const int pad_y =
        layer.padding == Padding::kSame ? same_pad_before(in_shape_.height, layer.kernel_h, layer.stride) : 0;
    const int pad_x = layer.padding == Padding::kSame ? same_pad_before(in_shape_.width, layer.kernel_w, layer.stride) : 0;
    for (const auto& op : ops) {
      const int iy = oy * layer.stride + op.ky - pad_y;
      const int ix = ox * layer.stride + op.kx - pad_x;
      const bool inside = iy >= 0 && iy < in_shape_.height && ix >= 0 && ix < in_shape_.width;
      xs.push_back(inside ? operand(input[(static_cast<std::size_t>(op.channel) * in_shape_.height + iy) *
                                              in_shape_.width +
                                          ix])
                          : zero);
      ws.push_back(op.weight);
    }
  }
  return dot_product(xs, ws, mode_, bias_[channel], opts_.iterations(mode_)).value;
}

FxPValue QuantLayer::preactivation(std::span<const FxPValue> input, std::size_t out_index) const {
  const FxPValue acc = accumulate(input, out_index);
  const double scaled =
      std::floor(std::ldexp(static_cast<double>(acc.raw()) * layer_->mn_scale, wide_.frac_bits - acc.format().frac_bits));
  if (!(scaled >= static_cast<double>(wide_.min_raw()) && scaled <= static_cast<double>(wide_.max_raw()))) {
    throw RangeError("rescaled pre-activation exceeds the intermediate format");
  }
  return FxPValue(static_cast<std::int64_t>(scaled), wide_);
}

FxPValue QuantLayer::activated(std::span<const FxPValue> input, std::size_t out_index) const {
  const FxPValue pre = preactivation(input, out_index);
  return layer_->activation ? apply(*layer_->activation, pre) : pre;
}

std::vector<FxPValue> quantize_input(std::span<const double> input, const QuantOptions& opts) {
  const FxPFormat fmt = opts.boundary_format();
  std::vector<FxPValue> out;
  out.reserve(input.size());
  for (double v : input) {
    const double clamped = std::clamp(v, fmt.min_value(), fmt.max_value());
    out.push_back(encode(clamped, fmt));
  }
  return out;
}

FxPValue narrow_to_boundary(const FxPValue& wide, const QuantOptions& opts) {
  const FxPFormat fmt = opts.boundary_format();
  const int shift = wide.format().frac_bits - fmt.frac_bits;
  std::int64_t raw = shift >= 0 ? wide.raw() >> shift : wide.raw() * (std::int64_t{1} << -shift);
  raw = std::clamp(raw, fmt.min_raw(), fmt.max_raw());
  return FxPValue(raw, fmt);
}

QuantTrace forward_quant_trace(const NetworkDescriptor& model, std::span<const double> input,
                               const QuantOptions& opts) {
  if (input.size() != model.input_shape.size()) throw ShapeMismatch("input does not match the network input shape");
  QuantTrace trace;
  std::vector<FxPValue> x = quantize_input(input, opts);
  Shape s = model.input_shape;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const QuantLayer ql(model.layers[l], s, opts);
    std::vector<double> decoded_in(x.size());
    std::transform(x.begin(), x.end(), decoded_in.begin(), [](const FxPValue& v) { return decode(v); });
    trace.inputs.push_back(std::move(decoded_in));
    std::vector<FxPValue> next;
    std::vector<double> outs;
    next.reserve(ql.output_count());
    outs.reserve(ql.output_count());
    for (std::size_t o = 0; o < ql.output_count(); ++o) {
      const FxPValue y = ql.activated(x, o);
      outs.push_back(decode(y));
      next.push_back(narrow_to_boundary(y, opts));
    }
    trace.outputs.push_back(std::move(outs));
    s = ql.output_shape();
    x = std::move(next);
  }
  trace.scores = trace.outputs.back();
  return trace;
}

std::vector<double> forward_quant(const NetworkDescriptor& model, std::span<const double> input,
                                  const QuantOptions& opts) {
  return forward_quant_trace(model, input, opts).scores;
}

std::size_t argmax(std::span<const double> scores) {
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

}  // namespace trea
