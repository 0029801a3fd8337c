#pragma once

// Network description, the double-precision reference forward pass and the
// bit-accurate quantised forward pass through DQ-MAC and RQ-NAF arithmetic.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trea/dqmac.hpp"
#include "trea/fxp.hpp"
#include "trea/mask.hpp"
#include "trea/naf.hpp"

namespace trea {

enum class LayerKind { kConv2d, kDense };
enum class Padding { kValid, kSame };

std::string_view to_string(LayerKind kind);
std::string_view to_string(Padding padding);

struct Shape {
  int channels = 1;
  int height = 1;
  int width = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct LayerDescriptor {
  LayerKind kind = LayerKind::kDense;
  int in_channels = 1;  // dense: flattened input length
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  Padding padding = Padding::kValid;
  std::optional<AfSelect> activation;  // empty: linear (output scores)
  MacMode precision = MacMode::kFxP8;
  std::optional<SparsityMask> mask;
  std::vector<double> weights;  // [out][in][kh][kw], row-major
  std::vector<double> bias;     // [out]
  double mn_scale = 1.0;

  std::size_t weight_count() const;
  int window_size() const { return kernel_h * kernel_w; }
  // Throws ShapeMismatch when `in` is incompatible with this layer.
  Shape output_shape(const Shape& in) const;
  // Checks tensor sizes, mask shape and the mn-form invariant.
  void validate(const Shape& in) const;
  bool weight_retained(std::size_t index) const { return !mask || mask->retained(index); }

  friend bool operator==(const LayerDescriptor&, const LayerDescriptor&) = default;
};

struct NetworkDescriptor {
  std::string name = "net";
  std::uint64_t seed = 0;
  int version = 1;
  Shape input_shape;
  std::vector<LayerDescriptor> layers;

  // input_shape followed by each layer's output shape.
  std::vector<Shape> shapes() const;
  // Throws ShapeMismatch / DomainError on any broken invariant, including an empty layer list.
  void validate() const;

  friend bool operator==(const NetworkDescriptor&, const NetworkDescriptor&) = default;
};

// DQ-MAC cycles one output occupies a unit: dense rows cost
// kernel_cycles(longest retained row), conv outputs cost in_channels *
// kernel_cycles(retained per window).
std::int64_t output_dot_cycles(const LayerDescriptor& layer);

// Recomputes mn_scale from the layer's retained weights and bias with the
// headroom of its current precision. All-zero layers get scale 1.
void refresh_mn_scale(LayerDescriptor& layer);

// ---- double-precision reference ----

double activate(std::optional<AfSelect> act, double v);

// Pre-activation outputs of one layer for a flattened input; pruned weights
// contribute nothing.
std::vector<double> layer_preactivation(const LayerDescriptor& layer, const Shape& in, std::span<const double> input);

std::vector<double> forward_float(const NetworkDescriptor& model, std::span<const double> input);

// ---- bit-accurate path ----

struct QuantOptions {
  std::optional<int> fxp4_iterations;  // default 3
  std::optional<int> fxp8_iterations;  // default 5
  bool fxp4_boundaries = false;        // activations between layers in FxP4 instead of FxP8

  int iterations(MacMode mode) const;
  FxPFormat boundary_format() const { return fxp4_boundaries ? kFxP4 : kFxP8; }
};

// Wide format holding rescaled pre-activations and activation outputs.
FxPFormat wide_format(const QuantOptions& opts);

// One layer prepared for fixed-point execution: weights and bias encoded at
// the layer precision, retained operand index lists per output.
class QuantLayer {
 public:
  QuantLayer(const LayerDescriptor& layer, const Shape& in, const QuantOptions& opts);

  std::size_t output_count() const { return out_shape_.size(); }
  const Shape& output_shape() const { return out_shape_; }
  // Cycles one output's dot product occupies a DQ-MAC unit.
  std::int64_t output_cycles() const { return output_cycles_; }

  // Accumulator content for one output: bias preload plus truncated PoT products.
  FxPValue accumulate(std::span<const FxPValue> input, std::size_t out_index) const;
  // Accumulator rescaled by mn_scale into wide_format (floor).
  FxPValue preactivation(std::span<const FxPValue> input, std::size_t out_index) const;
  // Preactivation through the selected activation (still wide_format).
  FxPValue activated(std::span<const FxPValue> input, std::size_t out_index) const;

  const LayerDescriptor& layer() const { return *layer_; }

 private:
  // Retained weight position within an output channel's kernel; dense
  // layers use `channel` as the flat input index.
  struct Operand {
    int channel;
    int ky;
    int kx;
    FxPValue weight;
  };
  const LayerDescriptor* layer_;
  Shape in_shape_;
  Shape out_shape_;
  QuantOptions opts_;
  MacMode mode_;
  FxPFormat wide_;
  std::vector<std::vector<Operand>> operands_;  // per output channel
  std::vector<FxPValue> bias_;
  std::int64_t output_cycles_ = 0;
};

// Input image (doubles) -> boundary-format words.
std::vector<FxPValue> quantize_input(std::span<const double> input, const QuantOptions& opts);
// Wide activation words -> boundary words, saturating at the boundary range.
FxPValue narrow_to_boundary(const FxPValue& wide, const QuantOptions& opts);

std::vector<double> forward_quant(const NetworkDescriptor& model, std::span<const double> input,
                                  const QuantOptions& opts = {});

// Decoded per-layer values of one quantised forward pass, for STE training.
struct QuantTrace {
  std::vector<std::vector<double>> inputs;  // decoded boundary inputs per layer
  std::vector<std::vector<double>> outputs; // decoded activated outputs (wide) per layer
  std::vector<double> scores;
};
QuantTrace forward_quant_trace(const NetworkDescriptor& model, std::span<const double> input,
                               const QuantOptions& opts = {});

std::size_t argmax(std::span<const double> scores);

}  // namespace trea
