#pragma once

#include <random>

#include "trea/netmodel.hpp"
#include "trea/sharp.hpp"
#include "trea/train.hpp"

namespace fixtures {

// Seeded random CNN: 1-3 conv layers of mixed kernel, stride, padding,
// activation and precision, optionally SHARP-pruned, then a dense head.
inline trea::NetworkDescriptor random_network(std::uint64_t seed) {
  using namespace trea;
  std::mt19937_64 g(seed);
  auto pick = [&](int n) { return static_cast<int>(g() % static_cast<std::uint64_t>(n)); };
  const Shape input{1 + pick(2), 6 + pick(7), 6 + pick(7)};
  ArchSpec arch;
  Shape s = input;
  const int convs = 1 + pick(3);
  for (int i = 0; i < convs; ++i) {
    LayerSpec l;
    const int ks[] = {1, 3, 3, 5};
    l.kernel = ks[pick(4)];
    l.stride = 1 + pick(2);
    l.padding = (pick(2) || s.height < l.kernel || s.width < l.kernel) ? Padding::kSame : Padding::kValid;
    l.out_channels = 1 + pick(6);
    const std::optional<AfSelect> acts[] = {AfSelect::kRelu, AfSelect::kSigmoid, AfSelect::kTanh, std::nullopt};
    l.activation = acts[pick(4)];
    arch.layers.push_back(l);
    LayerDescriptor probe;
    probe.kind = LayerKind::kConv2d;
    probe.in_channels = s.channels;
    probe.out_channels = l.out_channels;
    probe.kernel_h = probe.kernel_w = l.kernel;
    probe.stride = l.stride;
    probe.padding = l.padding;
    s = probe.output_shape(s);
  }
  arch.layers.push_back({LayerKind::kDense, 2 + pick(9), 1, 1, Padding::kValid,
                         pick(2) ? std::nullopt : std::optional<AfSelect>(AfSelect::kTanh)});
  NetworkDescriptor net = init_network(arch, input, seed * 7 + 1);
  std::normal_distribution<double> n(0.0, 0.05);
  for (auto& l : net.layers) {
    for (auto& b : l.bias) b = n(g);
  }
  if (pick(2)) net = prune_network(std::move(net));
  PrecisionAssignment a;
  for (std::size_t i = 0; i < net.layers.size(); ++i) a.modes.push_back(pick(2) ? MacMode::kFxP4Simd : MacMode::kFxP8);
  return apply_assignment(std::move(net), a);
}

inline std::vector<double> random_frame(const trea::NetworkDescriptor& net, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(net.input_shape.size());
  for (auto& v : x) v = u(g);
  return x;
}

}  // namespace fixtures
