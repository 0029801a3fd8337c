#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trea {

// Retention flags over a layer's [out][in][kh][kw] weight tensor. Each
// (out, in) kernel window keeps the same number of weights.
struct SparsityMask {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int retained_per_window = 1;
  std::vector<std::uint8_t> keep;

  int window_size() const { return kernel_h * kernel_w; }
  std::size_t window_count() const {
    return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels);
  }
  std::size_t size() const { return window_count() * static_cast<std::size_t>(window_size()); }
  bool retained(std::size_t index) const { return keep[index] != 0; }
  std::span<const std::uint8_t> window(int out, int in) const {
    const std::size_t n = static_cast<std::size_t>(window_size());
    return std::span<const std::uint8_t>(keep).subspan(
        (static_cast<std::size_t>(out) * static_cast<std::size_t>(in_channels) + static_cast<std::size_t>(in)) * n,
        n);
  }

  friend bool operator==(const SparsityMask&, const SparsityMask&) = default;
};

}  // namespace trea
