#include "trea/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "trea/errors.hpp"
#include "trea/rng.hpp"

namespace trea {

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

Sample render(Rng& rng, int label, const DatasetSpec& spec) {
  const int n = spec.image_size;
  const double angle = std::numbers::pi * label / spec.classes;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double cy = (n - 1) / 2.0 + rng.uniform(-1.5, 1.5);
  const double cx = (n - 1) / 2.0 + rng.uniform(-1.5, 1.5);
  const double contrast = rng.uniform(0.6, 0.9);
  const double width = rng.uniform(0.7, 1.1);
  // Blob sits on the bar's normal, side chosen by label parity.
  const double side = (label % 2 == 0 ? 1.0 : -1.0) * n * 0.25;
  const double by = cy + dx * side;
  const double bx = cx - dy * side;
  const double max_v = 1.0 - 0x1.0p-7;

  Sample s;
  s.label = label;
  s.input.resize(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double ry = y - cy;
      const double rx = x - cx;
      const double dist = std::abs(rx * dy - ry * dx);  // distance to the bar's line
      const double bar = std::exp(-dist * dist / (2.0 * width * width));
      const double bd2 = (y - by) * (y - by) + (x - bx) * (x - bx);
      const double blob = 0.5 * std::exp(-bd2 / 4.0);
      const double v = -0.5 + contrast * (bar + blob) + 0.12 * rng.normal();
      s.input[static_cast<std::size_t>(y) * n + x] = std::clamp(v, -1.0, max_v);
    }
  }
  return s;
}

}  // namespace

Dataset synth_dataset(const DatasetSpec& spec) {
  if (spec.classes < 2) throw DomainError("dataset needs at least two classes");
  if (spec.image_size < 8) throw DomainError("dataset image size must be >= 8");
  if (spec.n_train < 0 || spec.n_test < 0) throw DomainError("sample counts must be nonnegative");
  Rng rng(spec.seed);
  Dataset d;
  d.spec = spec;
  d.train.reserve(static_cast<std::size_t>(spec.n_train));
  d.test.reserve(static_cast<std::size_t>(spec.n_test));
  for (int i = 0; i < spec.n_train; ++i) d.train.push_back(render(rng, i % spec.classes, spec));
  for (int i = 0; i < spec.n_test; ++i) d.test.push_back(render(rng, i % spec.classes, spec));
  return d;
}

std::uint64_t dataset_digest(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& s : *split) {
      mix(static_cast<std::uint64_t>(s.label));
      for (double v : s.input) mix(std::bit_cast<std::uint64_t>(v));
    }
  }
  return h;
}

}  // namespace trea
