#pragma once

#include <cstdint>
#include <vector>

#include "trea/netmodel.hpp"

namespace trea {

struct Sample {
  std::vector<double> input;  // [1][size][size], values in [-1, 1 - 2^-7]
  int label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetSpec {
  std::uint64_t seed = 1;
  int n_train = 600;
  int n_test = 200;
  int classes = 4;
  int image_size = 12;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<Sample> train;
  std::vector<Sample> test;

  Shape input_shape() const { return Shape{1, spec.image_size, spec.image_size}; }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Class k is a bar at angle k*pi/classes through a jittered centre, with a
// blob at a class-dependent offset, random contrast and Gaussian noise.
// Bit-exact for a given spec. Throws DomainError for classes < 2 or size < 8.
Dataset synth_dataset(const DatasetSpec& spec);

// FNV-1a over the sample bytes; stable fingerprint for a regenerated dataset.
std::uint64_t dataset_digest(const Dataset& data);

}  // namespace trea
