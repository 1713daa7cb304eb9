#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "biomatch/nn.hpp"

namespace biomatch::harness {

struct SyntheticDataSpec {
  std::size_t classes = 8;
  std::size_t samples_per_class = 10;
  std::size_t dimension = 16;
  double center_scale = 10.0;
  double noise_stddev = 0.05;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  /// One center per class.
  std::vector<std::vector<double>> centers;
  /// Class-major: all samples of class 0, then class 1, ...
  std::vector<nn::LabeledSample> samples;
};

/// Throws InvalidSpec unless classes >= 2, dimension >= 2,
/// samples_per_class >= 1, scale > 0 and noise >= 0 (all finite).
void validate(const SyntheticDataSpec& spec);

/// Centers ~ U[-scale, scale]^n, then samples = center + N(0, noise^2 I).
/// Deterministic for a fixed seed.
SyntheticData gen_synthetic(const SyntheticDataSpec& spec);

}  // namespace biomatch::harness
