#include "biomatch/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "biomatch/error.hpp"

namespace biomatch::harness {

void validate(const SyntheticDataSpec& spec) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kInvalidSpec, why); };
  if (spec.classes < 2) fail("need at least two classes");
  if (spec.dimension < 2) fail("dimension must be at least 2");
  if (spec.samples_per_class == 0) fail("samples per class must be positive");
  if (!std::isfinite(spec.center_scale) || spec.center_scale <= 0.0) {
    fail("center scale must be positive");
  }
  if (!std::isfinite(spec.noise_stddev) || spec.noise_stddev < 0.0) {
    fail("noise standard deviation must be non-negative");
  }
}

SyntheticData gen_synthetic(const SyntheticDataSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> center_dist(-spec.center_scale, spec.center_scale);

  SyntheticData data;
  data.centers.assign(spec.classes, std::vector<double>(spec.dimension));
  for (auto& center : data.centers) {
    for (auto& c : center) c = center_dist(rng);
  }

  data.samples.reserve(spec.classes * spec.samples_per_class);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t k = 0; k < spec.classes; ++k) {
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
      nn::LabeledSample sample;
      sample.label = k;
      sample.input = data.centers[k];
      for (auto& v : sample.input) v += spec.noise_stddev * noise(rng);
      data.samples.push_back(std::move(sample));
    }
  }
  return data;
}

}  // namespace biomatch::harness
