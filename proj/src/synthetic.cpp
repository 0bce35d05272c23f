#include <algorithm>
#include <cmath>

#include "fairmit/errors.hpp"
#include "fairmit/harness.hpp"
#include "fairmit/rng.hpp"

namespace fairmit {

namespace {

// Background noise level. Large enough that a 200-sample fine-tune cannot
// fully recover the class pattern from scratch, small enough that a linear
// probe on the full source still clears 0.9.
constexpr double kPixelNoise = 0.3;

// Class pattern: left half bright, right half dark, zero mean overall.
double pattern_at(std::size_t x, std::size_t width) {
  return x < width / 2 ? 1.0 : -1.0;
}

std::vector<double> make_image(const SyntheticSpec& spec, int label,
                               double nuisance_shift, Rng& rng) {
  const std::size_t h = spec.image_height;
  const std::size_t w = spec.image_width;
  const std::size_t c = spec.image_channels;
  const double label_sign = label == kMale ? 1.0 : -1.0;
  std::vector<double> pixels(h * w * c);
  std::size_t p = 0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double base = 0.5 +
                          label_sign * spec.class_signal_strength *
                              pattern_at(x, w) +
                          nuisance_shift;
      for (std::size_t ch = 0; ch < c; ++ch) {
        pixels[p++] =
            std::clamp(base + kPixelNoise * rng.normal(), 0.0, 1.0);
      }
    }
  }
  return pixels;
}

Dataset make_set(const SyntheticSpec& spec, std::size_t count,
                 std::size_t female_count, double nuisance, Rng& rng) {
  Dataset data;
  data.image_height = spec.image_height;
  data.image_width = spec.image_width;
  data.image_channels = spec.image_channels;
  data.features.reserve(count);
  data.labels.reserve(count);

  std::vector<int> labels(count, kMale);
  std::fill_n(labels.begin(), female_count, kFemale);
  shuffle_values(labels, rng);

  for (int label : labels) {
    const double shift =
        label == kFemale ? nuisance * 0.5 : -nuisance * 0.5;
    data.features.push_back(make_image(spec, label, shift, rng));
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.image_height == 0 || spec.image_width == 0 ||
      spec.image_channels == 0) {
    throw input_error("image dimensions must be positive");
  }
  if (spec.source_count < 2 || spec.target_count < 2) {
    throw input_error("sample counts must be at least 2");
  }
  if (!(spec.target_female_fraction > 0.0 &&
        spec.target_female_fraction < 1.0)) {
    throw input_error("female fraction must lie in (0,1)");
  }
  if (spec.class_signal_strength < 0.0 || spec.group_nuisance_strength < 0.0) {
    throw input_error("strengths must be non-negative");
  }

  SyntheticData data;
  {
    Rng rng(mix_seed(spec.seed, 0x50u));
    // nuisance applies to the target only; the source stays group-neutral
    data.source =
        make_set(spec, spec.source_count, spec.source_count / 2, 0.0, rng);
  }
  {
    Rng rng(mix_seed(spec.seed, 0x7Au));
    const auto female = static_cast<std::size_t>(std::llround(
        spec.target_female_fraction * static_cast<double>(spec.target_count)));
    data.target = make_set(spec, spec.target_count,
                           std::clamp(female, std::size_t{1},
                                      spec.target_count - 1),
                           spec.group_nuisance_strength, rng);
  }
  return data;
}

}  // namespace fairmit
