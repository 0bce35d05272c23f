#pragma once

#include <cstdint>
#include <vector>

#include "fairmit/rng.hpp"

namespace fairmit {

/// Small raster image; pixels in [0,1], row-major (y, x, channel).
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> pixels;

  static ImageTensor filled(std::size_t h, std::size_t w, std::size_t c,
                            double value);

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
  std::size_t pixel_count() const { return height * width * channels; }
};

/// How geometric transforms resolve samples outside the image.
enum class FillMode {
  Reflect,   // mirror across the border, border pixel not repeated
  Constant,  // fill with 0
};

struct AugmentConfig {
  bool flip = true;
  double rotation_factor = 0.1;     // fraction of a full turn
  double translation_factor = 0.1;  // fraction of each dimension
  double contrast_factor = 0.2;
  FillMode fill_mode = FillMode::Reflect;
  std::uint64_t seed = 0;
};

/// Random draws made by one pipeline invocation, for inspection.
struct AugmentDraws {
  bool flipped = false;
  double angle = 0.0;
  double shift_y = 0.0;
  double shift_x = 0.0;
  double contrast = 1.0;
};

// Deterministic primitives.
ImageTensor flip_horizontal(const ImageTensor& img);
ImageTensor rotate_image(const ImageTensor& img, double angle, FillMode fill);
ImageTensor translate_image(const ImageTensor& img, double shift_y,
                            double shift_x, FillMode fill);
ImageTensor adjust_contrast(const ImageTensor& img, double factor);

// Randomized stages. Each stage preserves shape and keeps pixels in [0,1];
// a zero factor (or disabled flip) returns the input bit-exact.
ImageTensor random_flip(const ImageTensor& img, Rng& rng);
ImageTensor random_rotation(const ImageTensor& img, double factor, Rng& rng,
                            FillMode fill = FillMode::Reflect);
ImageTensor random_translation(const ImageTensor& img, double factor, Rng& rng,
                               FillMode fill = FillMode::Reflect);
ImageTensor random_contrast(const ImageTensor& img, double factor, Rng& rng);

/// Applies flip, rotation, translation, contrast in that order.
/// When draws is non-null the sampled parameters are recorded there.
ImageTensor augment_pipeline(const ImageTensor& img, const AugmentConfig& cfg,
                             Rng& rng, AugmentDraws* draws = nullptr);

/// Generator stream for one (sample, epoch) pair, so per-sample augmentation
/// is independent of processing order.
Rng augment_rng(std::uint64_t seed, std::uint64_t sample_id,
                std::uint64_t epoch);

}  // namespace fairmit
