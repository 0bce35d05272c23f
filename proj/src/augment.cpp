#include "fairmit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "fairmit/errors.hpp"

namespace fairmit {

namespace {

constexpr double kTwoPi = 2.0 * 3.141592653589793238462643383279502884;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Folds an integer coordinate into [0, n-1], mirroring across the borders
// without repeating the border pixel (period 2n-2).
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return m >= n ? period - m : m;
}

double fetch(const ImageTensor& img, std::ptrdiff_t y, std::ptrdiff_t x,
             std::size_t c, FillMode fill) {
  const auto h = static_cast<std::ptrdiff_t>(img.height);
  const auto w = static_cast<std::ptrdiff_t>(img.width);
  if (fill == FillMode::Constant) {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
  } else {
    y = reflect_index(y, h);
    x = reflect_index(x, w);
  }
  return img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
}

double bilinear(const ImageTensor& img, double y, double x, std::size_t c,
                FillMode fill) {
  const double y0 = std::floor(y);
  const double x0 = std::floor(x);
  const double fy = y - y0;
  const double fx = x - x0;
  const auto iy = static_cast<std::ptrdiff_t>(y0);
  const auto ix = static_cast<std::ptrdiff_t>(x0);
  return (1.0 - fy) * (1.0 - fx) * fetch(img, iy, ix, c, fill) +
         (1.0 - fy) * fx * fetch(img, iy, ix + 1, c, fill) +
         fy * (1.0 - fx) * fetch(img, iy + 1, ix, c, fill) +
         fy * fx * fetch(img, iy + 1, ix + 1, c, fill);
}

void require_valid(const ImageTensor& img) {
  if (img.height == 0 || img.width == 0 || img.channels == 0 ||
      img.pixels.size() != img.pixel_count()) {
    throw input_error("invalid image tensor");
  }
}

}  // namespace

ImageTensor ImageTensor::filled(std::size_t h, std::size_t w, std::size_t c,
                                double value) {
  ImageTensor img;
  img.height = h;
  img.width = w;
  img.channels = c;
  img.pixels.assign(h * w * c, value);
  return img;
}

ImageTensor flip_horizontal(const ImageTensor& img) {
  require_valid(img);
  ImageTensor out = img;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
      }
    }
  }
  return out;
}

ImageTensor rotate_image(const ImageTensor& img, double angle, FillMode fill) {
  require_valid(img);
  ImageTensor out = img;
  const double cy = 0.5 * static_cast<double>(img.height - 1);
  const double cx = 0.5 * static_cast<double>(img.width - 1);
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double dy = static_cast<double>(y) - cy;
      const double dx = static_cast<double>(x) - cx;
      const double sy = cy - sin_a * dx + cos_a * dy;
      const double sx = cx + cos_a * dx + sin_a * dy;
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.at(y, x, c) = clamp01(bilinear(img, sy, sx, c, fill));
      }
    }
  }
  return out;
}

ImageTensor translate_image(const ImageTensor& img, double shift_y,
                            double shift_x, FillMode fill) {
  require_valid(img);
  ImageTensor out = img;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double sy = static_cast<double>(y) - shift_y;
      const double sx = static_cast<double>(x) - shift_x;
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.at(y, x, c) = clamp01(bilinear(img, sy, sx, c, fill));
      }
    }
  }
  return out;
}

ImageTensor adjust_contrast(const ImageTensor& img, double factor) {
  require_valid(img);
  ImageTensor out = img;
  const double n = static_cast<double>(img.height * img.width);
  for (std::size_t c = 0; c < img.channels; ++c) {
    double sum = 0.0;
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) {
        sum += img.at(y, x, c);
      }
    }
    const double mean = sum / n;
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) {
        out.at(y, x, c) = clamp01((img.at(y, x, c) - mean) * factor + mean);
      }
    }
  }
  return out;
}

ImageTensor random_flip(const ImageTensor& img, Rng& rng) {
  require_valid(img);
  return rng.coin() ? flip_horizontal(img) : img;
}

ImageTensor random_rotation(const ImageTensor& img, double factor, Rng& rng,
                            FillMode fill) {
  require_valid(img);
  if (factor < 0.0) {
    throw input_error("rotation factor must be >= 0");
  }
  if (factor == 0.0) return img;
  const double limit = factor * kTwoPi;
  return rotate_image(img, rng.uniform_in(-limit, limit), fill);
}

ImageTensor random_translation(const ImageTensor& img, double factor, Rng& rng,
                               FillMode fill) {
  require_valid(img);
  if (factor < 0.0 || factor >= 1.0) {
    throw input_error("translation factor must lie in [0,1)");
  }
  if (factor == 0.0) return img;
  const double ly = factor * static_cast<double>(img.height);
  const double lx = factor * static_cast<double>(img.width);
  const double dy = rng.uniform_in(-ly, ly);
  const double dx = rng.uniform_in(-lx, lx);
  return translate_image(img, dy, dx, fill);
}

ImageTensor random_contrast(const ImageTensor& img, double factor, Rng& rng) {
  require_valid(img);
  if (factor < 0.0 || factor >= 1.0) {
    throw input_error("contrast factor must lie in [0,1)");
  }
  if (factor == 0.0) return img;
  return adjust_contrast(img, rng.uniform_in(1.0 - factor, 1.0 + factor));
}

ImageTensor augment_pipeline(const ImageTensor& img, const AugmentConfig& cfg,
                             Rng& rng, AugmentDraws* draws) {
  require_valid(img);
  if (cfg.rotation_factor < 0.0 || cfg.translation_factor < 0.0 ||
      cfg.translation_factor >= 1.0 || cfg.contrast_factor < 0.0 ||
      cfg.contrast_factor >= 1.0) {
    throw config_error("augmentation factor out of range");
  }
  AugmentDraws local;
  ImageTensor out = img;
  if (cfg.flip) {
    local.flipped = rng.coin();
    if (local.flipped) out = flip_horizontal(out);
  }
  if (cfg.rotation_factor > 0.0) {
    const double limit = cfg.rotation_factor * kTwoPi;
    local.angle = rng.uniform_in(-limit, limit);
    out = rotate_image(out, local.angle, cfg.fill_mode);
  }
  if (cfg.translation_factor > 0.0) {
    const double ly = cfg.translation_factor * static_cast<double>(out.height);
    const double lx = cfg.translation_factor * static_cast<double>(out.width);
    local.shift_y = rng.uniform_in(-ly, ly);
    local.shift_x = rng.uniform_in(-lx, lx);
    out = translate_image(out, local.shift_y, local.shift_x, cfg.fill_mode);
  }
  if (cfg.contrast_factor > 0.0) {
    local.contrast =
        rng.uniform_in(1.0 - cfg.contrast_factor, 1.0 + cfg.contrast_factor);
    out = adjust_contrast(out, local.contrast);
  }
  if (draws != nullptr) {
    *draws = local;
  }
  return out;
}

Rng augment_rng(std::uint64_t seed, std::uint64_t sample_id,
                std::uint64_t epoch) {
  return Rng(mix_seed(seed, sample_id, epoch));
}

}  // namespace fairmit
