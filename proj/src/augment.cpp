#include "tongueage/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tongueage/errors.hpp"

namespace tongueage {

std::string to_string(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::none: return "none";
    case AugmentMode::rotation: return "rotation";
    case AugmentMode::gaussian_noise: return "gaussian_noise";
  }
  return "none";
}

AugmentMode parse_augment_mode(const std::string& text) {
  if (text == "none") return AugmentMode::none;
  if (text == "rotation") return AugmentMode::rotation;
  if (text == "gaussian_noise" || text == "noise") return AugmentMode::gaussian_noise;
  throw ConfigError("unknown augmentation '" + text + "' (expected none, rotation, gaussian_noise)");
}

void AugmentConfig::validate() const {
  if (!(std::isfinite(max_degrees) && max_degrees >= 0.0))
    throw ConfigError("max_degrees must be finite and >= 0");
  if (!(std::isfinite(sigma) && sigma >= 0.0)) throw ConfigError("sigma must be finite and >= 0");
}

double AugmentConfig::parameter() const {
  switch (mode) {
    case AugmentMode::rotation: return max_degrees;
    case AugmentMode::gaussian_noise: return sigma;
    default: return 0.0;
  }
}

std::string AugmentConfig::label() const {
  if (mode == AugmentMode::none) return "none";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s:%g", to_string(mode).c_str(), parameter());
  return buf;
}

AugmentConfig AugmentConfig::parse(const std::string& label) {
  const auto colon = label.find(':');
  const AugmentMode mode = parse_augment_mode(label.substr(0, colon));
  if (mode == AugmentMode::none) {
    if (colon != std::string::npos) throw ConfigError("augmentation 'none' takes no parameter");
    return none();
  }
  if (colon == std::string::npos)
    throw ConfigError("augmentation '" + label + "' needs a parameter, e.g. rotation:5");
  double value = 0.0;
  try {
    std::size_t pos = 0;
    value = std::stod(label.substr(colon + 1), &pos);
    if (pos != label.size() - colon - 1) throw std::invalid_argument(label);
  } catch (const std::exception&) {
    throw ConfigError("bad augmentation parameter in '" + label + "'");
  }
  AugmentConfig c = mode == AugmentMode::rotation ? rotation(value) : noise(value);
  c.validate();
  return c;
}

TensorF rotate(const TensorF& frame, double angle_degrees) {
  const Shape& s = frame.shape();
  if (s.rank() != 3 || s[2] != 1) throw ShapeError("rotate expects H x W x 1, got " + s.str());
  if (!std::isfinite(angle_degrees)) throw ConfigError("rotation angle must be finite");
  if (angle_degrees == 0.0) return frame;

  const long h = static_cast<long>(s[0]), w = static_cast<long>(s[1]);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  const double rad = angle_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), sn = std::sin(rad);
  auto pixel = [&](long y, long x) -> double {
    if (y < 0 || x < 0 || y >= h || x >= w) return 0.0;
    return frame[static_cast<std::size_t>(y * w + x)];
  };

  TensorF out(s);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      // Screen counter-clockwise rotation with y down: inverse map of the output pixel.
      const double dx = x - cx, dy = y - cy;
      const double sx = cx + c * dx - sn * dy;
      const double sy = cy + sn * dx + c * dy;
      const long x0 = static_cast<long>(std::floor(sx));
      const long y0 = static_cast<long>(std::floor(sy));
      const double fx = sx - x0, fy = sy - y0;
      const double v = (1 - fy) * ((1 - fx) * pixel(y0, x0) + fx * pixel(y0, x0 + 1)) +
                       fy * ((1 - fx) * pixel(y0 + 1, x0) + fx * pixel(y0 + 1, x0 + 1));
      out[static_cast<std::size_t>(y * w + x)] = static_cast<float>(v);
    }
  return out;
}

TensorF random_augment(const TensorF& frame, const AugmentConfig& config, Rng& rng) {
  config.validate();
  switch (config.mode) {
    case AugmentMode::none: return frame;
    case AugmentMode::rotation: {
      const double angle = rng.uniform(-config.max_degrees, config.max_degrees);
      return rotate(frame, angle);
    }
    case AugmentMode::gaussian_noise: {
      if (config.sigma == 0.0) return frame;
      TensorF out = frame;
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(std::clamp(out[i] + config.sigma * rng.normal(), 0.0, 1.0));
      return out;
    }
  }
  return frame;
}

}  // namespace tongueage
