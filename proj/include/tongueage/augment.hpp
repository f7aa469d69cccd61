#ifndef TONGUEAGE_AUGMENT_HPP
#define TONGUEAGE_AUGMENT_HPP

#include <string>

#include "tongueage/rng.hpp"
#include "tongueage/tensor.hpp"

namespace tongueage {

enum class AugmentMode { none, rotation, gaussian_noise };

std::string to_string(AugmentMode mode);
AugmentMode parse_augment_mode(const std::string& text);

struct AugmentConfig {
  AugmentMode mode = AugmentMode::rotation;
  double max_degrees = 5.0;  // rotation bound
  double sigma = 0.0;        // noise standard deviation in [0,1] pixel units

  static AugmentConfig none() { return {AugmentMode::none, 0.0, 0.0}; }
  static AugmentConfig rotation(double max_degrees) { return {AugmentMode::rotation, max_degrees, 0.0}; }
  static AugmentConfig noise(double sigma) { return {AugmentMode::gaussian_noise, 0.0, sigma}; }

  /// ConfigError on negative or non-finite bounds.
  void validate() const;
  /// The active parameter: max_degrees, sigma, or 0 for none.
  double parameter() const;
  /// "none", "rotation:5", "gaussian_noise:0.1"
  std::string label() const;
  static AugmentConfig parse(const std::string& label);

  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

/// Rotates an H x W x 1 frame about its center (pixel ((W-1)/2, (H-1)/2))
/// by angle_degrees, counter-clockwise on screen (row axis pointing down).
/// Each output pixel samples the inverse-rotated source position with
/// bilinear interpolation; neighbours outside the frame count as 0.
TensorF rotate(const TensorF& frame, double angle_degrees);

/// none: copy. rotation: angle ~ Uniform(-max, max), then rotate.
/// gaussian_noise: add N(0, sigma^2) per pixel, clamp to [0, 1].
TensorF random_augment(const TensorF& frame, const AugmentConfig& config, Rng& rng);

}  // namespace tongueage

#endif  // TONGUEAGE_AUGMENT_HPP
