#include "tongueage/synth.hpp"

#include <algorithm>
#include <cmath>

#include "tongueage/errors.hpp"
#include "tongueage/rng.hpp"

namespace tongueage {

ArcGeometry arc_geometry(double age_years) {
  return {kArcApexIntercept + kArcApexSlope * age_years, 4.0e-4 + 2.0e-5 * age_years,
          2.0 + 0.15 * age_years};
}

double age_from_apex_row(double apex_row) { return (apex_row - kArcApexIntercept) / kArcApexSlope; }

TensorF render_synthetic_frame(double age_years, Rng& rng, const SynthOptions& options) {
  const ArcGeometry g = arc_geometry(age_years);
  double apex = g.apex_row;
  double center = (kEchoReturns - 1) / 2.0;
  if (options.articulation) {
    apex += rng.uniform(-1.0, 1.0);
    center += rng.uniform(-20.0, 20.0);
  }
  const double inv2s2 = 1.0 / (2.0 * g.thickness * g.thickness);
  TensorF frame(Shape{kScanlines, kEchoReturns, 1});
  for (std::size_t y = 0; y < kScanlines; ++y)
    for (std::size_t x = 0; x < kEchoReturns; ++x) {
      const double dx = static_cast<double>(x) - center;
      const double d = static_cast<double>(y) - (apex + g.curvature * dx * dx);
      double v = 0.08 + 0.75 * std::exp(-d * d * inv2s2);
      if (options.speckle > 0.0) v *= std::max(0.0, 1.0 + options.speckle * rng.normal());
      v = std::clamp(v, 0.0, 1.0);
      frame.at(y, x, 0) = static_cast<float>(std::lround(v * 255.0)) / 255.0f;
    }
  return frame;
}

std::vector<Recording> synth_generate(std::size_t n_recordings, std::uint64_t seed, AgeRange range,
                                      const SynthOptions& options) {
  if (n_recordings < 1) throw ConfigError("synthetic generation needs at least one recording");
  if (!(range.min_years <= range.max_years)) throw ConfigError("age range min must be <= max");
  validate_age(range.min_years);
  validate_age(range.max_years);
  if (options.frames_per_recording < 1) throw ConfigError("frames per recording must be >= 1");
  const Rng root(seed);
  std::vector<Recording> out(n_recordings);
  for (std::size_t i = 0; i < n_recordings; ++i) {
    Rng rng = root.derive({i});
    Recording& rec = out[i];
    const auto lo = static_cast<std::uint64_t>(std::ceil(range.min_years * 12.0 - 1e-9));
    const auto hi = static_cast<std::uint64_t>(std::floor(range.max_years * 12.0 + 1e-9));
    if (hi < lo) throw ConfigError("age range contains no whole month");
    rec.age_years = static_cast<double>(lo + rng.below(hi - lo + 1)) / 12.0;
    char id[32];
    std::snprintf(id, sizeof id, "syn%04zu", i);
    rec.speaker_id = id;
    rec.session_id = "S1";
    rec.cohort = Cohort::typical;
    rec.frames.reserve(options.frames_per_recording);
    for (std::size_t f = 0; f < options.frames_per_recording; ++f)
      rec.frames.push_back(render_synthetic_frame(rec.age_years, rng, options));
  }
  return out;
}

}  // namespace tongueage
