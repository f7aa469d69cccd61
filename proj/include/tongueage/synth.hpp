#ifndef TONGUEAGE_SYNTH_HPP
#define TONGUEAGE_SYNTH_HPP

// Synthetic stand-in for raw ultrasound recordings.
//
// Each frame is a 63 x 412 grid (rows = scanlines, columns = echo returns)
// holding one bright arc, the "tongue surface". For column x the arc sits at
//
//   row(x) = apex_row + curvature * (x - center)^2
//
// with a Gaussian cross-section of standard deviation `thickness` rows.
// The geometry is a fixed affine function of age in years:
//
//   apex_row  = 8.0    + 2.5    * age       (rows)
//   curvature = 4.0e-4 + 2.0e-5 * age       (rows / column^2)
//   thickness = 2.0    + 0.15   * age       (rows)
//
// so age = (apex_row - 8) / 2.5. Per frame, the apex is jittered by
// Uniform(-1, 1) rows and the center column by Uniform(-20, 20) around 205.5
// (articulation). Intensity is 0.08 + 0.75 * exp(-d^2 / (2 thickness^2)),
// multiplied by speckle (1 + speckle * N(0,1), floored at 0), clamped to
// [0, 1] and quantized to 8 bits.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tongueage/dataio.hpp"
#include "tongueage/rng.hpp"

namespace tongueage {

struct ArcGeometry {
  double apex_row = 0.0;
  double curvature = 0.0;
  double thickness = 0.0;
};

inline constexpr double kArcApexIntercept = 8.0;
inline constexpr double kArcApexSlope = 2.5;

ArcGeometry arc_geometry(double age_years);
double age_from_apex_row(double apex_row);

struct AgeRange {
  double min_years = 5.0;
  double max_years = 13.0;
};

struct SynthOptions {
  std::size_t frames_per_recording = 4;
  double speckle = 0.25;       // multiplicative noise standard deviation
  bool articulation = true;    // per-frame apex / center jitter
};

/// Renders one frame for `age_years`; draws jitter and speckle from rng.
TensorF render_synthetic_frame(double age_years, Rng& rng, const SynthOptions& options = {});

/// Ages are drawn uniformly from the whole months inside `range`, so they
/// survive the "<y>y <m>m" manifest label exactly. Recording i uses an
/// rng stream derived from (seed, i).
std::vector<Recording> synth_generate(std::size_t n_recordings, std::uint64_t seed,
                                      AgeRange range = {}, const SynthOptions& options = {});

}  // namespace tongueage

#endif  // TONGUEAGE_SYNTH_HPP
