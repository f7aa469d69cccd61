#ifndef TONGUEAGE_VISUALIZE_HPP
#define TONGUEAGE_VISUALIZE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tongueage/model.hpp"
#include "tongueage/trainer.hpp"

namespace tongueage {

struct ActivationEntry {
  std::string layer;
  TensorF activation;  // unbatched, same shape as the layer's forward output
  float min = 0.0f;
  float max = 0.0f;
};

struct ActivationSet {
  std::vector<ActivationEntry> entries;
};

/// Inference-mode forward of one 63 x 412 x 1 frame, capturing the named
/// layers in network order. An empty selector picks every layer before the
/// flatten layer.
ActivationSet extract_activations(const Model& model, const TensorF& frame,
                                  const std::vector<std::string>& layers);

struct GrayImage {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;
};

struct RgbImage {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // r g b interleaved, row-major
  std::array<std::uint8_t, 3> at(std::size_t y, std::size_t x) const;
  void set(std::size_t y, std::size_t x, std::array<std::uint8_t, 3> rgb);
};

using Rgb = std::array<std::uint8_t, 3>;

/// 256-entry heat table. Entry i, t = i / 255, linear between anchors
///   t = 0    (0, 0, 0)       dark
///   t = 0.5  (255, 255, 0)   yellow
///   t = 1    (139, 0, 0)     dark red
/// each channel rounded to the nearest integer.
const std::array<Rgb, 256>& heat_colormap();

/// Per-channel min-max normalization to 0..255; a constant channel maps to 0.
std::vector<std::uint8_t> normalize_channel(const TensorF& channel);

/// Channel `c` of an H x W x C activation as an H x W tensor.
TensorF activation_channel(const TensorF& activation, std::size_t c);

/// channel is H x W or H x W x 1.
RgbImage render_heatmap(const TensorF& channel);
GrayImage render_grayscale(const TensorF& channel);

std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
void write_pgm(const std::string& path, const GrayImage& img);
void write_ppm(const std::string& path, const RgbImage& img);

/// Writes <layer>_<channel>.pgm and .ppm for every channel of every entry;
/// returns the file names written.
std::vector<std::string> export_activations(const ActivationSet& set, const std::string& dir);

/// Plot geometry of the training-curve image.
struct CurveLayout {
  std::size_t width = 640, height = 400;
  std::size_t left = 50, right = 20, top = 20, bottom = 40;
  double vmin = 0.0, vmax = 1.0;
  std::size_t epochs = 1;

  std::size_t row_of(double value) const;
  std::size_t col_of(std::size_t epoch_index) const;  // 0-based index into history
  std::size_t plot_top() const { return top; }
  std::size_t plot_bottom() const { return height - 1 - bottom; }
};

inline constexpr Rgb kTrainColor{31, 119, 180};
inline constexpr Rgb kValColor{214, 39, 40};

/// MSE-vs-epoch plot: train series blue, validation red, value range from
/// the min / max over both series.
RgbImage render_curves(const std::vector<EpochMetrics>& history, CurveLayout* layout = nullptr);

/// Writes <dir>/curves.ppm and <dir>/metrics.csv.
void export_curves(const std::vector<EpochMetrics>& history, const std::string& dir);

}  // namespace tongueage

#endif  // TONGUEAGE_VISUALIZE_HPP
