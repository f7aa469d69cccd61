#include "tongueage/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "tongueage/dataio.hpp"
#include "tongueage/errors.hpp"

namespace tongueage {

namespace fs = std::filesystem;

ActivationSet extract_activations(const Model& model, const TensorF& frame,
                                  const std::vector<std::string>& layers) {
  if (frame.shape() != model.input_shape())
    throw ShapeError("frame shape " + frame.shape().str() + " != model input " +
                     model.input_shape().str());
  std::vector<std::size_t> picks;
  if (layers.empty()) {
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
      if (model.layers()[i].spec.kind == LayerKind::flatten) break;
      picks.push_back(i);
    }
  } else {
    for (const auto& name : layers) picks.push_back(model.layer_index(name));
    std::sort(picks.begin(), picks.end());
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  }

  const TensorF batch = frame.reshaped(model.input_shape().batched(1));
  Rng unused(0);
  const ForwardTrace<float> trace = forward_trace(model, batch, false, unused, true);
  ActivationSet set;
  for (auto i : picks) {
    const auto& layer = model.layers()[i];
    ActivationEntry e;
    e.layer = layer.name;
    e.activation = trace.outputs[i].reshaped(layer.output_shape);
    const auto [lo, hi] = std::minmax_element(e.activation.values().begin(), e.activation.values().end());
    e.min = *lo;
    e.max = *hi;
    set.entries.push_back(std::move(e));
  }
  return set;
}

std::array<std::uint8_t, 3> RgbImage::at(std::size_t y, std::size_t x) const {
  const std::size_t i = 3 * (y * width + x);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(std::size_t y, std::size_t x, std::array<std::uint8_t, 3> rgb) {
  const std::size_t i = 3 * (y * width + x);
  pixels[i] = rgb[0];
  pixels[i + 1] = rgb[1];
  pixels[i + 2] = rgb[2];
}

const std::array<Rgb, 256>& heat_colormap() {
  static const std::array<Rgb, 256> table = [] {
    constexpr std::array<double, 3> dark{0, 0, 0}, yellow{255, 255, 0}, dark_red{139, 0, 0};
    std::array<Rgb, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double s = i / 255.0;
      const auto& a = s <= 0.5 ? dark : yellow;
      const auto& b = s <= 0.5 ? yellow : dark_red;
      const double u = s <= 0.5 ? s / 0.5 : (s - 0.5) / 0.5;
      for (int c = 0; c < 3; ++c)
        t[i][c] = static_cast<std::uint8_t>(std::lround(a[c] + (b[c] - a[c]) * u));
    }
    return t;
  }();
  return table;
}

namespace {

void check_channel(const TensorF& channel, std::size_t& h, std::size_t& w) {
  const Shape& s = channel.shape();
  if (s.rank() == 2 || (s.rank() == 3 && s[2] == 1)) {
    h = s[0];
    w = s[1];
    return;
  }
  throw ShapeError("expected an H x W activation channel, got " + s.str());
}

std::vector<std::uint8_t> header(const char* magic, std::size_t w, std::size_t h) {
  const std::string text = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  return std::vector<std::uint8_t>(text.begin(), text.end());
}

}  // namespace

std::vector<std::uint8_t> normalize_channel(const TensorF& channel) {
  const auto [lo_it, hi_it] = std::minmax_element(channel.values().begin(), channel.values().end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<std::uint8_t> out(channel.size(), 0);
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < channel.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::lround((channel[i] - lo) / (hi - lo) * 255.0));
  return out;
}

TensorF activation_channel(const TensorF& activation, std::size_t c) {
  const Shape& s = activation.shape();
  if (s.rank() != 3 || c >= s[2])
    throw ShapeError("channel " + std::to_string(c) + " out of range for " + s.str());
  TensorF out(Shape{s[0], s[1]});
  for (std::size_t i = 0; i < s[0] * s[1]; ++i) out[i] = activation[i * s[2] + c];
  return out;
}

RgbImage render_heatmap(const TensorF& channel) {
  std::size_t h = 0, w = 0;
  check_channel(channel, h, w);
  const auto levels = normalize_channel(channel);
  const auto& cmap = heat_colormap();
  RgbImage img{w, h, std::vector<std::uint8_t>(3 * w * h)};
  for (std::size_t i = 0; i < levels.size(); ++i)
    for (int c = 0; c < 3; ++c) img.pixels[3 * i + c] = cmap[levels[i]][c];
  return img;
}

GrayImage render_grayscale(const TensorF& channel) {
  std::size_t h = 0, w = 0;
  check_channel(channel, h, w);
  return GrayImage{w, h, normalize_channel(channel)};
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  auto out = header("P5", img.width, img.height);
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  auto out = header("P6", img.width, img.height);
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void write_pgm(const std::string& path, const GrayImage& img) { write_file_bytes(path, encode_pgm(img)); }

void write_ppm(const std::string& path, const RgbImage& img) { write_file_bytes(path, encode_ppm(img)); }

std::vector<std::string> export_activations(const ActivationSet& set, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& e : set.entries) {
    const TensorF& a = e.activation;
    if (a.shape().rank() != 3) continue;  // only spatial maps are exported as images
    for (std::size_t c = 0; c < a.shape()[2]; ++c) {
      const TensorF ch = activation_channel(a, c);
      const std::string stem = e.layer + "_" + std::to_string(c);
      write_pgm((fs::path(dir) / (stem + ".pgm")).string(), render_grayscale(ch));
      write_ppm((fs::path(dir) / (stem + ".ppm")).string(), render_heatmap(ch));
      names.push_back(stem + ".pgm");
      names.push_back(stem + ".ppm");
    }
  }
  return names;
}

std::size_t CurveLayout::row_of(double value) const {
  const double span = plot_bottom() - plot_top();
  if (!(vmax > vmin)) return plot_top() + static_cast<std::size_t>(span / 2);
  const double t = (value - vmin) / (vmax - vmin);
  return plot_bottom() - static_cast<std::size_t>(std::lround(std::clamp(t, 0.0, 1.0) * span));
}

std::size_t CurveLayout::col_of(std::size_t epoch_index) const {
  const double span = static_cast<double>(width - 1 - right - left);
  if (epochs <= 1) return left + static_cast<std::size_t>(span / 2);
  return left + static_cast<std::size_t>(std::lround(span * epoch_index / (epochs - 1.0)));
}

namespace {

void draw_line(RgbImage& img, long x0, long y0, long x1, long y1, Rgb color) {
  const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    img.set(static_cast<std::size_t>(y0), static_cast<std::size_t>(x0), color);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_series(RgbImage& img, const CurveLayout& l, const std::vector<double>& v, Rgb color) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const long x = static_cast<long>(l.col_of(i)), y = static_cast<long>(l.row_of(v[i]));
    if (i > 0)
      draw_line(img, static_cast<long>(l.col_of(i - 1)), static_cast<long>(l.row_of(v[i - 1])), x, y, color);
    // 3x3 marker, clipped to the plot area
    for (long yy = y - 1; yy <= y + 1; ++yy)
      for (long xx = x - 1; xx <= x + 1; ++xx)
        if (yy >= static_cast<long>(l.plot_top()) && yy <= static_cast<long>(l.plot_bottom()) &&
            xx >= static_cast<long>(l.left) && xx < static_cast<long>(l.width - l.right))
          img.set(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), color);
  }
}

}  // namespace

RgbImage render_curves(const std::vector<EpochMetrics>& history, CurveLayout* layout_out) {
  if (history.empty()) throw ConfigError("cannot plot an empty metrics history");
  CurveLayout l;
  l.epochs = history.size();
  std::vector<double> train, val;
  l.vmin = std::numeric_limits<double>::infinity();
  l.vmax = -l.vmin;
  for (const auto& m : history) {
    train.push_back(m.train_mse);
    val.push_back(m.val_mse);
    l.vmin = std::min({l.vmin, m.train_mse, m.val_mse});
    l.vmax = std::max({l.vmax, m.train_mse, m.val_mse});
  }
  RgbImage img{l.width, l.height, std::vector<std::uint8_t>(3 * l.width * l.height, 255)};
  const Rgb axis{0, 0, 0};
  draw_line(img, static_cast<long>(l.left) - 1, static_cast<long>(l.plot_top()), static_cast<long>(l.left) - 1,
            static_cast<long>(l.plot_bottom()) + 1, axis);
  draw_line(img, static_cast<long>(l.left) - 1, static_cast<long>(l.plot_bottom()) + 1,
            static_cast<long>(l.width - l.right), static_cast<long>(l.plot_bottom()) + 1, axis);
  draw_series(img, l, train, kTrainColor);
  draw_series(img, l, val, kValColor);
  if (layout_out) *layout_out = l;
  return img;
}

void export_curves(const std::vector<EpochMetrics>& history, const std::string& dir) {
  const RgbImage img = render_curves(history);
  fs::create_directories(dir);
  write_ppm((fs::path(dir) / "curves.ppm").string(), img);
  write_metrics_csv((fs::path(dir) / "metrics.csv").string(), history);
}

}  // namespace tongueage
