#include "tongueage/layers.hpp"

#include <sstream>

#include "tongueage/errors.hpp"
#include "tongueage/kernels.hpp"

namespace tongueage {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
  }
  return "unknown";
}

std::string to_string(Padding padding) { return padding == Padding::same ? "same" : "valid"; }

LayerSpec LayerSpec::conv2d(std::size_t filters, Padding padding) {
  if (filters < 1) throw ConfigError("conv2d needs at least one filter");
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.out_channels = filters;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::maxpool2d() {
  LayerSpec s;
  s.kind = LayerKind::maxpool2d;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t units) {
  if (units < 1) throw ConfigError("dense needs at least one unit");
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.out_units = units;
  return s;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

LayerSpec LayerSpec::dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.rate = rate;
  return s;
}

std::string LayerSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case LayerKind::conv2d:
      os << '(' << out_channels << ", " << kernel_h << 'x' << kernel_w << ", " << to_string(padding)
         << ')';
      break;
    case LayerKind::dense: os << '(' << out_units << ')'; break;
    case LayerKind::dropout: os << '(' << rate << ')'; break;
    default: break;
  }
  return os.str();
}

namespace {

struct ImageDims {
  std::size_t batch, height, width, channels;
  bool batched;
};

ImageDims image_dims(const Shape& s, const char* op) {
  if (s.rank() == 3) return {1, s[0], s[1], s[2], false};
  if (s.rank() == 4) return {s[0], s[1], s[2], s[3], true};
  throw ShapeError(std::string(op) + " expects H x W x C or B x H x W x C input, got " + s.str());
}

Shape image_shape(const ImageDims& d, std::size_t h, std::size_t w, std::size_t c) {
  return d.batched ? Shape{d.batch, h, w, c} : Shape{h, w, c};
}

std::size_t conv_pad(std::size_t kernel, Padding padding) {
  return padding == Padding::same ? (kernel - 1) / 2 : 0;
}

template <typename T>
kernels::ConvDims conv_dims(const Tensor<T>& input, const LayerParams<T>& params,
                            Padding padding) {
  const ImageDims in = image_dims(input.shape(), "conv2d");
  const Shape& ws = params.weights.shape();
  if (ws.rank() != 4) throw ShapeError("conv2d weights must be kh x kw x C x F, got " + ws.str());
  if (ws[2] != in.channels)
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(in.channels) +
                     " channels, weights expect " + std::to_string(ws[2]));
  if (params.bias.shape() != Shape{ws[3]})
    throw ShapeError("conv2d bias must have " + std::to_string(ws[3]) + " entries");
  if (ws[0] != ws[1] || ws[0] % 2 == 0)
    throw ShapeError("conv2d kernels must be square with odd extent, got " + ws.str());
  kernels::ConvDims d;
  d.batch = in.batch;
  d.height = in.height;
  d.width = in.width;
  d.in_channels = in.channels;
  d.kernel_h = ws[0];
  d.kernel_w = ws[1];
  d.out_channels = ws[3];
  d.pad = conv_pad(ws[0], padding);
  if (d.height + 2 * d.pad < d.kernel_h || d.width + 2 * d.pad < d.kernel_w)
    throw ShapeError("conv2d output would be empty for input " + input.shape().str());
  return d;
}

kernels::DenseDims dense_dims(const Shape& input, const Shape& weights, const Shape& bias) {
  kernels::DenseDims d;
  if (input.rank() == 1) {
    d.batch = 1;
    d.in_units = input[0];
  } else if (input.rank() == 2) {
    d.batch = input[0];
    d.in_units = input[1];
  } else {
    throw ShapeError("dense expects N or B x N input, got " + input.str());
  }
  if (weights.rank() != 2) throw ShapeError("dense weights must be N x M, got " + weights.str());
  if (weights[0] != d.in_units)
    throw ShapeError("dense length mismatch: input has " + std::to_string(d.in_units) +
                     " units, weights expect " + std::to_string(weights[0]));
  if (bias != Shape{weights[1]})
    throw ShapeError("dense bias must have " + std::to_string(weights[1]) + " entries");
  d.out_units = weights[1];
  return d;
}

}  // namespace

Shape layer_output_shape(const LayerSpec& spec, const Shape& input) {
  switch (spec.kind) {
    case LayerKind::conv2d: {
      if (input.rank() != 3) throw ShapeError("conv2d expects H x W x C, got " + input.str());
      const std::size_t p = conv_pad(spec.kernel_h, spec.padding);
      if (input[0] + 2 * p < spec.kernel_h || input[1] + 2 * p < spec.kernel_w)
        throw ShapeError("conv2d output would be empty for input " + input.str());
      return Shape{input[0] + 2 * p - spec.kernel_h + 1, input[1] + 2 * p - spec.kernel_w + 1,
                   spec.out_channels};
    }
    case LayerKind::maxpool2d:
      if (input.rank() != 3) throw ShapeError("maxpool2d expects H x W x C, got " + input.str());
      if (input[0] < 2 || input[1] < 2)
        throw ShapeError("maxpool2d needs H, W >= 2, got " + input.str());
      return Shape{input[0] / 2, input[1] / 2, input[2]};
    case LayerKind::flatten: return Shape{input.elements()};
    case LayerKind::dense:
      if (input.rank() != 1) throw ShapeError("dense expects a flat input, got " + input.str());
      return Shape{spec.out_units};
    case LayerKind::relu:
    case LayerKind::dropout: return input;
  }
  throw ShapeError("unknown layer kind");
}

std::size_t layer_param_count(const LayerSpec& spec, const Shape& input) {
  switch (spec.kind) {
    case LayerKind::conv2d:
      return spec.kernel_h * spec.kernel_w * input[2] * spec.out_channels + spec.out_channels;
    case LayerKind::dense: return input.elements() * spec.out_units + spec.out_units;
    default: return 0;
  }
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const LayerParams<T>& params, Padding padding) {
  const kernels::ConvDims d = conv_dims(input, params, padding);
  const ImageDims in = image_dims(input.shape(), "conv2d");
  Tensor<T> out(image_shape(in, d.out_height(), d.out_width(), d.out_channels));
  kernels::conv2d_forward<T>(d, input.data(), params.weights.data(), params.bias.data(),
                             out.data());
  return out;
}

template <typename T>
LayerGradients<T> conv2d_backward(const Tensor<T>& input, const LayerParams<T>& params,
                                  const Tensor<T>& grad_out, Padding padding) {
  const kernels::ConvDims d = conv_dims(input, params, padding);
  const ImageDims in = image_dims(input.shape(), "conv2d");
  const Shape expected = image_shape(in, d.out_height(), d.out_width(), d.out_channels);
  if (grad_out.shape() != expected)
    throw ShapeError("conv2d grad_out shape " + grad_out.shape().str() + " != output shape " +
                     expected.str());
  LayerGradients<T> g{Tensor<T>(input.shape()), Tensor<T>(params.weights.shape()),
                      Tensor<T>(params.bias.shape())};
  kernels::conv2d_backward<T>(d, input.data(), params.weights.data(), grad_out.data(),
                              g.input.data(), g.weights.data(), g.bias.data());
  return g;
}

template <typename T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& input) {
  const ImageDims in = image_dims(input.shape(), "maxpool2d");
  if (in.height < 2 || in.width < 2)
    throw ShapeError("maxpool2d needs H, W >= 2, got " + input.shape().str());
  kernels::PoolDims d{in.batch, in.height, in.width, in.channels};
  PoolResult<T> r;
  r.output = Tensor<T>(image_shape(in, d.out_height(), d.out_width(), d.channels));
  r.mask.input_shape = input.shape();
  r.mask.output_shape = r.output.shape();
  r.mask.argmax.resize(r.output.size());
  kernels::maxpool2d_forward<T>(d, input.data(), r.output.data(), r.mask.argmax);
  return r;
}

template <typename T>
Tensor<T> maxpool2d_backward(const PoolMask& mask, const Tensor<T>& grad_out) {
  if (grad_out.shape() != mask.output_shape || mask.argmax.size() != grad_out.size())
    throw ShapeError("maxpool2d grad_out shape " + grad_out.shape().str() +
                     " does not match mask output " + mask.output_shape.str());
  const ImageDims in = image_dims(mask.input_shape, "maxpool2d");
  kernels::PoolDims d{in.batch, in.height, in.width, in.channels};
  Tensor<T> grad_in(mask.input_shape);
  kernels::maxpool2d_backward<T>(d, mask.argmax, grad_out.data(), grad_in.data());
  return grad_in;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const LayerParams<T>& params) {
  const kernels::DenseDims d =
      dense_dims(input.shape(), params.weights.shape(), params.bias.shape());
  Tensor<T> out(input.shape().rank() == 1 ? Shape{d.out_units} : Shape{d.batch, d.out_units});
  kernels::dense_forward<T>(d, input.data(), params.weights.data(), params.bias.data(),
                            out.data());
  return out;
}

template <typename T>
LayerGradients<T> dense_backward(const Tensor<T>& input, const LayerParams<T>& params,
                                 const Tensor<T>& grad_out) {
  const kernels::DenseDims d =
      dense_dims(input.shape(), params.weights.shape(), params.bias.shape());
  const Shape expected =
      input.shape().rank() == 1 ? Shape{d.out_units} : Shape{d.batch, d.out_units};
  if (grad_out.shape() != expected)
    throw ShapeError("dense grad_out shape " + grad_out.shape().str() + " != output shape " +
                     expected.str());
  LayerGradients<T> g{Tensor<T>(input.shape()), Tensor<T>(params.weights.shape()),
                      Tensor<T>(params.bias.shape())};
  kernels::dense_backward<T>(d, input.data(), params.weights.data(), grad_out.data(),
                             g.input.data(), g.weights.data(), g.bias.data());
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  const long n = static_cast<long>(input.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  if (input.shape() != grad_out.shape())
    throw ShapeError("relu grad shape " + grad_out.shape().str() + " != input shape " +
                     input.shape().str());
  Tensor<T> g(input.shape());
  const long n = static_cast<long>(input.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) g[i] = input[i] > T(0) ? grad_out[i] : T(0);
  return g;
}

template <typename T>
DropoutResult<T> dropout(const Tensor<T>& input, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  DropoutResult<T> r{input, Tensor<T>(input.shape(), T(1))};
  if (!training || rate == 0.0) return r;
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < input.size(); ++i) {
    const bool keep = rng.uniform() >= rate;
    r.mask[i] = keep ? scale : T(0);
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& grad_out) {
  if (mask.shape() != grad_out.shape())
    throw ShapeError("dropout grad shape " + grad_out.shape().str() + " != mask shape " +
                     mask.shape().str());
  Tensor<T> g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * mask[i];
  return g;
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& input) {
  const Shape& s = input.shape();
  if (s.rank() == 4) return input.reshaped(Shape{s[0], s[1] * s[2] * s[3]});
  return input.reshaped(Shape{s.elements()});
}

template <typename T>
Tensor<T> unflatten(const Tensor<T>& flat, const Shape& shape) {
  return flat.reshaped(shape);
}

#define TONGUEAGE_LAYERS(T)                                                                   \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const LayerParams<T>&, Padding);        \
  template LayerGradients<T> conv2d_backward(const Tensor<T>&, const LayerParams<T>&,         \
                                             const Tensor<T>&, Padding);                      \
  template PoolResult<T> maxpool2d_forward(const Tensor<T>&);                                 \
  template Tensor<T> maxpool2d_backward(const PoolMask&, const Tensor<T>&);                   \
  template Tensor<T> dense_forward(const Tensor<T>&, const LayerParams<T>&);                  \
  template LayerGradients<T> dense_backward(const Tensor<T>&, const LayerParams<T>&,          \
                                            const Tensor<T>&);                                \
  template Tensor<T> relu(const Tensor<T>&);                                                  \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                       \
  template DropoutResult<T> dropout(const Tensor<T>&, double, Rng&, bool);                    \
  template Tensor<T> dropout_backward(const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> flatten(const Tensor<T>&);                                               \
  template Tensor<T> unflatten(const Tensor<T>&, const Shape&);

TONGUEAGE_LAYERS(float)
TONGUEAGE_LAYERS(double)

}  // namespace tongueage
