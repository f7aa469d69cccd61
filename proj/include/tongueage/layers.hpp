#ifndef TONGUEAGE_LAYERS_HPP
#define TONGUEAGE_LAYERS_HPP

// Forward and backward passes of the six layer types the age network uses.
//
// Image tensors are H x W x C, or B x H x W x C when batched; the output keeps
// the input's rank. Dense inputs are N or B x N. Convolution is
// cross-correlation with stride 1.

#include <cstddef>
#include <string>
#include <vector>

#include "tongueage/rng.hpp"
#include "tongueage/tensor.hpp"

namespace tongueage {

enum class LayerKind { conv2d, maxpool2d, flatten, dense, relu, dropout };

/// same: symmetric zero pad of (k-1)/2 on each border; valid: no padding.
enum class Padding { same, valid };

std::string to_string(LayerKind kind);
std::string to_string(Padding padding);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  // conv2d
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t out_channels = 0;
  Padding padding = Padding::same;
  // dense
  std::size_t out_units = 0;
  // dropout
  double rate = 0.0;

  static LayerSpec conv2d(std::size_t filters, Padding padding);
  static LayerSpec maxpool2d();
  static LayerSpec flatten();
  static LayerSpec dense(std::size_t units);
  static LayerSpec relu();
  static LayerSpec dropout(double rate);

  bool has_params() const { return kind == LayerKind::conv2d || kind == LayerKind::dense; }
  /// One-line human-readable description, e.g. "conv2d(8, same)".
  std::string describe() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Conv2D: weights kh x kw x C x F, bias F. Dense: weights N x M, bias M.
/// Both tensors are empty for parameterless layers.
template <typename T>
struct LayerParams {
  Tensor<T> weights;
  Tensor<T> bias;

  bool empty() const { return weights.empty() && bias.empty(); }
  std::size_t count() const { return weights.size() + bias.size(); }
};

template <typename T>
struct LayerGradients {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

/// Winning input index per pooling window, plus the geometry it came from.
struct PoolMask {
  Shape input_shape;
  Shape output_shape;
  std::vector<std::size_t> argmax;
};

template <typename T>
struct PoolResult {
  Tensor<T> output;
  PoolMask mask;
};

/// mask holds 0 for dropped elements and 1/(1-rate) for survivors.
template <typename T>
struct DropoutResult {
  Tensor<T> output;
  Tensor<T> mask;
};

/// Output shape of `spec` applied to an unbatched input shape.
Shape layer_output_shape(const LayerSpec& spec, const Shape& input);
/// Trainable parameter count of `spec` given its unbatched input shape.
std::size_t layer_param_count(const LayerSpec& spec, const Shape& input);

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const LayerParams<T>& params, Padding padding);

template <typename T>
LayerGradients<T> conv2d_backward(const Tensor<T>& input, const LayerParams<T>& params,
                                  const Tensor<T>& grad_out, Padding padding);

template <typename T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2d_backward(const PoolMask& mask, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const LayerParams<T>& params);

template <typename T>
LayerGradients<T> dense_backward(const Tensor<T>& input, const LayerParams<T>& params,
                                 const Tensor<T>& grad_out);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Passes grad where input > 0. Since relu(x) > 0 exactly when x > 0, the
/// forward output may be supplied in place of the input.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out);

/// Inverted dropout. In inference mode the output is the input and the mask
/// is all ones; rng is not advanced.
template <typename T>
DropoutResult<T> dropout(const Tensor<T>& input, double rate, Rng& rng, bool training);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& grad_out);

/// H x W x C -> H*W*C; B x H x W x C -> B x H*W*C.
template <typename T>
Tensor<T> flatten(const Tensor<T>& input);

/// Restores `shape` from a flattened tensor.
template <typename T>
Tensor<T> unflatten(const Tensor<T>& flat, const Shape& shape);

}  // namespace tongueage

#endif  // TONGUEAGE_LAYERS_HPP
