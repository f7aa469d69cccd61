#ifndef TONGUEAGE_MODEL_HPP
#define TONGUEAGE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tongueage/layers.hpp"
#include "tongueage/rng.hpp"
#include "tongueage/tensor.hpp"

namespace tongueage {

template <typename T>
struct Layer {
  std::string name;  // e.g. "conv2d_1", "max_pooling2d_2", "dense_1"
  LayerSpec spec;
  LayerParams<T> params;
  Shape input_shape;   // unbatched
  Shape output_shape;  // unbatched
};

/// One row of the architecture summary: a layer with a visible output in
/// the usual table (convolutions, pooling, dense). Activation, dropout and
/// flatten layers are folded away.
struct SummaryRow {
  std::string name;
  std::string type;
  Shape output_shape;
  std::size_t params = 0;
};

/// Sequential network over an H x W x C input.
///
/// Weights use uniform Glorot initialization drawn from the seed, biases
/// start at zero.
template <typename T>
class Network {
 public:
  Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed);

  const Shape& input_shape() const { return input_shape_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Layer<T>>& layers() const { return layers_; }
  std::vector<Layer<T>>& layers() { return layers_; }
  std::vector<LayerSpec> specs() const;

  std::size_t param_count() const;
  std::vector<SummaryRow> summary() const;
  /// Index of the layer called `name`; LookupError listing valid names otherwise.
  std::size_t layer_index(const std::string& name) const;
  std::vector<std::string> layer_names() const;

  /// Same architecture and seed with parameters converted to U.
  template <typename U>
  Network<U> cast() const;

  template <typename>
  friend class Network;

 private:
  Network() = default;

  Shape input_shape_;
  std::uint64_t seed_ = 0;
  std::vector<Layer<T>> layers_;
};

using Model = Network<float>;

Shape paper_input_shape();
/// conv(8,same) relu conv(8,valid) relu pool conv(8,same) relu conv(4,valid)
/// relu pool flatten dense(512) relu dropout dense(1)
std::vector<LayerSpec> paper_layer_specs(double dropout_rate = 0.5);
Model build_paper_model(std::uint64_t seed, double dropout_rate = 0.5);

/// Per-layer outputs of one forward pass. outputs[i] is layer i's output;
/// it may be empty when backward does not need it (see forward_trace).
template <typename T>
struct ForwardTrace {
  Tensor<T> input;
  std::vector<Tensor<T>> outputs;
  std::vector<PoolMask> pool_masks;       // indexed by layer, empty for non-pool layers
  std::vector<Tensor<T>> dropout_masks;   // indexed by layer, empty for non-dropout layers
  const Tensor<T>& result() const { return outputs.back(); }
};

/// Runs the network on a batch B x H x W x C. When keep_all is false,
/// pre-activation outputs that are immediately followed by ReLU are
/// released, since ReLU backward only needs its own output.
template <typename T>
ForwardTrace<T> forward_trace(const Network<T>& net, const Tensor<T>& batch, bool training,
                              Rng& rng, bool keep_all = true);

/// Predictions B x 1. Inference mode (training = false) never touches rng.
template <typename T>
Tensor<T> forward(const Network<T>& net, const Tensor<T>& batch, bool training, Rng& rng);

/// Inference-mode forward without an rng.
template <typename T>
Tensor<T> predict(const Network<T>& net, const Tensor<T>& batch);

template <typename T>
struct BackwardResult {
  double loss = 0.0;
  Tensor<T> predictions;
  std::vector<LayerParams<T>> gradients;  // aligned with net.layers()
};

/// Training-mode forward plus backward under the MSE loss. The batch is
/// processed in chunks of `chunk` samples, in order, gradients summed per
/// chunk; dropout masks are drawn in sample order so chunking does not
/// change them.
template <typename T>
BackwardResult<T> backward(const Network<T>& net, const Tensor<T>& batch,
                           const Tensor<T>& targets, Rng& rng, std::size_t chunk = 32);

/// FNV-1a over all parameter bytes; used to detect mutation.
template <typename T>
std::uint64_t parameter_digest(const Network<T>& net);

}  // namespace tongueage

#endif  // TONGUEAGE_MODEL_HPP
