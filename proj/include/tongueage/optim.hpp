#ifndef TONGUEAGE_OPTIM_HPP
#define TONGUEAGE_OPTIM_HPP

#include <span>
#include <vector>

#include "tongueage/layers.hpp"
#include "tongueage/tensor.hpp"

namespace tongueage {

template <typename T>
class Network;

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;  // d loss / d pred
};

/// loss = (1/B) sum (target - pred)^2, grad = (2/B) (pred - target).
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

/// (1/B) sum |target - pred|
template <typename T>
double mae(const Tensor<T>& pred, const Tensor<T>& target);

struct RmsPropOptions {
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-7;
};

/// v <- rho v + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(v) + eps)
template <typename T>
void rmsprop_update(std::span<T> params, std::span<const T> grads, std::span<T> accum,
                    const RmsPropOptions& opt);

/// One squared-gradient accumulator per parameter tensor, zero-initialized.
template <typename T>
class RmsPropState {
 public:
  explicit RmsPropState(const Network<T>& net, RmsPropOptions options = {});

  const RmsPropOptions& options() const { return options_; }
  const std::vector<LayerParams<T>>& accumulators() const { return accum_; }

  /// Applies one update to every parameter tensor of `net`.
  void step(Network<T>& net, const std::vector<LayerParams<T>>& grads);

 private:
  RmsPropOptions options_;
  std::vector<LayerParams<T>> accum_;
};

}  // namespace tongueage

#endif  // TONGUEAGE_OPTIM_HPP
