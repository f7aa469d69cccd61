#include "tongueage/optim.hpp"

#include <cmath>

#include "tongueage/errors.hpp"
#include "tongueage/model.hpp"

namespace tongueage {

namespace {

template <typename T>
void check_pair(const Tensor<T>& pred, const Tensor<T>& target, const char* what) {
  if (pred.shape() != target.shape())
    throw ShapeError(std::string(what) + ": prediction shape " + pred.shape().str() +
                     " != target shape " + target.shape().str());
  if (pred.empty()) throw ShapeError(std::string(what) + ": empty batch");
}

}  // namespace

template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  check_pair(pred, target, "mse_loss");
  const std::size_t n = pred.size();
  LossResult<T> r{0.0, Tensor<T>(pred.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = static_cast<double>(target[i]) - static_cast<double>(pred[i]);
    sum += diff * diff;
    r.grad[i] = static_cast<T>(2.0 * (static_cast<double>(pred[i]) - target[i]) /
                               static_cast<double>(n));
  }
  r.loss = sum / static_cast<double>(n);
  return r;
}

template <typename T>
double mae(const Tensor<T>& pred, const Tensor<T>& target) {
  check_pair(pred, target, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    sum += std::abs(static_cast<double>(target[i]) - static_cast<double>(pred[i]));
  return sum / static_cast<double>(pred.size());
}

template <typename T>
void rmsprop_update(std::span<T> params, std::span<const T> grads, std::span<T> accum,
                    const RmsPropOptions& opt) {
  if (params.size() != grads.size() || params.size() != accum.size())
    throw ShapeError("rmsprop: parameter, gradient and accumulator sizes differ (" +
                     std::to_string(params.size()) + ", " + std::to_string(grads.size()) + ", " +
                     std::to_string(accum.size()) + ")");
  const T lr = static_cast<T>(opt.learning_rate);
  const T rho = static_cast<T>(opt.rho);
  const T one_minus_rho = static_cast<T>(1.0 - opt.rho);
  const T eps = static_cast<T>(opt.epsilon);
  const long n = static_cast<long>(params.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const T g = grads[i];
    accum[i] = rho * accum[i] + one_minus_rho * g * g;
    params[i] -= lr * g / (std::sqrt(accum[i]) + eps);
  }
}

template <typename T>
RmsPropState<T>::RmsPropState(const Network<T>& net, RmsPropOptions options)
    : options_(options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("rmsprop epsilon must be > 0");
  if (!(options.rho >= 0.0 && options.rho < 1.0)) throw ConfigError("rmsprop rho must lie in [0, 1)");
  if (!(options.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  for (const auto& layer : net.layers()) {
    LayerParams<T> acc;
    if (!layer.params.empty()) {
      acc.weights = Tensor<T>(layer.params.weights.shape());
      acc.bias = Tensor<T>(layer.params.bias.shape());
    }
    accum_.push_back(std::move(acc));
  }
}

template <typename T>
void RmsPropState<T>::step(Network<T>& net, const std::vector<LayerParams<T>>& grads) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || accum_.size() != layers.size())
    throw ShapeError("rmsprop: gradient list does not align with the network layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& p = layers[i].params;
    if (p.empty()) continue;
    if (grads[i].weights.shape() != p.weights.shape() || grads[i].bias.shape() != p.bias.shape())
      throw ShapeError("rmsprop: gradient shape mismatch at layer " + layers[i].name);
    rmsprop_update<T>(p.weights.data(), grads[i].weights.data(), accum_[i].weights.data(), options_);
    rmsprop_update<T>(p.bias.data(), grads[i].bias.data(), accum_[i].bias.data(), options_);
  }
}

template LossResult<float> mse_loss(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> mse_loss(const Tensor<double>&, const Tensor<double>&);
template double mae(const Tensor<float>&, const Tensor<float>&);
template double mae(const Tensor<double>&, const Tensor<double>&);
template void rmsprop_update(std::span<float>, std::span<const float>, std::span<float>,
                             const RmsPropOptions&);
template void rmsprop_update(std::span<double>, std::span<const double>, std::span<double>,
                             const RmsPropOptions&);
template class RmsPropState<float>;
template class RmsPropState<double>;

}  // namespace tongueage
