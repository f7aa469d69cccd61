#include "tongueage/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "tongueage/errors.hpp"
#include "tongueage/optim.hpp"

namespace tongueage {

namespace {

std::string base_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2d: return "max_pooling2d";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
  }
  return "layer";
}

template <typename T>
void glorot_uniform(Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
Tensor<T> slice_batch(const Tensor<T>& t, std::size_t start, std::size_t count) {
  const std::size_t per = t.size() / t.shape()[0];
  std::vector<std::size_t> dims = t.shape().dims();
  dims[0] = count;
  std::vector<T> values(t.values().begin() + start * per, t.values().begin() + (start + count) * per);
  return Tensor<T>(Shape(std::move(dims)), std::move(values));
}

template <typename T>
void accumulate(Tensor<T>& total, const Tensor<T>& part) {
  if (total.empty()) {
    total = part;
    return;
  }
  for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
}

}  // namespace

template <typename T>
Network<T>::Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed)
    : input_shape_(std::move(input_shape)), seed_(seed) {
  if (input_shape_.rank() != 3) throw ShapeError("network input must be H x W x C");
  Rng rng(seed);
  std::map<LayerKind, int> counters;
  Shape cur = input_shape_;
  for (const LayerSpec& spec : specs) {
    Layer<T> layer;
    layer.name = base_name(spec.kind) + "_" + std::to_string(++counters[spec.kind]);
    layer.spec = spec;
    layer.input_shape = cur;
    layer.output_shape = layer_output_shape(spec, cur);
    if (spec.kind == LayerKind::conv2d) {
      const std::size_t c = cur[2];
      layer.params.weights = Tensor<T>(Shape{spec.kernel_h, spec.kernel_w, c, spec.out_channels});
      layer.params.bias = Tensor<T>(Shape{spec.out_channels});
      const std::size_t area = spec.kernel_h * spec.kernel_w;
      glorot_uniform(layer.params.weights, area * c, area * spec.out_channels, rng);
    } else if (spec.kind == LayerKind::dense) {
      layer.params.weights = Tensor<T>(Shape{cur.elements(), spec.out_units});
      layer.params.bias = Tensor<T>(Shape{spec.out_units});
      glorot_uniform(layer.params.weights, cur.elements(), spec.out_units, rng);
    }
    cur = layer.output_shape;
    layers_.push_back(std::move(layer));
  }
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
}

template <typename T>
std::vector<LayerSpec> Network<T>::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l.spec);
  return out;
}

template <typename T>
std::size_t Network<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.params.count();
  return n;
}

template <typename T>
std::vector<SummaryRow> Network<T>::summary() const {
  std::vector<SummaryRow> rows;
  for (const auto& l : layers_) {
    std::string type;
    switch (l.spec.kind) {
      case LayerKind::conv2d: type = "2D Convolutional layer"; break;
      case LayerKind::maxpool2d: type = "2D Max pooling layer"; break;
      case LayerKind::dense: type = "Dense connected layer"; break;
      default: continue;
    }
    rows.push_back({l.name, type, l.output_shape, l.params.count()});
  }
  if (!rows.empty() && layers_.back().spec.kind == LayerKind::dense) rows.back().type = "Output layer";
  return rows;
}

template <typename T>
std::size_t Network<T>::layer_index(const std::string& name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].name == name) return i;
  std::string valid;
  for (const auto& n : layer_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw LookupError("unknown layer '" + name + "'; valid layers: " + valid);
}

template <typename T>
std::vector<std::string> Network<T>::layer_names() const {
  std::vector<std::string> names;
  for (const auto& l : layers_) names.push_back(l.name);
  return names;
}

template <typename T>
template <typename U>
Network<U> Network<T>::cast() const {
  Network<U> out;
  out.input_shape_ = input_shape_;
  out.seed_ = seed_;
  for (const auto& l : layers_) {
    Layer<U> c{l.name, l.spec, {}, l.input_shape, l.output_shape};
    if (!l.params.empty()) {
      c.params.weights = tensor_cast<U>(l.params.weights);
      c.params.bias = tensor_cast<U>(l.params.bias);
    }
    out.layers_.push_back(std::move(c));
  }
  return out;
}

Shape paper_input_shape() { return Shape{63, 412, 1}; }

std::vector<LayerSpec> paper_layer_specs(double dropout_rate) {
  return {LayerSpec::conv2d(8, Padding::same),  LayerSpec::relu(),
          LayerSpec::conv2d(8, Padding::valid), LayerSpec::relu(),
          LayerSpec::maxpool2d(),               LayerSpec::conv2d(8, Padding::same),
          LayerSpec::relu(),                    LayerSpec::conv2d(4, Padding::valid),
          LayerSpec::relu(),                    LayerSpec::maxpool2d(),
          LayerSpec::flatten(),                 LayerSpec::dense(512),
          LayerSpec::relu(),                    LayerSpec::dropout(dropout_rate),
          LayerSpec::dense(1)};
}

Model build_paper_model(std::uint64_t seed, double dropout_rate) {
  return Model(paper_input_shape(), paper_layer_specs(dropout_rate), seed);
}

template <typename T>
ForwardTrace<T> forward_trace(const Network<T>& net, const Tensor<T>& batch, bool training,
                              Rng& rng, bool keep_all) {
  const Shape& s = batch.shape();
  if (s.rank() != 4 || s.unbatched() != net.input_shape())
    throw ShapeError("batch shape " + s.str() + " does not match B x " + net.input_shape().str());
  const auto& layers = net.layers();
  ForwardTrace<T> tr;
  tr.input = batch;
  tr.outputs.resize(layers.size());
  tr.pool_masks.resize(layers.size());
  tr.dropout_masks.resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer<T>& l = layers[i];
    const Tensor<T>& cur = i == 0 ? tr.input : tr.outputs[i - 1];
    switch (l.spec.kind) {
      case LayerKind::conv2d: tr.outputs[i] = conv2d_forward(cur, l.params, l.spec.padding); break;
      case LayerKind::maxpool2d: {
        PoolResult<T> r = maxpool2d_forward(cur);
        tr.outputs[i] = std::move(r.output);
        tr.pool_masks[i] = std::move(r.mask);
        break;
      }
      case LayerKind::flatten: tr.outputs[i] = flatten(cur); break;
      case LayerKind::dense: tr.outputs[i] = dense_forward(cur, l.params); break;
      case LayerKind::relu:
        tr.outputs[i] = relu(cur);
        if (!keep_all && i > 0 && layers[i - 1].spec.has_params()) tr.outputs[i - 1] = Tensor<T>();
        break;
      case LayerKind::dropout: {
        DropoutResult<T> r = dropout(cur, l.spec.rate, rng, training);
        tr.outputs[i] = std::move(r.output);
        tr.dropout_masks[i] = std::move(r.mask);
        break;
      }
    }
  }
  return tr;
}

template <typename T>
Tensor<T> forward(const Network<T>& net, const Tensor<T>& batch, bool training, Rng& rng) {
  ForwardTrace<T> tr = forward_trace(net, batch, training, rng, false);
  return std::move(tr.outputs.back());
}

template <typename T>
Tensor<T> predict(const Network<T>& net, const Tensor<T>& batch) {
  Rng unused(0);
  return forward(net, batch, false, unused);
}

template <typename T>
BackwardResult<T> backward(const Network<T>& net, const Tensor<T>& batch,
                           const Tensor<T>& targets, Rng& rng, std::size_t chunk) {
  const Shape& s = batch.shape();
  if (s.rank() != 4 || s.unbatched() != net.input_shape())
    throw ShapeError("batch shape " + s.str() + " does not match B x " + net.input_shape().str());
  const std::size_t B = s[0];
  const Shape out_shape = net.layers().back().output_shape.batched(B);
  if (targets.shape() != out_shape)
    throw ShapeError("target shape " + targets.shape().str() + " != prediction shape " +
                     out_shape.str());
  chunk = std::max<std::size_t>(1, chunk);
  const auto& layers = net.layers();
  const std::size_t per_out = out_shape.elements() / B;

  BackwardResult<T> res;
  res.predictions = Tensor<T>(out_shape);
  res.gradients.resize(layers.size());

  for (std::size_t start = 0; start < B; start += chunk) {
    const std::size_t n = std::min(chunk, B - start);
    const Tensor<T> part = n == B ? batch : slice_batch(batch, start, n);
    ForwardTrace<T> tr = forward_trace(net, part, true, rng, false);
    const Tensor<T>& pred = tr.result();
    std::copy(pred.values().begin(), pred.values().end(),
              res.predictions.data().begin() + start * per_out);

    // d loss / d pred for this chunk, normalized by the full batch size.
    Tensor<T> grad(pred.shape());
    for (std::size_t k = 0; k < pred.size(); ++k)
      grad[k] = static_cast<T>(2.0 * (static_cast<double>(pred[k]) - targets[start * per_out + k]) /
                               static_cast<double>(out_shape.elements()));

    for (std::size_t ii = layers.size(); ii-- > 0;) {
      const Layer<T>& l = layers[ii];
      const Tensor<T>& in = ii == 0 ? tr.input : tr.outputs[ii - 1];
      switch (l.spec.kind) {
        case LayerKind::conv2d: {
          LayerGradients<T> g = conv2d_backward(in, l.params, grad, l.spec.padding);
          accumulate(res.gradients[ii].weights, g.weights);
          accumulate(res.gradients[ii].bias, g.bias);
          grad = std::move(g.input);
          break;
        }
        case LayerKind::dense: {
          LayerGradients<T> g = dense_backward(in, l.params, grad);
          accumulate(res.gradients[ii].weights, g.weights);
          accumulate(res.gradients[ii].bias, g.bias);
          grad = std::move(g.input);
          break;
        }
        case LayerKind::relu: grad = relu_backward(tr.outputs[ii], grad); break;
        case LayerKind::maxpool2d: grad = maxpool2d_backward(tr.pool_masks[ii], grad); break;
        case LayerKind::flatten: grad = unflatten(grad, l.input_shape.batched(n)); break;
        case LayerKind::dropout: grad = dropout_backward(tr.dropout_masks[ii], grad); break;
      }
    }
  }
  res.loss = mse_loss(res.predictions, targets).loss;
  return res;
}

template <typename T>
std::uint64_t parameter_digest(const Network<T>& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const Tensor<T>& t) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t.values().data());
    for (std::size_t i = 0; i < t.size() * sizeof(T); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : net.layers()) {
    feed(l.params.weights);
    feed(l.params.bias);
  }
  return h;
}

template class Network<float>;
template class Network<double>;
template Network<double> Network<float>::cast<double>() const;
template Network<float> Network<double>::cast<float>() const;
template Network<float> Network<float>::cast<float>() const;
template Network<double> Network<double>::cast<double>() const;

#define TONGUEAGE_MODEL(T)                                                                       \
  template ForwardTrace<T> forward_trace(const Network<T>&, const Tensor<T>&, bool, Rng&, bool); \
  template Tensor<T> forward(const Network<T>&, const Tensor<T>&, bool, Rng&);                   \
  template Tensor<T> predict(const Network<T>&, const Tensor<T>&);                               \
  template BackwardResult<T> backward(const Network<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                      Rng&, std::size_t);                                        \
  template std::uint64_t parameter_digest(const Network<T>&);

TONGUEAGE_MODEL(float)
TONGUEAGE_MODEL(double)

}  // namespace tongueage
