#include "tongueage/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tongueage/errors.hpp"

namespace tongueage {

namespace {

void validate_dims(const std::vector<std::size_t>& dims) {
  if (dims.empty() || dims.size() > Shape::kMaxRank)
    throw ShapeError("tensor rank must be 1.." + std::to_string(Shape::kMaxRank) +
                     ", got " + std::to_string(dims.size()));
  for (auto d : dims)
    if (d == 0) throw ShapeError("tensor dimensions must be >= 1");
}

}  // namespace

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate_dims(dims_); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate_dims(dims_); }

std::size_t Shape::elements() const {
  if (dims_.empty()) return 0;
  std::size_t n = 1;
  for (auto d : dims_) n *= d;
  return n;
}

Shape Shape::batched(std::size_t batch) const {
  std::vector<std::size_t> d;
  d.reserve(dims_.size() + 1);
  d.push_back(batch);
  d.insert(d.end(), dims_.begin(), dims_.end());
  return Shape(std::move(d));
}

Shape Shape::unbatched() const {
  if (dims_.size() < 2) throw ShapeError("cannot drop the only axis of " + str());
  return Shape(std::vector<std::size_t>(dims_.begin() + 1, dims_.end()));
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? ", " : "") << dims_[i];
  os << ')';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_.elements(), fill) {
  if (shape_.rank() == 0) throw ShapeError("tensor requires a non-empty shape");
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.rank() == 0) throw ShapeError("tensor requires a non-empty shape");
  if (data_.size() != shape_.elements())
    throw ShapeError("buffer of " + std::to_string(data_.size()) + " values does not match shape " +
                     shape_.str());
}

template <typename T>
T& Tensor<T>::at(std::size_t y, std::size_t x, std::size_t c) {
  return data_[(y * shape_[1] + x) * shape_[2] + c];
}

template <typename T>
const T& Tensor<T>::at(std::size_t y, std::size_t x, std::size_t c) const {
  return data_[(y * shape_[1] + x) * shape_[2] + c];
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  Tensor out = *this;
  out.reshape(std::move(shape));
  return out;
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
  if (shape.elements() != data_.size())
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  shape_ = std::move(shape);
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (const T& v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace tongueage
