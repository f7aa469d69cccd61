// Serial reference kernels: one output element at a time, textbook loop order.

#include <algorithm>

#include "kernels_instantiate.hpp"
#include "tongueage/kernels.hpp"

namespace tongueage::kernels::reference {

namespace {

// Input value at padded coordinates, zero outside the image.
template <typename T>
T padded(const ConvDims& d, std::span<const T> in, std::size_t b, long y, long x, std::size_t c) {
  if (y < 0 || x < 0 || y >= static_cast<long>(d.height) || x >= static_cast<long>(d.width))
    return T(0);
  return in[((b * d.height + y) * d.width + x) * d.in_channels + c];
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> bias, std::span<T> out) {
  const std::size_t oh = d.out_height(), ow = d.out_width();
  const long pad = static_cast<long>(d.pad);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t f = 0; f < d.out_channels; ++f) {
          T sum = bias[f];
          for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
            for (std::size_t kx = 0; kx < d.kernel_w; ++kx)
              for (std::size_t c = 0; c < d.in_channels; ++c) {
                const long iy = static_cast<long>(y + ky) - pad;
                const long ix = static_cast<long>(x + kx) - pad;
                sum += padded(d, in, b, iy, ix, c) *
                       weights[((ky * d.kernel_w + kx) * d.in_channels + c) * d.out_channels + f];
              }
          out[((b * oh + y) * ow + x) * d.out_channels + f] = sum;
        }
}

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                     std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                     std::span<T> grad_bias) {
  const std::size_t oh = d.out_height(), ow = d.out_width();
  const long pad = static_cast<long>(d.pad);
  std::fill(grad_in.begin(), grad_in.end(), T(0));
  std::fill(grad_weights.begin(), grad_weights.end(), T(0));
  std::fill(grad_bias.begin(), grad_bias.end(), T(0));
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t f = 0; f < d.out_channels; ++f) {
          const T g = grad_out[((b * oh + y) * ow + x) * d.out_channels + f];
          grad_bias[f] += g;
          for (std::size_t ky = 0; ky < d.kernel_h; ++ky)
            for (std::size_t kx = 0; kx < d.kernel_w; ++kx) {
              const long iy = static_cast<long>(y + ky) - pad;
              const long ix = static_cast<long>(x + kx) - pad;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(d.height) ||
                  ix >= static_cast<long>(d.width))
                continue;
              for (std::size_t c = 0; c < d.in_channels; ++c) {
                const std::size_t wi =
                    ((ky * d.kernel_w + kx) * d.in_channels + c) * d.out_channels + f;
                const std::size_t ii = ((b * d.height + iy) * d.width + ix) * d.in_channels + c;
                grad_weights[wi] += in[ii] * g;
                grad_in[ii] += weights[wi] * g;
              }
            }
        }
}

template <typename T>
void maxpool2d_forward(const PoolDims& d, std::span<const T> in, std::span<T> out,
                       std::span<std::size_t> argmax) {
  const std::size_t oh = d.out_height(), ow = d.out_width();
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t c = 0; c < d.channels; ++c) {
          std::size_t best = ((b * d.height + 2 * y) * d.width + 2 * x) * d.channels + c;
          for (std::size_t wy = 0; wy < 2; ++wy)
            for (std::size_t wx = 0; wx < 2; ++wx) {
              const std::size_t i =
                  ((b * d.height + 2 * y + wy) * d.width + 2 * x + wx) * d.channels + c;
              if (in[i] > in[best]) best = i;
            }
          const std::size_t o = ((b * oh + y) * ow + x) * d.channels + c;
          out[o] = in[best];
          argmax[o] = best;
        }
}

template <typename T>
void maxpool2d_backward(const PoolDims& d, std::span<const std::size_t> argmax,
                        std::span<const T> grad_out, std::span<T> grad_in) {
  std::fill(grad_in.begin(), grad_in.end(), T(0));
  for (std::size_t o = 0; o < d.out_size(); ++o) grad_in[argmax[o]] += grad_out[o];
}

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> out) {
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t m = 0; m < d.out_units; ++m) {
      T sum = bias[m];
      for (std::size_t n = 0; n < d.in_units; ++n)
        sum += in[b * d.in_units + n] * weights[n * d.out_units + m];
      out[b * d.out_units + m] = sum;
    }
}

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                    std::span<T> grad_bias) {
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t n = 0; n < d.in_units; ++n) {
      T sum = 0;
      for (std::size_t m = 0; m < d.out_units; ++m)
        sum += grad_out[b * d.out_units + m] * weights[n * d.out_units + m];
      grad_in[b * d.in_units + n] = sum;
    }
  for (std::size_t n = 0; n < d.in_units; ++n)
    for (std::size_t m = 0; m < d.out_units; ++m) {
      T sum = 0;
      for (std::size_t b = 0; b < d.batch; ++b)
        sum += in[b * d.in_units + n] * grad_out[b * d.out_units + m];
      grad_weights[n * d.out_units + m] = sum;
    }
  for (std::size_t m = 0; m < d.out_units; ++m) {
    T sum = 0;
    for (std::size_t b = 0; b < d.batch; ++b) sum += grad_out[b * d.out_units + m];
    grad_bias[m] = sum;
  }
}

TONGUEAGE_INSTANTIATE(float)
TONGUEAGE_INSTANTIATE(double)

}  // namespace tongueage::kernels::reference
