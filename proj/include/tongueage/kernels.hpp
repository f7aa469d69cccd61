#ifndef TONGUEAGE_KERNELS_HPP
#define TONGUEAGE_KERNELS_HPP

// Raw compute kernels over row-major buffers.
//
// tongueage::kernels holds the OpenMP-parallel kernels used by the layers.
// tongueage::kernels::reference holds plain serial loops computing the same
// maps; they are kept for testing and benchmarking only.
//
// Parallel kernels split work so that every output element (and every
// reduced gradient element) is accumulated by one thread in a fixed order.
// Results are therefore identical for any OpenMP thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace tongueage::kernels {

/// Batched NHWC convolution geometry, weights laid out kh x kw x C x F.
struct ConvDims {
  std::size_t batch = 1;
  std::size_t height = 1, width = 1, in_channels = 1;
  std::size_t kernel_h = 3, kernel_w = 3;
  std::size_t out_channels = 1;
  std::size_t pad = 0;  // symmetric zero padding on each border
  std::size_t out_height() const { return height + 2 * pad - kernel_h + 1; }
  std::size_t out_width() const { return width + 2 * pad - kernel_w + 1; }
  std::size_t in_size() const { return batch * height * width * in_channels; }
  std::size_t out_size() const { return batch * out_height() * out_width() * out_channels; }
  std::size_t weight_size() const { return kernel_h * kernel_w * in_channels * out_channels; }
};

/// 2x2 stride-2 pooling geometry; trailing odd row/column is dropped.
struct PoolDims {
  std::size_t batch = 1;
  std::size_t height = 2, width = 2, channels = 1;
  std::size_t out_height() const { return height / 2; }
  std::size_t out_width() const { return width / 2; }
  std::size_t in_size() const { return batch * height * width * channels; }
  std::size_t out_size() const { return batch * out_height() * out_width() * channels; }
};

/// Fully connected geometry, weights laid out in_units x out_units.
struct DenseDims {
  std::size_t batch = 1;
  std::size_t in_units = 1, out_units = 1;
};

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> bias, std::span<T> out);

/// Writes (not accumulates) all three gradients.
template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                     std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                     std::span<T> grad_bias);

/// argmax receives the flat input index of each window's first maximum
/// in row-major window order.
template <typename T>
void maxpool2d_forward(const PoolDims& d, std::span<const T> in, std::span<T> out,
                       std::span<std::size_t> argmax);

template <typename T>
void maxpool2d_backward(const PoolDims& d, std::span<const std::size_t> argmax,
                        std::span<const T> grad_out, std::span<T> grad_in);

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> out);

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                    std::span<T> grad_bias);

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();
void set_threads(int n);

namespace reference {

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> bias, std::span<T> out);

template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                     std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                     std::span<T> grad_bias);

template <typename T>
void maxpool2d_forward(const PoolDims& d, std::span<const T> in, std::span<T> out,
                       std::span<std::size_t> argmax);

template <typename T>
void maxpool2d_backward(const PoolDims& d, std::span<const std::size_t> argmax,
                        std::span<const T> grad_out, std::span<T> grad_in);

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> out);

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                    std::span<T> grad_bias);

}  // namespace reference
}  // namespace tongueage::kernels

#endif  // TONGUEAGE_KERNELS_HPP
