#include <omp.h>

#include <algorithm>
#include <vector>

#include "kernels_instantiate.hpp"
#include "tongueage/kernels.hpp"

namespace tongueage::kernels {

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }

template <typename T>
void conv2d_forward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> bias, std::span<T> out) {
  const long batch = static_cast<long>(d.batch);
  const long oh = static_cast<long>(d.out_height());
  const long ow = static_cast<long>(d.out_width());
  const long h = static_cast<long>(d.height), w = static_cast<long>(d.width);
  const long kh = static_cast<long>(d.kernel_h), kw = static_cast<long>(d.kernel_w);
  const long pad = static_cast<long>(d.pad);
  const std::size_t C = d.in_channels, F = d.out_channels;
  const T* src = in.data();
  const T* wt = weights.data();
  const T* bs = bias.data();
  T* dst = out.data();

#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b)
    for (long y = 0; y < oh; ++y)
      for (long x = 0; x < ow; ++x) {
        T* o = dst + ((b * oh + y) * ow + x) * F;
        for (std::size_t f = 0; f < F; ++f) o[f] = bs[f];
        for (long ky = 0; ky < kh; ++ky) {
          const long iy = y + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (long kx = 0; kx < kw; ++kx) {
            const long ix = x + kx - pad;
            if (ix < 0 || ix >= w) continue;
            const T* pin = src + ((b * h + iy) * w + ix) * C;
            const T* pw = wt + (ky * kw + kx) * C * F;
            for (std::size_t c = 0; c < C; ++c) {
              const T v = pin[c];
              const T* row = pw + c * F;
              for (std::size_t f = 0; f < F; ++f) o[f] += v * row[f];
            }
          }
        }
      }
}

// Each sample accumulates into its own weight/bias partial buffer; the
// partials are then summed in sample order, one weight element per thread.
template <typename T>
void conv2d_backward(const ConvDims& d, std::span<const T> in, std::span<const T> weights,
                     std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                     std::span<T> grad_bias) {
  const long batch = static_cast<long>(d.batch);
  const long oh = static_cast<long>(d.out_height());
  const long ow = static_cast<long>(d.out_width());
  const long h = static_cast<long>(d.height), w = static_cast<long>(d.width);
  const long kh = static_cast<long>(d.kernel_h), kw = static_cast<long>(d.kernel_w);
  const long pad = static_cast<long>(d.pad);
  const std::size_t C = d.in_channels, F = d.out_channels;
  const std::size_t wsize = d.weight_size();
  const std::size_t stride = wsize + F;
  std::vector<T> partial(d.batch * stride, T(0));
  std::fill(grad_in.begin(), grad_in.end(), T(0));

  const T* src = in.data();
  const T* wt = weights.data();
  const T* go = grad_out.data();
  T* gi = grad_in.data();

#pragma omp parallel for schedule(static)
  for (long b = 0; b < batch; ++b) {
    T* gw = partial.data() + b * stride;
    T* gb = gw + wsize;
    for (long y = 0; y < oh; ++y)
      for (long x = 0; x < ow; ++x) {
        const T* g = go + ((b * oh + y) * ow + x) * F;
        for (std::size_t f = 0; f < F; ++f) gb[f] += g[f];
        for (long ky = 0; ky < kh; ++ky) {
          const long iy = y + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (long kx = 0; kx < kw; ++kx) {
            const long ix = x + kx - pad;
            if (ix < 0 || ix >= w) continue;
            const std::size_t base = ((b * h + iy) * w + ix) * C;
            const std::size_t koff = (ky * kw + kx) * C * F;
            for (std::size_t c = 0; c < C; ++c) {
              const T v = src[base + c];
              const T* row = wt + koff + c * F;
              T* grow = gw + koff + c * F;
              T acc = 0;
              for (std::size_t f = 0; f < F; ++f) {
                grow[f] += v * g[f];
                acc += row[f] * g[f];
              }
              gi[base + c] += acc;
            }
          }
        }
      }
  }

  const long total = static_cast<long>(stride);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < total; ++i) {
    T sum = 0;
    for (std::size_t b = 0; b < d.batch; ++b) sum += partial[b * stride + i];
    if (static_cast<std::size_t>(i) < wsize)
      grad_weights[i] = sum;
    else
      grad_bias[i - wsize] = sum;
  }
}

template <typename T>
void maxpool2d_forward(const PoolDims& d, std::span<const T> in, std::span<T> out,
                       std::span<std::size_t> argmax) {
  const long batch = static_cast<long>(d.batch);
  const long oh = static_cast<long>(d.out_height());
  const std::size_t ow = d.out_width(), C = d.channels;

#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b)
    for (long y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t top = ((b * d.height + 2 * y) * d.width + 2 * x) * C;
        const std::size_t bottom = top + d.width * C;
        const std::size_t cand[4] = {top, top + C, bottom, bottom + C};
        const std::size_t o = ((b * oh + y) * ow + x) * C;
        for (std::size_t c = 0; c < C; ++c) {
          std::size_t best = cand[0] + c;
          for (int k = 1; k < 4; ++k)
            if (in[cand[k] + c] > in[best]) best = cand[k] + c;
          out[o + c] = in[best];
          argmax[o + c] = best;
        }
      }
}

template <typename T>
void maxpool2d_backward(const PoolDims& d, std::span<const std::size_t> argmax,
                        std::span<const T> grad_out, std::span<T> grad_in) {
  std::fill(grad_in.begin(), grad_in.end(), T(0));
  // Windows never overlap, so each input position has at most one writer.
  const long n = static_cast<long>(d.out_size());
#pragma omp parallel for schedule(static)
  for (long o = 0; o < n; ++o) grad_in[argmax[o]] += grad_out[o];
}

template <typename T>
void dense_forward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                   std::span<const T> bias, std::span<T> out) {
  constexpr long kBlock = 64;
  const long batch = static_cast<long>(d.batch);
  const long M = static_cast<long>(d.out_units);
  const std::size_t N = d.in_units;
  const long blocks = (M + kBlock - 1) / kBlock;

#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b)
    for (long blk = 0; blk < blocks; ++blk) {
      const long m0 = blk * kBlock, m1 = std::min(M, m0 + kBlock);
      T* o = out.data() + b * M;
      for (long m = m0; m < m1; ++m) o[m] = bias[m];
      const T* x = in.data() + b * N;
      for (std::size_t n = 0; n < N; ++n) {
        const T v = x[n];
        const T* row = weights.data() + n * M;
        for (long m = m0; m < m1; ++m) o[m] += v * row[m];
      }
    }
}

template <typename T>
void dense_backward(const DenseDims& d, std::span<const T> in, std::span<const T> weights,
                    std::span<const T> grad_out, std::span<T> grad_in, std::span<T> grad_weights,
                    std::span<T> grad_bias) {
  const long batch = static_cast<long>(d.batch);
  const long N = static_cast<long>(d.in_units);
  const std::size_t M = d.out_units;

#pragma omp parallel for collapse(2) schedule(static)
  for (long b = 0; b < batch; ++b)
    for (long n = 0; n < N; ++n) {
      const T* g = grad_out.data() + b * M;
      const T* row = weights.data() + n * M;
      T sum = 0;
      for (std::size_t m = 0; m < M; ++m) sum += g[m] * row[m];
      grad_in[b * N + n] = sum;
    }

#pragma omp parallel for schedule(static)
  for (long n = 0; n < N; ++n) {
    T* gw = grad_weights.data() + n * M;
    std::fill(gw, gw + M, T(0));
    for (long b = 0; b < batch; ++b) {
      const T v = in[b * N + n];
      const T* g = grad_out.data() + b * M;
      for (std::size_t m = 0; m < M; ++m) gw[m] += v * g[m];
    }
  }

  for (std::size_t m = 0; m < M; ++m) {
    T sum = 0;
    for (std::size_t b = 0; b < d.batch; ++b) sum += grad_out[b * M + m];
    grad_bias[m] = sum;
  }
}

TONGUEAGE_INSTANTIATE(float)
TONGUEAGE_INSTANTIATE(double)

}  // namespace tongueage::kernels
