// Explicit instantiation list shared by the parallel and reference kernels.
#ifndef TONGUEAGE_KERNELS_INSTANTIATE_HPP
#define TONGUEAGE_KERNELS_INSTANTIATE_HPP

#define TONGUEAGE_INSTANTIATE(T)                                                                 \
  template void conv2d_forward<T>(const ConvDims&, std::span<const T>, std::span<const T>,       \
                                  std::span<const T>, std::span<T>);                             \
  template void conv2d_backward<T>(const ConvDims&, std::span<const T>, std::span<const T>,      \
                                   std::span<const T>, std::span<T>, std::span<T>, std::span<T>); \
  template void maxpool2d_forward<T>(const PoolDims&, std::span<const T>, std::span<T>,          \
                                     std::span<std::size_t>);                                    \
  template void maxpool2d_backward<T>(const PoolDims&, std::span<const std::size_t>,             \
                                      std::span<const T>, std::span<T>);                         \
  template void dense_forward<T>(const DenseDims&, std::span<const T>, std::span<const T>,       \
                                 std::span<const T>, std::span<T>);                              \
  template void dense_backward<T>(const DenseDims&, std::span<const T>, std::span<const T>,      \
                                  std::span<const T>, std::span<T>, std::span<T>, std::span<T>);

#endif  // TONGUEAGE_KERNELS_INSTANTIATE_HPP
