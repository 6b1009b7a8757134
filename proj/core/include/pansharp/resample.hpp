#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pansharp {

/// Keys cubic convolution kernel with a = -0.5.
double keys_cubic(double x);

/// Four source taps contributing to one destination sample along one axis.
///
/// Samples are evaluated in anchored form
///   out = src[index[1]] + sum_{k != 1} weight[k] * (src[index[k]] - src[index[1]])
/// which is algebraically the weighted sum (weights add to one) but keeps
/// constant signals bit-exact. weight[1] is stored as 1 - (w0 + w2 + w3).
struct CubicTaps {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
};

/// Tap table mapping a source axis of length `src_len` to `dst_len` with
/// pixel-center alignment: src = (dst + 0.5) * src_len / dst_len - 0.5,
/// indices clamped to [0, src_len).
std::vector<CubicTaps> cubic_taps(std::size_t src_len, std::size_t dst_len);

inline double apply_taps(const CubicTaps& t, const double* src, std::size_t stride) {
  const double anchor = src[t.index[1] * stride];
  return anchor + t.weight[0] * (src[t.index[0] * stride] - anchor) +
         t.weight[2] * (src[t.index[2] * stride] - anchor) +
         t.weight[3] * (src[t.index[3] * stride] - anchor);
}

/// Resizes one plane (row-major, src_h x src_w) into dst (dst_h x dst_w):
/// horizontal pass first, then vertical.
void resample_plane(std::span<const double> src, std::size_t src_w, std::size_t src_h,
                    std::span<double> dst, std::size_t dst_w, std::size_t dst_h);

/// Adjoint of resample_plane: accumulates into src_grad the gradient of a
/// scalar with respect to the source plane given dst_grad.
void resample_plane_adjoint(std::span<const double> dst_grad, std::size_t dst_w,
                            std::size_t dst_h, std::span<double> src_grad, std::size_t src_w,
                            std::size_t src_h);

}  // namespace pansharp
