#include "pansharp/resample.hpp"

#include <algorithm>
#include <cmath>

#include "pansharp/errors.hpp"

namespace pansharp {

namespace {
constexpr double kKeysA = -0.5;
}

double keys_cubic(double x) {
  const double ax = std::abs(x);
  if (ax <= 1.0) {
    return ((kKeysA + 2.0) * ax - (kKeysA + 3.0)) * ax * ax + 1.0;
  }
  if (ax < 2.0) {
    return ((kKeysA * ax - 5.0 * kKeysA) * ax + 8.0 * kKeysA) * ax - 4.0 * kKeysA;
  }
  return 0.0;
}

std::vector<CubicTaps> cubic_taps(std::size_t src_len, std::size_t dst_len) {
  if (src_len == 0 || dst_len == 0) {
    throw InvalidArgument("cubic_taps: zero-length axis");
  }
  std::vector<CubicTaps> taps(dst_len);
  const double ratio = static_cast<double>(src_len) / static_cast<double>(dst_len);
  const auto last = static_cast<long long>(src_len) - 1;
  for (std::size_t d = 0; d < dst_len; ++d) {
    const double pos = (static_cast<double>(d) + 0.5) * ratio - 0.5;
    const double base = std::floor(pos);
    const double t = pos - base;
    const auto i0 = static_cast<long long>(base);
    CubicTaps& tap = taps[d];
    for (int k = 0; k < 4; ++k) {
      tap.index[k] = static_cast<std::size_t>(std::clamp(i0 - 1 + k, 0LL, last));
    }
    tap.weight[0] = keys_cubic(t + 1.0);
    tap.weight[2] = keys_cubic(1.0 - t);
    tap.weight[3] = keys_cubic(2.0 - t);
    tap.weight[1] = 1.0 - (tap.weight[0] + tap.weight[2] + tap.weight[3]);
  }
  return taps;
}

void resample_plane(std::span<const double> src, std::size_t src_w, std::size_t src_h,
                    std::span<double> dst, std::size_t dst_w, std::size_t dst_h) {
  if (src.size() != src_w * src_h || dst.size() != dst_w * dst_h) {
    throw ShapeError("resample_plane: buffer size does not match dimensions");
  }
  if (src_w == dst_w && src_h == dst_h) {
    std::copy(src.begin(), src.end(), dst.begin());
    return;
  }
  const auto htaps = cubic_taps(src_w, dst_w);
  const auto vtaps = cubic_taps(src_h, dst_h);

  // Horizontal pass: src_h rows of dst_w samples.
  std::vector<double> tmp(src_h * dst_w);
  for (std::size_t y = 0; y < src_h; ++y) {
    const double* row = src.data() + y * src_w;
    double* out = tmp.data() + y * dst_w;
    for (std::size_t x = 0; x < dst_w; ++x) {
      out[x] = apply_taps(htaps[x], row, 1);
    }
  }
  // Vertical pass.
  for (std::size_t y = 0; y < dst_h; ++y) {
    const CubicTaps& t = vtaps[y];
    double* out = dst.data() + y * dst_w;
    for (std::size_t x = 0; x < dst_w; ++x) {
      out[x] = apply_taps(t, tmp.data() + x, dst_w);
    }
  }
}

void resample_plane_adjoint(std::span<const double> dst_grad, std::size_t dst_w,
                            std::size_t dst_h, std::span<double> src_grad, std::size_t src_w,
                            std::size_t src_h) {
  if (src_grad.size() != src_w * src_h || dst_grad.size() != dst_w * dst_h) {
    throw ShapeError("resample_plane_adjoint: buffer size does not match dimensions");
  }
  if (src_w == dst_w && src_h == dst_h) {
    for (std::size_t i = 0; i < src_grad.size(); ++i) src_grad[i] += dst_grad[i];
    return;
  }
  const auto htaps = cubic_taps(src_w, dst_w);
  const auto vtaps = cubic_taps(src_h, dst_h);

  // Adjoint of the vertical pass: dst_grad (dst_h x dst_w) -> tmp (src_h x dst_w).
  std::vector<double> tmp(src_h * dst_w, 0.0);
  for (std::size_t y = 0; y < dst_h; ++y) {
    const CubicTaps& t = vtaps[y];
    const double* g = dst_grad.data() + y * dst_w;
    for (std::size_t x = 0; x < dst_w; ++x) {
      for (int k = 0; k < 4; ++k) {
        tmp[t.index[k] * dst_w + x] += t.weight[k] * g[x];
      }
    }
  }
  // Adjoint of the horizontal pass.
  for (std::size_t y = 0; y < src_h; ++y) {
    const double* g = tmp.data() + y * dst_w;
    double* out = src_grad.data() + y * src_w;
    for (std::size_t x = 0; x < dst_w; ++x) {
      const CubicTaps& t = htaps[x];
      for (int k = 0; k < 4; ++k) {
        out[t.index[k]] += t.weight[k] * g[x];
      }
    }
  }
}

}  // namespace pansharp
