#include "pansharp/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "pansharp/errors.hpp"
#include "pansharp/resample.hpp"

namespace pansharp::ops {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

RowMatrix as_matrix(const double* data, std::size_t rows, std::size_t cols) {
  return ConstMapMatrix(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_same_shape(const char* op, const Tensor& x, const Tensor& y) {
  if (x.shape() != y.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + x.shape().str() + " vs " +
                     y.shape().str());
  }
}

struct ConvGeometry {
  std::size_t n, in_c, h, w;
  std::size_t out_c, kh, kw;
  std::size_t stride, pad;
  std::size_t out_h, out_w;

  std::size_t k() const { return in_c * kh * kw; }
  std::size_t l() const { return out_h * out_w; }
};

// Unfolds one sample (in_c x h x w) into a (in_c*kh*kw) x (out_h*out_w)
// matrix with zero padding.
void im2col(const double* x, const ConvGeometry& g, double* col) {
  const auto pad = static_cast<long long>(g.pad);
  for (std::size_t c = 0; c < g.in_c; ++c) {
    const double* plane = x + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        double* row = col + ((c * g.kh + ky) * g.kw + kx) * g.l();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long long iy = static_cast<long long>(oy * g.stride + ky) - pad;
          double* out = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<long long>(g.h)) {
            std::fill(out, out + g.out_w, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * g.w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long long ix = static_cast<long long>(ox * g.stride + kx) - pad;
            out[ox] = (ix < 0 || ix >= static_cast<long long>(g.w))
                          ? 0.0
                          : src[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeometry& g, double* x) {
  const auto pad = static_cast<long long>(g.pad);
  for (std::size_t c = 0; c < g.in_c; ++c) {
    double* plane = x + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const double* row = col + ((c * g.kh + ky) * g.kw + kx) * g.l();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long long iy = static_cast<long long>(oy * g.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<long long>(g.h)) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * g.w;
          const double* in = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long long ix = static_cast<long long>(ox * g.stride + kx) - pad;
            if (ix >= 0 && ix < static_cast<long long>(g.w)) {
              dst[static_cast<std::size_t>(ix)] += in[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

// --- convolution -------------------------------------------------------

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight, const Tensor& bias,
              ConvOptions options) {
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  if (ws.c != xs.c) {
    throw ShapeError("conv2d: input channels of " + xs.str() + " do not match weight " +
                     ws.str());
  }
  if (options.stride == 0) throw InvalidArgument("conv2d: stride must be >= 1");
  if (bias.defined() && bias.numel() != ws.n) {
    throw ShapeError("conv2d: bias " + bias.shape().str() + " does not match weight " +
                     ws.str());
  }
  if (xs.h + 2 * options.padding < ws.h || xs.w + 2 * options.padding < ws.w) {
    throw ShapeError("conv2d: kernel " + ws.str() + " larger than padded input " + xs.str());
  }
  ConvGeometry g{xs.n, xs.c, xs.h, xs.w, ws.n, ws.h, ws.w, options.stride, options.padding, 0, 0};
  g.out_h = (xs.h + 2 * g.pad - g.kh) / g.stride + 1;
  g.out_w = (xs.w + 2 * g.pad - g.kw) / g.stride + 1;

  const Shape out_shape{g.n, g.out_c, g.out_h, g.out_w};
  std::vector<double> out(out_shape.numel());
  // Eigen-owned (aligned) operands: with unaligned maps the vectorized
  // kernels peel depending on heap addresses and results vary run to run.
  const RowMatrix W = as_matrix(weight.values().data(), g.out_c, g.k());
  RowMatrix col(static_cast<Eigen::Index>(g.k()), static_cast<Eigen::Index>(g.l()));
  RowMatrix Y(static_cast<Eigen::Index>(g.out_c), static_cast<Eigen::Index>(g.l()));
  for (std::size_t s = 0; s < g.n; ++s) {
    im2col(input.values().data() + s * g.in_c * g.h * g.w, g, col.data());
    Y.noalias() = W * col;
    double* dst = out.data() + s * g.out_c * g.l();
    for (std::size_t o = 0; o < g.out_c; ++o) {
      const double b = bias.defined() ? bias.values()[o] : 0.0;
      const double* src = Y.data() + o * g.l();
      for (std::size_t i = 0; i < g.l(); ++i) dst[o * g.l() + i] = src[i] + b;
    }
  }

  Tensor y = tape.make_output("conv2d", out_shape, std::move(out), {&input, &weight, &bias});
  tape.record(y, "conv2d", [y, input, weight, bias, g] {
    const auto& gy = y.grad();
    const RowMatrix W = as_matrix(weight.values().data(), g.out_c, g.k());
    RowMatrix col(static_cast<Eigen::Index>(g.k()), static_cast<Eigen::Index>(g.l()));
    RowMatrix dcol;
    RowMatrix dW;
    for (std::size_t s = 0; s < g.n; ++s) {
      const double* gys = gy.data() + s * g.out_c * g.l();
      const RowMatrix G = as_matrix(gys, g.out_c, g.l());
      if (weight.requires_grad()) {
        im2col(input.values().data() + s * g.in_c * g.h * g.w, g, col.data());
        dW.noalias() = G * col.transpose();
        auto& gw = grad_buffer(weight);
        for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dW.data()[i];
      }
      if (bias.defined() && bias.requires_grad()) {
        auto& db = grad_buffer(bias);
        for (std::size_t o = 0; o < g.out_c; ++o) {
          double acc = 0.0;
          for (std::size_t i = 0; i < g.l(); ++i) acc += gys[o * g.l() + i];
          db[o] += acc;
        }
      }
      if (input.requires_grad()) {
        dcol.noalias() = W.transpose() * G;
        col2im_add(dcol.data(), g, grad_buffer(input).data() + s * g.in_c * g.h * g.w);
      }
    }
  });
  return y;
}

// --- activations -------------------------------------------------------

Tensor relu(Tape& tape, const Tensor& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  Tensor y = tape.make_output("relu", x.shape(), std::move(out), {&x});
  tape.record(y, "relu", [y, x] {
    const auto gy = y.grad();
    const auto xv = x.values();
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += gy[i];
    }
  });
  return y;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  Tensor y = tape.make_output("sigmoid", x.shape(), std::move(out), {&x});
  tape.record(y, "sigmoid", [y, x] {
    const auto gy = y.grad();
    const auto yv = y.values();
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * yv[i] * (1.0 - yv[i]);
  });
  return y;
}

// --- elementwise arithmetic --------------------------------------------

Tensor add(Tape& tape, const Tensor& x, const Tensor& y) {
  require_same_shape("add", x, y);
  const auto xv = x.values();
  const auto yv = y.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + yv[i];
  Tensor z = tape.make_output("add", x.shape(), std::move(out), {&x, &y});
  tape.record(z, "add", [z, x, y] {
    const auto gz = z.grad();
    if (x.requires_grad()) {
      auto& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gz[i];
    }
    if (y.requires_grad()) {
      auto& gy = grad_buffer(y);
      for (std::size_t i = 0; i < gy.size(); ++i) gy[i] += gz[i];
    }
  });
  return z;
}

Tensor sub(Tape& tape, const Tensor& x, const Tensor& y) {
  require_same_shape("sub", x, y);
  const auto xv = x.values();
  const auto yv = y.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] - yv[i];
  Tensor z = tape.make_output("sub", x.shape(), std::move(out), {&x, &y});
  tape.record(z, "sub", [z, x, y] {
    const auto gz = z.grad();
    if (x.requires_grad()) {
      auto& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gz[i];
    }
    if (y.requires_grad()) {
      auto& gy = grad_buffer(y);
      for (std::size_t i = 0; i < gy.size(); ++i) gy[i] -= gz[i];
    }
  });
  return z;
}

Tensor mul(Tape& tape, const Tensor& x, const Tensor& y) {
  const Shape& xs = x.shape();
  const Shape& ys = y.shape();
  if (xs == ys) {
    const auto xv = x.values();
    const auto yv = y.values();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * yv[i];
    Tensor z = tape.make_output("mul", xs, std::move(out), {&x, &y});
    tape.record(z, "mul", [z, x, y] {
      const auto gz = z.grad();
      if (x.requires_grad()) {
        const auto yv = y.values();
        auto& gx = grad_buffer(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gz[i] * yv[i];
      }
      if (y.requires_grad()) {
        const auto xv = x.values();
        auto& gy = grad_buffer(y);
        for (std::size_t i = 0; i < gy.size(); ++i) gy[i] += gz[i] * xv[i];
      }
    });
    return z;
  }
  // Spatial broadcast: one operand has a single channel.
  const bool y_is_map = ys.c == 1 && xs.n == ys.n && xs.h == ys.h && xs.w == ys.w;
  const bool x_is_map = xs.c == 1 && xs.n == ys.n && xs.h == ys.h && xs.w == ys.w;
  if (!y_is_map && !x_is_map) {
    throw ShapeError("mul: shape mismatch " + xs.str() + " vs " + ys.str());
  }
  const Tensor& full = y_is_map ? x : y;
  const Tensor& map = y_is_map ? y : x;
  const Shape fs = full.shape();
  const std::size_t plane = fs.plane();
  const auto fv = full.values();
  const auto mv = map.values();
  std::vector<double> out(fs.numel());
  for (std::size_t n = 0; n < fs.n; ++n) {
    for (std::size_t c = 0; c < fs.c; ++c) {
      const std::size_t base = (n * fs.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) out[base + i] = fv[base + i] * mv[n * plane + i];
    }
  }
  Tensor z = tape.make_output("mul", fs, std::move(out), {&full, &map});
  tape.record(z, "mul(broadcast)", [z, full, map, fs, plane] {
    const auto gz = z.grad();
    const auto fv = full.values();
    const auto mv = map.values();
    if (full.requires_grad()) {
      auto& gf = grad_buffer(full);
      for (std::size_t n = 0; n < fs.n; ++n) {
        for (std::size_t c = 0; c < fs.c; ++c) {
          const std::size_t base = (n * fs.c + c) * plane;
          for (std::size_t i = 0; i < plane; ++i) gf[base + i] += gz[base + i] * mv[n * plane + i];
        }
      }
    }
    if (map.requires_grad()) {
      auto& gm = grad_buffer(map);
      for (std::size_t n = 0; n < fs.n; ++n) {
        for (std::size_t c = 0; c < fs.c; ++c) {
          const std::size_t base = (n * fs.c + c) * plane;
          for (std::size_t i = 0; i < plane; ++i) gm[n * plane + i] += gz[base + i] * fv[base + i];
        }
      }
    }
  });
  return z;
}

Tensor scalar_mul(Tape& tape, const Tensor& x, double k) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * k;
  Tensor y = tape.make_output("scalar_mul", x.shape(), std::move(out), {&x});
  tape.record(y, "scalar_mul", [y, x, k] {
    const auto gy = y.grad();
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * k;
  });
  return y;
}

Tensor add_scalar(Tape& tape, const Tensor& x, double k) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + k;
  Tensor y = tape.make_output("add_scalar", x.shape(), std::move(out), {&x});
  tape.record(y, "add_scalar", [y, x] {
    const auto gy = y.grad();
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
  });
  return y;
}

// --- channel plumbing --------------------------------------------------

Tensor concat_channels(Tape& tape, std::span<const Tensor> xs) {
  if (xs.empty()) throw InvalidArgument("concat_channels: no inputs");
  const Shape first = xs.front().shape();
  std::size_t total_c = 0;
  for (const Tensor& t : xs) {
    const Shape& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: " + s.str() + " incompatible with " + first.str());
    }
    total_c += s.c;
  }
  const Shape out_shape{first.n, total_c, first.h, first.w};
  const std::size_t plane = first.plane();
  std::vector<double> out(out_shape.numel());
  for (std::size_t n = 0; n < first.n; ++n) {
    std::size_t c_off = 0;
    for (const Tensor& t : xs) {
      const auto v = t.values();
      const std::size_t chunk = t.shape().c * plane;
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(n * chunk), chunk,
                  out.begin() + static_cast<std::ptrdiff_t>((n * total_c + c_off) * plane));
      c_off += t.shape().c;
    }
  }
  Tensor y = tape.make_output("concat_channels", out_shape, std::move(out), xs);
  std::vector<Tensor> inputs(xs.begin(), xs.end());
  tape.record(y, "concat_channels", [y, inputs, total_c, plane] {
    const auto gy = y.grad();
    const std::size_t batch = y.shape().n;
    std::size_t c_off = 0;
    for (const Tensor& t : inputs) {
      const std::size_t chunk = t.shape().c * plane;
      if (t.requires_grad()) {
        auto& gt = grad_buffer(t);
        for (std::size_t n = 0; n < batch; ++n) {
          const double* src = gy.data() + (n * total_c + c_off) * plane;
          double* dst = gt.data() + n * chunk;
          for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
        }
      }
      c_off += t.shape().c;
    }
  });
  return y;
}

Tensor slice_channels(Tape& tape, const Tensor& x, std::size_t begin, std::size_t count) {
  const Shape xs = x.shape();
  if (count == 0 || begin + count > xs.c) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + xs.str());
  }
  const Shape out_shape{xs.n, count, xs.h, xs.w};
  const std::size_t plane = xs.plane();
  std::vector<double> out(out_shape.numel());
  const auto v = x.values();
  for (std::size_t n = 0; n < xs.n; ++n) {
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((n * xs.c + begin) * plane),
                count * plane, out.begin() + static_cast<std::ptrdiff_t>(n * count * plane));
  }
  Tensor y = tape.make_output("slice_channels", out_shape, std::move(out), {&x});
  tape.record(y, "slice_channels", [y, x, xs, begin, count, plane] {
    const auto gy = y.grad();
    auto& gx = grad_buffer(x);
    for (std::size_t n = 0; n < xs.n; ++n) {
      const double* src = gy.data() + n * count * plane;
      double* dst = gx.data() + (n * xs.c + begin) * plane;
      for (std::size_t i = 0; i < count * plane; ++i) dst[i] += src[i];
    }
  });
  return y;
}

// --- reductions --------------------------------------------------------

Tensor mean_all(Tape& tape, const Tensor& x) {
  const auto xv = x.values();
  double s = 0.0;
  for (double v : xv) s += v;
  const double inv = 1.0 / static_cast<double>(xv.size());
  Tensor y = tape.make_output("mean_all", Shape{}, {s * inv}, {&x});
  tape.record(y, "mean_all", [y, x, inv] {
    const double g = y.grad()[0] * inv;
    auto& gx = grad_buffer(x);
    for (double& v : gx) v += g;
  });
  return y;
}

Tensor mse(Tape& tape, const Tensor& x, const Tensor& y) {
  require_same_shape("mse", x, y);
  const auto xv = x.values();
  const auto yv = y.values();
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - yv[i];
    s += d * d;
  }
  const double inv = 1.0 / static_cast<double>(xv.size());
  Tensor z = tape.make_output("mse", Shape{}, {s * inv}, {&x, &y});
  tape.record(z, "mse", [z, x, y, inv] {
    const double g = 2.0 * inv * z.grad()[0];
    const auto xv = x.values();
    const auto yv = y.values();
    if (x.requires_grad()) {
      auto& gx = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * (xv[i] - yv[i]);
    }
    if (y.requires_grad()) {
      auto& gy = grad_buffer(y);
      for (std::size_t i = 0; i < gy.size(); ++i) gy[i] -= g * (xv[i] - yv[i]);
    }
  });
  return z;
}

// --- resampling --------------------------------------------------------

Tensor resize_bicubic(Tape& tape, const Tensor& x, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw InvalidArgument("resize_bicubic: zero target size");
  const Shape xs = x.shape();
  const Shape out_shape{xs.n, xs.c, out_h, out_w};
  const std::size_t planes = xs.n * xs.c;
  std::vector<double> out(out_shape.numel());
  const auto v = x.values();
  for (std::size_t p = 0; p < planes; ++p) {
    resample_plane(v.subspan(p * xs.plane(), xs.plane()), xs.w, xs.h,
                   std::span<double>(out).subspan(p * out_shape.plane(), out_shape.plane()), out_w,
                   out_h);
  }
  Tensor y = tape.make_output("resize_bicubic", out_shape, std::move(out), {&x});
  tape.record(y, "resize_bicubic", [y, x, xs, out_shape, planes] {
    const auto gy = y.grad();
    auto& gx = grad_buffer(x);
    for (std::size_t p = 0; p < planes; ++p) {
      resample_plane_adjoint(gy.subspan(p * out_shape.plane(), out_shape.plane()), out_shape.w,
                             out_shape.h, std::span<double>(gx).subspan(p * xs.plane(), xs.plane()),
                             xs.w, xs.h);
    }
  });
  return y;
}

Tensor highpass(Tape& tape, const Tensor& x, std::size_t s) {
  const Shape xs = x.shape();
  if (s == 0 || xs.h % s != 0 || xs.w % s != 0) {
    throw ShapeError("highpass: " + xs.str() + " not divisible by s=" + std::to_string(s));
  }
  Tensor low = resize_bicubic(tape, resize_bicubic(tape, x, xs.h / s, xs.w / s), xs.h, xs.w);
  return sub(tape, x, low);
}

}  // namespace pansharp::ops
