#pragma once

#include <cstddef>
#include <span>

#include "pansharp/tensor.hpp"

// Differentiable operations. Each takes the tape that records its backward
// rule first. Elementwise binary operations require identical shapes, with
// one exception: mul() broadcasts a 1-channel operand over the channels of
// the other (spatial attention maps).
namespace pansharp::ops {

struct ConvOptions {
  std::size_t stride = 1;
  std::size_t padding = 1;  // zero padding on every side
};

/// Cross-correlation (no kernel flip). weight is (out_c, in_c, kh, kw); bias
/// has out_c elements or is undefined.
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight, const Tensor& bias,
              ConvOptions options = {});

Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);

Tensor add(Tape& tape, const Tensor& x, const Tensor& y);
Tensor sub(Tape& tape, const Tensor& x, const Tensor& y);
Tensor mul(Tape& tape, const Tensor& x, const Tensor& y);
Tensor scalar_mul(Tape& tape, const Tensor& x, double k);
Tensor add_scalar(Tape& tape, const Tensor& x, double k);

Tensor concat_channels(Tape& tape, std::span<const Tensor> xs);
Tensor slice_channels(Tape& tape, const Tensor& x, std::size_t begin, std::size_t count);

/// Scalar mean over every element.
Tensor mean_all(Tape& tape, const Tensor& x);

/// mean((x - y)^2) as one node.
Tensor mse(Tape& tape, const Tensor& x, const Tensor& y);

/// Per-plane bicubic resize with the raster module's kernel and alignment.
Tensor resize_bicubic(Tape& tape, const Tensor& x, std::size_t out_h, std::size_t out_w);

/// x - resize(resize(x, h/s, w/s), h, w).
Tensor highpass(Tape& tape, const Tensor& x, std::size_t s);

}  // namespace pansharp::ops
