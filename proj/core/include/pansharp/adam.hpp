#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pansharp/tensor.hpp"

namespace pansharp {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment buffers of one parameter.
struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamState {
  AdamHyper hyper;
  std::uint64_t t = 0;
  std::vector<AdamSlot> slots;
};

/// Updates one parameter in place for step number `t` (1-based, already
/// incremented): bias-corrected Adam.
void adam_update(std::span<double> param, std::span<const double> grad, AdamSlot& slot,
                 const AdamHyper& hyper, std::uint64_t t);

/// Adam over a fixed, ordered list of parameters. Parameters without a
/// gradient buffer are treated as having a zero gradient.
class Adam {
 public:
  explicit Adam(AdamHyper hyper = {}) { state_.hyper = hyper; }

  void step(std::span<Tensor> params);
  void set_lr(double lr) { state_.hyper.lr = lr; }
  double lr() const { return state_.hyper.lr; }

  const AdamState& state() const { return state_; }
  AdamState& state() { return state_; }

 private:
  AdamState state_;
};

}  // namespace pansharp
