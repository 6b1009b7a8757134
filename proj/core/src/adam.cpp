#include "pansharp/adam.hpp"

#include <cmath>

#include "pansharp/errors.hpp"

namespace pansharp {

void adam_update(std::span<double> param, std::span<const double> grad, AdamSlot& slot,
                 const AdamHyper& h, std::uint64_t t) {
  if (t == 0) throw InvalidArgument("adam_update: step counter must be >= 1");
  if (slot.m.empty()) slot.m.assign(param.size(), 0.0);
  if (slot.v.empty()) slot.v.assign(param.size(), 0.0);
  if (grad.size() != param.size() || slot.m.size() != param.size() ||
      slot.v.size() != param.size()) {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    slot.m[i] = h.beta1 * slot.m[i] + (1.0 - h.beta1) * g;
    slot.v[i] = h.beta2 * slot.v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = slot.m[i] / bc1;
    const double v_hat = slot.v[i] / bc2;
    param[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

void Adam::step(std::span<Tensor> params) {
  if (state_.slots.empty()) {
    state_.slots.resize(params.size());
  } else if (state_.slots.size() != params.size()) {
    throw ShapeError("Adam::step: parameter list changed size between steps");
  }
  ++state_.t;
  std::vector<double> zeros;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    std::span<const double> g;
    if (p.has_grad()) {
      g = p.grad();
    } else {
      zeros.assign(p.numel(), 0.0);
      g = zeros;
    }
    adam_update(p.mutable_values(), g, state_.slots[i], state_.hyper, state_.t);
  }
}

}  // namespace pansharp
