#include "pansharp/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "pansharp/errors.hpp"

namespace pansharp {

namespace {

std::uint64_t next_node_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::shared_ptr<detail::TensorNode> make_node(Shape shape, std::vector<double> values,
                                              bool requires_grad) {
  if (values.size() != shape.numel()) {
    throw ShapeError("tensor values length " + std::to_string(values.size()) +
                     " does not match shape " + shape.str());
  }
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = shape;
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  node->id = next_node_id();
  return node;
}

void check_finite(const char* op, const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

}  // namespace

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

std::vector<double>& detail::TensorNode::ensure_grad() {
  if (grad.empty()) grad.assign(values.size(), 0.0);
  return grad;
}

// --- Tensor ------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return Tensor(make_node(shape, std::vector<double>(shape.numel(), 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  return Tensor(make_node(shape, std::vector<double>(shape.numel(), value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_finite("Tensor::from", values);
  return Tensor(make_node(shape, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(Shape{}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) throw InvalidArgument("use of an undefined tensor");
  return node_->shape;
}

std::uint64_t Tensor::id() const { return node_ ? node_->id : 0; }

std::span<const double> Tensor::values() const {
  if (!node_) throw InvalidArgument("use of an undefined tensor");
  return node_->values;
}

std::span<double> Tensor::mutable_values() {
  if (!node_) throw InvalidArgument("use of an undefined tensor");
  return node_->values;
}

double Tensor::item() const {
  if (numel() != 1) throw InvalidArgument("item() on a tensor of shape " + shape().str());
  return node_->values[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!node_) throw InvalidArgument("use of an undefined tensor");
  node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!node_) throw InvalidArgument("use of an undefined tensor");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) throw InvalidArgument("use of an undefined tensor");
  return node_->ensure_grad();
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  if (!node_) return {};
  return Tensor(make_node(node_->shape, node_->values, node_->requires_grad));
}

std::vector<double>& grad_buffer(const Tensor& t) { return t.node()->ensure_grad(); }

// --- Tape --------------------------------------------------------------

Tensor Tape::make_output(const char* op, Shape shape, std::vector<double> values,
                         std::initializer_list<const Tensor*> inputs) {
  check_finite(op, values);
  bool needs = false;
  if (recording_) {
    for (const Tensor* t : inputs) needs = needs || t->requires_grad();
  }
  return Tensor(make_node(shape, std::move(values), needs));
}

Tensor Tape::make_output(const char* op, Shape shape, std::vector<double> values,
                         std::span<const Tensor> inputs) {
  check_finite(op, values);
  bool needs = false;
  if (recording_) {
    for (const Tensor& t : inputs) needs = needs || t.requires_grad();
  }
  return Tensor(make_node(shape, std::move(values), needs));
}

void Tape::record(const Tensor& out, std::string op, BackwardFn fn) {
  if (!recording_ || !out.requires_grad()) return;
  if (consumed_) {
    throw std::logic_error("tape already ran backward; reset() it before recording again");
  }
  records_.push_back(Record{out.node(), std::move(op), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw InvalidArgument("backward: loss must be a scalar tensor, got shape " +
                          (loss.defined() ? loss.shape().str() : std::string("<undefined>")));
  }
  if (consumed_) {
    throw std::logic_error(
        "backward: this tape was already run; gradients would accumulate twice (call reset())");
  }
  if (!loss.requires_grad()) {
    throw InvalidArgument("backward: loss does not depend on any tensor requiring gradients");
  }
  consumed_ = true;
  auto& seed = loss.node()->ensure_grad();
  seed[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->fn();
  }
}

void Tape::reset() {
  records_.clear();
  consumed_ = false;
}

}  // namespace pansharp
