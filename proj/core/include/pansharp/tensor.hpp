#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pansharp {

/// N x C x H x W extent. Parameters of lower rank are stored left-aligned
/// with trailing ones (a bias of length k is {k, 1, 1, 1}).
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a gradient reaches the node
  bool requires_grad = false;
  std::uint64_t id = 0;

  std::vector<double>& ensure_grad();
};

}  // namespace detail

/// Reference-semantics handle to a dense f64 array that can take part in a
/// gradient tape. Copies share storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const { return shape().numel(); }
  std::uint64_t id() const;

  std::span<const double> values() const;
  /// Direct write access, for parameter updates and test hooks. Never call
  /// on a tensor whose value a recorded backward rule still depends on.
  std::span<double> mutable_values();
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  Tensor clone() const;

  /// Internal: node access for operation implementations.
  const std::shared_ptr<detail::TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  friend class Tape;

  std::shared_ptr<detail::TensorNode> node_;
};

/// Ordered record of differentiable operations. Recording order is a
/// topological order of the graph; backward() replays it in reverse once.
///
/// A tape with recording disabled evaluates operations without keeping
/// intermediate activations alive (inference mode).
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return records_.size(); }
  bool consumed() const { return consumed_; }

  /// Creates the output node of operation `op`. The output requires a
  /// gradient when recording is on and any input does. Throws NumericError
  /// if a value is not finite.
  Tensor make_output(const char* op, Shape shape, std::vector<double> values,
                     std::initializer_list<const Tensor*> inputs);
  Tensor make_output(const char* op, Shape shape, std::vector<double> values,
                     std::span<const Tensor> inputs);

  /// Records the backward rule of an operation whose output is `out`. The
  /// rule reads out's gradient and accumulates into its inputs' gradients.
  /// No-op when `out` does not require a gradient.
  void record(const Tensor& out, std::string op, BackwardFn fn);

  /// Populates gradients of every requires_grad tensor reachable from the
  /// scalar `loss`. Leaf gradients accumulate; call zero_grad on parameters
  /// between steps. A tape can be run backward once; reset() to reuse it.
  void backward(const Tensor& loss);

  void reset();

 private:
  struct Record {
    std::shared_ptr<detail::TensorNode> output;
    std::string op;
    BackwardFn fn;
  };

  bool recording_;
  bool consumed_ = false;
  std::vector<Record> records_;
};

/// Gradient buffer of `t` (allocated on first use).
std::vector<double>& grad_buffer(const Tensor& t);

}  // namespace pansharp
