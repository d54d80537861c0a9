#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ringgnn/error.hpp"

namespace ringgnn {

using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor;

// Pullback of one recorded operation: receives the gradient flowing into the
// operation's output and accumulates into the parents that require it.
using BackwardFn = std::function<void(std::span<const double> out_grad, std::vector<Tensor>& parents)>;

namespace detail {
struct Node;
}

// Dense fp64 tensor with reverse-mode autodiff. Copies share the underlying
// node, so a Tensor behaves like a handle. A computation graph is recorded
// only when some input requires a gradient; it must be driven from a single
// thread from forward through backward.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from_values(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  static Tensor identity(int n);

  // Result of a differentiable operation. `parents` and `backward` are kept
  // only if at least one parent requires a gradient.
  static Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                            BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  int dim(int axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  // Mutable view, meant for leaves (optimizers, initializers).
  std::span<double> mutable_values();
  double item() const;
  double at(int i, int j) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);
  bool is_leaf() const;

  // Zeros when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void accumulate_grad(std::span<const double> g);
  void zero_grad();

  // Seeds d(self)/d(self) = 1 and accumulates into every reachable leaf.
  // Intermediate gradients are reset on each call; leaf gradients add up.
  void backward() const;

  // Same values, no history.
  Tensor detach() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
// `factor` must hold a single value; it is differentiable.
Tensor scale(const Tensor& x, const Tensor& factor);
// ReLU with subgradient 0 at 0.
Tensor relu(const Tensor& x);

// ---- linear algebra ----
// a[m,k] * b[k,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// Per-slice product: a[c,m,k] * b[c,k,n] -> [c,m,n].
Tensor batched_matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
// x[m,k] * w[k,n] + bias[n] (bias broadcast over rows).
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias);
// (X + X^T)/2 applied to each trailing n x n slice.
Tensor symmetrize(const Tensor& x);

// ---- reductions ----
enum class ReduceKind { kSumAll, kSumDiag, kSumOffDiag };
// Reduces each trailing n x n slice; a rank-2 input yields shape {1}.
Tensor reduce(ReduceKind kind, const Tensor& x);
Tensor sum(const Tensor& x);
// Column sums of x[m,n] -> [n].
Tensor sum_rows(const Tensor& x);

// ---- shape plumbing ----
Tensor reshape(const Tensor& x, Shape shape);
// Slice `index` of the leading axis.
Tensor select(const Tensor& x, int index);
// Stacks equally shaped tensors along a new leading axis.
Tensor stack(const std::vector<Tensor>& parts);
// Concatenates along the leading axis.
Tensor concat(const std::vector<Tensor>& parts);
// Rows [begin, begin + count) of the leading axis.
Tensor slice(const Tensor& x, int begin, int count);

// ---- symmetric eigendecomposition ----
enum class EighMethod {
  kJacobi,       // cyclic Jacobi rotations (reference)
  kTridiagonal,  // Householder tridiagonalisation + implicit symmetric QR
};

struct EighOptions {
  EighMethod method = EighMethod::kJacobi;
  int max_sweeps = 100;
  double symmetry_tolerance = 1e-9;
};

struct Eigh {
  Tensor values;   // [n], descending
  Tensor vectors;  // [n,n], column i pairs with values[i]; not differentiable
};

// Eigen-decomposition of a symmetric matrix. Only eigenvalue gradients are
// propagated: d lambda_i = u_i u_i^T : dX.
Eigh sym_eigh(const Tensor& x, const EighOptions& options = {});

// ---- parameters ----
struct Parameter {
  std::string name;
  Tensor tensor;
};

class ParameterSet {
 public:
  // Registers a fresh trainable leaf; names must be unique.
  Tensor add(const std::string& name, Shape shape, std::vector<double> values);
  Tensor add_zeros(const std::string& name, Shape shape);

  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  bool contains(const std::string& name) const;

  std::vector<Parameter>& items() { return items_; }
  const std::vector<Parameter>& items() const { return items_; }
  std::size_t scalar_count() const;

  void zero_grad();

  // {"name": {"shape": [...], "values": [...]}, ...}
  std::string to_json() const;
  // Overwrites values of existing parameters; shapes must match.
  void load_json(const std::string& text);

 private:
  std::vector<Parameter> items_;
};

// Clamps every gradient entry to [-max_abs, max_abs].
void clip_gradients(std::vector<Parameter>& params, double max_abs);

}  // namespace ringgnn
