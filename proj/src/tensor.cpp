#include "ringgnn/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "json.hpp"

namespace ringgnn {

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<Tensor> parents;
  BackwardFn backward;
};
}  // namespace detail

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

ConstMap as_matrix(std::span<const double> s, int rows, int cols) { return {s.data(), rows, cols}; }
MutMap as_matrix(std::span<double> s, int rows, int cols) { return {s.data(), rows, cols}; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

void require_rank(const Tensor& x, int rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(x.shape()));
  }
}

// Trailing square slices of a rank >= 2 tensor: (count, n).
std::pair<int, int> square_slices(const Tensor& x, const char* op) {
  if (x.rank() < 2 || x.dim(x.rank() - 1) != x.dim(x.rank() - 2)) {
    throw DimensionError(std::string(op) + ": expected trailing square dims, got " +
                         shape_string(x.shape()));
  }
  const int n = x.dim(x.rank() - 1);
  return {static_cast<int>(x.size() / (static_cast<std::size_t>(n) * n)), n};
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t s = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("non-positive dimension in shape " + shape_string(shape));
    s *= static_cast<std::size_t>(d);
  }
  return s;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------- Tensor

Tensor Tensor::from_values(Shape shape, std::vector<double> values) {
  if (values.size() != shape_size(shape)) {
    throw DimensionError("tensor of shape " + shape_string(shape) + " needs " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = shape_size(shape);
  return from_values(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

Tensor Tensor::identity(int n) {
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
  return from_values({n, n}, std::move(v));
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                           BackwardFn backward) {
  Tensor out = from_values(std::move(shape), std::move(values));
  const bool needs = std::any_of(parents.begin(), parents.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
  if (needs) {
    out.node_->requires_grad = true;
    out.node_->parents = std::move(parents);
    out.node_->backward = std::move(backward);
  }
  return out;
}

const Shape& Tensor::shape() const { return node_->shape; }

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) throw DimensionError("axis out of range");
  return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->values.size(); }

std::span<const double> Tensor::values() const { return node_->values; }
std::span<double> Tensor::mutable_values() { return node_->values; }

double Tensor::item() const {
  if (size() != 1) throw UsageError("item() on tensor of shape " + shape_string(shape()));
  return node_->values[0];
}

double Tensor::at(int i, int j) const {
  require_rank(*this, 2, "at");
  return node_->values[static_cast<std::size_t>(i) * dim(1) + j];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  if (!is_leaf()) throw UsageError("requires_grad can only be toggled on leaves");
  node_->requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const { return !node_->backward; }

std::span<const double> Tensor::grad() const {
  if (node_->grad.size() != node_->values.size()) node_->grad.assign(node_->values.size(), 0.0);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (node_->grad.size() != node_->values.size()) node_->grad.assign(node_->values.size(), 0.0);
  return node_->grad;
}

void Tensor::accumulate_grad(std::span<const double> g) {
  auto dst = mutable_grad();
  if (g.size() != dst.size()) throw DimensionError("gradient size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::detach() const { return from_values(shape(), node_->values); }

void Tensor::backward() const {
  if (size() != 1) {
    throw UsageError("backward() needs a scalar loss, got shape " + shape_string(shape()));
  }
  if (!requires_grad()) throw UsageError("backward() on a tensor with no recorded graph");

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].node_.get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::Node* node : order) {
    if (node->backward) node->grad.assign(node->values.size(), 0.0);
  }
  if (node_->grad.size() != 1) node_->grad.assign(1, 0.0);
  node_->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward) node->backward(node->grad, node->parents);
  }
}

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               for (auto& t : p) {
                                 if (t.requires_grad()) t.accumulate_grad(g);
                               }
                             });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               if (p[0].requires_grad()) p[0].accumulate_grad(g);
                               if (p[1].requires_grad()) {
                                 auto d = p[1].mutable_grad();
                                 for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
                               }
                             });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               for (int k = 0; k < 2; ++k) {
                                 if (!p[k].requires_grad()) continue;
                                 auto other = p[1 - k].values();
                                 auto d = p[k].mutable_grad();
                                 for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * other[i];
                               }
                             });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v *= factor;
  return Tensor::make_result(x.shape(), std::move(out), {x},
                             [factor](std::span<const double> g, std::vector<Tensor>& p) {
                               auto d = p[0].mutable_grad();
                               for (std::size_t i = 0; i < g.size(); ++i) d[i] += factor * g[i];
                             });
}

Tensor scale(const Tensor& x, const Tensor& factor) {
  if (factor.size() != 1) throw DimensionError("scale: factor must be a single value");
  const double f = factor.item();
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v *= f;
  return Tensor::make_result(x.shape(), std::move(out), {x, factor},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               const double f = p[1].item();
                               auto xv = p[0].values();
                               if (p[0].requires_grad()) {
                                 auto d = p[0].mutable_grad();
                                 for (std::size_t i = 0; i < g.size(); ++i) d[i] += f * g[i];
                               }
                               if (p[1].requires_grad()) {
                                 double s = 0.0;
                                 for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * xv[i];
                                 p[1].mutable_grad()[0] += s;
                               }
                             });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(x.shape(), std::move(out), {x},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               auto xv = p[0].values();
                               auto d = p[0].mutable_grad();
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 if (xv[i] > 0.0) d[i] += g[i];
                               }
                             });
}

// ---------------------------------------------------------------- linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  as_matrix(std::span<double>(out), m, n).noalias() =
      as_matrix(a.values(), m, k) * as_matrix(b.values(), k, n);
  return Tensor::make_result({m, n}, std::move(out), {a, b},
                             [m, k, n](std::span<const double> g, std::vector<Tensor>& p) {
                               auto G = as_matrix(g, m, n);
                               if (p[0].requires_grad()) {
                                 as_matrix(p[0].mutable_grad(), m, k).noalias() +=
                                     G * as_matrix(p[1].values(), k, n).transpose();
                               }
                               if (p[1].requires_grad()) {
                                 as_matrix(p[1].mutable_grad(), k, n).noalias() +=
                                     as_matrix(p[0].values(), m, k).transpose() * G;
                               }
                             });
}

Tensor batched_matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "batched_matmul");
  require_rank(b, 3, "batched_matmul");
  const int c = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  if (b.dim(0) != c || b.dim(1) != k) {
    throw DimensionError("batched_matmul: " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const std::size_t sa = static_cast<std::size_t>(m) * k, sb = static_cast<std::size_t>(k) * n,
                    so = static_cast<std::size_t>(m) * n;
  std::vector<double> out(c * so);
  for (int s = 0; s < c; ++s) {
    as_matrix(std::span<double>(out).subspan(s * so, so), m, n).noalias() =
        as_matrix(a.values().subspan(s * sa, sa), m, k) *
        as_matrix(b.values().subspan(s * sb, sb), k, n);
  }
  return Tensor::make_result(
      {c, m, n}, std::move(out), {a, b},
      [c, m, k, n, sa, sb, so](std::span<const double> g, std::vector<Tensor>& p) {
        for (int s = 0; s < c; ++s) {
          auto G = as_matrix(g.subspan(s * so, so), m, n);
          if (p[0].requires_grad()) {
            as_matrix(p[0].mutable_grad().subspan(s * sa, sa), m, k).noalias() +=
                G * as_matrix(p[1].values().subspan(s * sb, sb), k, n).transpose();
          }
          if (p[1].requires_grad()) {
            as_matrix(p[1].mutable_grad().subspan(s * sb, sb), k, n).noalias() +=
                as_matrix(p[0].values().subspan(s * sa, sa), m, k).transpose() * G;
          }
        }
      });
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  const int m = x.dim(0), n = x.dim(1);
  std::vector<double> out(x.size());
  as_matrix(std::span<double>(out), n, m) = as_matrix(x.values(), m, n).transpose();
  return Tensor::make_result({n, m}, std::move(out), {x},
                             [m, n](std::span<const double> g, std::vector<Tensor>& p) {
                               as_matrix(p[0].mutable_grad(), m, n) += as_matrix(g, n, m).transpose();
                             });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require_rank(x, 2, "affine");
  require_rank(w, 2, "affine");
  const int m = x.dim(0), k = x.dim(1), n = w.dim(1);
  if (w.dim(0) != k || bias.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("affine: x" + shape_string(x.shape()) + " w" + shape_string(w.shape()) +
                         " b" + shape_string(bias.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  auto O = as_matrix(std::span<double>(out), m, n);
  O.noalias() = as_matrix(x.values(), m, k) * as_matrix(w.values(), k, n);
  O.rowwise() += ConstVec(bias.values().data(), n).transpose();
  return Tensor::make_result({m, n}, std::move(out), {x, w, bias},
                             [m, k, n](std::span<const double> g, std::vector<Tensor>& p) {
                               auto G = as_matrix(g, m, n);
                               if (p[0].requires_grad()) {
                                 as_matrix(p[0].mutable_grad(), m, k).noalias() +=
                                     G * as_matrix(p[1].values(), k, n).transpose();
                               }
                               if (p[1].requires_grad()) {
                                 as_matrix(p[1].mutable_grad(), k, n).noalias() +=
                                     as_matrix(p[0].values(), m, k).transpose() * G;
                               }
                               if (p[2].requires_grad()) {
                                 MutVec(p[2].mutable_grad().data(), n) += G.colwise().sum().transpose();
                               }
                             });
}

Tensor symmetrize(const Tensor& x) {
  const auto [count, n] = square_slices(x, "symmetrize");
  const std::size_t s = static_cast<std::size_t>(n) * n;
  std::vector<double> out(x.size());
  for (int c = 0; c < count; ++c) {
    auto X = as_matrix(x.values().subspan(c * s, s), n, n);
    as_matrix(std::span<double>(out).subspan(c * s, s), n, n) = 0.5 * (X + X.transpose());
  }
  return Tensor::make_result(x.shape(), std::move(out), {x},
                             [count, n, s](std::span<const double> g, std::vector<Tensor>& p) {
                               for (int c = 0; c < count; ++c) {
                                 auto G = as_matrix(g.subspan(c * s, s), n, n);
                                 as_matrix(p[0].mutable_grad().subspan(c * s, s), n, n) +=
                                     0.5 * (G + G.transpose());
                               }
                             });
}

// ---------------------------------------------------------------- reductions

Tensor reduce(ReduceKind kind, const Tensor& x) {
  const auto [count, n] = square_slices(x, "reduce");
  const std::size_t s = static_cast<std::size_t>(n) * n;
  std::vector<double> out(count, 0.0);
  auto xv = x.values();
  for (int c = 0; c < count; ++c) {
    double total = 0.0, diag = 0.0;
    for (std::size_t e = 0; e < s; ++e) total += xv[c * s + e];
    for (int i = 0; i < n; ++i) diag += xv[c * s + static_cast<std::size_t>(i) * n + i];
    switch (kind) {
      case ReduceKind::kSumAll: out[c] = total; break;
      case ReduceKind::kSumDiag: out[c] = diag; break;
      case ReduceKind::kSumOffDiag: out[c] = total - diag; break;
    }
  }
  Shape shape(x.shape().begin(), x.shape().end() - 2);
  if (shape.empty()) shape = {1};
  return Tensor::make_result(
      std::move(shape), std::move(out), {x},
      [kind, count, n, s](std::span<const double> g, std::vector<Tensor>& p) {
        auto d = p[0].mutable_grad();
        for (int c = 0; c < count; ++c) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const bool on_diag = i == j;
              const bool hit = kind == ReduceKind::kSumAll || (kind == ReduceKind::kSumDiag) == on_diag;
              if (hit) d[c * s + static_cast<std::size_t>(i) * n + j] += g[c];
            }
          }
        }
      });
}

Tensor sum(const Tensor& x) {
  auto xv = x.values();
  const double total = std::accumulate(xv.begin(), xv.end(), 0.0);
  return Tensor::make_result({1}, {total}, {x},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               for (double& d : p[0].mutable_grad()) d += g[0];
                             });
}

Tensor sum_rows(const Tensor& x) {
  require_rank(x, 2, "sum_rows");
  const int m = x.dim(0), n = x.dim(1);
  std::vector<double> out(n);
  MutVec(out.data(), n) = as_matrix(x.values(), m, n).colwise().sum().transpose();
  return Tensor::make_result({n}, std::move(out), {x},
                             [m, n](std::span<const double> g, std::vector<Tensor>& p) {
                               as_matrix(p[0].mutable_grad(), m, n).rowwise() +=
                                   ConstVec(g.data(), n).transpose();
                             });
}

// ---------------------------------------------------------------- shape plumbing

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape " + shape_string(x.shape()) + " -> " + shape_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return Tensor::make_result(std::move(shape), std::move(out), {x},
                             [](std::span<const double> g, std::vector<Tensor>& p) {
                               p[0].accumulate_grad(g);
                             });
}

Tensor select(const Tensor& x, int index) {
  if (x.rank() < 1 || index < 0 || index >= x.dim(0)) {
    throw DimensionError("select index " + std::to_string(index) + " on " + shape_string(x.shape()));
  }
  const std::size_t stride = x.size() / x.dim(0);
  Shape shape(x.shape().begin() + 1, x.shape().end());
  if (shape.empty()) shape = {1};
  auto part = x.values().subspan(index * stride, stride);
  return Tensor::make_result(std::move(shape), std::vector<double>(part.begin(), part.end()), {x},
                             [index, stride](std::span<const double> g, std::vector<Tensor>& p) {
                               auto d = p[0].mutable_grad().subspan(index * stride, stride);
                               for (std::size_t i = 0; i < stride; ++i) d[i] += g[i];
                             });
}

Tensor stack(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("stack of nothing");
  for (const auto& t : parts) require_same_shape(parts[0], t, "stack");
  const std::size_t stride = parts[0].size();
  std::vector<double> out;
  out.reserve(stride * parts.size());
  for (const auto& t : parts) out.insert(out.end(), t.values().begin(), t.values().end());
  Shape shape{static_cast<int>(parts.size())};
  shape.insert(shape.end(), parts[0].shape().begin(), parts[0].shape().end());
  return Tensor::make_result(std::move(shape), std::move(out), parts,
                             [stride](std::span<const double> g, std::vector<Tensor>& p) {
                               for (std::size_t k = 0; k < p.size(); ++k) {
                                 if (p[k].requires_grad()) p[k].accumulate_grad(g.subspan(k * stride, stride));
                               }
                             });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  int rows = 0;
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto& t : parts) {
    if (Shape(t.shape().begin() + 1, t.shape().end()) != tail) {
      throw DimensionError("concat: trailing shapes differ");
    }
    rows += t.dim(0);
    offsets.push_back(out.size());
    out.insert(out.end(), t.values().begin(), t.values().end());
  }
  Shape shape{rows};
  shape.insert(shape.end(), tail.begin(), tail.end());
  return Tensor::make_result(std::move(shape), std::move(out), parts,
                             [offsets](std::span<const double> g, std::vector<Tensor>& p) {
                               for (std::size_t k = 0; k < p.size(); ++k) {
                                 if (p[k].requires_grad()) p[k].accumulate_grad(g.subspan(offsets[k], p[k].size()));
                               }
                             });
}

Tensor slice(const Tensor& x, int begin, int count) {
  if (x.rank() < 1 || begin < 0 || count < 1 || begin + count > x.dim(0)) {
    throw DimensionError("slice [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") of " + shape_string(x.shape()));
  }
  const std::size_t stride = x.size() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = count;
  auto part = x.values().subspan(begin * stride, count * stride);
  return Tensor::make_result(std::move(shape), std::vector<double>(part.begin(), part.end()), {x},
                             [begin, stride](std::span<const double> g, std::vector<Tensor>& p) {
                               auto d = p[0].mutable_grad().subspan(begin * stride, g.size());
                               for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                             });
}

// ---------------------------------------------------------------- eigen

namespace {

// Cyclic Jacobi on a row-major symmetric matrix. `a` ends up (nearly)
// diagonal; `v` accumulates the rotations column-wise.
void jacobi_eigen(std::vector<double>& a, std::vector<double>& v, int n, int max_sweeps) {
  v.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
  double frob = 0.0;
  for (double x : a) frob += x * x;
  const double target = 1e-12 * std::max(1.0, std::sqrt(frob));

  auto off_norm = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) s += a[i * n + j] * a[i * n + j];
      }
    }
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() < target) return;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = a[q * n + p] = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() >= target) {
    throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                           " sweeps");
  }
}

}  // namespace

Eigh sym_eigh(const Tensor& x, const EighOptions& options) {
  require_rank(x, 2, "sym_eigh");
  const int n = x.dim(0);
  if (x.dim(1) != n) throw DimensionError("sym_eigh needs a square matrix");
  auto xv = x.values();
  double scale_ref = 1.0;
  for (double e : xv) scale_ref = std::max(scale_ref, std::abs(e));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(xv[i * n + j] - xv[j * n + i]) > options.symmetry_tolerance * scale_ref) {
        throw DomainError("sym_eigh: matrix is not symmetric at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
      }
    }
  }
  // Work on the exactly symmetric part.
  std::vector<double> a(xv.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i * n + j] = 0.5 * (xv[i * n + j] + xv[j * n + i]);
  }

  std::vector<double> evals(n);
  auto evecs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  if (options.method == EighMethod::kJacobi) {
    std::vector<double> v;
    jacobi_eigen(a, v, n, options.max_sweeps);
    std::stable_sort(order.begin(), order.end(),
                     [&](int l, int r) { return a[l * n + l] > a[r * n + r]; });
    for (int c = 0; c < n; ++c) {
      evals[c] = a[order[c] * n + order[c]];
      for (int r = 0; r < n; ++r) (*evecs)[r * n + c] = v[r * n + order[c]];
    }
  } else {
    Eigen::SelfAdjointEigenSolver<RowMat> solver(as_matrix(std::span<const double>(a), n, n));
    if (solver.info() != Eigen::Success) throw ConvergenceError("tridiagonal eigensolver failed");
    // Eigen returns ascending order.
    for (int c = 0; c < n; ++c) {
      evals[c] = solver.eigenvalues()(n - 1 - c);
      for (int r = 0; r < n; ++r) (*evecs)[r * n + c] = solver.eigenvectors()(r, n - 1 - c);
    }
  }

  Eigh result;
  result.vectors = Tensor::from_values({n, n}, *evecs);
  result.values = Tensor::make_result(
      {n}, std::move(evals), {x}, [n, evecs](std::span<const double> g, std::vector<Tensor>& p) {
        auto D = as_matrix(p[0].mutable_grad(), n, n);
        auto U = as_matrix(std::span<const double>(*evecs), n, n);
        for (int i = 0; i < n; ++i) {
          if (g[i] != 0.0) D.noalias() += g[i] * U.col(i) * U.col(i).transpose();
        }
      });
  return result;
}

// ---------------------------------------------------------------- parameters

Tensor ParameterSet::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw UsageError("duplicate parameter name '" + name + "'");
  Tensor t = Tensor::from_values(std::move(shape), std::move(values));
  t.set_requires_grad(true);
  items_.push_back({name, t});
  return t;
}

Tensor ParameterSet::add_zeros(const std::string& name, Shape shape) {
  const auto n = shape_size(shape);
  return add(name, std::move(shape), std::vector<double>(n, 0.0));
}

const Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& p : items_) {
    if (p.name == name) return p.tensor;
  }
  throw UsageError("unknown parameter '" + name + "'");
}

Tensor& ParameterSet::get(const std::string& name) {
  for (auto& p : items_) {
    if (p.name == name) return p.tensor;
  }
  throw UsageError("unknown parameter '" + name + "'");
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) p.tensor.zero_grad();
}

std::string ParameterSet::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& p : items_) {
    auto v = p.tensor.values();
    j[p.name] = {{"shape", p.tensor.shape()}, {"values", std::vector<double>(v.begin(), v.end())}};
  }
  return j.dump();
}

void ParameterSet::load_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestionError(std::string("checkpoint: ") + e.what());
  }
  for (auto& p : items_) {
    if (!j.contains(p.name)) throw IngestionError("checkpoint lacks parameter '" + p.name + "'");
    const auto shape = j[p.name]["shape"].get<Shape>();
    const auto values = j[p.name]["values"].get<std::vector<double>>();
    if (shape != p.tensor.shape() || values.size() != p.tensor.size()) {
      throw IngestionError("checkpoint shape mismatch for '" + p.name + "'");
    }
    std::copy(values.begin(), values.end(), p.tensor.mutable_values().begin());
  }
}

void clip_gradients(std::vector<Parameter>& params, double max_abs) {
  for (auto& p : params) {
    for (double& g : p.tensor.mutable_grad()) g = std::clamp(g, -max_abs, max_abs);
  }
}

}  // namespace ringgnn
