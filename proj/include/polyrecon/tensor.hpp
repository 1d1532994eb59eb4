#pragma once

#include "polyrecon/common.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace polyrecon::nn {

template <class S>
using ArrayX = Eigen::Array<S, Eigen::Dynamic, 1>;
template <class S>
using MatrixRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MatMap = Eigen::Map<MatrixRM<S>>;
template <class S>
using ConstMatMap = Eigen::Map<const MatrixRM<S>>;

// Forward/backward NaN-Inf guards; on by default, switchable for benchmarks.
inline bool& runtime_checks() {
  static bool enabled = true;
  return enabled;
}

inline long dims_size(const std::vector<long>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<long>());
}

// Graph node. `value` is shared so parameter leaves can alias the stores'
// storage without copying; `grad` is always owned by the node, which keeps
// concurrent passes over shared parameters race-free.
template <class S>
struct Node {
  std::vector<long> dims;
  std::shared_ptr<ArrayX<S>> value;
  ArrayX<S> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::function<void(Node<S>&)> backward;

  long size() const { return dims_size(dims); }
  long cols() const { return dims.empty() ? 1 : dims.back(); }
  long rows() const { return dims.empty() ? 1 : size() / cols(); }

  void ensure_grad() {
    if (grad.size() != value->size()) grad = ArrayX<S>::Zero(value->size());
  }
};

template <class S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<S>> node) : node_(std::move(node)) {}

  static Tensor zeros(std::vector<long> dims, bool requires_grad = false) {
    auto node = std::make_shared<Node<S>>();
    node->value = std::make_shared<ArrayX<S>>(ArrayX<S>::Zero(dims_size(dims)));
    node->dims = std::move(dims);
    node->requires_grad = requires_grad;
    return Tensor(node);
  }

  static Tensor constant(std::vector<long> dims, const ArrayX<S>& values) {
    if (dims_size(dims) != values.size()) raise(Errc::ShapeMismatch, "constant: size mismatch");
    auto node = std::make_shared<Node<S>>();
    node->value = std::make_shared<ArrayX<S>>(values);
    node->dims = std::move(dims);
    return Tensor(node);
  }

  static Tensor from_matrix(const MatrixRM<S>& m, bool requires_grad = false) {
    Tensor t = zeros({m.rows(), m.cols()}, requires_grad);
    t.mat() = m;
    return t;
  }

  static Tensor scalar_value(S v) {
    Tensor t = zeros({1});
    (*t.node()->value)[0] = v;
    return t;
  }

  // Leaf aliasing external storage (parameters).
  static Tensor leaf_view(std::vector<long> dims, std::shared_ptr<ArrayX<S>> storage,
                          bool requires_grad) {
    if (dims_size(dims) != storage->size()) raise(Errc::ShapeMismatch, "leaf_view: size mismatch");
    auto node = std::make_shared<Node<S>>();
    node->value = std::move(storage);
    node->dims = std::move(dims);
    node->requires_grad = requires_grad;
    return Tensor(node);
  }

  bool defined() const { return node_ != nullptr; }
  const std::shared_ptr<Node<S>>& node() const { return node_; }
  const std::vector<long>& dims() const { return node_->dims; }
  long size() const { return node_->size(); }
  long rows() const { return node_->rows(); }
  long cols() const { return node_->cols(); }
  bool requires_grad() const { return node_->requires_grad; }

  ArrayX<S>& array() const { return *node_->value; }
  MatMap<S> mat() const { return MatMap<S>(node_->value->data(), rows(), cols()); }
  S scalar() const {
    if (size() != 1) raise(Errc::ShapeMismatch, "scalar() on non-scalar tensor");
    return (*node_->value)[0];
  }

  ArrayX<S>& grad_array() const {
    node_->ensure_grad();
    return node_->grad;
  }
  MatMap<S> grad_mat() const {
    node_->ensure_grad();
    return MatMap<S>(node_->grad.data(), rows(), cols());
  }

 private:
  std::shared_ptr<Node<S>> node_;
};

namespace detail {

template <class S>
void check_finite_value(const char* op, const ArrayX<S>& values) {
  if (runtime_checks() && !values.allFinite()) {
    raise(Errc::NonFinite, std::string("non-finite values in forward of '") + op + "'");
  }
}

template <class S>
void check_finite_grad(const char* op, const ArrayX<S>& values) {
  if (runtime_checks() && !values.allFinite()) {
    raise(Errc::NonFinite, std::string("non-finite values in backward of '") + op + "'");
  }
}

// Accumulates `update` into the parent's gradient if it participates in
// differentiation.
template <class S, class Expr>
void accumulate(const std::shared_ptr<Node<S>>& parent, const Expr& update) {
  if (!parent->requires_grad) return;
  parent->ensure_grad();
  parent->grad += update;
}

template <class S, class Expr>
void accumulate_mat(const std::shared_ptr<Node<S>>& parent, const Expr& update) {
  if (!parent->requires_grad) return;
  parent->ensure_grad();
  MatMap<S>(parent->grad.data(), parent->rows(), parent->cols()) += update;
}

template <class S>
Tensor<S> make_op(const char* op, std::vector<long> dims,
                  std::vector<std::shared_ptr<Node<S>>> parents, ArrayX<S> value,
                  std::function<void(Node<S>&)> backward) {
  auto node = std::make_shared<Node<S>>();
  node->dims = std::move(dims);
  node->value = std::make_shared<ArrayX<S>>(std::move(value));
  node->op = op;
  check_finite_value<S>(op, *node->value);
  for (const auto& p : parents) node->requires_grad |= p->requires_grad;
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor<S>(node);
}

}  // namespace detail

// Reverse-mode sweep from a scalar loss.
template <class S>
void backward(const Tensor<S>& loss) {
  if (loss.size() != 1) raise(Errc::ShapeMismatch, "backward() needs a scalar loss");
  if (!loss.node()->requires_grad) return;

  // Iterative DFS; reverse post-order is a topological order of the DAG.
  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> seen{loss.node().get()};
  std::vector<std::pair<Node<S>*, std::size_t>> stack{{loss.node().get(), 0}};
  while (!stack.empty()) {
    auto& [node, child] = stack.back();
    if (child < node->parents.size()) {
      Node<S>* next = node->parents[child++].get();
      if (next->requires_grad && seen.insert(next).second) stack.emplace_back(next, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->grad[0] = S(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<S>* node = *it;
    if (!node->backward) continue;
    node->ensure_grad();
    detail::check_finite_grad<S>(node->op, node->grad);
    node->backward(*node);
  }
}

}  // namespace polyrecon::nn
