#pragma once

// Dense row-major tensors with tape-free reverse-mode differentiation.
//
// Every op records its parents and a backward closure on the result node;
// Tensor::backward() walks the graph in reverse topological order. Tensors
// share their node, so copies alias. Leaf parameters keep accumulating
// gradients across backward calls until zero_grad().

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipc/errors.hpp"

namespace ipc {

class Rng;

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class Tensor {
 public:
  struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() {
      if (grad.size() != data.size()) {
        grad.assign(data.size(), T(0));
      }
    }
  };

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }
  /// Last extent.
  std::size_t cols() const { return node_->shape.back(); }
  /// Product of all extents except the last.
  std::size_t rows() const { return node_->shape.empty() ? 0 : numel() / cols(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  std::vector<T> to_vector() const { return node_->data; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<T> grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  std::span<const T> grad() const { return node_->grad; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }

  T item() const;
  T at(std::size_t i) const { return node_->data.at(i); }
  T at(std::size_t r, std::size_t c) const { return node_->data.at(r * cols() + c); }

  bool all_finite() const;

  /// Seeds d(self)/d(self) = 1 and propagates into every reachable node that requires grad.
  void backward();
  void zero_grad() { node_->grad.clear(); }

  /// Same values, no history.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;

  template <typename U>
  friend Tensor<U> make_result(Shape shape, std::vector<U> values,
                               std::initializer_list<const Tensor<U>*> parents,
                               std::function<void(typename Tensor<U>::Node&)> backward);
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Head-averaged attention weights, row-major [queries x keys].
struct AttentionMap {
  std::size_t queries = 0;
  std::size_t keys = 0;
  std::vector<double> weights;
};

// ---- ops ------------------------------------------------------------------
// Matrices are 2-D tensors; row-wise ops treat every leading extent as rows.

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// x[m x n] + bias[n], bias broadcast over rows.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

template <typename T>
Tensor<T> softmax_last_dim(const Tensor<T>& x);

/// Per-row normalization over the last extent, then gamma * xhat + beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-5));

/// Multi-head scaled dot-product attention over already projected q/k/v.
/// Keys at index >= valid_keys are masked out (their logits are -inf). Rows
/// with no valid key produce zeros. When map is non-null the head-averaged
/// weights are written to it.
template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    std::size_t heads, std::optional<std::size_t> valid_keys = std::nullopt,
                    AttentionMap* map = nullptr);

/// Inverted dropout: identity when !train or rate == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, bool train, Rng& rng);

/// Gathers rows of a 2-D tensor; backward scatter-adds.
template <typename T>
Tensor<T> take_rows(const Tensor<T>& x, std::span<const std::size_t> index);

/// Stacks 2-D tensors with equal column count.
template <typename T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

/// Mean over rows of a 2-D tensor, result [1 x n].
template <typename T>
Tensor<T> mean_rows(const Tensor<T>& x);

/// Zeroes rows >= keep of a 2-D tensor.
template <typename T>
Tensor<T> zero_tail_rows(const Tensor<T>& x, std::size_t keep);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

/// Sum of a list of scalars.
template <typename T>
Tensor<T> add_all(std::span<const Tensor<T>> terms);

/// Summed binary cross-entropy on probabilities, logs clamped at eps.
template <typename T>
Tensor<T> bce(const Tensor<T>& probs, std::span<const T> targets, T eps = T(1e-12));

/// Summed binary cross-entropy computed from logits in the stable form.
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, std::span<const T> targets);

}  // namespace ipc
