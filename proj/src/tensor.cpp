#include "ipc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ipc/rng.hpp"

namespace ipc {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out << (i ? "x" : "") << shape[i];
  }
  out << ']';
  return out.str();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  for (auto e : shape) {
    if (e == 0) {
      throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
    }
  }
  if (shape.empty()) {
    throw DimensionError("tensor needs at least one extent");
  }
  auto node = std::make_shared<Node>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  auto t = zeros(std::move(shape), requires_grad);
  if (values.size() != t.numel()) {
    throw DimensionError("data length " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(t.shape()));
  }
  t.node_->data = std::move(values);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  }
  return node_->data[0];
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(node_->data.begin(), node_->data.end(),
                     [](T v) { return std::isfinite(v); });
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return from(shape(), node_->data, false);
}

template <typename T>
void Tensor<T>::backward() {
  if (numel() != 1) {
    throw DimensionError("backward() needs a scalar, got " + shape_str(shape()));
  }
  // Iterative post-order DFS to get a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  node_->ensure_grad();
  node_->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && !node->grad.empty()) {
      node->backward_fn(*node);
    }
  }
}

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values,
                      std::initializer_list<const Tensor<T>*> parents,
                      std::function<void(typename Tensor<T>::Node&)> backward) {
  auto node = std::make_shared<typename Tensor<T>::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto* p : parents) {
      needs = needs || p->requires_grad();
    }
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto* p : parents) {
      node->parents.push_back(p->node_ptr());
    }
    node->backward_fn = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

namespace {

template <typename T>
using NodeT = typename Tensor<T>::Node;

/// Grad buffer of parent i, or nullptr when it does not need one.
template <typename T>
T* parent_grad(NodeT<T>& self, std::size_t i) {
  auto& p = *self.parents[i];
  if (!p.requires_grad) {
    return nullptr;
  }
  p.ensure_grad();
  return p.grad.data();
}

template <typename T>
const T* parent_data(NodeT<T>& self, std::size_t i) {
  return self.parents[i]->data.data();
}

void require_2d(const Shape& s, const char* op) {
  if (s.size() != 2) {
    throw DimensionError(std::string(op) + " expects a 2-D tensor, got " + shape_str(s));
  }
}

// c[m x n] += a[m x k] * b[k x n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

// c[m x k] += a[m x n] * b[k x n]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      T acc = T(0);
      for (std::size_t j = 0; j < n; ++j) {
        acc += arow[j] * brow[j];
      }
      c[i * k + p] += acc;
    }
  }
}

// c[k x n] += a[m x k]^T * b[m x n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_2d(a.shape(), "matmul");
  require_2d(b.shape(), "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul inner extents differ: " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<T> out(m * n, T(0));
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_result<T>({m, n}, std::move(out), {&a, &b}, [m, k, n](NodeT<T>& self) {
    const T* g = self.grad.data();
    if (T* ga = parent_grad<T>(self, 0)) {
      gemm_nt(g, parent_data<T>(self, 1), ga, m, n, k);
    }
    if (T* gb = parent_grad<T>(self, 1)) {
      gemm_tn(parent_data<T>(self, 0), g, gb, m, k, n);
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add shape mismatch: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data()[i] + b.data()[i];
  }
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [](NodeT<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (T* g = parent_grad<T>(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          g[i] += self.grad[i];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  const std::size_t n = x.cols(), m = x.rows();
  if (bias.numel() != n) {
    throw DimensionError("bias of " + shape_str(bias.shape()) + " does not fit " +
                         shape_str(x.shape()));
  }
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = x.data()[i * n + j] + bias.data()[j];
    }
  }
  return make_result<T>(x.shape(), std::move(out), {&x, &bias}, [m, n](NodeT<T>& self) {
    if (T* gx = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < m * n; ++i) {
        gx[i] += self.grad[i];
      }
    }
    if (T* gb = parent_grad<T>(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          gb[j] += self.grad[i * n + j];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x.data()[i] * factor;
  }
  return make_result<T>(x.shape(), std::move(out), {&x}, [factor](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i] += self.grad[i] * factor;
      }
    }
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x.data()[i] > T(0) ? x.data()[i] : T(0);
  }
  return make_result<T>(x.shape(), std::move(out), {&x}, [](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (self.data[i] > T(0)) {
          g[i] += self.grad[i];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T z = x.data()[i];
    if (z >= T(0)) {
      out[i] = T(1) / (T(1) + std::exp(-z));
    } else {
      const T e = std::exp(z);
      out[i] = e / (T(1) + e);
    }
  }
  return make_result<T>(x.shape(), std::move(out), {&x}, [](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const T s = self.data[i];
        g[i] += self.grad[i] * s * (T(1) - s);
      }
    }
  });
}

template <typename T>
Tensor<T> softmax_last_dim(const Tensor<T>& x) {
  if (!x.defined() || x.numel() == 0) {
    throw DimensionError("softmax of an empty tensor");
  }
  const std::size_t n = x.cols(), m = x.rows();
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = x.data().data() + i * n;
    T* o = out.data() + i * n;
    const T mx = *std::max_element(row, row + n);
    T total = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(row[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      o[j] /= total;
    }
  }
  return make_result<T>(x.shape(), std::move(out), {&x}, [m, n](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        const T* y = self.data.data() + i * n;
        const T* gy = self.grad.data() + i * n;
        T dot = T(0);
        for (std::size_t j = 0; j < n; ++j) {
          dot += y[j] * gy[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
          g[i * n + j] += y[j] * (gy[j] - dot);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const std::size_t n = x.cols(), m = x.rows();
  if (n < 2) {
    throw DimensionError("layer_norm needs width >= 2, got " + shape_str(x.shape()));
  }
  if (gamma.numel() != n || beta.numel() != n) {
    throw DimensionError("layer_norm affine width does not match " + shape_str(x.shape()));
  }
  std::vector<T> out(x.numel());
  auto xhat = std::make_shared<std::vector<T>>(x.numel());
  auto inv_std = std::make_shared<std::vector<T>>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = x.data().data() + i * n;
    T mean = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      mean += row[j];
    }
    mean /= T(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      var += (row[j] - mean) * (row[j] - mean);
    }
    var /= T(n);
    const T inv = T(1) / std::sqrt(var + eps);
    (*inv_std)[i] = inv;
    for (std::size_t j = 0; j < n; ++j) {
      const T xh = (row[j] - mean) * inv;
      (*xhat)[i * n + j] = xh;
      out[i * n + j] = gamma.data()[j] * xh + beta.data()[j];
    }
  }
  return make_result<T>(
      x.shape(), std::move(out), {&x, &gamma, &beta}, [m, n, xhat, inv_std](NodeT<T>& self) {
        const T* gy = self.grad.data();
        const T* gam = parent_data<T>(self, 1);
        T* gx = parent_grad<T>(self, 0);
        T* gg = parent_grad<T>(self, 1);
        T* gb = parent_grad<T>(self, 2);
        std::vector<T> dxhat(n);
        for (std::size_t i = 0; i < m; ++i) {
          const T* xh = xhat->data() + i * n;
          const T* g = gy + i * n;
          T mean_d = T(0), mean_dx = T(0);
          for (std::size_t j = 0; j < n; ++j) {
            if (gg) {
              gg[j] += g[j] * xh[j];
            }
            if (gb) {
              gb[j] += g[j];
            }
            dxhat[j] = g[j] * gam[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xh[j];
          }
          if (gx) {
            mean_d /= T(n);
            mean_dx /= T(n);
            const T inv = (*inv_std)[i];
            for (std::size_t j = 0; j < n; ++j) {
              gx[i * n + j] += inv * (dxhat[j] - mean_d - xh[j] * mean_dx);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, std::size_t heads,
                    std::optional<std::size_t> valid_keys, AttentionMap* map) {
  require_2d(q.shape(), "attention");
  require_2d(k.shape(), "attention");
  require_2d(v.shape(), "attention");
  const std::size_t sq = q.shape()[0], sk = k.shape()[0], h = q.shape()[1];
  if (k.shape()[1] != h || v.shape()[1] != h || v.shape()[0] != sk) {
    throw DimensionError("attention operand shapes disagree: q" + shape_str(q.shape()) + " k" +
                         shape_str(k.shape()) + " v" + shape_str(v.shape()));
  }
  if (heads == 0 || h % heads != 0) {
    throw ConfigError("attention width " + std::to_string(h) + " not divisible by heads " +
                      std::to_string(heads));
  }
  const std::size_t valid = std::min(valid_keys.value_or(sk), sk);
  const std::size_t dh = h / heads;
  const T scale_factor = T(1) / std::sqrt(T(dh));
  // probs[head][i][j], j < valid
  auto probs = std::make_shared<std::vector<T>>(heads * sq * std::max<std::size_t>(valid, 1), T(0));
  std::vector<T> out(sq * h, T(0));
  const T* Q = q.data().data();
  const T* K = k.data().data();
  const T* V = v.data().data();
  if (valid > 0) {
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const std::size_t off = hd * dh;
      for (std::size_t i = 0; i < sq; ++i) {
        T* p = probs->data() + (hd * sq + i) * valid;
        const T* qi = Q + i * h + off;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < valid; ++j) {
          const T* kj = K + j * h + off;
          T s = T(0);
          for (std::size_t c = 0; c < dh; ++c) {
            s += qi[c] * kj[c];
          }
          p[j] = s * scale_factor;
          mx = std::max(mx, p[j]);
        }
        T total = T(0);
        for (std::size_t j = 0; j < valid; ++j) {
          p[j] = std::exp(p[j] - mx);
          total += p[j];
        }
        T* oi = out.data() + i * h + off;
        for (std::size_t j = 0; j < valid; ++j) {
          p[j] /= total;
          const T* vj = V + j * h + off;
          for (std::size_t c = 0; c < dh; ++c) {
            oi[c] += p[j] * vj[c];
          }
        }
      }
    }
  }
  if (map) {
    map->queries = sq;
    map->keys = sk;
    map->weights.assign(sq * sk, 0.0);
    for (std::size_t hd = 0; hd < heads && valid > 0; ++hd) {
      for (std::size_t i = 0; i < sq; ++i) {
        for (std::size_t j = 0; j < valid; ++j) {
          map->weights[i * sk + j] +=
              static_cast<double>((*probs)[(hd * sq + i) * valid + j]) / static_cast<double>(heads);
        }
      }
    }
  }
  return make_result<T>(
      {sq, h}, std::move(out), {&q, &k, &v},
      [sq, h, heads, dh, valid, scale_factor, probs](NodeT<T>& self) {
        if (valid == 0) {
          return;
        }
        const T* Q = parent_data<T>(self, 0);
        const T* K = parent_data<T>(self, 1);
        const T* V = parent_data<T>(self, 2);
        T* gq = parent_grad<T>(self, 0);
        T* gk = parent_grad<T>(self, 1);
        T* gv = parent_grad<T>(self, 2);
        const T* go = self.grad.data();
        std::vector<T> dp(valid);
        for (std::size_t hd = 0; hd < heads; ++hd) {
          const std::size_t off = hd * dh;
          for (std::size_t i = 0; i < sq; ++i) {
            const T* p = probs->data() + (hd * sq + i) * valid;
            const T* goi = go + i * h + off;
            T dot = T(0);
            for (std::size_t j = 0; j < valid; ++j) {
              const T* vj = V + j * h + off;
              T s = T(0);
              for (std::size_t c = 0; c < dh; ++c) {
                s += goi[c] * vj[c];
              }
              dp[j] = s;
              dot += p[j] * s;
              if (gv) {
                T* gvj = gv + j * h + off;
                for (std::size_t c = 0; c < dh; ++c) {
                  gvj[c] += p[j] * goi[c];
                }
              }
            }
            const T* qi = Q + i * h + off;
            for (std::size_t j = 0; j < valid; ++j) {
              const T ds = p[j] * (dp[j] - dot) * scale_factor;
              if (gq) {
                const T* kj = K + j * h + off;
                T* gqi = gq + i * h + off;
                for (std::size_t c = 0; c < dh; ++c) {
                  gqi[c] += ds * kj[c];
                }
              }
              if (gk) {
                T* gkj = gk + j * h + off;
                for (std::size_t c = 0; c < dh; ++c) {
                  gkj[c] += ds * qi[c];
                }
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, bool train, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!train || rate == 0.0) {
    return x;
  }
  const T keep_scale = T(1.0 / (1.0 - rate));
  auto mask = std::make_shared<std::vector<T>>(x.numel());
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() < rate ? T(0) : keep_scale;
    out[i] = x.data()[i] * (*mask)[i];
  }
  return make_result<T>(x.shape(), std::move(out), {&x}, [mask](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i] += self.grad[i] * (*mask)[i];
      }
    }
  });
}

template <typename T>
Tensor<T> take_rows(const Tensor<T>& x, std::span<const std::size_t> index) {
  require_2d(x.shape(), "take_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (index.empty()) {
    throw DimensionError("take_rows with an empty index");
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<T> out(idx.size() * n);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= m) {
      throw IndexError("row " + std::to_string(idx[r]) + " out of range for " +
                       shape_str(x.shape()));
    }
    std::copy_n(x.data().data() + idx[r] * n, n, out.data() + r * n);
  }
  const std::size_t count = idx.size();
  return make_result<T>({count, n}, std::move(out), {&x},
                        [idx = std::move(idx), n](NodeT<T>& self) {
                          if (T* g = parent_grad<T>(self, 0)) {
                            for (std::size_t r = 0; r < idx.size(); ++r) {
                              for (std::size_t j = 0; j < n; ++j) {
                                g[idx[r] * n + j] += self.grad[r * n + j];
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts) {
  if (parts.empty()) {
    throw DimensionError("concat_rows of nothing");
  }
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  for (const auto& p : parts) {
    require_2d(p.shape(), "concat_rows");
    if (p.cols() != n) {
      throw DimensionError("concat_rows column mismatch");
    }
    m += p.rows();
  }
  std::vector<T> out;
  out.reserve(m * n);
  for (const auto& p : parts) {
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parts) {
      needs = needs || p.requires_grad();
    }
  }
  Tensor<T> result = Tensor<T>::from({m, n}, std::move(out));
  if (!needs) {
    return result;
  }
  auto& rn = *result.node();
  rn.requires_grad = true;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    rn.parents.push_back(p.node_ptr());
    offsets.push_back(off);
    off += p.numel();
  }
  rn.backward_fn = [offsets](NodeT<T>& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (T* g = parent_grad<T>(self, i)) {
        const std::size_t len = self.parents[i]->data.size();
        for (std::size_t j = 0; j < len; ++j) {
          g[j] += self.grad[offsets[i] + j];
        }
      }
    }
  };
  return result;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  return make_result<T>(std::move(shape), x.to_vector(), {&x}, [](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> mean_rows(const Tensor<T>& x) {
  require_2d(x.shape(), "mean_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  std::vector<T> out(n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j] += x.data()[i * n + j];
    }
  }
  for (auto& o : out) {
    o /= T(m);
  }
  return make_result<T>({1, n}, std::move(out), {&x}, [m, n](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          g[i * n + j] += self.grad[j] / T(m);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> zero_tail_rows(const Tensor<T>& x, std::size_t keep) {
  require_2d(x.shape(), "zero_tail_rows");
  const std::size_t n = x.shape()[1];
  const std::size_t cut = std::min(keep, x.shape()[0]) * n;
  std::vector<T> out(x.numel(), T(0));
  std::copy_n(x.data().data(), cut, out.data());
  return make_result<T>(x.shape(), std::move(out), {&x}, [cut](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      for (std::size_t i = 0; i < cut; ++i) {
        g[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.data()) {
    total += v;
  }
  return make_result<T>({1}, {total}, {&x}, [](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      const std::size_t len = self.parents[0]->data.size();
      for (std::size_t i = 0; i < len; ++i) {
        g[i] += self.grad[0];
      }
    }
  });
}

template <typename T>
Tensor<T> add_all(std::span<const Tensor<T>> terms) {
  if (terms.empty()) {
    return Tensor<T>::scalar(T(0));
  }
  for (const auto& t : terms) {
    if (t.numel() != 1) {
      throw DimensionError("add_all expects scalars");
    }
  }
  std::vector<Tensor<T>> rows;
  rows.reserve(terms.size());
  for (const auto& t : terms) {
    rows.push_back(reshape(t, {1, 1}));
  }
  return sum(concat_rows<T>(rows));
}

template <typename T>
Tensor<T> bce(const Tensor<T>& probs, std::span<const T> targets, T eps) {
  if (targets.size() != probs.numel()) {
    throw DimensionError("bce target length " + std::to_string(targets.size()) +
                         " does not match " + shape_str(probs.shape()));
  }
  std::vector<T> y(targets.begin(), targets.end());
  T total = T(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const T p = probs.data()[i];
    total -= y[i] * std::log(std::max(p, eps)) + (T(1) - y[i]) * std::log(std::max(T(1) - p, eps));
  }
  return make_result<T>({1}, {total}, {&probs}, [y = std::move(y), eps](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      const T* p = parent_data<T>(self, 0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        const T pp = std::max(p[i], eps);
        const T qq = std::max(T(1) - p[i], eps);
        g[i] += self.grad[0] * (-y[i] / pp + (T(1) - y[i]) / qq);
      }
    }
  });
}

template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, std::span<const T> targets) {
  if (targets.size() != logits.numel()) {
    throw DimensionError("bce target length " + std::to_string(targets.size()) +
                         " does not match " + shape_str(logits.shape()));
  }
  std::vector<T> y(targets.begin(), targets.end());
  T total = T(0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const T z = logits.data()[i];
    total += std::max(z, T(0)) - z * y[i] + std::log1p(std::exp(-std::abs(z)));
  }
  return make_result<T>({1}, {total}, {&logits}, [y = std::move(y)](NodeT<T>& self) {
    if (T* g = parent_grad<T>(self, 0)) {
      const T* z = parent_data<T>(self, 0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        const T s = z[i] >= T(0) ? T(1) / (T(1) + std::exp(-z[i]))
                                 : std::exp(z[i]) / (T(1) + std::exp(z[i]));
        g[i] += self.grad[0] * (s - y[i]);
      }
    }
  });
}

#define IPC_INSTANTIATE_OPS(T)                                                                   \
  template class Tensor<T>;                                                                      \
  template Tensor<T> make_result<T>(Shape, std::vector<T>,                                       \
                                    std::initializer_list<const Tensor<T>*>,                     \
                                    std::function<void(Tensor<T>::Node&)>);                      \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> scale(const Tensor<T>&, T);                                                 \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                  \
  template Tensor<T> softmax_last_dim(const Tensor<T>&);                                         \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);        \
  template Tensor<T> attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,             \
                               std::size_t, std::optional<std::size_t>, AttentionMap*);          \
  template Tensor<T> dropout(const Tensor<T>&, double, bool, Rng&);                              \
  template Tensor<T> take_rows(const Tensor<T>&, std::span<const std::size_t>);                  \
  template Tensor<T> concat_rows(std::span<const Tensor<T>>);                                    \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                           \
  template Tensor<T> mean_rows(const Tensor<T>&);                                                \
  template Tensor<T> zero_tail_rows(const Tensor<T>&, std::size_t);                              \
  template Tensor<T> sum(const Tensor<T>&);                                                      \
  template Tensor<T> add_all(std::span<const Tensor<T>>);                                        \
  template Tensor<T> bce(const Tensor<T>&, std::span<const T>, T);                               \
  template Tensor<T> bce_with_logits(const Tensor<T>&, std::span<const T>);

IPC_INSTANTIATE_OPS(float)
IPC_INSTANTIATE_OPS(double)

}  // namespace ipc
