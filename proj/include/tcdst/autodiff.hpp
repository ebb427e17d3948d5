#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcdst/error.hpp"
#include "tcdst/kernels.hpp"
#include "tcdst/numeric.hpp"
#include "tcdst/rng.hpp"

// Reverse-mode autodiff over 2D row-major tensors. A Tape is built eagerly
// per example; backward() replays the nodes in reverse creation order.
// Parameters live outside the tape in a ParamStore and receive gradients
// directly, so tapes are cheap to throw away.

namespace tcdst {

template <class T>
struct Param {
  std::string name;
  std::size_t rows = 0, cols = 0;
  std::vector<T> values;
  std::vector<T> grad;

  std::size_t numel() const { return rows * cols; }
};

// Registration happens once, before any tape is built; storage is a deque so
// parameter references stay valid as later parameters are added.
template <class T>
class ParamStore {
 public:
  std::size_t add(const std::string& name, std::size_t rows, std::size_t cols,
                  std::vector<T> values) {
    if (index_.count(name)) throw StateError("duplicate parameter '" + name + "'");
    if (values.size() != rows * cols)
      throw DimensionError("parameter '" + name + "': " +
                           std::to_string(values.size()) + " values for " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    Param<T> p;
    p.name = name;
    p.rows = rows;
    p.cols = cols;
    p.values = std::move(values);
    p.grad.assign(p.numel(), T(0));
    params_.push_back(std::move(p));
    index_[name] = params_.size() - 1;
    return params_.size() - 1;
  }

  // Gaussian init; stddev 0 gives exact zeros without consuming RNG draws.
  std::size_t add_normal(const std::string& name, std::size_t rows,
                         std::size_t cols, T stddev, Rng& rng) {
    std::vector<T> v(rows * cols, T(0));
    if (stddev != T(0))
      for (auto& x : v) x = static_cast<T>(rng.normal(0.0, static_cast<double>(stddev)));
    return add(name, rows, cols, std::move(v));
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
    return it->second;
  }

  Param<T>& at(std::size_t i) { return params_.at(i); }
  const Param<T>& at(std::size_t i) const { return params_.at(i); }
  Param<T>& by_name(const std::string& name) { return params_.at(index_of(name)); }
  const Param<T>& by_name(const std::string& name) const {
    return params_.at(index_of(name));
  }

  std::size_t size() const { return params_.size(); }

  std::size_t total_values() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.numel();
    return n;
  }

  void zero_grads() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
  }

 private:
  std::deque<Param<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <class T>
class Tape {
 public:
  using Id = std::size_t;

  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }
  std::size_t node_count() const { return nodes_.size(); }

  const T* values(Id id) const { return nodes_.at(id).v; }
  std::size_t rows(Id id) const { return nodes_.at(id).rows; }
  std::size_t cols(Id id) const { return nodes_.at(id).cols; }
  std::size_t numel(Id id) const { return nodes_.at(id).rows * nodes_.at(id).cols; }

  std::vector<T> values_copy(Id id) const {
    const Node& n = nodes_.at(id);
    return std::vector<T>(n.v, n.v + n.rows * n.cols);
  }

  T scalar_value(Id id) const {
    const Node& n = nodes_.at(id);
    if (n.rows * n.cols != 1)
      throw DimensionError("scalar_value on tensor " + dim_str(n));
    return n.v[0];
  }

  Id input(std::size_t rows, std::size_t cols, std::vector<T> values) {
    if (values.size() != rows * cols)
      throw DimensionError("input: value count mismatch");
    return make_node(rows, cols, std::move(values));
  }

  Id scalar_input(T v) { return input(1, 1, {v}); }

  // Leaf backed by a stored parameter: gradients land in the store.
  Id param(ParamStore<T>& store, std::size_t pindex) {
    Param<T>& p = store.at(pindex);
    Node n;
    n.rows = p.rows;
    n.cols = p.cols;
    n.v = p.values.data();
    n.g = record_ ? p.grad.data() : nullptr;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  Id add(Id a, Id b) {
    require_same_shape(a, b, "add");
    const std::size_t m = rows(a), n = cols(a), sz = m * n;
    std::vector<T> out(sz);
    kernels::add(values(a), values(b), out.data(), sz);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      T* ga = grad(a);
      T* gb = grad(b);
      const T* go = grad(id);
      set_backward(id, [=] {
        kernels::axpy(T(1), go, ga, sz);
        kernels::axpy(T(1), go, gb, sz);
      });
    }
    return id;
  }

  // a [m x n] plus a [1 x n] row broadcast over rows.
  Id add_bias(Id a, Id bias) {
    const std::size_t m = rows(a), n = cols(a);
    if (rows(bias) != 1 || cols(bias) != n)
      throw DimensionError("add_bias: bias " + dim_str(nodes_[bias]) +
                           " against " + dim_str(nodes_[a]));
    std::vector<T> out(m * n);
    for (std::size_t r = 0; r < m; ++r)
      kernels::add(values(a) + r * n, values(bias), out.data() + r * n, n);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      T* ga = grad(a);
      T* gb = grad(bias);
      const T* go = grad(id);
      set_backward(id, [=] {
        kernels::axpy(T(1), go, ga, m * n);
        for (std::size_t r = 0; r < m; ++r) kernels::axpy(T(1), go + r * n, gb, n);
      });
    }
    return id;
  }

  Id mul(Id a, Id b) {
    require_same_shape(a, b, "mul");
    const std::size_t m = rows(a), n = cols(a), sz = m * n;
    std::vector<T> out(sz);
    kernels::mul(values(a), values(b), out.data(), sz);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      const T* va = values(a);
      const T* vb = values(b);
      T* ga = grad(a);
      T* gb = grad(b);
      const T* go = grad(id);
      set_backward(id, [=] {
        for (std::size_t i = 0; i < sz; ++i) {
          ga[i] += go[i] * vb[i];
          gb[i] += go[i] * va[i];
        }
      });
    }
    return id;
  }

  Id scale(Id a, T alpha) {
    const std::size_t m = rows(a), n = cols(a), sz = m * n;
    std::vector<T> out(sz);
    kernels::scale(values(a), alpha, out.data(), sz);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=] { kernels::axpy(alpha, go, ga, sz); });
    }
    return id;
  }

  // c = a[m x k] * b[k x n]
  Id matmul(Id a, Id b) {
    const std::size_t m = rows(a), k = cols(a), n = cols(b);
    if (rows(b) != k)
      throw DimensionError("matmul: " + dim_str(nodes_[a]) + " * " + dim_str(nodes_[b]));
    std::vector<T> out(m * n);
    kernels::matmul_nn(values(a), values(b), out.data(), m, k, n, false);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      const T* va = values(a);
      const T* vb = values(b);
      T* ga = grad(a);
      T* gb = grad(b);
      const T* go = grad(id);
      set_backward(id, [=] {
        kernels::matmul_nt(go, vb, ga, m, n, k, true);  // dA += dC * B^T
        kernels::matmul_tn(va, go, gb, m, k, n, true);  // dB += A^T * dC
      });
    }
    return id;
  }

  // c = a[m x k] * b^T with b stored [n x k]
  Id matmul_nt(Id a, Id b) {
    const std::size_t m = rows(a), k = cols(a), n = rows(b);
    if (cols(b) != k)
      throw DimensionError("matmul_nt: " + dim_str(nodes_[a]) + " * " +
                           dim_str(nodes_[b]) + "^T");
    std::vector<T> out(m * n);
    kernels::matmul_nt(values(a), values(b), out.data(), m, k, n, false);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      const T* va = values(a);
      const T* vb = values(b);
      T* ga = grad(a);
      T* gb = grad(b);
      const T* go = grad(id);
      set_backward(id, [=] {
        kernels::matmul_nn(go, vb, ga, m, n, k, true);  // dA += dC * B
        kernels::matmul_tn(go, va, gb, m, n, k, true);  // dB += dC^T * A
      });
    }
    return id;
  }

  // Gathers table rows by id: table [V x h] -> [ids.size() x h].
  Id embed_rows(Id table, std::vector<std::size_t> ids) {
    const std::size_t v = rows(table), h = cols(table), m = ids.size();
    if (m == 0) throw DimensionError("embed_rows: empty id list");
    std::vector<T> out(m * h);
    for (std::size_t r = 0; r < m; ++r) {
      if (ids[r] >= v)
        throw VocabError("embed_rows: id " + std::to_string(ids[r]) +
                         " out of range for table rows " + std::to_string(v));
      std::copy_n(values(table) + ids[r] * h, h, out.data() + r * h);
    }
    Id id = make_node(m, h, std::move(out));
    if (record_) {
      T* gt = grad(table);
      const T* go = grad(id);
      set_backward(id, [=, ids = std::move(ids)] {
        for (std::size_t r = 0; r < ids.size(); ++r)
          kernels::axpy(T(1), go + r * h, gt + ids[r] * h, h);
      });
    }
    return id;
  }

  Id slice_row(Id a, std::size_t row) {
    const std::size_t m = rows(a), n = cols(a);
    if (row >= m) throw IndexError("slice_row: row " + std::to_string(row) +
                                   " of " + std::to_string(m));
    std::vector<T> out(values(a) + row * n, values(a) + (row + 1) * n);
    Id id = make_node(1, n, std::move(out));
    if (record_) {
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=] { kernels::axpy(T(1), go, ga + row * n, n); });
    }
    return id;
  }

  Id col_block(Id a, std::size_t start, std::size_t width) {
    const std::size_t m = rows(a), n = cols(a);
    if (start + width > n || width == 0)
      throw IndexError("col_block: [" + std::to_string(start) + ", " +
                       std::to_string(start + width) + ") of " + std::to_string(n));
    std::vector<T> out(m * width);
    for (std::size_t r = 0; r < m; ++r)
      std::copy_n(values(a) + r * n + start, width, out.data() + r * width);
    Id id = make_node(m, width, std::move(out));
    if (record_) {
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=] {
        for (std::size_t r = 0; r < m; ++r)
          kernels::axpy(T(1), go + r * width, ga + r * n + start, width);
      });
    }
    return id;
  }

  Id concat_cols(const std::vector<Id>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const std::size_t m = rows(parts[0]);
    std::size_t total = 0;
    for (Id p : parts) {
      if (rows(p) != m) throw DimensionError("concat_cols: row mismatch");
      total += cols(p);
    }
    std::vector<T> out(m * total);
    std::size_t off = 0;
    for (Id p : parts) {
      const std::size_t w = cols(p);
      for (std::size_t r = 0; r < m; ++r)
        std::copy_n(values(p) + r * w, w, out.data() + r * total + off);
      off += w;
    }
    Id id = make_node(m, total, std::move(out));
    if (record_) {
      struct Piece { T* g; std::size_t w; };
      std::vector<Piece> pieces;
      pieces.reserve(parts.size());
      for (Id p : parts) pieces.push_back({grad(p), cols(p)});
      const T* go = grad(id);
      set_backward(id, [=, pieces = std::move(pieces)] {
        std::size_t o = 0;
        for (const auto& pc : pieces) {
          for (std::size_t r = 0; r < m; ++r)
            kernels::axpy(T(1), go + r * total + o, pc.g + r * pc.w, pc.w);
          o += pc.w;
        }
      });
    }
    return id;
  }

  // Row-wise softmax. `valid` marks usable columns (empty = all); invalid
  // columns get probability 0 and no gradient.
  Id softmax_rows(Id a, std::vector<unsigned char> valid = {}) {
    const std::size_t m = rows(a), n = cols(a);
    if (!valid.empty() && valid.size() != n)
      throw DimensionError("softmax_rows: mask length mismatch");
    std::size_t nvalid = n;
    if (!valid.empty()) {
      nvalid = 0;
      for (auto u : valid) nvalid += u ? 1 : 0;
      if (nvalid == 0) throw NumericError("softmax_rows: no valid column");
    }
    const T* va = values(a);
    std::vector<T> out(m * n, T(0));
    for (std::size_t r = 0; r < m; ++r) {
      const T* x = va + r * n;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (!valid.empty() && !valid[j]) continue;
        if (std::isnan(x[j])) throw NumericError("softmax_rows: NaN logit");
        mx = std::max(mx, x[j]);
      }
      T z = 0;
      T* p = out.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) {
        if (!valid.empty() && !valid[j]) continue;
        p[j] = std::exp(x[j] - mx);
        z += p[j];
      }
      for (std::size_t j = 0; j < n; ++j) p[j] /= z;
    }
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      const T* vp = values(id);
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=, valid = std::move(valid)] {
        for (std::size_t r = 0; r < m; ++r) {
          const T* p = vp + r * n;
          const T* gz = go + r * n;
          T dotv = 0;
          for (std::size_t j = 0; j < n; ++j) dotv += gz[j] * p[j];
          T* gx = ga + r * n;
          for (std::size_t j = 0; j < n; ++j) {
            if (!valid.empty() && !valid[j]) continue;
            gx[j] += p[j] * (gz[j] - dotv);
          }
        }
      });
    }
    return id;
  }

  // Per-row layer norm with learned gain/bias rows [1 x n].
  Id layer_norm_rows(Id x, Id gain, Id bias, T eps) {
    const std::size_t m = rows(x), n = cols(x);
    if (rows(gain) != 1 || cols(gain) != n || rows(bias) != 1 || cols(bias) != n)
      throw DimensionError("layer_norm_rows: gain/bias must be [1 x cols(x)]");
    const T* vx = values(x);
    const T* vg = values(gain);
    const T* vb = values(bias);
    std::vector<T> out(m * n);
    std::vector<T> xhat(record_ ? m * n : 0);
    std::vector<T> inv_std(record_ ? m : 0);
    for (std::size_t r = 0; r < m; ++r) {
      const T* xr = vx + r * n;
      T mean = kernels::sum(xr, n) / static_cast<T>(n);
      T var = 0;
      for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
      var /= static_cast<T>(n);
      const T inv = T(1) / std::sqrt(var + eps);
      T* o = out.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) {
        const T xh = (xr[j] - mean) * inv;
        if (record_) xhat[r * n + j] = xh;
        o[j] = vg[j] * xh + vb[j];
      }
      if (record_) inv_std[r] = inv;
    }
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      T* gx = grad(x);
      T* gg = grad(gain);
      T* gb = grad(bias);
      const T* go = grad(id);
      set_backward(id, [=, xhat = std::move(xhat), inv_std = std::move(inv_std)] {
        for (std::size_t r = 0; r < m; ++r) {
          const T* gyr = go + r * n;
          const T* xh = xhat.data() + r * n;
          T sum_dxh = 0, sum_dxh_xh = 0;
          for (std::size_t j = 0; j < n; ++j) {
            gg[j] += gyr[j] * xh[j];
            gb[j] += gyr[j];
            const T dxh = gyr[j] * vg[j];
            sum_dxh += dxh;
            sum_dxh_xh += dxh * xh[j];
          }
          const T c = inv_std[r] / static_cast<T>(n);
          T* gxr = gx + r * n;
          for (std::size_t j = 0; j < n; ++j) {
            const T dxh = gyr[j] * vg[j];
            gxr[j] += c * (static_cast<T>(n) * dxh - sum_dxh - xh[j] * sum_dxh_xh);
          }
        }
      });
    }
    return id;
  }

  Id gelu_op(Id a) {
    const std::size_t m = rows(a), n = cols(a), sz = m * n;
    const T* va = values(a);
    std::vector<T> out(sz);
    for (std::size_t i = 0; i < sz; ++i) out[i] = gelu(va[i]);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=] {
        for (std::size_t i = 0; i < sz; ++i) ga[i] += go[i] * gelu_grad(va[i]);
      });
    }
    return id;
  }

  // Inverted dropout; rate 0 is the identity. Only meaningful while training.
  Id dropout(Id a, T rate, Rng& rng) {
    if (rate <= T(0)) return a;
    if (rate >= T(1)) throw ConfigError("dropout rate must be < 1");
    const std::size_t m = rows(a), n = cols(a), sz = m * n;
    const T keep = T(1) - rate;
    std::vector<T> mask(sz);
    for (auto& x : mask) x = rng.coin(static_cast<double>(rate)) ? T(0) : T(1) / keep;
    const T* va = values(a);
    std::vector<T> out(sz);
    kernels::mul(va, mask.data(), out.data(), sz);
    Id id = make_node(m, n, std::move(out));
    if (record_) {
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=, mask = std::move(mask)] {
        for (std::size_t i = 0; i < sz; ++i) ga[i] += go[i] * mask[i];
      });
    }
    return id;
  }

  // Negative log-likelihood of one class from a probability row.
  Id nll(Id probs, std::size_t target) {
    const std::size_t m = rows(probs), n = cols(probs);
    if (m != 1) throw DimensionError("nll: expected a probability row");
    if (target >= n)
      throw IndexError("nll: target " + std::to_string(target) + " of " +
                       std::to_string(n));
    const T* vp = values(probs);
    const T pt = vp[target];
    Id id = make_node(1, 1, {-std::log(std::max(pt, T(1e-12)))});
    if (record_) {
      T* gp = grad(probs);
      const T* go = grad(id);
      set_backward(id, [=] {
        if (pt > T(1e-12)) gp[target] -= go[0] / pt;
      });
    }
    return id;
  }

  // Sum of all entries, as a scalar node.
  Id sum_all(Id a) {
    const std::size_t sz = numel(a);
    Id id = make_node(1, 1, {kernels::sum(values(a), sz)});
    if (record_) {
      T* ga = grad(a);
      const T* go = grad(id);
      set_backward(id, [=] {
        for (std::size_t i = 0; i < sz; ++i) ga[i] += go[0];
      });
    }
    return id;
  }

  // Scalar linear combination sum_i coeffs[i] * scalars[i].
  Id weighted_sum(const std::vector<Id>& scalars, const std::vector<T>& coeffs) {
    if (scalars.empty() || scalars.size() != coeffs.size())
      throw DimensionError("weighted_sum: arity mismatch");
    T total = 0;
    for (std::size_t i = 0; i < scalars.size(); ++i)
      total += coeffs[i] * scalar_value(scalars[i]);
    Id id = make_node(1, 1, {total});
    if (record_) {
      std::vector<T*> gs;
      gs.reserve(scalars.size());
      for (Id s : scalars) gs.push_back(grad(s));
      const T* go = grad(id);
      set_backward(id, [=, coeffs = coeffs] {
        for (std::size_t i = 0; i < gs.size(); ++i) *gs[i] += coeffs[i] * go[0];
      });
    }
    return id;
  }

  void backward(Id loss) {
    if (!record_) throw StateError("backward on a non-recording tape");
    Node& ln = nodes_.at(loss);
    if (ln.rows * ln.cols != 1)
      throw DimensionError("backward: loss must be scalar, got " + dim_str(ln));
    if (!std::isfinite(ln.v[0])) throw NumericError("backward: non-finite loss");
    ln.g[0] += T(1);
    for (std::size_t i = nodes_.size(); i-- > 0;)
      if (nodes_[i].back) nodes_[i].back();
  }

 private:
  struct Node {
    std::size_t rows = 0, cols = 0;
    std::vector<T> vals_store;
    std::vector<T> grad_store;
    const T* v = nullptr;
    T* g = nullptr;
    std::function<void()> back;
  };

  static std::string dim_str(const Node& n) {
    return "[" + std::to_string(n.rows) + " x " + std::to_string(n.cols) + "]";
  }

  Id make_node(std::size_t r, std::size_t c, std::vector<T> vals) {
    Node n;
    n.rows = r;
    n.cols = c;
    n.vals_store = std::move(vals);
    n.v = n.vals_store.data();
    if (record_) {
      n.grad_store.assign(r * c, T(0));
      n.g = n.grad_store.data();
    }
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  T* grad(Id id) {
    T* g = nodes_.at(id).g;
    if (!g) throw StateError("gradient requested on non-recording node");
    return g;
  }

  void require_same_shape(Id a, Id b, const char* op) {
    if (rows(a) != rows(b) || cols(a) != cols(b))
      throw DimensionError(std::string(op) + ": " + dim_str(nodes_[a]) +
                           " vs " + dim_str(nodes_[b]));
  }

  void set_backward(Id id, std::function<void()> fn) {
    nodes_[id].back = std::move(fn);
  }

  bool record_;
  std::deque<Node> nodes_;
};

}  // namespace tcdst
