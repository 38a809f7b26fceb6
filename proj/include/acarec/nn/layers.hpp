#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acarec/nn/matrix.hpp"
#include "acarec/nn/params.hpp"

namespace acarec::nn {

// ---------------------------------------------------------------------------
// Linear: y = x W^T + b, W is out x in, b is 1 x out. x may hold several rows.

template <class T>
struct LinearParams {
  using scalar_type = T;
  BasicMatrix<T> weight;
  BasicMatrix<T> bias;

  static LinearParams init(std::size_t in, std::size_t out, Rng& rng) {
    return {glorot_uniform<T>(out, in, in, out, rng), BasicMatrix<T>(1, out)};
  }
  static LinearParams zeros(std::size_t in, std::size_t out) {
    return {BasicMatrix<T>(out, in), BasicMatrix<T>(1, out)};
  }

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  template <class U>
  LinearParams<U> cast() const { return {weight.template cast<U>(), bias.template cast<U>()}; }

  template <class F> void visit(F&& f) { f("weight", weight); f("bias", bias); }
  template <class F> void visit(F&& f) const { f("weight", weight); f("bias", bias); }
};

template <class T>
BasicMatrix<T> linear_forward(const BasicMatrix<T>& x, const LinearParams<T>& p) {
  require(x.cols() == p.in_dim(), "linear: input " + x.shape_string() + " vs weight " +
                                      p.weight.shape_string());
  require(p.bias.rows() == 1 && p.bias.cols() == p.out_dim(),
          "linear: bias " + p.bias.shape_string() + " vs weight " + p.weight.shape_string());
  BasicMatrix<T> y = matmul_nt(x, p.weight);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += p.bias(0, j);
  return y;
}

// Accumulates dW, db into `grads`; returns dL/dx.
template <class T>
BasicMatrix<T> linear_backward(const BasicMatrix<T>& x, const LinearParams<T>& p,
                               const BasicMatrix<T>& dy, LinearParams<T>& grads) {
  require(dy.rows() == x.rows() && dy.cols() == p.out_dim(),
          "linear backward: grad " + dy.shape_string() + " vs output width " +
              std::to_string(p.out_dim()));
  matmul_tn_acc(dy, x, grads.weight);
  for (std::size_t i = 0; i < dy.rows(); ++i)
    for (std::size_t j = 0; j < dy.cols(); ++j) grads.bias(0, j) += dy(i, j);
  return matmul(dy, p.weight);
}

// ---------------------------------------------------------------------------
// Softmax over each row, restricted to unmasked columns. Masked entries are 0.

template <class T>
void softmax_rows_inplace(BasicMatrix<T>& s, std::span<const bool> keep = {}) {
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < row.size(); ++j)
      if (keep.empty() || keep[j]) mx = std::max(mx, row[j]);
    if (!std::isfinite(mx)) fail(ErrorKind::EmptyContext, "empty attention context");
    T sum = T(0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = (keep.empty() || keep[j]) ? std::exp(row[j] - mx) : T(0);
      sum += row[j];
    }
    for (auto& v : row) v /= sum;
  }
}

// ---------------------------------------------------------------------------
// Multi-head attention with input projections W_Q, W_K, W_V (in x heads*d_head,
// right-multiplied) and output projection W_O (heads*d_head x out). No biases,
// residuals or normalization.

struct MhaDims {
  std::size_t query_in = 0;
  std::size_t key_in = 0;
  std::size_t value_in = 0;
  std::size_t out = 0;
  std::size_t heads = 1;

  // d_head = query width / heads, rounded down, at least 1.
  std::size_t head_dim() const { return std::max<std::size_t>(1, query_in / heads); }
};

template <class T>
struct MhaParams {
  using scalar_type = T;
  std::size_t heads = 1;
  std::size_t head_dim = 1;
  BasicMatrix<T> w_q, w_k, w_v, w_o;

  static MhaParams init(const MhaDims& d, Rng& rng) {
    if (d.heads == 0) fail(ErrorKind::Config, "attention needs at least one head");
    MhaParams p;
    p.heads = d.heads;
    p.head_dim = d.head_dim();
    const std::size_t inner = p.heads * p.head_dim;
    p.w_q = glorot_uniform<T>(d.query_in, inner, d.query_in, inner, rng);
    p.w_k = glorot_uniform<T>(d.key_in, inner, d.key_in, inner, rng);
    p.w_v = glorot_uniform<T>(d.value_in, inner, d.value_in, inner, rng);
    p.w_o = glorot_uniform<T>(inner, d.out, inner, d.out, rng);
    return p;
  }

  std::size_t inner() const { return heads * head_dim; }
  std::size_t out_dim() const { return w_o.cols(); }

  template <class U>
  MhaParams<U> cast() const {
    return {heads, head_dim, w_q.template cast<U>(), w_k.template cast<U>(),
            w_v.template cast<U>(), w_o.template cast<U>()};
  }

  template <class F> void visit(F&& f) { f("w_q", w_q); f("w_k", w_k); f("w_v", w_v); f("w_o", w_o); }
  template <class F> void visit(F&& f) const { f("w_q", w_q); f("w_k", w_k); f("w_v", w_v); f("w_o", w_o); }
};

template <class T>
struct MhaCache {
  BasicMatrix<T> q, k, v;           // inputs
  BasicMatrix<T> qp, kp, vp;        // projected, n x heads*d_head
  std::vector<BasicMatrix<T>> attn; // per head, n_q x n_k
  BasicMatrix<T> concat;            // n_q x heads*d_head
  std::vector<bool> keep;
};

template <class T>
struct MhaInputGrads {
  BasicMatrix<T> dq, dk, dv;
};

template <class T>
BasicMatrix<T> mha_forward(const BasicMatrix<T>& q, const BasicMatrix<T>& k,
                           const BasicMatrix<T>& v, const MhaParams<T>& p, MhaCache<T>& cache,
                           std::span<const bool> keep = {}) {
  require(q.cols() == p.w_q.rows(), "mha: query width " + std::to_string(q.cols()) +
                                        " vs W_Q " + p.w_q.shape_string());
  require(k.cols() == p.w_k.rows(), "mha: key width " + std::to_string(k.cols()) + " vs W_K " +
                                        p.w_k.shape_string());
  require(v.cols() == p.w_v.rows(), "mha: value width " + std::to_string(v.cols()) +
                                        " vs W_V " + p.w_v.shape_string());
  require(k.rows() == v.rows(), "mha: key rows " + std::to_string(k.rows()) + " vs value rows " +
                                    std::to_string(v.rows()));
  require(p.w_o.rows() == p.inner(), "mha: W_O rows must equal heads*d_head");
  require(keep.empty() || keep.size() == k.rows(), "mha: mask length must equal key count");
  if (k.rows() == 0) fail(ErrorKind::EmptyContext, "empty attention context");

  cache.q = q;
  cache.k = k;
  cache.v = v;
  cache.keep.assign(keep.begin(), keep.end());
  cache.qp = matmul(q, p.w_q);
  cache.kp = matmul(k, p.w_k);
  cache.vp = matmul(v, p.w_v);
  cache.concat = BasicMatrix<T>(q.rows(), p.inner());
  cache.attn.assign(p.heads, {});

  const T scale = T(1) / std::sqrt(static_cast<T>(p.head_dim));
  const std::size_t dh = p.head_dim;
  for (std::size_t h = 0; h < p.heads; ++h) {
    const std::size_t off = h * dh;
    BasicMatrix<T> s(q.rows(), k.rows());
    for (std::size_t i = 0; i < q.rows(); ++i) {
      const T* qi = cache.qp.data() + i * p.inner() + off;
      for (std::size_t j = 0; j < k.rows(); ++j) {
        const T* kj = cache.kp.data() + j * p.inner() + off;
        T acc = T(0);
        for (std::size_t c = 0; c < dh; ++c) acc += qi[c] * kj[c];
        s(i, j) = acc * scale;
      }
    }
    softmax_rows_inplace(s, keep);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      T* oi = cache.concat.data() + i * p.inner() + off;
      for (std::size_t j = 0; j < k.rows(); ++j) {
        const T a = s(i, j);
        if (a == T(0)) continue;
        const T* vj = cache.vp.data() + j * p.inner() + off;
        for (std::size_t c = 0; c < dh; ++c) oi[c] += a * vj[c];
      }
    }
    cache.attn[h] = std::move(s);
  }
  return matmul(cache.concat, p.w_o);
}

template <class T>
MhaInputGrads<T> mha_backward(const MhaCache<T>& cache, const MhaParams<T>& p,
                              const BasicMatrix<T>& dout, MhaParams<T>& grads) {
  require(dout.rows() == cache.q.rows() && dout.cols() == p.out_dim(),
          "mha backward: grad " + dout.shape_string() + " vs output " +
              std::to_string(cache.q.rows()) + "x" + std::to_string(p.out_dim()));
  require(cache.attn.size() == p.heads, "mha backward: cache does not match parameters");

  matmul_tn_acc(cache.concat, dout, grads.w_o);
  const BasicMatrix<T> dconcat = matmul_nt(dout, p.w_o);

  const std::size_t nq = cache.q.rows();
  const std::size_t nk = cache.k.rows();
  const std::size_t dh = p.head_dim;
  const std::size_t inner = p.inner();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  BasicMatrix<T> dqp(nq, inner), dkp(nk, inner), dvp(nk, inner);
  BasicMatrix<T> da(nq, nk);
  for (std::size_t h = 0; h < p.heads; ++h) {
    const std::size_t off = h * dh;
    const auto& a = cache.attn[h];
    // dA = dO_h Vp_h^T ; dVp_h = A^T dO_h
    for (std::size_t i = 0; i < nq; ++i) {
      const T* doi = dconcat.data() + i * inner + off;
      for (std::size_t j = 0; j < nk; ++j) {
        const T* vj = cache.vp.data() + j * inner + off;
        T* dvj = dvp.data() + j * inner + off;
        T acc = T(0);
        const T aij = a(i, j);
        for (std::size_t c = 0; c < dh; ++c) {
          acc += doi[c] * vj[c];
          dvj[c] += aij * doi[c];
        }
        da(i, j) = acc;
      }
    }
    // softmax backward: dS = A * (dA - sum_j dA A)
    for (std::size_t i = 0; i < nq; ++i) {
      T inner_sum = T(0);
      for (std::size_t j = 0; j < nk; ++j) inner_sum += da(i, j) * a(i, j);
      const T* qi = cache.qp.data() + i * inner + off;
      T* dqi = dqp.data() + i * inner + off;
      for (std::size_t j = 0; j < nk; ++j) {
        const T ds = a(i, j) * (da(i, j) - inner_sum) * scale;
        if (ds == T(0)) continue;
        const T* kj = cache.kp.data() + j * inner + off;
        T* dkj = dkp.data() + j * inner + off;
        for (std::size_t c = 0; c < dh; ++c) {
          dqi[c] += ds * kj[c];
          dkj[c] += ds * qi[c];
        }
      }
    }
  }

  matmul_tn_acc(cache.q, dqp, grads.w_q);
  matmul_tn_acc(cache.k, dkp, grads.w_k);
  matmul_tn_acc(cache.v, dvp, grads.w_v);
  return {matmul_nt(dqp, p.w_q), matmul_nt(dkp, p.w_k), matmul_nt(dvp, p.w_v)};
}

// ---------------------------------------------------------------------------
// Single GRU update over row vectors h (1 x d_e) and x (1 x d_in):
//   z  = sigmoid(x W_z^T + h U_z^T + b_z)
//   r  = sigmoid(x W_r^T + h U_r^T + b_r)
//   h~ = tanh(x W_h^T + (r*h) U_h^T + b_h)
//   out = (1 - z) * h + z * h~
// so z = 0 passes h through unchanged.

template <class T>
struct GruParams {
  using scalar_type = T;
  BasicMatrix<T> w_z, u_z, b_z;
  BasicMatrix<T> w_r, u_r, b_r;
  BasicMatrix<T> w_h, u_h, b_h;

  static GruParams init(std::size_t in, std::size_t hidden, Rng& rng) {
    GruParams p;
    for (auto* w : {&p.w_z, &p.w_r, &p.w_h}) *w = glorot_uniform<T>(hidden, in, in, hidden, rng);
    for (auto* u : {&p.u_z, &p.u_r, &p.u_h}) *u = glorot_uniform<T>(hidden, hidden, hidden, hidden, rng);
    for (auto* b : {&p.b_z, &p.b_r, &p.b_h}) *b = BasicMatrix<T>(1, hidden);
    return p;
  }
  static GruParams zeros(std::size_t in, std::size_t hidden) {
    GruParams p;
    for (auto* w : {&p.w_z, &p.w_r, &p.w_h}) *w = BasicMatrix<T>(hidden, in);
    for (auto* u : {&p.u_z, &p.u_r, &p.u_h}) *u = BasicMatrix<T>(hidden, hidden);
    for (auto* b : {&p.b_z, &p.b_r, &p.b_h}) *b = BasicMatrix<T>(1, hidden);
    return p;
  }

  std::size_t in_dim() const { return w_z.cols(); }
  std::size_t hidden_dim() const { return w_z.rows(); }

  template <class U>
  GruParams<U> cast() const {
    GruParams<U> o;
    o.w_z = w_z.template cast<U>(); o.u_z = u_z.template cast<U>(); o.b_z = b_z.template cast<U>();
    o.w_r = w_r.template cast<U>(); o.u_r = u_r.template cast<U>(); o.b_r = b_r.template cast<U>();
    o.w_h = w_h.template cast<U>(); o.u_h = u_h.template cast<U>(); o.b_h = b_h.template cast<U>();
    return o;
  }

  template <class Self, class F>
  static void visit_impl(Self& s, F& f) {
    f("w_z", s.w_z); f("u_z", s.u_z); f("b_z", s.b_z);
    f("w_r", s.w_r); f("u_r", s.u_r); f("b_r", s.b_r);
    f("w_h", s.w_h); f("u_h", s.u_h); f("b_h", s.b_h);
  }
  template <class F> void visit(F&& f) { visit_impl(*this, f); }
  template <class F> void visit(F&& f) const { visit_impl(*this, f); }
};

template <class T>
struct GruCache {
  BasicMatrix<T> h, x, z, r, rh, cand;
};

template <class T>
struct GruInputGrads {
  BasicMatrix<T> dh, dx;
};

namespace detail {
// x W^T + h U^T + b for row vectors.
template <class T>
BasicMatrix<T> gate_preact(const BasicMatrix<T>& x, const BasicMatrix<T>& w, const BasicMatrix<T>& h,
                           const BasicMatrix<T>& u, const BasicMatrix<T>& b) {
  BasicMatrix<T> a = matmul_nt(x, w);
  a += matmul_nt(h, u);
  a += b;
  return a;
}
}  // namespace detail

template <class T>
BasicMatrix<T> gru_step(const BasicMatrix<T>& h, const BasicMatrix<T>& x, const GruParams<T>& p,
                        GruCache<T>& cache) {
  require(h.rows() == 1 && h.cols() == p.hidden_dim(),
          "gru: hidden state " + h.shape_string() + " vs hidden dim " + std::to_string(p.hidden_dim()));
  require(x.rows() == 1 && x.cols() == p.in_dim(),
          "gru: input " + x.shape_string() + " vs input dim " + std::to_string(p.in_dim()));
  cache.h = h;
  cache.x = x;
  cache.z = detail::gate_preact(x, p.w_z, h, p.u_z, p.b_z);
  for (auto& v : cache.z.flat()) v = sigmoid(v);
  cache.r = detail::gate_preact(x, p.w_r, h, p.u_r, p.b_r);
  for (auto& v : cache.r.flat()) v = sigmoid(v);
  cache.rh = hadamard(cache.r, h);
  cache.cand = detail::gate_preact(x, p.w_h, cache.rh, p.u_h, p.b_h);
  for (auto& v : cache.cand.flat()) v = std::tanh(v);

  BasicMatrix<T> out(1, h.cols());
  for (std::size_t j = 0; j < h.cols(); ++j)
    out[j] = (T(1) - cache.z[j]) * h[j] + cache.z[j] * cache.cand[j];
  return out;
}

template <class T>
GruInputGrads<T> gru_backward(const GruCache<T>& c, const GruParams<T>& p, const BasicMatrix<T>& dout,
                              GruParams<T>& g) {
  require(dout.same_shape(c.h), "gru backward: grad " + dout.shape_string() + " vs state " +
                                    c.h.shape_string());
  const std::size_t n = c.h.cols();
  BasicMatrix<T> dh(1, n), da_z(1, n), da_h(1, n);
  for (std::size_t j = 0; j < n; ++j) {
    const T dz = dout[j] * (c.cand[j] - c.h[j]);
    dh[j] = dout[j] * (T(1) - c.z[j]);
    da_z[j] = dz * c.z[j] * (T(1) - c.z[j]);
    da_h[j] = dout[j] * c.z[j] * (T(1) - c.cand[j] * c.cand[j]);
  }
  BasicMatrix<T> dx = matmul(da_h, p.w_h);
  matmul_tn_acc(da_h, c.x, g.w_h);
  matmul_tn_acc(da_h, c.rh, g.u_h);
  g.b_h += da_h;
  const BasicMatrix<T> drh = matmul(da_h, p.u_h);

  BasicMatrix<T> da_r(1, n);
  for (std::size_t j = 0; j < n; ++j) {
    dh[j] += drh[j] * c.r[j];
    da_r[j] = drh[j] * c.h[j] * c.r[j] * (T(1) - c.r[j]);
  }
  matmul_tn_acc(da_r, c.x, g.w_r);
  matmul_tn_acc(da_r, c.h, g.u_r);
  g.b_r += da_r;
  dx += matmul(da_r, p.w_r);
  dh += matmul(da_r, p.u_r);

  matmul_tn_acc(da_z, c.x, g.w_z);
  matmul_tn_acc(da_z, c.h, g.u_z);
  g.b_z += da_z;
  dx += matmul(da_z, p.w_z);
  dh += matmul(da_z, p.u_z);
  return {std::move(dh), std::move(dx)};
}

// ---------------------------------------------------------------------------
// Gated linear unit: (x W_a^T + b_a) * sigmoid(x W_b^T + b_b).

template <class T>
struct GluParams {
  using scalar_type = T;
  LinearParams<T> value;
  LinearParams<T> gate;

  static GluParams init(std::size_t in, std::size_t out, Rng& rng) {
    auto v = LinearParams<T>::init(in, out, rng);
    auto g = LinearParams<T>::init(in, out, rng);
    return {std::move(v), std::move(g)};
  }

  template <class U>
  GluParams<U> cast() const { return {value.template cast<U>(), gate.template cast<U>()}; }

  template <class F> void visit(F&& f) { value.visit(prefixed("value", f)); gate.visit(prefixed("gate", f)); }
  template <class F> void visit(F&& f) const { value.visit(prefixed("value", f)); gate.visit(prefixed("gate", f)); }
};

template <class T>
struct GluCache {
  BasicMatrix<T> x, value, gate;  // gate holds sigmoid activations
};

template <class T>
BasicMatrix<T> glu_forward(const BasicMatrix<T>& x, const GluParams<T>& p, GluCache<T>& cache) {
  require(p.value.weight.same_shape(p.gate.weight), "glu: value and gate maps differ in shape");
  cache.x = x;
  cache.value = linear_forward(x, p.value);
  cache.gate = linear_forward(x, p.gate);
  for (auto& v : cache.gate.flat()) v = sigmoid(v);
  return hadamard(cache.value, cache.gate);
}

template <class T>
BasicMatrix<T> glu_backward(const GluCache<T>& c, const GluParams<T>& p, const BasicMatrix<T>& dout,
                            GluParams<T>& g) {
  require(dout.same_shape(c.value), "glu backward: grad shape mismatch");
  BasicMatrix<T> dvalue = hadamard(dout, c.gate);
  BasicMatrix<T> dgate(dout.rows(), dout.cols());
  for (std::size_t i = 0; i < dout.size(); ++i)
    dgate[i] = dout[i] * c.value[i] * c.gate[i] * (T(1) - c.gate[i]);
  BasicMatrix<T> dx = linear_backward(c.x, p.value, dvalue, g.value);
  dx += linear_backward(c.x, p.gate, dgate, g.gate);
  return dx;
}

}  // namespace acarec::nn
