#pragma once
// Minimal differentiable numerics for the navigation policy: GCN layers, a
// gated recurrent cell, actor-critic heads and Adam. Gradients are hand-derived
// per operation; every backward pass has a finite-difference test.

#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "zonegraph/common.hpp"
#include "zonegraph/scene.hpp"
#include "zonegraph/tensor.hpp"

namespace zonegraph {

inline constexpr int kDefaultHidden = 128;

struct ModelDims {
  int embed = 64;                // D
  int node = 64;                 // N
  int hidden = kDefaultHidden;   // H
  int zones = 8;                 // M
  int input() const { return 2 * embed + node + kNumActions; }  // F
  bool operator==(const ModelDims&) const = default;
};

/// All trainable parameters. Gate rows of the recurrent weight are stacked
/// as [input, forget, candidate, output], each H rows; columns are [x, h].
struct PolicyParams {
  ModelDims dims;
  Tensor gcn_w1;      // N x N
  Tensor gcn_w2;      // N x N
  Tensor lstm_w;      // 4H x (F + H)
  Tensor lstm_b;      // 4H
  Tensor actor_w;     // 6 x H
  Tensor actor_b;     // 6
  Tensor critic_w;    // 1 x H
  Tensor critic_b;    // 1
  Tensor lambda_raw;  // 1, mapped through a sigmoid

  static PolicyParams zeros(const ModelDims& d) {
    PolicyParams p;
    p.dims = d;
    p.gcn_w1 = Tensor::matrix(d.node, d.node);
    p.gcn_w2 = Tensor::matrix(d.node, d.node);
    p.lstm_w = Tensor::matrix(4 * d.hidden, d.input() + d.hidden);
    p.lstm_b = Tensor::vector(4 * d.hidden);
    p.actor_w = Tensor::matrix(kNumActions, d.hidden);
    p.actor_b = Tensor::vector(kNumActions);
    p.critic_w = Tensor::matrix(1, d.hidden);
    p.critic_b = Tensor::vector(1);
    p.lambda_raw = Tensor::vector(1);
    return p;
  }

  static PolicyParams init(const ModelDims& d, std::uint64_t seed) {
    PolicyParams p = zeros(d);
    Rng rng(hash_combine(seed, 0x5EED));
    auto fill = [&rng](Tensor& t, double limit) {
      for (auto& v : t.values) v = rng.uniform(-limit, limit);
    };
    fill(p.gcn_w1, std::sqrt(3.0 / d.node));
    fill(p.gcn_w2, std::sqrt(3.0 / d.node));
    fill(p.lstm_w, 1.0 / std::sqrt(static_cast<double>(d.hidden)));
    for (int k = d.hidden; k < 2 * d.hidden; ++k) p.lstm_b[static_cast<std::size_t>(k)] = 1.0;
    fill(p.actor_w, 0.01);
    fill(p.critic_w, 0.01);
    return p;
  }

  double lambda() const { return sigmoid(lambda_raw[0]); }

  template <class F>
  void for_each(F&& f) {
    f("gcn.w1", gcn_w1);
    f("gcn.w2", gcn_w2);
    f("lstm.w", lstm_w);
    f("lstm.b", lstm_b);
    f("actor.w", actor_w);
    f("actor.b", actor_b);
    f("critic.w", critic_w);
    f("critic.b", critic_b);
    f("lambda_raw", lambda_raw);
  }
  template <class F>
  void for_each(F&& f) const {
    const_cast<PolicyParams*>(this)->for_each(
        [&](const char* name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each([&](const char*, const Tensor& t) { n += t.size(); });
    return n;
  }

  bool operator==(const PolicyParams&) const = default;
};

using Gradients = PolicyParams;

inline Gradients zero_gradients(const PolicyParams& p) { return PolicyParams::zeros(p.dims); }

inline void accumulate(Gradients& into, const Gradients& g) {
  std::vector<Tensor*> dst;
  into.for_each([&](const char*, Tensor& t) { dst.push_back(&t); });
  std::size_t k = 0;
  g.for_each([&](const char*, const Tensor& t) {
    auto& d = *dst[k++];
    for (std::size_t i = 0; i < t.size(); ++i) d[i] += t[i];
  });
}

// ---------------------------------------------------------------------------
// Graph convolution

/// Symmetric degree normalization D^-1/2 A D^-1/2 with unit self-loops.
inline Tensor normalize_adjacency(const Tensor& edges) {
  const int m = edges.rows();
  if (edges.cols() != m) throw DimensionError("normalize_adjacency: edges must be square");
  Tensor a = edges;
  for (int i = 0; i < m; ++i) a(i, i) = 1.0;
  Vec inv_sqrt(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double deg = 0.0;
    for (int j = 0; j < m; ++j) deg += a(i, j);
    inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) *= inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[static_cast<std::size_t>(j)];
  return a;
}

inline void check_gcn_shapes(const PolicyParams& p, const Tensor& nodes, const Tensor& adj) {
  const int n = p.gcn_w1.rows();
  if (nodes.cols() != n || p.gcn_w1.cols() != n || p.gcn_w2.rows() != n || p.gcn_w2.cols() != n)
    throw DimensionError("gcn: node features " + nodes.shape_string() + " vs weights " +
                         p.gcn_w1.shape_string());
  if (adj.rows() != nodes.rows() || adj.cols() != nodes.rows())
    throw DimensionError("gcn: adjacency " + adj.shape_string() + " vs nodes " + nodes.shape_string());
}

/// out = A * ReLU(A * X * W1) * W2, shape M x N.
inline Tensor gcn_forward(const PolicyParams& p, const Tensor& nodes, const Tensor& adj) {
  check_gcn_shapes(p, nodes, adj);
  Tensor h1 = matmul(matmul(adj, nodes), p.gcn_w1);
  for (auto& v : h1.values) v = std::max(v, 0.0);
  return matmul(matmul(adj, h1), p.gcn_w2);
}

struct GcnRowCache {
  Tensor ax;  // A X
  Tensor z1;  // A X W1
  Vec u;      // row s of A * ReLU(z1)
  int row = 0;
};

/// Row `s` of gcn_forward, keeping what the backward pass needs.
inline Vec gcn_row_forward(const PolicyParams& p, const Tensor& nodes, const Tensor& adj, int s,
                           GcnRowCache* cache = nullptr) {
  check_gcn_shapes(p, nodes, adj);
  const int m = nodes.rows(), n = nodes.cols();
  if (s < 0 || s >= m) throw DimensionError("gcn: row out of range");
  Tensor ax = matmul(adj, nodes);
  Tensor z1 = matmul(ax, p.gcn_w1);
  Vec u(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < m; ++k) {
    const double a = adj(s, k);
    if (a == 0.0) continue;
    const auto zr = z1.row(k);
    for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] += a * std::max(zr[j], 0.0);
  }
  Vec out(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    const double uk = u[static_cast<std::size_t>(k)];
    if (uk == 0.0) continue;
    const auto wr = p.gcn_w2.row(k);
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] += uk * wr[j];
  }
  if (cache) {
    cache->ax = std::move(ax);
    cache->z1 = std::move(z1);
    cache->u = std::move(u);
    cache->row = s;
  }
  return out;
}

/// Accumulates dW1, dW2 into `g`; writes dL/dX into `d_nodes` when given.
inline void gcn_row_backward(const PolicyParams& p, const Tensor& adj, const GcnRowCache& c,
                             std::span<const double> d_out, Gradients& g, Tensor* d_nodes) {
  const int m = adj.rows(), n = p.gcn_w1.rows();
  // out = u W2
  Vec du(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    const auto wr = p.gcn_w2.row(k);
    auto gr = g.gcn_w2.row(k);
    const double uk = c.u[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      gr[j] += uk * d_out[j];
      acc += wr[j] * d_out[j];
    }
    du[static_cast<std::size_t>(k)] = acc;
  }
  // u = sum_k A[s,k] relu(z1[k]);  dz1[k] = A[s,k] du * 1[z1 > 0]
  Tensor dz1 = Tensor::matrix(m, n);
  for (int k = 0; k < m; ++k) {
    const double a = adj(c.row, k);
    if (a == 0.0) continue;
    const auto zr = c.z1.row(k);
    auto dr = dz1.row(k);
    for (int j = 0; j < n; ++j)
      if (zr[j] > 0.0) dr[j] = a * du[static_cast<std::size_t>(j)];
  }
  // z1 = (A X) W1
  for (int k = 0; k < m; ++k) {
    const auto axr = c.ax.row(k);
    const auto dr = dz1.row(k);
    for (int i = 0; i < n; ++i) {
      const double a = axr[i];
      if (a == 0.0) continue;
      auto gr = g.gcn_w1.row(i);
      for (int j = 0; j < n; ++j) gr[j] += a * dr[j];
    }
  }
  if (d_nodes) {
    // d(AX) = dz1 W1^T;  dX = A^T d(AX)
    Tensor dax = Tensor::matrix(m, n);
    for (int k = 0; k < m; ++k) {
      const auto dr = dz1.row(k);
      auto out = dax.row(k);
      for (int i = 0; i < n; ++i) {
        const auto wr = p.gcn_w1.row(i);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += wr[j] * dr[j];
        out[i] = acc;
      }
    }
    *d_nodes = matmul(transpose(adj), dax);
  }
}

// ---------------------------------------------------------------------------
// Gated recurrent cell

struct LstmState {
  Vec h;
  Vec c;
  static LstmState zeros(int hidden) {
    return {Vec(static_cast<std::size_t>(hidden), 0.0), Vec(static_cast<std::size_t>(hidden), 0.0)};
  }
};

struct LstmCache {
  Vec xh;  // [x, h_prev]
  Vec c_prev;
  Vec i, f, g, o, tanh_c;
};

inline LstmState recurrent_step(const PolicyParams& p, std::span<const double> x, const LstmState& s,
                                LstmCache* cache = nullptr) {
  const int hdim = p.dims.hidden;
  const int in = p.lstm_w.cols() - hdim;
  if (static_cast<int>(x.size()) != in || static_cast<int>(s.h.size()) != hdim ||
      static_cast<int>(s.c.size()) != hdim || p.lstm_w.rows() != 4 * hdim)
    throw DimensionError("recurrent_step: input " + std::to_string(x.size()) + " / hidden " +
                         std::to_string(s.h.size()) + " vs weights " + p.lstm_w.shape_string());
  Vec xh(static_cast<std::size_t>(in + hdim));
  std::copy(x.begin(), x.end(), xh.begin());
  std::copy(s.h.begin(), s.h.end(), xh.begin() + in);
  // Only nonzero inputs contribute; the one-hot and image blocks are sparse.
  std::vector<int> nz;
  nz.reserve(xh.size());
  for (int k = 0; k < in + hdim; ++k)
    if (xh[static_cast<std::size_t>(k)] != 0.0) nz.push_back(k);
  Vec pre(static_cast<std::size_t>(4 * hdim));
  for (int r = 0; r < 4 * hdim; ++r) {
    const double* w = p.lstm_w.values.data() + static_cast<std::size_t>(r) * xh.size();
    double acc = p.lstm_b[static_cast<std::size_t>(r)];
    for (int k : nz) acc += w[k] * xh[static_cast<std::size_t>(k)];
    pre[static_cast<std::size_t>(r)] = acc;
  }
  LstmState out = LstmState::zeros(hdim);
  Vec gi(static_cast<std::size_t>(hdim)), gf(gi), gg(gi), go(gi), tc(gi);
  for (int k = 0; k < hdim; ++k) {
    const auto K = static_cast<std::size_t>(k);
    gi[K] = sigmoid(pre[K]);
    gf[K] = sigmoid(pre[K + hdim]);
    gg[K] = std::tanh(pre[K + 2 * hdim]);
    go[K] = sigmoid(pre[K + 3 * hdim]);
    out.c[K] = gf[K] * s.c[K] + gi[K] * gg[K];
    tc[K] = std::tanh(out.c[K]);
    out.h[K] = go[K] * tc[K];
  }
  if (cache) {
    cache->xh = std::move(xh);
    cache->c_prev = s.c;
    cache->i = std::move(gi);
    cache->f = std::move(gf);
    cache->g = std::move(gg);
    cache->o = std::move(go);
    cache->tanh_c = std::move(tc);
  }
  return out;
}

/// Backward through one cell step. dh, dc are gradients w.r.t. the step's
/// outputs; fills dx (input), dh_prev and dc_prev.
inline void recurrent_backward(const PolicyParams& p, const LstmCache& c, std::span<const double> dh,
                               std::span<const double> dc, Gradients& g, Vec* dx, Vec& dh_prev, Vec& dc_prev) {
  const int hdim = p.dims.hidden;
  const int width = static_cast<int>(c.xh.size());
  const int in = width - hdim;
  Vec dpre(static_cast<std::size_t>(4 * hdim));
  dc_prev.assign(static_cast<std::size_t>(hdim), 0.0);
  for (int k = 0; k < hdim; ++k) {
    const auto K = static_cast<std::size_t>(k);
    const double do_ = dh[K] * c.tanh_c[K];
    const double dct = dc[K] + dh[K] * c.o[K] * (1.0 - c.tanh_c[K] * c.tanh_c[K]);
    const double di = dct * c.g[K];
    const double df = dct * c.c_prev[K];
    const double dg = dct * c.i[K];
    dc_prev[K] = dct * c.f[K];
    dpre[K] = di * c.i[K] * (1.0 - c.i[K]);
    dpre[K + hdim] = df * c.f[K] * (1.0 - c.f[K]);
    dpre[K + 2 * hdim] = dg * (1.0 - c.g[K] * c.g[K]);
    dpre[K + 3 * hdim] = do_ * c.o[K] * (1.0 - c.o[K]);
  }
  std::vector<int> nz;
  nz.reserve(c.xh.size());
  for (int k = 0; k < width; ++k)
    if (c.xh[static_cast<std::size_t>(k)] != 0.0) nz.push_back(k);
  Vec dxh(static_cast<std::size_t>(width), 0.0);
  for (int r = 0; r < 4 * hdim; ++r) {
    const double d = dpre[static_cast<std::size_t>(r)];
    g.lstm_b[static_cast<std::size_t>(r)] += d;
    if (d == 0.0) continue;
    const double* w = p.lstm_w.values.data() + static_cast<std::size_t>(r) * width;
    double* gw = g.lstm_w.values.data() + static_cast<std::size_t>(r) * width;
    for (int k : nz) gw[k] += d * c.xh[static_cast<std::size_t>(k)];
    for (int k = 0; k < width; ++k) dxh[static_cast<std::size_t>(k)] += d * w[k];
  }
  if (dx) dx->assign(dxh.begin(), dxh.begin() + in);
  dh_prev.assign(dxh.begin() + in, dxh.end());
}

// ---------------------------------------------------------------------------
// Actor-critic heads

struct HeadOutput {
  std::array<double, kNumActions> logits{};
  double value = 0.0;
};

inline HeadOutput actor_critic(const PolicyParams& p, std::span<const double> h) {
  if (static_cast<int>(h.size()) != p.dims.hidden) throw DimensionError("actor_critic: hidden size");
  HeadOutput out;
  for (int a = 0; a < kNumActions; ++a) out.logits[static_cast<std::size_t>(a)] = p.actor_b[static_cast<std::size_t>(a)] + dot(p.actor_w.row(a), h);
  out.value = p.critic_b[0] + dot(p.critic_w.row(0), h);
  return out;
}

inline void actor_critic_backward(const PolicyParams& p, std::span<const double> h,
                                  const std::array<double, kNumActions>& d_logits, double d_value, Gradients& g,
                                  Vec& dh) {
  const auto hd = static_cast<std::size_t>(p.dims.hidden);
  dh.assign(hd, 0.0);
  for (int a = 0; a < kNumActions; ++a) {
    const double d = d_logits[static_cast<std::size_t>(a)];
    g.actor_b[static_cast<std::size_t>(a)] += d;
    auto gw = g.actor_w.row(a);
    const auto w = p.actor_w.row(a);
    for (std::size_t k = 0; k < hd; ++k) {
      gw[k] += d * h[k];
      dh[k] += d * w[k];
    }
  }
  g.critic_b[0] += d_value;
  auto gw = g.critic_w.row(0);
  const auto w = p.critic_w.row(0);
  for (std::size_t k = 0; k < hd; ++k) {
    gw[k] += d_value * h[k];
    dh[k] += d_value * w[k];
  }
}

inline std::array<double, kNumActions> softmax(const std::array<double, kNumActions>& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  std::array<double, kNumActions> p{};
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    s += p[i];
  }
  for (auto& v : p) v /= s;
  return p;
}

inline std::array<double, kNumActions> log_softmax(const std::array<double, kNumActions>& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  std::array<double, kNumActions> out{};
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

inline double entropy(const std::array<double, kNumActions>& logits) {
  const auto p = softmax(logits);
  const auto lp = log_softmax(logits);
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) h -= p[i] * lp[i];
  return h;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  Gradients m;
  Gradients v;
  long step = 0;
  static AdamState for_params(const PolicyParams& p) { return {zero_gradients(p), zero_gradients(p), 0}; }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One bias-corrected Adam step. Throws NumericError (params untouched) on a
/// non-finite gradient.
inline void adam_update(PolicyParams& params, const Gradients& grads, double lr, AdamState& state) {
  if (!(params.dims == grads.dims)) throw DimensionError("adam_update: gradient shapes differ");
  bool finite = true;
  grads.for_each([&](const char*, const Tensor& t) { finite = finite && all_finite(t.values); });
  if (!finite) throw NumericError("adam_update: non-finite gradient");
  ++state.step;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  std::vector<Tensor*> ps, ms, vs;
  std::vector<const Tensor*> gs;
  params.for_each([&](const char*, Tensor& t) { ps.push_back(&t); });
  state.m.for_each([&](const char*, Tensor& t) { ms.push_back(&t); });
  state.v.for_each([&](const char*, Tensor& t) { vs.push_back(&t); });
  grads.for_each([&](const char*, const Tensor& t) { gs.push_back(&t); });
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto& p = ps[k]->values;
    auto& m = ms[k]->values;
    auto& v = vs[k]->values;
    const auto& g = gs[k]->values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
    }
  }
}

// ---------------------------------------------------------------------------
// Parameter blocks inside ckpt-v1 files

inline void write_params(std::ostream& os, const PolicyParams& p) {
  char buf[32];
  p.for_each([&](const char* name, const Tensor& t) {
    os << "param " << name;
    for (int d : t.shape) os << ' ' << d;
    os << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", t[i]);
      os << (i ? " " : "") << buf;
    }
    os << '\n';
  });
}

/// Reads the blocks written by write_params; `lineno` tracks the file line.
inline PolicyParams read_params(std::istream& in, const ModelDims& dims, int& lineno) {
  PolicyParams p = PolicyParams::zeros(dims);
  std::string line;
  p.for_each([&](const char* name, Tensor& t) {
    ++lineno;
    if (!std::getline(in, line)) throw ParseError("checkpoint: line " + std::to_string(lineno) + ": missing " + name);
    std::istringstream hs(line);
    std::string kw, nm;
    hs >> kw >> nm;
    if (kw != "param" || nm != name)
      throw ParseError("checkpoint: line " + std::to_string(lineno) + ": expected 'param " + name + "'");
    std::vector<int> shape;
    int d;
    while (hs >> d) shape.push_back(d);
    if (shape != t.shape)
      throw DimensionError("checkpoint: line " + std::to_string(lineno) + ": " + name + " has shape mismatch");
    ++lineno;
    if (!std::getline(in, line)) throw ParseError("checkpoint: line " + std::to_string(lineno) + ": missing values");
    const char* cur = line.c_str();
    for (std::size_t i = 0; i < t.size(); ++i) {
      char* end = nullptr;
      t[i] = std::strtod(cur, &end);
      if (end == cur) throw ParseError("checkpoint: line " + std::to_string(lineno) + ": too few values for " + name);
      cur = end;
    }
    while (*cur == ' ') ++cur;
    if (*cur != '\0') throw ParseError("checkpoint: line " + std::to_string(lineno) + ": too many values for " + name);
  });
  return p;
}

}  // namespace zonegraph
