#pragma once
// Brute-force reference computations used by the test suite and `selfcheck`.
// Nothing here calls the routine it is meant to check: visibility uses exact
// integer geometry, clustering enumerates partitions, planning enumerates
// simple paths, matching enumerates permutations, and the network forward
// pass is a plain dense re-implementation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "zonegraph/graph_build.hpp"
#include "zonegraph/nn.hpp"
#include "zonegraph/policy.hpp"
#include "zonegraph/scene.hpp"

namespace zonegraph::oracle {

// ---------------------------------------------------------------------------
// Geometry

/// Exact integer visibility test: |d|^2 <= 9 cells^2 and angle to the
/// heading <= 45 degrees (cos^2 >= 1/2 with a non-negative dot product).
inline bool sees(int ix, int iz, int yaw, int pitch, const ObjectInstance& o) {
  const int want = o.band == HeightBand::Low ? -30 : o.band == HeightBand::High ? 30 : 0;
  if (pitch != want) return false;
  const long dx = o.ix - ix, dz = o.iz - iz;
  const long d2 = dx * dx + dz * dz;
  if (d2 > 9) return false;
  if (d2 == 0) return true;
  static const int hx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static const int hz[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const int k = yaw / 45;
  const long h2 = hx[k] * hx[k] + hz[k] * hz[k];
  const long dot = dx * hx[k] + dz * hz[k];
  return dot >= 0 && 2 * dot * dot >= d2 * h2;
}

inline std::vector<std::string> goals_seen(const Scene& s, int ix, int iz, int yaw, int pitch) {
  std::set<std::string> cats;
  for (const auto& o : s.objects)
    if (is_goal_category(o.category) && sees(ix, iz, yaw, pitch, o)) cats.insert(o.category);
  return {cats.begin(), cats.end()};
}

/// 4-neighborhood geodesic to any cell that can see `goal`, by repeated
/// relaxation until nothing changes. Negative when unreachable.
inline double geodesic(const Scene& s, int ix, int iz, const std::string& goal) {
  const int w = s.width, d = s.depth;
  auto open = [&](int x, int z) { return x >= 0 && z >= 0 && x < w && z < d && s.reachable[z * w + x]; };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(w * d), inf);
  for (int z = 0; z < d; ++z)
    for (int x = 0; x < w; ++x) {
      if (!open(x, z)) continue;
      bool ok = false;
      for (int yaw = 0; yaw < 360; yaw += 45)
        for (int pitch : {-30, 0, 30})
          for (const auto& o : s.objects)
            if (o.category == goal && sees(x, z, yaw, pitch, o)) ok = true;
      if (ok) dist[static_cast<std::size_t>(z * w + x)] = 0.0;
    }
  for (bool changed = true; changed;) {
    changed = false;
    for (int z = 0; z < d; ++z)
      for (int x = 0; x < w; ++x) {
        if (!open(x, z)) continue;
        auto& here = dist[static_cast<std::size_t>(z * w + x)];
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& n : nb)
          if (open(x + n[0], z + n[1])) {
            const double c = dist[static_cast<std::size_t>((z + n[1]) * w + x + n[0])] + 0.5;
            if (c < here) {
              here = c;
              changed = true;
            }
          }
      }
  }
  const double r = open(ix, iz) ? dist[static_cast<std::size_t>(iz * w + ix)] : inf;
  return std::isinf(r) ? -1.0 : r;
}

// ---------------------------------------------------------------------------
// Zone features, partitions, graphs

struct CellFeature {
  int ix = 0, iz = 0;
  Vec feature;
  int count = 0;
};

/// Per reachable cell (row-major order): mean embedding over all
/// (view, detected goal category) pairs.
inline std::vector<CellFeature> cell_features(const Scene& s, const EmbeddingProvider& p) {
  std::vector<CellFeature> out;
  const auto n = static_cast<std::size_t>(p.dim());
  for (int iz = 0; iz < s.depth; ++iz)
    for (int ix = 0; ix < s.width; ++ix) {
      if (!s.reachable[static_cast<std::size_t>(iz * s.width + ix)]) continue;
      CellFeature c{ix, iz, Vec(n, 0.0), 0};
      for (int yaw = 0; yaw < 360; yaw += 45)
        for (int pitch : {-30, 0, 30})
          for (const auto& cat : goals_seen(s, ix, iz, yaw, pitch)) {
            const auto e = p.object_embedding(cat).values;
            for (std::size_t j = 0; j < n; ++j) c.feature[j] += e[j];
            ++c.count;
          }
      if (c.count)
        for (auto& v : c.feature) v /= c.count;
      out.push_back(std::move(c));
    }
  return out;
}

/// Relabels so labels appear in order of first occurrence (0, 1, ...).
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  for (int l : labels) {
    auto it = remap.find(l);
    if (it == remap.end()) it = remap.emplace(l, static_cast<int>(remap.size())).first;
    out.push_back(it->second);
  }
  return out;
}

inline double partition_sse(const std::vector<Vec>& pts, const std::vector<int>& labels, int k) {
  const std::size_t n = pts.empty() ? 0 : pts[0].size();
  double sse = 0.0;
  for (int c = 0; c < k; ++c) {
    Vec mean(n, 0.0);
    int cnt = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (labels[i] == c) {
        for (std::size_t j = 0; j < n; ++j) mean[j] += pts[i][j];
        ++cnt;
      }
    if (!cnt) continue;
    for (auto& v : mean) v /= cnt;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (labels[i] == c)
        for (std::size_t j = 0; j < n; ++j) sse += (pts[i][j] - mean[j]) * (pts[i][j] - mean[j]);
  }
  return sse;
}

struct Partitions {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> optimal;  // canonical labelings within tol of best
};

/// Every labeling of the points into exactly k non-empty groups (canonical
/// form), keeping the minimum-SSE ones.
inline Partitions best_partitions(const std::vector<Vec>& pts, int k, double tol = 1e-9) {
  Partitions r;
  const int n = static_cast<int>(pts.size());
  std::vector<std::pair<double, std::vector<int>>> all;
  std::vector<int> lab(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      if (used == k) all.emplace_back(partition_sse(pts, lab, k), lab);
      return;
    }
    for (int c = 0; c <= std::min(used, k - 1); ++c) {
      lab[static_cast<std::size_t>(i)] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  for (const auto& [s, l] : all) r.best = std::min(r.best, s);
  for (const auto& [s, l] : all)
    if (s <= r.best + tol) r.optimal.push_back(l);
  return r;
}

struct DenseGraph {
  std::vector<Vec> nodes;
  std::vector<Vec> edges;
};

inline DenseGraph graph_from_labels(const std::vector<CellFeature>& cells, const std::vector<int>& labels, int k,
                                    double eps) {
  const std::size_t n = cells.empty() ? 0 : cells[0].feature.size();
  DenseGraph g;
  g.nodes.assign(static_cast<std::size_t>(k), Vec(n, 0.0));
  g.edges.assign(static_cast<std::size_t>(k), Vec(static_cast<std::size_t>(k), 0.0));
  std::vector<int> cnt(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = 0; j < n; ++j) g.nodes[c][j] += cells[i].feature[j];
    ++cnt[c];
  }
  for (std::size_t c = 0; c < g.nodes.size(); ++c)
    if (cnt[c])
      for (auto& v : g.nodes[c]) v /= cnt[c];
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      if (a == b) {
        g.edges[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1.0;
        continue;
      }
      double pairs = 0, near = 0;
      for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = 0; j < cells.size(); ++j)
          if (labels[i] == a && labels[j] == b) {
            ++pairs;
            const int man = std::abs(cells[i].ix - cells[j].ix) + std::abs(cells[i].iz - cells[j].iz);
            if (man * 0.5 <= eps + 1e-9) ++near;
          }
      g.edges[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = pairs > 0 ? near / pairs : 0.0;
    }
  return g;
}

/// Random small scene: 1-3 goal objects on distinct cells, the rest open and
/// 4-connected.
inline Scene random_micro_scene(std::uint64_t seed, int w = 3, int d = 3) {
  Rng rng(seed);
  for (;;) {
    Scene s;
    s.id = "micro-" + std::to_string(seed);
    s.room = RoomCategory::Kitchen;
    s.width = w;
    s.depth = d;
    s.seed = seed;
    s.reachable.assign(static_cast<std::size_t>(w * d), 1);
    const int k = 1 + static_cast<int>(rng.index(3));
    for (int i = 0; i < k; ++i) {
      const auto cell = rng.index(static_cast<std::size_t>(w * d));
      if (!s.reachable[cell]) continue;
      s.reachable[cell] = 0;
      ObjectInstance o;
      o.category = std::string(kGoalCategories[rng.index(kGoalCategories.size())]);
      o.ix = static_cast<int>(cell) % w;
      o.iz = static_cast<int>(cell) / w;
      o.band = static_cast<HeightBand>(rng.index(3));
      s.objects.push_back(o);
    }
    // connectivity by repeated spreading
    std::vector<int> seen(s.reachable.size(), 0);
    int start = -1;
    for (std::size_t i = 0; i < s.reachable.size(); ++i)
      if (s.reachable[i]) {
        start = static_cast<int>(i);
        break;
      }
    if (start < 0) continue;
    seen[static_cast<std::size_t>(start)] = 1;
    for (bool grew = true; grew;) {
      grew = false;
      for (int i = 0; i < w * d; ++i) {
        if (!seen[static_cast<std::size_t>(i)]) continue;
        const int x = i % w, z = i / w;
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& n : nb) {
          const int nx = x + n[0], nz = z + n[1];
          if (nx < 0 || nz < 0 || nx >= w || nz >= d) continue;
          const int j = nz * w + nx;
          if (s.reachable[static_cast<std::size_t>(j)] && !seen[static_cast<std::size_t>(j)]) {
            seen[static_cast<std::size_t>(j)] = 1;
            grew = true;
          }
        }
      }
    }
    bool ok = true;
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (s.reachable[i] && !seen[i]) ok = false;
    if (ok) return s;
  }
}

// ---------------------------------------------------------------------------
// Planning and matching

struct PathSearch {
  double best = 0.0;
  std::set<int> first_hops;  // first hops of every path within tol of best
  bool reachable = false;
};

/// Every simple path from `from` to `to` over edges > 0.
inline PathSearch all_simple_paths(const std::vector<Vec>& e, int from, int to, double tol = 1e-12) {
  PathSearch r;
  const int m = static_cast<int>(e.size());
  if (from == to) {
    r.best = 1.0;
    r.reachable = true;
    r.first_hops.insert(to);
    return r;
  }
  std::vector<std::pair<double, int>> found;
  std::vector<char> on(static_cast<std::size_t>(m), 0);
  std::function<void(int, double, int)> dfs = [&](int u, double prob, int first) {
    if (u == to) {
      found.emplace_back(prob, first);
      return;
    }
    on[static_cast<std::size_t>(u)] = 1;
    for (int v = 0; v < m; ++v) {
      const double w = e[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
      if (on[static_cast<std::size_t>(v)] || v == u || w <= 0.0) continue;
      dfs(v, prob * w, first < 0 ? v : first);
    }
    on[static_cast<std::size_t>(u)] = 0;
  };
  dfs(from, 1.0, -1);
  for (const auto& [p, f] : found) r.best = std::max(r.best, p);
  r.reachable = !found.empty();
  for (const auto& [p, f] : found)
    if (p >= r.best - tol) r.first_hops.insert(f);
  return r;
}

/// Maximum total score over all permutations.
inline double best_assignment(const std::vector<Vec>& score) {
  std::vector<int> p(score.size());
  std::iota(p.begin(), p.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += score[i][static_cast<std::size_t>(p[i])];
    best = std::max(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// ---------------------------------------------------------------------------
// Dense network forward

inline std::vector<Vec> to_rows(const Tensor& t) {
  std::vector<Vec> r(static_cast<std::size_t>(t.rows()), Vec(static_cast<std::size_t>(t.cols())));
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t(i, j);
  return r;
}

inline std::vector<Vec> mul(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  std::vector<Vec> c(a.size(), Vec(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// Full two-layer GCN output: A ReLU(A X W1) W2 with A = D^-1/2 E D^-1/2
/// (unit diagonal).
inline std::vector<Vec> gcn(const std::vector<Vec>& x, const std::vector<Vec>& edges, const std::vector<Vec>& w1,
                            const std::vector<Vec>& w2) {
  const std::size_t m = edges.size();
  std::vector<Vec> a = edges;
  for (std::size_t i = 0; i < m; ++i) a[i][i] = 1.0;
  Vec deg(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) deg[i] += a[i][j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a[i][j] /= std::sqrt(deg[i]) * std::sqrt(deg[j]);
  auto h = mul(mul(a, x), w1);
  for (auto& r : h)
    for (auto& v : r) v = std::max(0.0, v);
  return mul(mul(a, h), w2);
}

/// One recurrent cell step, gates stacked [input, forget, cell, output].
inline std::pair<Vec, Vec> lstm(const Tensor& w, const Tensor& b, const Vec& x, const Vec& h, const Vec& c) {
  const std::size_t H = h.size();
  Vec xh = x;
  xh.insert(xh.end(), h.begin(), h.end());
  Vec z(4 * H, 0.0);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    z[r] = b[r];
    for (std::size_t k = 0; k < xh.size(); ++k) z[r] += w(static_cast<int>(r), static_cast<int>(k)) * xh[k];
  }
  auto sg = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  Vec h2(H), c2(H);
  for (std::size_t k = 0; k < H; ++k) {
    const double i = sg(z[k]), f = sg(z[H + k]), g = std::tanh(z[2 * H + k]), o = sg(z[3 * H + k]);
    c2[k] = f * c[k] + i * g;
    h2[k] = o * std::tanh(c2[k]);
  }
  return {h2, c2};
}

/// Actor logits and critic value from the hidden state.
inline std::pair<Vec, double> heads(const PolicyParams& p, const Vec& h) {
  Vec logits(static_cast<std::size_t>(kNumActions));
  for (int a = 0; a < kNumActions; ++a) {
    double s = p.actor_b[static_cast<std::size_t>(a)];
    for (std::size_t k = 0; k < h.size(); ++k) s += p.actor_w(a, static_cast<int>(k)) * h[k];
    logits[static_cast<std::size_t>(a)] = s;
  }
  double v = p.critic_b[0];
  for (std::size_t k = 0; k < h.size(); ++k) v += p.critic_w(0, static_cast<int>(k)) * h[k];
  return {logits, v};
}

/// Total actor-critic loss of a recorded trajectory with fixed advantages,
/// recomputed from scratch (graph adaptation with sigmoid(lambda_raw),
/// full dense GCN, recurrent cell, heads).
inline double a2c_total_loss(const Trajectory& t, const PolicyParams& p, const KnowledgeGraph& g, const A2cConfig& cfg,
                             const Vec& adv) {
  const double lam = 1.0 / (1.0 + std::exp(-p.lambda_raw[0]));
  auto nodes = to_rows(g.nodes);
  const auto edges = to_rows(g.edges);
  const auto w1 = to_rows(p.gcn_w1), w2 = to_rows(p.gcn_w2);
  const std::size_t H = static_cast<std::size_t>(p.dims.hidden);
  Vec h(H, 0.0), c(H, 0.0);
  // returns
  Vec ret(t.steps.size());
  double next = t.steps.back().done ? 0.0 : t.bootstrap_value;
  for (std::size_t k = t.steps.size(); k-- > 0;) ret[k] = next = t.steps[k].reward + cfg.gamma * next;
  double total = 0.0;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& st = t.steps[k];
    auto& row = nodes[static_cast<std::size_t>(st.zone)];
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = lam * st.f_obs[j] + (1.0 - lam) * row[j];
    Vec x;
    x.insert(x.end(), st.input.img.begin(), st.input.img.end());
    x.insert(x.end(), st.input.obj.begin(), st.input.obj.end());
    if (t.mask.gra) x.insert(x.end(), st.input.gra.begin(), st.input.gra.end());
    else {
      const auto out = gcn(nodes, edges, w1, w2);
      const auto& r = out[static_cast<std::size_t>(st.subgoal)];
      x.insert(x.end(), r.begin(), r.end());
    }
    x.insert(x.end(), st.input.act.begin(), st.input.act.end());
    std::tie(h, c) = lstm(p.lstm_w, p.lstm_b, x, h, c);
    const auto [logits, v] = heads(p, h);
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    const double lse = mx + std::log(z);
    double ent = 0.0;
    for (double l : logits) ent -= std::exp(l - lse) * (l - lse);
    const double lp = logits[static_cast<std::size_t>(st.action)] - lse;
    total += -adv[k] * lp + cfg.value_coef * (ret[k] - v) * (ret[k] - v) - cfg.entropy_coef * ent;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Finite differences

inline double central_difference(const std::function<double()>& f, double& x, double h = 1e-5) {
  const double x0 = x;
  x = x0 + h;
  const double up = f();
  x = x0 - h;
  const double down = f();
  x = x0;
  return (up - down) / (2.0 * h);
}

/// |a - b| relative to the larger magnitude, with a floor for values near zero.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace zonegraph::oracle
