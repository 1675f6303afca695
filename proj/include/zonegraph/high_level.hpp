#pragma once
// High-level controller: where am I (zone), blend the current view into that
// zone's node, which zone most likely holds the goal, and which neighboring
// zone to head for next along the most probable chain of zones.

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "zonegraph/graph_build.hpp"
#include "zonegraph/nn.hpp"

namespace zonegraph {

struct GraphState {
  std::shared_ptr<const KnowledgeGraph> base;
  Tensor adapted;  // episode-local copy of the node features
  Tensor adj;      // normalized adjacency of base->edges (edges never adapt)
  double lambda = 0.5;

  static GraphState start(std::shared_ptr<const KnowledgeGraph> g, double lambda) {
    GraphState s;
    s.adapted = g->nodes;
    s.adj = normalize_adjacency(g->edges);
    s.base = std::move(g);
    s.lambda = lambda;
    return s;
  }

  void reset() { adapted = base->nodes; }
  int zones() const { return base->zones; }
};

struct PlanResult {
  int current = 0;
  int target = 0;
  int subgoal = 0;
  double path_prob = 0.0;
  bool reachable = false;
  std::vector<int> path;  // current ... target when reachable
};

/// Nearest adapted node by Euclidean distance; ties go to the lowest id.
inline int locate_current_zone(const GraphState& s, std::span<const double> f_obs) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int m = 0; m < s.zones(); ++m) {
    const double d = squared_distance(s.adapted.row(m), f_obs);
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

/// Row form of the episode-local update: row `zone` <- lambda f + (1 - lambda) row.
inline void adapt_graph(GraphState& s, std::span<const double> f_obs, int zone) {
  if (zone < 0 || zone >= s.zones()) throw UsageError("adapt_graph: zone out of range");
  auto row = s.adapted.row(zone);
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = s.lambda * f_obs[j] + (1.0 - s.lambda) * row[j];
}

/// Base-graph node with the highest cosine similarity to the goal embedding.
inline int target_zone(const GraphState& s, std::span<const double> goal_emb) {
  int best = 0;
  double best_c = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < s.zones(); ++m) {
    const double c = cosine(s.base->nodes.row(m), goal_emb);
    if (c > best_c) {
      best_c = c;
      best = m;
    }
  }
  return best;
}

/// Maximum-product path over edge probabilities, via Dijkstra on -log(e).
inline PlanResult plan_path(const Tensor& edges, int from, int to) {
  const int m = edges.rows();
  if (from < 0 || from >= m || to < 0 || to >= m) throw UsageError("plan_subgoal: zone out of range");
  PlanResult r;
  r.current = from;
  r.target = to;
  if (from == to) {
    r.subgoal = to;
    r.path_prob = 1.0;
    r.reachable = true;
    r.path = {from};
    return r;
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(static_cast<std::size_t>(m), inf);
  std::vector<int> prev(static_cast<std::size_t>(m), -1);
  std::vector<char> done(static_cast<std::size_t>(m), 0);
  cost[static_cast<std::size_t>(from)] = 0.0;
  for (int it = 0; it < m; ++it) {
    int u = -1;
    for (int v = 0; v < m; ++v)
      if (!done[static_cast<std::size_t>(v)] && cost[static_cast<std::size_t>(v)] < inf &&
          (u < 0 || cost[static_cast<std::size_t>(v)] < cost[static_cast<std::size_t>(u)]))
        u = v;
    if (u < 0) break;
    done[static_cast<std::size_t>(u)] = 1;
    for (int v = 0; v < m; ++v) {
      const double e = edges(u, v);
      if (v == u || e <= 0.0 || done[static_cast<std::size_t>(v)]) continue;
      const double c = cost[static_cast<std::size_t>(u)] - std::log(e);
      if (c < cost[static_cast<std::size_t>(v)]) {
        cost[static_cast<std::size_t>(v)] = c;
        prev[static_cast<std::size_t>(v)] = u;
      }
    }
  }
  if (cost[static_cast<std::size_t>(to)] == inf) {
    r.subgoal = from;
    r.path_prob = 0.0;
    r.reachable = false;
    return r;
  }
  for (int v = to; v != -1; v = prev[static_cast<std::size_t>(v)]) r.path.insert(r.path.begin(), v);
  r.subgoal = r.path[1];
  r.path_prob = 1.0;
  for (std::size_t k = 1; k < r.path.size(); ++k)
    r.path_prob *= edges(r.path[k - 1], r.path[k]);
  r.reachable = true;
  return r;
}

inline PlanResult plan_subgoal(const GraphState& s, int current, int target) {
  return plan_path(s.base->edges, current, target);
}

/// GCN output row for the sub-goal zone, computed on the adapted nodes.
inline Vec graph_feature(const PolicyParams& params, const GraphState& s, int subgoal) {
  if (params.gcn_w1.rows() != s.base->features)
    throw UsageError("graph_feature: GCN width " + std::to_string(params.gcn_w1.rows()) +
                         " does not match node features " + std::to_string(s.base->features));
  return gcn_row_forward(params, s.adapted, s.adj, subgoal);
}

}  // namespace zonegraph
