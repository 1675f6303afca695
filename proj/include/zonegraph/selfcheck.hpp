#pragma once
// Oracle checks shared by `zonegraph selfcheck` and the acceptance suite.

#include <cstdio>
#include <string>
#include <vector>

#include "zonegraph/graph_build.hpp"
#include "zonegraph/high_level.hpp"
#include "zonegraph/hungarian.hpp"
#include "zonegraph/oracles.hpp"
#include "zonegraph/policy.hpp"

namespace zonegraph {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace check_detail {

inline std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

inline bool close(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(std::abs(a[i] - b[i]) <= tol)) return false;
  return true;
}

inline EmbeddingProvider unit_table() {
  std::map<std::string, Embedding> t;
  t["Bowl"] = {{1.0, 0.0, 0.0}};
  t["Pan"] = {{0.0, 1.0, 0.0}};
  t["Sink"] = {{0.0, 0.0, 1.0}};
  t["Cabinet"] = {{0.6, 0.8, 0.0}};
  return EmbeddingProvider::from_table(3, t);
}

inline Sighting seen(const char* c) { return {c, 1, 0.0, 1.0}; }

/// Normwise relative error ||a - n|| / max(||a||, ||n||); 0 when both vanish.
inline double normwise(const Vec& a, const Vec& n) {
  double d = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double den = std::sqrt(std::max(na, nn));
  return den == 0.0 ? 0.0 : std::sqrt(d) / den;
}

inline void fill(Tensor& t, Rng& rng, double lim) {
  for (auto& v : t.values) v = rng.uniform(-lim, lim);
}

inline ModelDims small_dims(Rng& rng) {
  ModelDims d;
  d.embed = 2 + static_cast<int>(rng.index(3));
  d.node = 2 + static_cast<int>(rng.index(4));
  d.zones = 2 + static_cast<int>(rng.index(3));
  d.hidden = 2 + static_cast<int>(rng.index(5));
  return d;
}

inline PolicyParams random_params(const ModelDims& d, Rng& rng) {
  PolicyParams p = PolicyParams::zeros(d);
  p.for_each([&](const char*, Tensor& t) { fill(t, rng, 0.8); });
  return p;
}

inline KnowledgeGraph random_graph(int m, int n, Rng& rng) {
  KnowledgeGraph g;
  g.zones = m;
  g.features = n;
  g.room = RoomCategory::Kitchen;
  g.nodes = Tensor::matrix(m, n);
  fill(g.nodes, rng, 1.0);
  g.edges = Tensor::matrix(m, m);
  for (int a = 0; a < m; ++a) {
    g.edges(a, a) = 1.0;
    for (int b = a + 1; b < m; ++b) g.edges(a, b) = g.edges(b, a) = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
  }
  return g;
}

/// Central differences of f with respect to every element of t.
inline Vec numeric_gradient(Tensor& t, const std::function<double()>& f) {
  Vec out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = oracle::central_difference(f, t.values[i]);
  return out;
}

inline Vec numeric_gradient(Vec& v, const std::function<double()>& f) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = oracle::central_difference(f, v[i]);
  return out;
}

struct WorstError {
  double worst = 0.0;
  std::string where;
  void add(double e, const std::string& w) {
    if (!(e <= worst)) {
      worst = e;
      where = w;
    }
  }
};

}  // namespace check_detail

// ---------------------------------------------------------------------------
// Equation algebra (hand cases, tolerance 1e-12)

inline std::vector<CheckResult> check_equation_algebra() {
  using namespace check_detail;
  std::vector<CheckResult> out;
  const double tol = 1e-12;
  const auto prov = unit_table();
  auto f_obs = [&](std::vector<Sighting> v) {
    Observation o;
    o.visible = std::move(v);
    return observation_feature(prov, o);
  };
  {
    const Vec f = f_obs({seen("Bowl")});
    out.push_back({"eq1 single detection", close(f, Vec{1, 0, 0}, tol), ""});
  }
  {
    const Vec f = f_obs({seen("Bowl"), seen("Pan"), seen("Cabinet")});
    out.push_back({"eq1 two detections plus a non-goal", close(f, Vec{0.5, 0.5, 0}, tol), ""});
  }
  {
    const Vec f = f_obs({seen("Bowl"), seen("Pan"), seen("Sink"), seen("Bowl")});
    out.push_back({"eq1 three categories, repeated sighting", close(f, Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, tol), ""});
  }
  {
    PositionFeatureMap fm;
    fm.room = RoomCategory::Kitchen;
    fm.dim = 2;
    fm.entries = {{0, 0, {1.0, 2.0}, 1}, {1, 0, {3.0, 4.0}, 1}, {5, 5, {-1.0, 0.5}, 1}, {6, 5, {0.0, 0.25}, 1},
                  {7, 5, {1.0, 0.0}, 1}};
    ZoneAssignment za{{0, 0, 1, 1, 1}, {}, 2};
    const auto g = build_room_graph(za, fm, 0.5);
    const bool ok = close(g.nodes.row(0), Vec{2.0, 3.0}, tol) && close(g.nodes.row(1), Vec{0.0, 0.25}, tol);
    out.push_back({"eq2 zone means", ok, ""});
  }
  auto edge = [&](std::vector<PositionFeature> a, std::vector<PositionFeature> b) {
    PositionFeatureMap fm;
    fm.room = RoomCategory::Kitchen;
    fm.dim = 1;
    ZoneAssignment za;
    za.zones = 2;
    for (auto& e : a) {
      fm.entries.push_back(e);
      za.assignment.push_back(0);
    }
    for (auto& e : b) {
      fm.entries.push_back(e);
      za.assignment.push_back(1);
    }
    return build_room_graph(za, fm, 0.5).edges(0, 1);
  };
  out.push_back({"eq3 adjacent zones -> 1.0", std::abs(edge({{0, 0, {1.0}, 1}}, {{1, 0, {0.0}, 1}}) - 1.0) <= tol, ""});
  out.push_back({"eq3 far zones -> 0.0", std::abs(edge({{0, 0, {1.0}, 1}}, {{4, 4, {0.0}, 1}}) - 0.0) <= tol, ""});
  out.push_back({"eq3 mixed -> 0.5",
                 std::abs(edge({{0, 0, {1.0}, 1}}, {{1, 0, {0.0}, 1}, {3, 0, {0.0}, 1}}) - 0.5) <= tol, ""});
  for (double lam : {0.0, 0.3, 1.0}) {
    KnowledgeGraph g;
    g.zones = 2;
    g.features = 2;
    g.nodes = Tensor::matrix(2, 2);
    g.nodes.values = {1.0, 2.0, 7.0, 8.0};
    g.edges = Tensor::identity(2);
    auto gs = GraphState::start(std::make_shared<const KnowledgeGraph>(g), lam);
    adapt_graph(gs, Vec{3.0, -1.0}, 0);
    const Vec want = lam == 0.0 ? Vec{1.0, 2.0} : lam == 1.0 ? Vec{3.0, -1.0} : Vec{1.6, 1.1};
    const bool ok = close(gs.adapted.row(0), want, tol) && close(gs.adapted.row(1), Vec{7.0, 8.0}, 0.0);
    out.push_back({"eq4 row update lambda=" + fmt("%g", lam), ok, ""});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep -> cluster -> graph against brute force on micro-scenes

inline CheckResult check_pipeline_micro(int scenes, std::uint64_t seed, int zones = 2) {
  using namespace check_detail;
  const auto prov = EmbeddingProvider::synthetic(seed, 8);
  int failures = 0;
  std::string first;
  for (int i = 0; i < scenes; ++i) {
    const Scene s = oracle::random_micro_scene(hash_combine(seed, static_cast<std::uint64_t>(i)));
    auto fail = [&](const std::string& why) {
      if (!failures++) first = s.id + ": " + why;
    };
    const auto fm = sweep_position_features(s, prov);
    const auto ref = oracle::cell_features(s, prov);
    if (fm.entries.size() != ref.size()) {
      fail("position count");
      continue;
    }
    bool feat_ok = true;
    std::vector<Vec> pts;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const auto& e = fm.entries[k];
      if (e.ix != ref[k].ix || e.iz != ref[k].iz || !close(e.feature, ref[k].feature, 1e-9)) feat_ok = false;
      pts.push_back(ref[k].feature);
    }
    if (!feat_ok) {
      fail("position features");
      continue;
    }
    const auto za = cluster_zones(fm, zones, seed);
    std::vector<Vec> distinct;
    for (const auto& p : pts)
      if (std::none_of(distinct.begin(), distinct.end(), [&](const Vec& d) { return d == p; })) distinct.push_back(p);
    const int expect_k = std::min<int>(zones, static_cast<int>(distinct.size()));
    if (za.zones != expect_k) {
      fail("zone count " + std::to_string(za.zones) + " vs " + std::to_string(expect_k));
      continue;
    }
    const auto best = oracle::best_partitions(pts, za.zones);
    const auto mine = oracle::canonical_labels(za.assignment);
    if (std::find(best.optimal.begin(), best.optimal.end(), mine) == best.optimal.end()) {
      fail("assignment is not an optimal partition");
      continue;
    }
    const auto g = build_room_graph(za, fm, kDefaultEps);
    const auto want = oracle::graph_from_labels(ref, za.assignment, za.zones, kDefaultEps);
    bool ok = true;
    for (int m = 0; m < za.zones; ++m) {
      ok = ok && close(g.nodes.row(m), want.nodes[static_cast<std::size_t>(m)], 1e-9);
      ok = ok && close(g.edges.row(m), want.edges[static_cast<std::size_t>(m)], 1e-9);
    }
    if (!ok) fail("graph nodes or edges");
  }
  return {"pipeline vs brute force on " + std::to_string(scenes) + " micro-scenes", failures == 0,
          failures ? std::to_string(failures) + " mismatches; first " + first : ""};
}

// ---------------------------------------------------------------------------
// Planner

inline std::vector<CheckResult> check_planner(int graphs, std::uint64_t seed) {
  using namespace check_detail;
  Rng rng(seed);
  int opt_fail = 0, scale_fail = 0;
  double worst = 0.0;
  std::string scale_example;
  for (int i = 0; i < graphs; ++i) {
    const int m = 1 + static_cast<int>(rng.index(6));
    const auto g = random_graph(m, 1, rng);
    const int from = static_cast<int>(rng.index(static_cast<std::size_t>(m)));
    const int to = static_cast<int>(rng.index(static_cast<std::size_t>(m)));
    const auto pr = plan_path(g.edges, from, to);
    const auto ref = oracle::all_simple_paths(oracle::to_rows(g.edges), from, to);
    bool ok = pr.reachable == ref.reachable;
    if (ok && ref.reachable) {
      const double err = std::abs(pr.path_prob - ref.best);
      worst = std::max(worst, err);
      ok = err <= 1e-12 && ref.first_hops.count(pr.subgoal) > 0;
    } else if (ok) {
      ok = pr.subgoal == from;
    }
    if (!ok) ++opt_fail;
    const double c = 1.0 - rng.uniform();  // (0, 1]
    Tensor scaled = g.edges;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (a != b) scaled(a, b) *= c;
    const auto ps = plan_path(scaled, from, to);
    if (ps.subgoal != pr.subgoal) {
      if (!scale_fail++)
        scale_example = "c=" + fmt("%.3f", c) + " moved sub-goal " + std::to_string(pr.subgoal) + " -> " +
                        std::to_string(ps.subgoal) + " (M=" + std::to_string(m) + ")";
    }
  }
  return {{"planner optimality over " + std::to_string(graphs) + " graphs", opt_fail == 0,
           std::to_string(opt_fail) + " failures, worst |dp| " + fmt("%.3g", worst)},
          {"sub-goal invariant under edge scaling", scale_fail == 0,
           scale_fail ? std::to_string(scale_fail) + " of " + std::to_string(graphs) + " changed; e.g. " + scale_example
                      : ""}};
}

// ---------------------------------------------------------------------------
// Assignment

inline std::vector<CheckResult> check_assignment(int instances, std::uint64_t seed) {
  using namespace check_detail;
  Rng rng(seed);
  int obj_fail = 0, rec_fail = 0, rec_tried = 0;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int m = 1 + static_cast<int>(rng.index(5));
    Tensor s = Tensor::matrix(m, m);
    fill(s, rng, 1.0);
    const double got = assignment_value(s, solve_assignment_max(s));
    const double want = oracle::best_assignment(oracle::to_rows(s));
    worst = std::max(worst, std::abs(got - want));
    if (std::abs(got - want) > 1e-12) ++obj_fail;

    // recovery of a shuffled copy when nodes are well separated
    KnowledgeGraph a;
    for (int tries = 0;; ++tries) {
      a = random_graph(std::max(2, m), 8, rng);
      double max_off = -1.0;
      for (int x = 0; x < a.zones; ++x)
        for (int y = 0; y < a.zones; ++y)
          if (x != y) max_off = std::max(max_off, cosine(a.nodes.row(x), a.nodes.row(y)));
      if (1.0 - max_off >= 0.1) break;
    }
    std::vector<int> perm(static_cast<std::size_t>(a.zones));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const auto b = permute_graph(a, perm);
    ++rec_tried;
    const auto back = permute_graph(b, match_graphs(a, b));
    if (!(back.nodes == a.nodes && back.edges == a.edges)) ++rec_fail;
  }
  return {{"assignment objective vs all permutations (" + std::to_string(instances) + ")", obj_fail == 0,
           std::to_string(obj_fail) + " failures, worst |d| " + fmt("%.3g", worst)},
          {"shuffled graph recovery (" + std::to_string(rec_tried) + ")", rec_fail == 0,
           std::to_string(rec_fail) + " failures"}};
}

// ---------------------------------------------------------------------------
// Gradients against central differences of the dense oracle

inline std::vector<CheckResult> check_gradients(int instances, std::uint64_t seed, double tol = 1e-4) {
  using namespace check_detail;
  Rng rng(seed);
  WorstError gcn, cell, head, loss, lam;
  int lambda_live = 0;
  for (int it = 0; it < instances; ++it) {
    const std::string tag = "#" + std::to_string(it);
    const ModelDims d = small_dims(rng);
    PolicyParams p = random_params(d, rng);
    const KnowledgeGraph g = random_graph(d.zones, d.node, rng);

    {  // GCN row
      Tensor nodes = g.nodes;
      const Tensor adj = normalize_adjacency(g.edges);
      const int s = static_cast<int>(rng.index(static_cast<std::size_t>(d.zones)));
      Vec w(static_cast<std::size_t>(d.node));
      for (auto& v : w) v = rng.uniform(-1, 1);
      GcnRowCache cache;
      gcn_row_forward(p, nodes, adj, s, &cache);
      Gradients gr = zero_gradients(p);
      Tensor dn;
      gcn_row_backward(p, adj, cache, w, gr, &dn);
      auto f = [&] {
        const auto out = oracle::gcn(oracle::to_rows(nodes), oracle::to_rows(g.edges), oracle::to_rows(p.gcn_w1),
                                     oracle::to_rows(p.gcn_w2));
        return dot(out[static_cast<std::size_t>(s)], w);
      };
      gcn.add(normwise(gr.gcn_w1.values, numeric_gradient(p.gcn_w1, f)), tag + " w1");
      gcn.add(normwise(gr.gcn_w2.values, numeric_gradient(p.gcn_w2, f)), tag + " w2");
      gcn.add(normwise(dn.values, numeric_gradient(nodes, f)), tag + " nodes");
    }
    {  // recurrent cell
      Vec x(static_cast<std::size_t>(d.input())), h(static_cast<std::size_t>(d.hidden)), c(h.size());
      Vec a(h.size()), b(h.size());
      for (auto* v : {&x, &h, &c, &a, &b})
        for (auto& e : *v) e = rng.uniform(-1, 1);
      LstmCache cache;
      recurrent_step(p, x, {h, c}, &cache);
      Gradients gr = zero_gradients(p);
      Vec dx, dh, dc;
      recurrent_backward(p, cache, a, b, gr, &dx, dh, dc);
      auto f = [&] {
        const auto [h2, c2] = oracle::lstm(p.lstm_w, p.lstm_b, x, h, c);
        return dot(h2, a) + dot(c2, b);
      };
      cell.add(normwise(gr.lstm_w.values, numeric_gradient(p.lstm_w, f)), tag + " w");
      cell.add(normwise(gr.lstm_b.values, numeric_gradient(p.lstm_b, f)), tag + " b");
      cell.add(normwise(dx, numeric_gradient(x, f)), tag + " x");
      cell.add(normwise(dh, numeric_gradient(h, f)), tag + " h");
      cell.add(normwise(dc, numeric_gradient(c, f)), tag + " c");
    }
    {  // heads: -log pi(a) + (R - V)^2
      Vec h(static_cast<std::size_t>(d.hidden));
      for (auto& e : h) e = rng.uniform(-1, 1);
      const int act = static_cast<int>(rng.index(kNumActions));
      const double ret = rng.uniform(-2, 2);
      const auto out = actor_critic(p, h);
      const auto pr = softmax(out.logits);
      std::array<double, kNumActions> dl{};
      for (int k = 0; k < kNumActions; ++k) dl[static_cast<std::size_t>(k)] = pr[static_cast<std::size_t>(k)] - (k == act);
      Gradients gr = zero_gradients(p);
      Vec dh;
      actor_critic_backward(p, h, dl, -2.0 * (ret - out.value), gr, dh);
      auto f = [&] {
        const auto [logits, v] = oracle::heads(p, h);
        double mx = logits[0], z = 0.0;
        for (double l : logits) mx = std::max(mx, l);
        for (double l : logits) z += std::exp(l - mx);
        return -(logits[static_cast<std::size_t>(act)] - mx - std::log(z)) + (ret - v) * (ret - v);
      };
      head.add(normwise(gr.actor_w.values, numeric_gradient(p.actor_w, f)), tag + " actor.w");
      head.add(normwise(gr.actor_b.values, numeric_gradient(p.actor_b, f)), tag + " actor.b");
      head.add(normwise(gr.critic_w.values, numeric_gradient(p.critic_w, f)), tag + " critic.w");
      head.add(normwise(gr.critic_b.values, numeric_gradient(p.critic_b, f)), tag + " critic.b");
      head.add(normwise(dh, numeric_gradient(h, f)), tag + " h");
    }
    {  // full loss on a frozen 3-step trajectory
      Trajectory t;
      for (int k = 0; k < 3; ++k) {
        TrajectoryStep st;
        st.input.img.resize(static_cast<std::size_t>(d.embed));
        st.input.obj.resize(static_cast<std::size_t>(d.embed));
        st.input.gra.assign(static_cast<std::size_t>(d.node), 0.0);
        for (auto& e : st.input.img) e = rng.uniform(0, 0.3);
        for (auto& e : st.input.obj) e = rng.uniform(-1, 1);
        if (k > 0) st.input.act[rng.index(kNumActions)] = 1.0;
        st.f_obs.resize(static_cast<std::size_t>(d.node));
        for (auto& e : st.f_obs) e = rng.uniform(-1, 1);
        st.zone = static_cast<int>(rng.index(static_cast<std::size_t>(d.zones)));
        st.subgoal = static_cast<int>(rng.index(static_cast<std::size_t>(d.zones)));
        st.action = static_cast<Action>(rng.index(kNumActions));
        st.reward = k == 2 ? kSuccessReward : kStepPenalty;
        st.done = k == 2;
        t.steps.push_back(st);
      }
      const auto gp = std::make_shared<const KnowledgeGraph>(g);
      const GraphState g0 = GraphState::start(gp, p.lambda());
      const A2cConfig cfg{0.9, 0.05, 0.5};
      const Vec adv = advantages(t, p, g0, cfg.gamma);
      Gradients gr = zero_gradients(p);
      a2c_loss(t, p, g0, cfg, &gr, &adv);
      auto f = [&] { return oracle::a2c_total_loss(t, p, g, cfg, adv); };
      std::vector<std::pair<const char*, const Tensor*>> grads;
      gr.for_each([&](const char* name, const Tensor& tt) { grads.emplace_back(name, &tt); });
      std::size_t k = 0;
      p.for_each([&](const char* name, Tensor& tt) {
        const Vec num = numeric_gradient(tt, f);
        const double e = normwise(grads[k++].second->values, num);
        if (std::string(name) == "lambda_raw") {
          lam.add(e, tag);
          if (std::abs(num[0]) > 1e-9) ++lambda_live;
        } else {
          loss.add(e, tag + " " + name);
        }
      });
    }
  }
  auto res = [&](const std::string& n, const WorstError& w) {
    return CheckResult{n + " gradient (" + std::to_string(instances) + " instances)", w.worst <= tol,
                       "worst relative error " + fmt("%.3g", w.worst) + (w.where.empty() ? "" : " at " + w.where)};
  };
  return {res("GCN", gcn), res("recurrent cell", cell), res("actor-critic heads", head),
          res("full A2C loss", loss),
          {"lambda gradient (" + std::to_string(instances) + " instances)", lam.worst <= tol && 2 * lambda_live >= instances,
           "worst relative error " + fmt("%.3g", lam.worst) + ", nonzero in " + std::to_string(lambda_live) + " of " +
               std::to_string(instances)}};
}

/// Everything `selfcheck` runs, at reduced counts.
inline std::vector<CheckResult> run_selfcheck(std::uint64_t seed = 1) {
  std::vector<CheckResult> all = check_equation_algebra();
  all.push_back(check_pipeline_micro(10, seed));
  all.push_back(check_planner(100, seed).front());
  for (auto& r : check_assignment(50, seed)) all.push_back(r);
  for (auto& r : check_gradients(10, seed)) all.push_back(r);
  return all;
}

}  // namespace zonegraph
