#pragma once
// Low-level controller: input fusion, episode rollouts, and the advantage
// actor-critic loss with its full gradient (recurrent cell through time, the
// GCN, and the graph-adaptation blend lambda).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "zonegraph/encoder.hpp"
#include "zonegraph/graph_build.hpp"
#include "zonegraph/high_level.hpp"
#include "zonegraph/nn.hpp"
#include "zonegraph/scene.hpp"

namespace zonegraph {

inline constexpr double kSuccessReward = 5.0;
inline constexpr double kStepPenalty = -0.01;

/// Which input blocks are zeroed at composition (ablations).
struct InputMask {
  bool img = false;
  bool obj = false;
  bool gra = false;
  bool act = false;
  bool operator==(const InputMask&) const = default;
  bool any() const { return img || obj || gra || act; }
};

inline InputMask parse_mask(std::string_view spec) {
  InputMask m;
  std::string s(spec);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok == "img") m.img = true;
    else if (tok == "obj") m.obj = true;
    else if (tok == "gra") m.gra = true;
    else if (tok == "act") m.act = true;
    else if (!tok.empty()) throw ParseError("unknown mask component '" + tok + "' (img, obj, gra, act)");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return m;
}

inline std::string to_string(const InputMask& m) {
  std::string s;
  auto add = [&](bool on, const char* n) {
    if (on) s += (s.empty() ? "" : ",") + std::string(n);
  };
  add(m.img, "img");
  add(m.obj, "obj");
  add(m.gra, "gra");
  add(m.act, "act");
  return s;
}

struct PolicyInput {
  Vec img;  // pooled image feature, D
  Vec obj;  // goal embedding, D
  Vec gra;  // graph feature, N
  std::array<double, kNumActions> act{};

  std::size_t size() const { return img.size() + obj.size() + gra.size() + act.size(); }
  Vec concat() const {
    Vec x;
    x.reserve(size());
    x.insert(x.end(), img.begin(), img.end());
    x.insert(x.end(), obj.begin(), obj.end());
    x.insert(x.end(), gra.begin(), gra.end());
    x.insert(x.end(), act.begin(), act.end());
    return x;
  }
};

/// Mean over all G x G cells (empty cells included).
inline Vec pool_spatial(const SpatialFeature& f) {
  Vec out(static_cast<std::size_t>(f.dim), 0.0);
  const int cells = f.grid * f.grid;
  for (int c = 0; c < cells; ++c) {
    const double* src = f.data.data() + static_cast<std::size_t>(c) * f.dim;
    for (int k = 0; k < f.dim; ++k) out[static_cast<std::size_t>(k)] += src[k];
  }
  for (auto& v : out) v /= cells;
  return out;
}

inline PolicyInput compose_input(const SpatialFeature& spatial, std::span<const double> goal_emb,
                                 std::span<const double> f_gra, std::optional<Action> prev_action,
                                 const InputMask& mask = {}) {
  if (static_cast<int>(goal_emb.size()) != spatial.dim)
    throw DimensionError("compose_input: goal embedding and image feature dimensions differ");
  PolicyInput in;
  in.img = mask.img ? Vec(static_cast<std::size_t>(spatial.dim), 0.0) : pool_spatial(spatial);
  in.obj = mask.obj ? Vec(goal_emb.size(), 0.0) : Vec(goal_emb.begin(), goal_emb.end());
  in.gra = mask.gra ? Vec(f_gra.size(), 0.0) : Vec(f_gra.begin(), f_gra.end());
  if (prev_action && !mask.act) in.act[static_cast<std::size_t>(*prev_action)] = 1.0;
  return in;
}

inline double reward(const StepEvent& ev) { return ev.success ? kSuccessReward : kStepPenalty; }

// ---------------------------------------------------------------------------
// Rollouts

enum class ActionSelection { Sample, Greedy, Uniform };

struct TrajectoryStep {
  PolicyInput input;  // as fed to the recurrent cell at rollout time
  Vec f_obs;          // single-view observation feature
  int zone = 0;       // located zone (adapted before the graph feature)
  int subgoal = 0;
  Action action = Action::Done;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  InputMask mask;
  int target = 0;
  bool success = false;
  bool done_issued = false;
  double bootstrap_value = 0.0;  // V at a cut point; 0 for a finished episode
  EpisodeState final_state;
  int length() const { return static_cast<int>(steps.size()); }
};

struct RolloutOptions {
  ActionSelection selection = ActionSelection::Sample;
  InputMask mask;
};

inline int greedy_action(const std::array<double, kNumActions>& logits) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a)
    if (logits[static_cast<std::size_t>(a)] > logits[static_cast<std::size_t>(best)]) best = a;
  return best;
}

inline int sample_action(const std::array<double, kNumActions>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    acc += probs[static_cast<std::size_t>(a)];
    if (u < acc) return a;
  }
  return kNumActions - 1;
}

/// Runs one episode to Done or T_max. The graph state is reset to the base
/// graph first, so adaptation never leaks across episodes.
inline Trajectory rollout(EpisodeState env, const PolicyParams& params, GraphState gs,
                          const EmbeddingProvider& provider, std::uint64_t seed, const RolloutOptions& opt = {}) {
  if (env.terminated) throw UsageError("rollout: episode already terminated");
  Rng rng(seed);
  gs.reset();
  gs.lambda = params.lambda();
  Trajectory traj;
  traj.mask = opt.mask;
  const auto goal = provider.object_embedding(env.goal);
  traj.target = target_zone(gs, goal.values);
  const bool use_net = opt.selection != ActionSelection::Uniform;
  LstmState hs = LstmState::zeros(params.dims.hidden);
  Observation obs = visible_objects(*env.scene, env.pose);
  std::optional<Action> prev;
  while (!env.terminated) {
    TrajectoryStep st;
    st.f_obs = observation_feature(provider, obs);
    st.zone = locate_current_zone(gs, st.f_obs);
    adapt_graph(gs, st.f_obs, st.zone);
    st.subgoal = plan_subgoal(gs, st.zone, traj.target).subgoal;
    int a = 0;
    if (use_net) {
      const Vec f_gra = opt.mask.gra ? Vec(static_cast<std::size_t>(gs.base->features), 0.0)
                                     : graph_feature(params, gs, st.subgoal);
      st.input = compose_input(image_feature(provider, obs), goal.values, f_gra, prev, opt.mask);
      const Vec x = st.input.concat();
      hs = recurrent_step(params, x, hs);
      const auto head = actor_critic(params, hs.h);
      const auto lp = log_softmax(head.logits);
      a = opt.selection == ActionSelection::Greedy ? greedy_action(head.logits) : sample_action(softmax(head.logits), rng);
      st.log_prob = lp[static_cast<std::size_t>(a)];
      st.value = head.value;
    } else {
      a = static_cast<int>(rng.index(kNumActions));
      st.log_prob = -std::log(static_cast<double>(kNumActions));
    }
    st.action = static_cast<Action>(a);
    auto res = step(env, st.action);
    st.reward = reward(res.event);
    st.done = res.event.terminated;
    traj.steps.push_back(std::move(st));
    obs = std::move(res.observation);
    prev = static_cast<Action>(a);
  }
  traj.success = env.success;
  traj.done_issued = env.done_issued;
  traj.final_state = std::move(env);
  return traj;
}

// ---------------------------------------------------------------------------
// Advantage actor-critic

struct A2cConfig {
  double gamma = 0.99;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
};

/// R_t = r_t + gamma R_{t+1}, seeded with the bootstrap value past the end.
inline Vec discounted_returns(const Trajectory& t, double gamma) {
  Vec r(t.steps.size());
  double next = t.steps.empty() || t.steps.back().done ? 0.0 : t.bootstrap_value;
  for (std::size_t k = t.steps.size(); k-- > 0;) {
    next = t.steps[k].reward + gamma * next;
    r[k] = next;
  }
  return r;
}

struct LossParts {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  int steps = 0;
};

namespace detail {

struct StepForward {
  LstmCache lstm;
  GcnRowCache gcn;
  Tensor sensitivity;  // d(adapted nodes)/d(lambda) after this step's update
  LstmState state;
  HeadOutput head;
};

/// Re-runs a recorded trajectory under `params`, keeping the located zones and
/// sub-goals fixed. Returns per-step caches.
inline std::vector<StepForward> replay(const Trajectory& t, const PolicyParams& p, const GraphState& g0) {
  GraphState gs = g0;
  gs.reset();
  const double lambda = p.lambda();
  gs.lambda = lambda;
  const int n = gs.base->features;
  Tensor sens = Tensor::matrix(gs.zones(), n);
  LstmState hs = LstmState::zeros(p.dims.hidden);
  std::vector<StepForward> out(t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& st = t.steps[k];
    auto& f = out[k];
    // d/dlambda of row <- lambda f + (1 - lambda) row
    auto srow = sens.row(st.zone);
    const auto arow = gs.adapted.row(st.zone);
    for (int j = 0; j < n; ++j)
      srow[static_cast<std::size_t>(j)] = st.f_obs[static_cast<std::size_t>(j)] - arow[static_cast<std::size_t>(j)] +
                                          (1.0 - lambda) * srow[static_cast<std::size_t>(j)];
    adapt_graph(gs, st.f_obs, st.zone);
    f.sensitivity = sens;
    PolicyInput in = st.input;
    if (!t.mask.gra) in.gra = gcn_row_forward(p, gs.adapted, gs.adj, st.subgoal, &f.gcn);
    const Vec x = in.concat();
    hs = recurrent_step(p, x, hs, &f.lstm);
    f.state = hs;
    f.head = actor_critic(p, hs.h);
  }
  return out;
}

}  // namespace detail

/// Advantage targets R_t - V(s_t) under the given parameters.
inline Vec advantages(const Trajectory& t, const PolicyParams& p, const GraphState& g0, double gamma) {
  const auto fw = detail::replay(t, p, g0);
  Vec r = discounted_returns(t, gamma);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= fw[k].head.value;
  return r;
}

/// Loss of one trajectory:
///   -sum A_t log pi(a_t) + value_coef sum (R_t - V_t)^2 - entropy_coef sum H_t
/// with A_t held constant. When `fixed_adv` is null, A_t = R_t - V_t from this pass.
/// Adds dLoss/dparams into `g` when it is non-null.
inline LossParts a2c_loss(const Trajectory& t, const PolicyParams& p, const GraphState& g0, const A2cConfig& cfg,
                          Gradients* g, const Vec* fixed_adv = nullptr) {
  LossParts lp;
  lp.steps = t.length();
  if (t.steps.empty()) return lp;
  const auto fw = detail::replay(t, p, g0);
  const Vec ret = discounted_returns(t, cfg.gamma);
  const std::size_t T = t.steps.size();
  std::vector<std::array<double, kNumActions>> d_logits(T);
  Vec d_value(T);
  for (std::size_t k = 0; k < T; ++k) {
    const auto& head = fw[k].head;
    const auto probs = softmax(head.logits);
    const auto logp = log_softmax(head.logits);
    double h = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) h -= probs[a] * logp[a];
    const auto a_t = static_cast<std::size_t>(t.steps[k].action);
    const double adv = fixed_adv ? (*fixed_adv)[k] : ret[k] - head.value;
    const double verr = ret[k] - head.value;
    lp.policy += -adv * logp[a_t];
    lp.value += cfg.value_coef * verr * verr;
    lp.entropy += h;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      const double onehot = a == a_t ? 1.0 : 0.0;
      d_logits[k][a] = -adv * (onehot - probs[a]) + cfg.entropy_coef * probs[a] * (logp[a] + h);
    }
    d_value[k] = -2.0 * cfg.value_coef * verr;
  }
  lp.total = lp.policy + lp.value - cfg.entropy_coef * lp.entropy;
  if (!g) return lp;

  const int hd = p.dims.hidden;
  const int gra_off = 2 * p.dims.embed;
  Vec dh_next(static_cast<std::size_t>(hd), 0.0), dc_next(static_cast<std::size_t>(hd), 0.0);
  Vec dh_head, dx, dh_prev, dc_prev;
  double d_lambda = 0.0;
  Tensor d_nodes;
  for (std::size_t k = T; k-- > 0;) {
    const auto& f = fw[k];
    actor_critic_backward(p, f.state.h, d_logits[k], d_value[k], *g, dh_head);
    for (int j = 0; j < hd; ++j) dh_head[static_cast<std::size_t>(j)] += dh_next[static_cast<std::size_t>(j)];
    recurrent_backward(p, f.lstm, dh_head, dc_next, *g, &dx, dh_prev, dc_prev);
    dh_next.swap(dh_prev);
    dc_next.swap(dc_prev);
    if (!t.mask.gra) {
      const std::span<const double> d_gra(dx.data() + gra_off, static_cast<std::size_t>(p.dims.node));
      gcn_row_backward(p, g0.adj, f.gcn, d_gra, *g, &d_nodes);
      for (std::size_t i = 0; i < d_nodes.size(); ++i) d_lambda += d_nodes[i] * f.sensitivity[i];
    }
  }
  const double lam = p.lambda();
  g->lambda_raw[0] += d_lambda * lam * (1.0 - lam);
  return lp;
}

}  // namespace zonegraph
