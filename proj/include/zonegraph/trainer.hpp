#pragma once
// Training loop: batched advantage actor-critic updates (synchronous, bitwise
// reproducible) or serialized per-episode updates from free-running workers
// (asynchronous), plus the ckpt-v1 checkpoint format.

#include <atomic>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "zonegraph/config.hpp"
#include "zonegraph/eval.hpp"
#include "zonegraph/policy.hpp"

namespace zonegraph {

inline constexpr int kMovingWindow = 1000;

// ---------------------------------------------------------------------------
// Checkpoint

struct Checkpoint {
  PolicyParams params;
  std::vector<std::pair<std::string, std::string>> config;  // effective config echo
  std::uint64_t seed = 0;
  std::shared_ptr<const KnowledgeGraph> graph;

  const std::string* config_value(const std::string& key) const {
    for (const auto& [k, v] : config)
      if (k == key) return &v;
    return nullptr;
  }
};

inline void write_checkpoint(std::ostream& os, const Checkpoint& c) {
  if (!c.graph) throw UsageError("checkpoint has no graph");
  const auto& d = c.params.dims;
  os << "ckpt-v1 D=" << d.embed << " N=" << d.node << " M=" << d.zones << " H=" << d.hidden << " seed=" << c.seed
     << '\n';
  for (const auto& [k, v] : c.config) os << "config " << k << " = " << v << '\n';
  write_params(os, c.params);
  os << "graph\n";
  write_graph(os, *c.graph);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  int lineno = 1;
  auto fail = [&](const std::string& msg) { return ParseError("checkpoint: line " + std::to_string(lineno) + ": " + msg); };
  if (!std::getline(in, line)) throw fail("empty input");
  std::istringstream hs(line);
  std::string magic;
  hs >> magic;
  if (magic != "ckpt-v1") throw fail("expected version header 'ckpt-v1'");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw fail("bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  Checkpoint c;
  ModelDims dims;
  try {
    dims.embed = std::stoi(kv.at("D"));
    dims.node = std::stoi(kv.at("N"));
    dims.zones = std::stoi(kv.at("M"));
    dims.hidden = std::stoi(kv.at("H"));
    c.seed = std::stoull(kv.at("seed"));
  } catch (const std::exception&) {
    throw fail("header needs integer D=, N=, M=, H= and seed=");
  }
  if (dims.embed < 1 || dims.node < 1 || dims.zones < 1 || dims.hidden < 1) throw fail("dimensions must be positive");
  while (in.peek() == 'c') {
    ++lineno;
    std::getline(in, line);
    if (line.rfind("config ", 0) != 0) throw fail("expected 'config key = value'");
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw fail("expected 'config key = value'");
    c.config.emplace_back(line.substr(7, eq - 7), line.substr(eq + 3));
  }
  c.params = read_params(in, dims, lineno);
  ++lineno;
  if (!std::getline(in, line) || line != "graph") throw fail("expected 'graph'");
  auto g = std::make_shared<KnowledgeGraph>(read_graph(in, nullptr, lineno + 1));
  if (g->zones != dims.zones || g->features != dims.node)
    throw DimensionError("checkpoint: embedded graph is " + std::to_string(g->zones) + "x" + std::to_string(g->features) +
                         ", header says M=" + std::to_string(dims.zones) + " N=" + std::to_string(dims.node));
  c.graph = std::move(g);
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, c);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

inline std::string checkpoint_to_string(const Checkpoint& c) {
  std::ostringstream os;
  write_checkpoint(os, c);
  return os.str();
}

// ---------------------------------------------------------------------------
// Worker pool helper

/// Calls fn(i) for i in [0, n) on up to `threads` threads; item i always goes
/// to worker i % threads, so results indexed by i do not depend on timing.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const std::size_t t = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < t; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += t) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Update

struct UpdateStats {
  LossParts loss;  // summed over trajectories
  int trajectories = 0;
  bool skipped = false;
  std::string reason;
};

/// Per-trajectory gradients (computed in `order` when given, on `threads`
/// threads), summed in trajectory index order, then one Adam step.
inline UpdateStats a2c_update(std::span<const Trajectory> trajs, PolicyParams& params, const GraphState& g0,
                              const TrainConfig& cfg, AdamState& adam, int threads = 1,
                              std::span<const std::size_t> order = {}) {
  if (trajs.empty()) throw UsageError("a2c_update needs at least one trajectory");
  for (const auto& t : trajs)
    if (t.steps.empty()) throw UsageError("a2c_update: empty trajectory");
  const auto a2c = cfg.a2c();
  std::vector<Gradients> grads(trajs.size());
  std::vector<LossParts> parts(trajs.size());
  std::vector<std::size_t> seq(trajs.size());
  std::iota(seq.begin(), seq.end(), std::size_t{0});
  if (!order.empty()) {
    if (order.size() != trajs.size()) throw UsageError("a2c_update: order has the wrong length");
    seq.assign(order.begin(), order.end());
  }
  parallel_for(seq.size(), threads, [&](std::size_t k) {
    const std::size_t i = seq[k];
    grads[i] = zero_gradients(params);
    parts[i] = a2c_loss(trajs[i], params, g0, a2c, &grads[i]);
  });
  UpdateStats st;
  st.trajectories = static_cast<int>(trajs.size());
  Gradients total = zero_gradients(params);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    accumulate(total, grads[i]);
    st.loss.policy += parts[i].policy;
    st.loss.value += parts[i].value;
    st.loss.entropy += parts[i].entropy;
    st.loss.total += parts[i].total;
    st.loss.steps += parts[i].steps;
  }
  if (!std::isfinite(st.loss.total)) {
    st.skipped = true;
    st.reason = "non-finite loss";
    return st;
  }
  try {
    adam_update(params, total, cfg.lr, adam);
  } catch (const NumericError& e) {
    st.skipped = true;
    st.reason = e.what();
  }
  return st;
}

// ---------------------------------------------------------------------------
// Training loop

struct GoalLogEntry {
  long episode = 0;
  std::string scene;
  std::string goal;
};

struct EpisodeOutcome {
  bool success = false;
  double total_reward = 0.0;
  int length = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<GoalLogEntry> goal_log;
  std::vector<EpisodeOutcome> outcomes;  // episode order (completion order when asynchronous)
  long skipped_updates = 0;

  /// Percent success over the last `window` episodes.
  double moving_sr(int window = kMovingWindow) const {
    if (outcomes.empty()) return 0.0;
    const std::size_t n = std::min(outcomes.size(), static_cast<std::size_t>(window));
    double s = 0.0;
    for (std::size_t i = outcomes.size() - n; i < outcomes.size(); ++i) s += outcomes[i].success ? 1.0 : 0.0;
    return 100.0 * s / static_cast<double>(n);
  }
};

using StatsSink = std::function<void(const nlohmann::json&)>;

struct EpisodeSpec {
  std::size_t scene = 0;
  std::string goal;
  std::uint64_t reset_seed = 0;
  std::uint64_t policy_seed = 0;
};

/// Training goals per scene (split's train goals present in that scene, sorted).
inline std::vector<std::vector<std::string>> training_goals(const std::vector<std::shared_ptr<const Scene>>& scenes,
                                                            const GoalSplit& split) {
  std::vector<std::string> allowed = split.train_goals;
  std::sort(allowed.begin(), allowed.end());
  std::vector<std::vector<std::string>> out(scenes.size());
  for (std::size_t s = 0; s < scenes.size(); ++s)
    for (const auto& g : allowed)
      if (scenes[s]->has_category(g)) out[s].push_back(g);
  return out;
}

/// Uniform scene among those with a training goal, then a uniform goal.
inline EpisodeSpec sample_episode(std::uint64_t seed, long episode, const std::vector<std::vector<std::string>>& goals,
                                  const std::vector<std::size_t>& usable) {
  const std::uint64_t es = hash_combine(seed, static_cast<std::uint64_t>(episode));
  Rng rng(es);
  EpisodeSpec e;
  e.scene = usable[rng.index(usable.size())];
  const auto& gl = goals[e.scene];
  e.goal = gl[rng.index(gl.size())];
  e.reset_seed = hash_combine(es, 2);
  e.policy_seed = hash_combine(es, 3);
  return e;
}

inline ModelDims model_dims(const KnowledgeGraph& g, const EmbeddingProvider& provider, int hidden) {
  ModelDims d;
  d.embed = provider.dim();
  d.node = g.features;
  d.zones = g.zones;
  d.hidden = hidden;
  return d;
}

inline nlohmann::json stats_record(long episode, const std::deque<EpisodeOutcome>& window, double lambda,
                                   long skipped) {
  double sr = 0.0, rew = 0.0, len = 0.0;
  for (const auto& o : window) {
    sr += o.success ? 1.0 : 0.0;
    rew += o.total_reward;
    len += o.length;
  }
  const double n = window.empty() ? 1.0 : static_cast<double>(window.size());
  return {{"type", "stats"},       {"episode", episode},     {"moving_sr", 100.0 * sr / n},
          {"mean_reward", rew / n}, {"mean_length", len / n}, {"lambda", lambda},
          {"skipped_updates", skipped}};
}

inline TrainResult train(const Config& config, const std::vector<std::shared_ptr<const Scene>>& scenes,
                         std::shared_ptr<const KnowledgeGraph> graph, const EmbeddingProvider& provider,
                         const StatsSink& sink = {}) {
  const TrainConfig& cfg = config.train;
  cfg.validate();
  if (!graph) throw UsageError("train: no graph");
  if (const auto probs = graph_problems(*graph); !probs.empty()) throw ConfigError("train: invalid graph: " + probs.front());
  if (graph->features != provider.dim())
    throw DimensionError("train: graph node width " + std::to_string(graph->features) + " differs from embedding dim " +
                         std::to_string(provider.dim()));
  if (scenes.empty() && cfg.episodes > 0) throw ConfigError("train: no training scenes");
  for (const auto& s : scenes)
    if (s->room != graph->room)
      throw ConfigError("train: scene '" + s->id + "' is a " + std::string(to_string(s->room)) + " but the graph is a " +
                        std::string(to_string(graph->room)));
  const auto split = make_split(cfg.split);
  const auto goals = training_goals(scenes, split);
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < goals.size(); ++s)
    if (!goals[s].empty()) usable.push_back(s);
  if (usable.empty() && cfg.episodes > 0) throw ConfigError("train: no scene contains a training goal of the split");

  TrainResult res;
  Checkpoint& ck = res.checkpoint;
  ck.seed = cfg.seed;
  ck.config = config.echo();
  ck.graph = graph;
  ck.params = PolicyParams::init(model_dims(*graph, provider, cfg.hidden), cfg.seed);
  AdamState adam = AdamState::for_params(ck.params);
  const GraphState g0 = GraphState::start(graph, ck.params.lambda());
  const RolloutOptions ropt{ActionSelection::Sample, cfg.mask};
  const int threads = thread_cap(cfg.workers);

  std::deque<EpisodeOutcome> window;
  auto record = [&](long e, const EpisodeSpec& spec, const Trajectory& t) {
    EpisodeOutcome o;
    o.success = t.success;
    o.length = t.length();
    for (const auto& st : t.steps) o.total_reward += st.reward;
    res.goal_log.push_back({e, scenes[spec.scene]->id, spec.goal});
    res.outcomes.push_back(o);
    window.push_back(o);
    if (window.size() > static_cast<std::size_t>(kMovingWindow)) window.pop_front();
    const long done = static_cast<long>(res.outcomes.size());
    if (sink && (done % cfg.log_every == 0 || done == cfg.episodes))
      sink(stats_record(done, window, ck.params.lambda(), res.skipped_updates));
  };
  auto run_episode = [&](const EpisodeSpec& spec, const PolicyParams& p) {
    auto env = reset_episode(scenes[spec.scene], spec.goal, spec.reset_seed, cfg.t_max);
    return rollout(env, p, g0, provider, spec.policy_seed, ropt);
  };

  if (cfg.sync_mode == SyncMode::Synchronous) {
    const long batch = cfg.workers;
    std::vector<EpisodeSpec> specs;
    std::vector<Trajectory> trajs;
    for (long first = 0; first < cfg.episodes; first += batch) {
      const long n = std::min(batch, cfg.episodes - first);
      specs.assign(static_cast<std::size_t>(n), {});
      trajs.assign(static_cast<std::size_t>(n), {});
      for (long k = 0; k < n; ++k) specs[static_cast<std::size_t>(k)] = sample_episode(cfg.seed, first + k, goals, usable);
      parallel_for(static_cast<std::size_t>(n), threads,
                   [&](std::size_t k) { trajs[k] = run_episode(specs[k], ck.params); });
      const auto st = a2c_update(trajs, ck.params, g0, cfg, adam, threads);
      if (st.skipped) {
        ++res.skipped_updates;
        if (sink) sink({{"type", "skipped_update"}, {"episode", first + n}, {"reason", st.reason}});
      }
      for (long k = 0; k < n; ++k) record(first + k, specs[static_cast<std::size_t>(k)], trajs[static_cast<std::size_t>(k)]);
    }
  } else {
    std::mutex mu;
    std::atomic<long> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (;;) {
            const long e = next.fetch_add(1);
            if (e >= cfg.episodes) break;
            const auto spec = sample_episode(cfg.seed, e, goals, usable);
            PolicyParams snapshot;
            {
              std::lock_guard lk(mu);
              snapshot = ck.params;
            }
            const Trajectory t = run_episode(spec, snapshot);
            Gradients g = zero_gradients(snapshot);
            const auto loss = a2c_loss(t, snapshot, g0, cfg.a2c(), &g);
            std::lock_guard lk(mu);
            bool skipped = !std::isfinite(loss.total);
            if (!skipped) {
              try {
                adam_update(ck.params, g, cfg.lr, adam);
              } catch (const NumericError&) {
                skipped = true;
              }
            }
            if (skipped) ++res.skipped_updates;
            record(e, spec, t);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return res;
}

/// One line per training episode: `<episode> <scene> <goal>`.
inline void write_goal_log(std::ostream& os, const std::vector<GoalLogEntry>& log) {
  for (const auto& e : log) os << e.episode << ' ' << e.scene << ' ' << e.goal << '\n';
}

inline std::vector<GoalLogEntry> read_goal_log(std::istream& in) {
  std::vector<GoalLogEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    GoalLogEntry e;
    if (!(ls >> e.episode >> e.scene >> e.goal)) throw ParseError("goal log: line " + std::to_string(lineno) + ": malformed");
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace zonegraph
