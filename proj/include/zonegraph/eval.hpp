#pragma once
// Evaluation harness: success judgment, SR / SPL / DTS, seeded repeats with
// mean and standard deviation, and the zero-shot goal split.

#include <cmath>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "zonegraph/config.hpp"
#include "zonegraph/policy.hpp"

namespace zonegraph {

struct GoalSplit {
  std::vector<std::string> train_goals;
  std::vector<std::string> test_goals;
};

inline const std::vector<std::string>& held_out_goals() {
  static const std::vector<std::string> six = {"Bowl", "DeskLamp", "Laptop", "LightSwitch", "Plate", "StoveBurner"};
  return six;
}

inline GoalSplit zero_shot_split() {
  GoalSplit s;
  s.test_goals = held_out_goals();
  for (auto c : kGoalCategories)
    if (std::find(s.test_goals.begin(), s.test_goals.end(), c) == s.test_goals.end())
      s.train_goals.emplace_back(c);
  for (const auto& g : s.train_goals)
    if (std::find(s.test_goals.begin(), s.test_goals.end(), g) != s.test_goals.end())
      throw std::logic_error("zero-shot split is not disjoint");
  return s;
}

/// Train and test on every goal category.
inline GoalSplit general_split() {
  GoalSplit s;
  for (auto c : kGoalCategories) s.train_goals.emplace_back(c);
  s.test_goals = s.train_goals;
  return s;
}

inline GoalSplit make_split(SplitMode m) { return m == SplitMode::ZeroShot ? zero_shot_split() : general_split(); }

struct EpisodeRecord {
  bool success = false;
  double path_length = 0.0;      // meters traveled
  double shortest_length = 0.0;  // geodesic from the start cell
  double final_dts = 0.0;        // geodesic from the final cell
  int steps = 0;
  std::string goal;
  std::string scene;
};

/// True iff Done was issued while the goal was visible (which implies <= 1.5 m).
inline bool judge(const EpisodeState& final_state) {
  if (!final_state.terminated || !final_state.done_issued) return false;
  return goal_visible(*final_state.scene, final_state.pose, final_state.goal);
}

/// Geodesic distance from the final cell to the nearest success cell.
inline double dts(const EpisodeState& final_state) {
  const auto d = shortest_path_length(*final_state.scene, final_state.pose, final_state.goal);
  if (!d) throw ConfigError("goal '" + final_state.goal + "' is unreachable in scene '" + final_state.scene->id + "'");
  return *d;
}

inline double success_rate(std::span<const EpisodeRecord> r) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : r) s += e.success ? 1.0 : 0.0;
  return 100.0 * s / static_cast<double>(r.size());
}

/// 100 * mean of S_i * l_i / max(p_i, l_i); a success with l_i = 0 counts 1.
inline double spl(std::span<const EpisodeRecord> r) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : r) {
    if (!e.success) continue;
    const double denom = std::max(e.path_length, e.shortest_length);
    s += denom > 0.0 ? e.shortest_length / denom : 1.0;
  }
  return 100.0 * s / static_cast<double>(r.size());
}

inline double mean_dts(std::span<const EpisodeRecord> r) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : r) s += e.final_dts;
  return s / static_cast<double>(r.size());
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Sample standard deviation (n - 1); zero for a single value.
inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd m;
  if (xs.empty()) return m;
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs[0]; })) {
    m.mean = xs[0];
    return m;
  }
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

struct SeedMetrics {
  std::uint64_t seed = 0;
  double sr = 0.0;
  double spl = 0.0;
  double dts = 0.0;
  int episodes = 0;
};

struct MetricsReport {
  SplitMode split = SplitMode::General;
  std::string policy = "greedy";
  std::string mask;
  std::vector<SeedMetrics> per_seed;
  MeanStd sr, spl, dts;
  int episodes = 0;  // per seed

  std::string summary_line() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "SR=%.2f ±%.2f SPL=%.2f ±%.2f DTS=%.2f ±%.2f", sr.mean, sr.std, spl.mean, spl.std,
                  dts.mean, dts.std);
    return buf;
  }
};

struct EvalOptions {
  ActionSelection selection = ActionSelection::Greedy;
  InputMask mask;
  int t_max = kDefaultTMax;
  std::vector<std::string> goals;  // replaces the split's test goals when non-empty
};

struct EvalResult {
  MetricsReport report;
  std::vector<std::vector<EpisodeRecord>> records;  // per seed
};

/// (scene, goal) pairs for the split's test goals, in scene order then goal order.
inline std::vector<std::pair<std::size_t, std::string>> evaluation_pairs(
    const std::vector<std::shared_ptr<const Scene>>& scenes, const GoalSplit& split) {
  std::vector<std::pair<std::size_t, std::string>> pairs;
  std::vector<std::string> goals = split.test_goals;
  std::sort(goals.begin(), goals.end());
  for (std::size_t s = 0; s < scenes.size(); ++s)
    for (const auto& g : goals)
      if (scenes[s]->has_category(g)) pairs.emplace_back(s, g);
  return pairs;
}

inline std::string selection_name(ActionSelection s) {
  switch (s) {
    case ActionSelection::Greedy: return "greedy";
    case ActionSelection::Sample: return "sample";
    case ActionSelection::Uniform: return "random";
  }
  return "?";
}

/// Runs `episodes_per_seed` episodes for each seed. The (scene, goal) sequence
/// is the same for every seed; start poses and action sampling depend on it.
inline EvalResult evaluate(const PolicyParams& params, std::shared_ptr<const KnowledgeGraph> graph,
                           const EmbeddingProvider& provider, const std::vector<std::shared_ptr<const Scene>>& scenes,
                           SplitMode split_mode, int episodes_per_seed, const std::vector<std::uint64_t>& seeds,
                           const EvalOptions& opt = {}) {
  if (episodes_per_seed < 1) throw ConfigError("evaluate: episodes per seed must be >= 1");
  if (seeds.empty()) throw ConfigError("evaluate: at least one seed is required");
  if (graph->features != provider.dim() || params.dims.node != graph->features || params.dims.embed != provider.dim())
    throw DimensionError("evaluate: checkpoint, graph and embedding dimensions disagree");
  GoalSplit split = make_split(split_mode);
  if (!opt.goals.empty()) split.test_goals = opt.goals;
  const auto pairs = evaluation_pairs(scenes, split);
  if (pairs.empty()) throw ConfigError("evaluate: no scene contains any test goal of the split");

  EvalResult out;
  out.report.split = split_mode;
  out.report.policy = selection_name(opt.selection);
  out.report.mask = to_string(opt.mask);
  out.report.episodes = episodes_per_seed;
  const GraphState gs = GraphState::start(graph, params.lambda());
  std::vector<double> srs, spls, dtss;
  for (std::uint64_t seed : seeds) {
    std::vector<EpisodeRecord> recs;
    for (int i = 0; i < episodes_per_seed; ++i) {
      const auto& [si, goal] = pairs[static_cast<std::size_t>(i) % pairs.size()];
      const auto ep_seed = hash_combine(seed, static_cast<std::uint64_t>(i));
      auto env = reset_episode(scenes[si], goal, ep_seed, opt.t_max);
      EpisodeRecord rec;
      rec.goal = goal;
      rec.scene = scenes[si]->id;
      rec.shortest_length = shortest_path_length(*env.scene, env.pose, goal).value();
      const auto traj = rollout(env, params, gs, provider, hash_combine(ep_seed, 1), {opt.selection, opt.mask});
      rec.success = judge(traj.final_state);
      rec.path_length = traj.final_state.path_length;
      rec.final_dts = dts(traj.final_state);
      rec.steps = traj.length();
      recs.push_back(std::move(rec));
    }
    SeedMetrics sm{seed, success_rate(recs), spl(recs), mean_dts(recs), episodes_per_seed};
    srs.push_back(sm.sr);
    spls.push_back(sm.spl);
    dtss.push_back(sm.dts);
    out.report.per_seed.push_back(sm);
    out.records.push_back(std::move(recs));
  }
  out.report.sr = mean_std(srs);
  out.report.spl = mean_std(spls);
  out.report.dts = mean_std(dtss);
  return out;
}

/// Line-delimited JSON records (episodes, per-seed, summary) then the summary line.
inline void write_report(std::ostream& os, const EvalResult& r,
                         const std::vector<std::pair<std::string, std::string>>& echo = {}, bool episodes = true) {
  nlohmann::json header = {{"type", "header"}, {"format", "report-v1"}};
  for (const auto& [k, v] : echo) header["config"][k] = v;
  os << header.dump() << '\n';
  for (std::size_t s = 0; s < r.records.size() && episodes; ++s)
    for (const auto& e : r.records[s])
      os << nlohmann::json{{"type", "episode"},
                           {"seed", r.report.per_seed[s].seed},
                           {"scene", e.scene},
                           {"goal", e.goal},
                           {"success", e.success},
                           {"path_length", e.path_length},
                           {"shortest_length", e.shortest_length},
                           {"dts", e.final_dts},
                           {"steps", e.steps}}
                .dump()
         << '\n';
  for (const auto& sm : r.report.per_seed)
    os << nlohmann::json{{"type", "seed"}, {"seed", sm.seed}, {"sr", sm.sr}, {"spl", sm.spl}, {"dts", sm.dts}, {"episodes", sm.episodes}}
              .dump()
       << '\n';
  const auto& m = r.report;
  os << nlohmann::json{{"type", "summary"},
                       {"split", std::string(to_string(m.split))},
                       {"policy", m.policy},
                       {"mask", m.mask},
                       {"episodes_per_seed", m.episodes},
                       {"seeds", m.per_seed.size()},
                       {"sr_mean", m.sr.mean},
                       {"sr_std", m.sr.std},
                       {"spl_mean", m.spl.mean},
                       {"spl_std", m.spl.std},
                       {"dts_mean", m.dts.mean},
                       {"dts_std", m.dts.std}}
            .dump()
     << '\n';
  os << m.summary_line() << '\n';
}

}  // namespace zonegraph
