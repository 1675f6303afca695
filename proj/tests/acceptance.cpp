// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "zonegraph/oracles.hpp"
#include "zonegraph/selfcheck.hpp"
#include "zonegraph/zonegraph.hpp"

using namespace zonegraph;

namespace {

constexpr std::uint64_t kSeed = 2024;

// learning runs
constexpr long kEpisodes = 20000;
constexpr int kDim = 16;
constexpr double kLr = 1e-3;
constexpr int kWorkers = 1;
constexpr int kZones = 8;
constexpr int kEvalEpisodes = 200;
const std::vector<std::uint64_t> kEvalSeeds{1, 2, 3};

struct Line {
  int id;
  bool pass;
  std::string text;
};

std::vector<Line> results;

void report(int id, bool pass, const std::string& text, double seconds, double limit) {
  const bool in_time = seconds < limit;
  char buf[96];
  std::snprintf(buf, sizeof buf, " [%.1fs, limit %.0fs]", seconds, limit);
  std::string t = text + buf;
  if (!in_time) t += " over time";
  results.push_back({id, pass && in_time, t});
  std::printf("criterion %d: %s %s\n", id, pass && in_time ? "PASS" : "FAIL", t.c_str());
  std::fflush(stdout);
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string join(const std::vector<CheckResult>& rs) {
  std::string s;
  for (const auto& r : rs) {
    if (!s.empty()) s += "; ";
    s += (r.pass ? "ok " : "BAD ") + r.name;
    if (!r.detail.empty()) s += " (" + r.detail + ")";
  }
  return s;
}

bool all_pass(const std::vector<CheckResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const CheckResult& r) { return r.pass; });
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

template <class T>
std::string str(const T& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_equation_algebra();
  report(1, all_pass(rs), std::to_string(rs.size()) + " hand cases at 1e-12: " + join(rs), since(t0), 1);
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = check_pipeline_micro(25, kSeed, 2);
  report(2, r.pass, r.name + (r.detail.empty() ? "" : ": " + r.detail), since(t0), 10);
}

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_planner(200, kSeed);
  report(3, all_pass(rs), join(rs), since(t0), 10);
}

void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_assignment(100, kSeed);
  report(4, all_pass(rs), join(rs), since(t0), 10);
}

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_gradients(50, kSeed, 1e-4);
  report(5, all_pass(rs), join(rs), since(t0), 30);
}

// ---------------------------------------------------------------------------
// Determinism and formats

std::string graph_text(const KnowledgeGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };

  // scenes
  std::vector<Scene> scenes;
  for (auto room : kRoomCategories)
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto a = generate_scene(room, 8, 8, s);
      const auto b = generate_scene(room, 8, 8, s);
      need(scene_to_string(a) == scene_to_string(b), "scene bytes " + a.id);
      need(scene_to_string(scene_from_string(scene_to_string(a))) == scene_to_string(a), "scene round-trip " + a.id);
      if (room == RoomCategory::Kitchen) scenes.push_back(a);
    }

  // graphs
  const auto provider = EmbeddingProvider::synthetic(0, kDim);
  const auto ga = build_graph_from_scenes(scenes, provider, kZones, kDefaultEps, 3).graph;
  const auto gb = build_graph_from_scenes(scenes, provider, kZones, kDefaultEps, 3).graph;
  need(graph_text(ga) == graph_text(gb), "graph bytes");
  {
    std::istringstream in(graph_text(ga));
    need(read_graph(in) == ga, "graph round-trip");
  }

  // embeddings
  {
    std::ostringstream os;
    write_embeddings(os, provider);
    std::istringstream in(os.str());
    const auto back = read_embeddings(in);
    bool same = true;
    for (const auto& [k, v] : provider.table()) same = same && back.object_embedding(k) == v;
    need(same, "embeddings round-trip");
  }

  // synchronous checkpoints
  std::vector<std::shared_ptr<const Scene>> shared;
  for (const auto& s : scenes) shared.push_back(std::make_shared<const Scene>(s));
  const auto graph = std::make_shared<const KnowledgeGraph>(ga);
  Config cfg;
  cfg.embedding.dim = kDim;
  cfg.train.episodes = 120;
  cfg.train.workers = 4;
  cfg.train.hidden = 16;
  cfg.train.lr = kLr;
  cfg.train.seed = 5;
  cfg.train.split = SplitMode::ZeroShot;
  const auto ra = train(cfg, shared, graph, provider);
  const auto rb = train(cfg, shared, graph, provider);
  const auto ca = checkpoint_to_string(ra.checkpoint);
  need(ca == checkpoint_to_string(rb.checkpoint), "checkpoint bytes");
  {
    std::istringstream in(ca);
    const auto back = read_checkpoint(in);
    need(checkpoint_to_string(back) == ca && back.params == ra.checkpoint.params, "checkpoint round-trip");
  }
  {
    std::ostringstream os;
    write_goal_log(os, ra.goal_log);
    std::istringstream in(os.str());
    const auto back = read_goal_log(in);
    bool same = back.size() == ra.goal_log.size();
    for (std::size_t i = 0; same && i < back.size(); ++i)
      same = back[i].episode == ra.goal_log[i].episode && back[i].scene == ra.goal_log[i].scene &&
             back[i].goal == ra.goal_log[i].goal;
    need(same, "goal log round-trip");
  }
  {
    std::istringstream in(config_to_string(cfg));
    need(parse_config(in).echo() == cfg.echo(), "config round-trip");
  }

  // triplicate evaluation
  const auto ev = evaluate(ra.checkpoint.params, graph, provider, shared, SplitMode::General, 20, kEvalSeeds);
  const auto ev2 = evaluate(ra.checkpoint.params, graph, provider, shared, SplitMode::General, 20, kEvalSeeds);
  std::ostringstream r1, r2;
  write_report(r1, ev);
  write_report(r2, ev2);
  need(r1.str() == r2.str(), "report bytes");
  Vec srs;
  for (const auto& s : ev.report.per_seed) srs.push_back(s.sr);
  double mean = 0, ss = 0;
  for (double v : srs) mean += v / 3.0;
  for (double v : srs) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 2.0);
  need(ev.report.per_seed.size() == 3, "three seeds");
  need(std::abs(ev.report.sr.mean - mean) < 1e-9 && std::abs(ev.report.sr.std - sd) < 1e-9, "mean and sample std");
  const auto line = ev.report.summary_line();
  need(line.find("SR=") == 0 && line.find(" ±") != std::string::npos, "mean ± std summary");

  report(8, bad.empty(),
         bad.empty() ? "scenes, graphs, synchronous checkpoints byte-identical; all formats round-trip; " + line
                     : "broken: " + [&] {
                         std::string s;
                         for (const auto& b : bad) s += (s.empty() ? "" : ", ") + b;
                         return s;
                       }(),
         since(t0), 60);
}

// ---------------------------------------------------------------------------
// Learning (shared checkpoint for 6, 7, 9)

struct Learned {
  std::vector<std::shared_ptr<const Scene>> scenes;
  std::shared_ptr<const KnowledgeGraph> graph;
  EmbeddingProvider provider = EmbeddingProvider::synthetic(0, kDim);
  TrainResult result;
  double train_seconds = 0;
};

Learned learn() {
  Learned l;
  std::vector<Scene> raw;
  for (std::uint64_t s = 1; s <= 4; ++s) raw.push_back(generate_scene(RoomCategory::Kitchen, 8, 8, s));
  for (const auto& s : raw) l.scenes.push_back(std::make_shared<const Scene>(s));
  const auto t0 = std::chrono::steady_clock::now();
  l.graph = std::make_shared<const KnowledgeGraph>(build_graph_from_scenes(raw, l.provider, kZones).graph);
  Config cfg;
  cfg.embedding.dim = kDim;
  cfg.train.episodes = kEpisodes;
  cfg.train.lr = kLr;
  cfg.train.workers = kWorkers;
  cfg.train.sync_mode = SyncMode::Synchronous;
  cfg.train.split = SplitMode::ZeroShot;
  cfg.train.seed = 0;
  cfg.train.log_every = 5000;
  l.result = train(cfg, l.scenes, l.graph, l.provider, [](const nlohmann::json& j) {
    std::printf("  train %s\n", j.dump().c_str());
    std::fflush(stdout);
  });
  l.train_seconds = since(t0);
  return l;
}

EvalResult run_eval(const Learned& l, SplitMode split, ActionSelection sel, const std::vector<std::string>& goals = {},
                    const InputMask& mask = {}) {
  EvalOptions o;
  o.selection = sel;
  o.goals = goals;
  o.mask = mask;
  return evaluate(l.result.checkpoint.params, l.graph, l.provider, l.scenes, split, kEvalEpisodes, kEvalSeeds, o);
}

void criterion_6(const Learned& l) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto random = run_eval(l, SplitMode::ZeroShot, ActionSelection::Uniform, zero_shot_split().train_goals);
  const double moving = l.result.moving_sr(kMovingWindow);
  const double base = random.report.sr.mean;
  const bool ok = moving >= 3.0 * base;
  report(6, ok,
         "moving SR over last 1000 of " + std::to_string(kEpisodes) + " episodes " + pct(moving) +
             " vs random " + pct(base) + " on the training goals (ratio " + str(base > 0 ? moving / base : 0.0) +
             ", need >= 3)",
         l.train_seconds + since(t0), 30 * 60);
}

void criterion_7(const Learned& l) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& held = held_out_goals();
  long leaked = 0;
  for (const auto& e : l.result.goal_log) leaked += std::count(held.begin(), held.end(), e.goal);
  const auto trained = run_eval(l, SplitMode::ZeroShot, ActionSelection::Greedy);
  const auto random = run_eval(l, SplitMode::ZeroShot, ActionSelection::Uniform);
  std::set<std::string> evaluated;
  bool only_held = true;
  for (const auto* r : {&trained, &random})
    for (const auto& seed : r->records)
      for (const auto& e : seed) {
        evaluated.insert(e.goal);
        only_held = only_held && std::count(held.begin(), held.end(), e.goal) == 1;
      }
  const double a = trained.report.sr.mean, b = random.report.sr.mean;
  const bool ratio_ok = a >= 2.0 * b && a > b;
  report(7, leaked == 0 && only_held && ratio_ok,
         "goal log " + std::to_string(l.result.goal_log.size()) + " episodes, " + std::to_string(leaked) +
             " held-out; evaluated goals " + std::to_string(evaluated.size()) + (only_held ? " (all held-out)" : " (LEAK)") +
             "; zero-shot SR trained " + trained.report.summary_line() + " vs random " + random.report.summary_line() +
             " (ratio " + str(b > 0 ? a / b : 0.0) + ", need >= 2)",
         l.train_seconds + since(t0), 40 * 60);
}

void criterion_9(const Learned& l) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto goals = zero_shot_split().train_goals;
  // each block is zeroed at composition
  bool zeroed = true;
  const auto gs = GraphState::start(l.graph, l.result.checkpoint.params.lambda());
  for (const char* m : {"img", "obj", "gra", "act"}) {
    const auto mask = parse_mask(m);
    auto env = reset_episode(l.scenes[0], l.scenes[0]->goal_categories()[0], 7, 12);
    const auto tr = rollout(env, l.result.checkpoint.params, gs, l.provider, 1, {ActionSelection::Greedy, mask});
    for (const auto& st : tr.steps) {
      const Vec* blk = mask.img ? &st.input.img : mask.obj ? &st.input.obj : mask.gra ? &st.input.gra : nullptr;
      if (blk) zeroed = zeroed && std::all_of(blk->begin(), blk->end(), [](double v) { return v == 0.0; });
      else zeroed = zeroed && std::all_of(st.input.act.begin(), st.input.act.end(), [](double v) { return v == 0.0; });
    }
  }
  const double full = run_eval(l, SplitMode::ZeroShot, ActionSelection::Greedy, goals).report.sr.mean;
  std::string detail = "full " + pct(full);
  bool degrade = true;
  for (const char* m : {"img", "obj", "gra", "act"}) {
    const double sr = run_eval(l, SplitMode::ZeroShot, ActionSelection::Greedy, goals, parse_mask(m)).report.sr.mean;
    detail += std::string(", no-") + m + " " + pct(sr);
    if (std::string(m) == "img" || std::string(m) == "obj") degrade = degrade && sr < full;
  }
  report(9, zeroed && degrade,
         std::string(zeroed ? "all four blocks zeroed at composition" : "mask NOT applied") +
             "; greedy SR on the training goals: " + detail + " (need no-img and no-obj below full)",
         since(t0), 30 * 60);
}

}  // namespace

int main() {
  std::printf("acceptance: seed %llu\n", static_cast<unsigned long long>(kSeed));
  std::fflush(stdout);
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_8();
  const auto learned = learn();
  criterion_6(learned);
  criterion_7(learned);
  criterion_9(learned);

  std::sort(results.begin(), results.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int passed = 0;
  std::printf("\nsummary\n");
  for (const auto& r : results) {
    std::printf("criterion %d: %s\n", r.id, r.pass ? "PASS" : "FAIL");
    passed += r.pass;
  }
  std::printf("acceptance: %d/%zu criteria passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
