#pragma once
// Command-line front end: gen-scenes, build-graph, train, eval,
// inspect-graph, selfcheck. Failures print one line
// `error: <category>: <message>` and return nonzero.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zonegraph/selfcheck.hpp"
#include "zonegraph/zonegraph.hpp"

namespace zonegraph {

struct NodeCategories {
  int node = 0;
  std::vector<std::pair<std::string, double>> nearest;  // by descending cosine, ties by name
};

/// Goal categories closest (cosine) to each node.
inline std::vector<NodeCategories> nearest_categories(const KnowledgeGraph& g, const EmbeddingProvider& p, int top = 3) {
  if (p.dim() != g.features)
    throw DimensionError("embedding dim " + std::to_string(p.dim()) + " does not match graph N=" + std::to_string(g.features));
  std::vector<std::pair<std::string, Vec>> cats;
  for (auto c : kGoalCategories) cats.emplace_back(std::string(c), p.object_embedding(std::string(c)).values);
  std::vector<NodeCategories> out;
  for (int m = 0; m < g.zones; ++m) {
    NodeCategories nc;
    nc.node = m;
    for (const auto& [name, e] : cats) nc.nearest.emplace_back(name, cosine(g.nodes.row(m), e));
    std::stable_sort(nc.nearest.begin(), nc.nearest.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    nc.nearest.resize(std::min<std::size_t>(nc.nearest.size(), static_cast<std::size_t>(std::max(0, top))));
    out.push_back(std::move(nc));
  }
  return out;
}

inline std::string inspect_graph(const KnowledgeGraph& g, const EmbeddingProvider& p, int top = 3,
                                 const GraphFileInfo* info = nullptr) {
  std::ostringstream os;
  os << "M=" << g.zones << " N=" << g.features << " room=" << to_string(g.room) << '\n';
  if (info)
    for (const auto& [k, v] : info->header)
      if (k != "M" && k != "N" && k != "room") os << "  " << k << " = " << v << '\n';
  char buf[64];
  for (const auto& nc : nearest_categories(g, p, top)) {
    os << "node " << nc.node << ':';
    for (const auto& [name, c] : nc.nearest) {
      std::snprintf(buf, sizeof buf, " %s(%.3f)", name.c_str(), c);
      os << buf;
    }
    os << '\n';
  }
  os << "edges:\n";
  for (int a = 0; a < g.zones; ++a) {
    for (int b = 0; b < g.zones; ++b) {
      std::snprintf(buf, sizeof buf, "%s%.4f", b ? " " : "  ", g.edges(a, b));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

namespace cli_detail {

inline std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const int w = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    const int d = std::stoi(s.substr(x + 1), &used);
    if (used != s.size() - x - 1) throw std::invalid_argument(s);
    return {w, d};
  } catch (const std::exception&) {
    throw UsageError("--size expects WxD, got '" + s + "'");
  }
}

inline std::vector<std::shared_ptr<const Scene>> shared_scenes(const std::string& dir) {
  std::vector<std::shared_ptr<const Scene>> out;
  for (auto& s : load_scene_dir(dir)) out.push_back(std::make_shared<const Scene>(std::move(s)));
  if (out.empty()) throw IoError("no *.scene files in '" + dir + "'");
  return out;
}

inline Config config_from_echo(const std::vector<std::pair<std::string, std::string>>& echo) {
  Config c;
  for (const auto& [k, v] : echo) c.set(k, v);
  return c;
}

/// Refuses a graph whose recorded embedding settings disagree with `c`.
inline void check_graph_embedding(const GraphFileInfo& info, const Config& c) {
  auto expect = [&](const std::string& key, const std::string& want) {
    const auto it = info.header.find(key);
    if (it != info.header.end() && it->second != want)
      throw ConfigError("graph was built with " + key + "=" + it->second + " but the config says " + want);
  };
  expect("embedding.mode", c.embedding.mode);
  if (c.embedding.mode == "synthetic") {
    expect("embedding.seed", std::to_string(c.embedding.seed));
    expect("embedding.dim", std::to_string(c.embedding.dim));
  }
}

inline void emit(std::ostream& a, std::ostream* b, const std::string& line) {
  a << line << '\n';
  if (b) *b << line << '\n';
}

}  // namespace cli_detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"zonegraph: zone knowledge-graph object-goal navigation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // gen-scenes
  std::string gs_room, gs_size = "8x8", gs_out = "scenes", gs_tables;
  int gs_count = 1;
  std::uint64_t gs_seed = 0;
  auto* gen = app.add_subcommand("gen-scenes", "procedurally generate scene files");
  gen->add_option("--room", gs_room, "living_room | kitchen | bedroom | bathroom")->required();
  gen->add_option("--count", gs_count, "number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--size", gs_size, "grid size WxD in cells");
  gen->add_option("--seed", gs_seed, "base seed; scene i uses seed + i");
  gen->add_option("--out", gs_out, "output directory");
  gen->add_option("--tables", gs_tables, "room-tables file (default: built-in tables)");

  // build-graph
  std::string bg_scenes, bg_room, bg_out, bg_config, bg_embeddings;
  int bg_zones = 0;
  double bg_eps = 0.0;
  std::uint64_t bg_seed = 0;
  auto* build = app.add_subcommand("build-graph", "sweep scenes, cluster zones, merge into one graph");
  build->add_option("--scenes", bg_scenes, "scene directory");
  build->add_option("--room", bg_room, "room category every scene must have")->required();
  auto* bg_zones_opt = build->add_option("--zones", bg_zones, "number of zones M");
  auto* bg_eps_opt = build->add_option("--eps", bg_eps, "adjacency threshold in meters");
  auto* bg_seed_opt = build->add_option("--seed", bg_seed, "clustering seed");
  build->add_option("--out", bg_out, "graph file");
  build->add_option("--config", bg_config, "config file (embedding and graph sections)");
  build->add_option("--embeddings", bg_embeddings, "embeddings-v1 file (overrides the config)");

  // train
  std::string tr_scenes, tr_graph, tr_config, tr_out, tr_log, tr_goals;
  long tr_episodes = -1;
  auto* tr = app.add_subcommand("train", "train the navigation policy");
  tr->add_option("--scenes", tr_scenes, "training scene directory");
  tr->add_option("--graph", tr_graph, "merged graph file");
  tr->add_option("--config", tr_config, "config file");
  tr->add_option("--out", tr_out, "checkpoint file");
  tr->add_option("--log", tr_log, "stats log (default: <out>.log)");
  tr->add_option("--goal-log", tr_goals, "per-episode goal log (default: <out>.goals)");
  tr->add_option("--episodes", tr_episodes, "override train.episodes");

  // eval
  std::string ev_ckpt, ev_scenes, ev_split = "general", ev_seeds, ev_out, ev_policy = "greedy", ev_mask;
  int ev_episodes = 0;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint (SR / SPL / DTS)");
  ev->add_option("--ckpt", ev_ckpt, "checkpoint file")->required();
  ev->add_option("--scenes", ev_scenes, "evaluation scene directory");
  ev->add_option("--split", ev_split, "general | zero-shot");
  auto* ev_episodes_opt = ev->add_option("--episodes", ev_episodes, "episodes per seed");
  ev->add_option("--seeds", ev_seeds, "comma-separated seeds");
  ev->add_option("--out", ev_out, "report file (line-delimited records)");
  ev->add_option("--policy", ev_policy, "greedy | sample | random");
  ev->add_option("--mask", ev_mask, "inputs zeroed at composition: img,obj,gra,act");

  // inspect-graph
  std::string ig_path, ig_config, ig_embeddings;
  int ig_top = 3;
  auto* ig = app.add_subcommand("inspect-graph", "summarize a graph file");
  ig->add_option("graph", ig_path, "graph file")->required();
  ig->add_option("--config", ig_config, "config file for the embedding provider");
  ig->add_option("--embeddings", ig_embeddings, "embeddings-v1 file");
  ig->add_option("--top", ig_top, "categories listed per node");

  // selfcheck
  std::uint64_t sc_seed = 1;
  auto* sc = app.add_subcommand("selfcheck", "run the embedded oracle checks");
  sc->add_option("--seed", sc_seed, "seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: usage: " << msg << '\n';
    return 2;
  }

  try {
    if (*gen) {
      const auto [w, d] = parse_size(gs_size);
      const RoomTables tables = gs_tables.empty() ? builtin_room_tables() : load_room_tables(gs_tables);
      const RoomCategory room = parse_room(gs_room);
      std::filesystem::create_directories(gs_out);
      for (int i = 0; i < gs_count; ++i) {
        const Scene s = generate_scene(room, w, d, gs_seed + static_cast<std::uint64_t>(i), tables);
        const auto path = (std::filesystem::path(gs_out) / (s.id + ".scene")).string();
        save_scene(path, s);
        out << path << '\n';
      }
      return 0;
    }

    if (*build) {
      Config c = bg_config.empty() ? Config{} : load_config(bg_config);
      if (*bg_zones_opt) c.graph.zones = bg_zones;
      if (*bg_eps_opt) c.graph.eps = bg_eps;
      if (*bg_seed_opt) c.graph.seed = bg_seed;
      if (c.graph.zones < 1) throw ConfigError("zones must be >= 1");
      if (!(c.graph.eps >= 0.0)) throw ConfigError("eps must be >= 0");
      const std::string dir = bg_scenes.empty() ? c.paths.scenes : bg_scenes;
      const std::string dest = bg_out.empty() ? c.paths.graph : bg_out;
      const RoomCategory room = parse_room(bg_room);
      const auto scenes = load_scene_dir(dir);
      if (scenes.empty()) throw IoError("no *.scene files in '" + dir + "'");
      for (const auto& s : scenes)
        if (s.room != room)
          throw Error("category-mismatch", "scene '" + s.id + "' is a " + std::string(to_string(s.room)) +
                                               ", expected " + std::string(to_string(room)));
      if (!bg_embeddings.empty()) {
        c.embedding.mode = "file";
        c.embedding.path = bg_embeddings;
      }
      const auto provider = make_provider(c);
      const auto r = build_graph_from_scenes(scenes, provider, c.graph.zones, c.graph.eps, c.graph.seed);
      for (const auto& wmsg : r.warnings) err << "warning: " << wmsg << '\n';
      std::map<std::string, std::string> echo = {
          {"embedding.mode", c.embedding.mode},           {"embedding.dim", std::to_string(provider.dim())},
          {"embedding.seed", std::to_string(c.embedding.seed)}, {"graph.zones", std::to_string(c.graph.zones)},
          {"graph.eps", detail::format_double(c.graph.eps)}, {"graph.seed", std::to_string(c.graph.seed)},
          {"scenes", std::to_string(scenes.size())},       {"merged", std::to_string(r.merged)}};
      save_graph(dest, r.graph, echo);
      out << "wrote " << dest << " M=" << r.graph.zones << " N=" << r.graph.features << " room=" << to_string(r.graph.room)
          << " scenes=" << scenes.size() << " merged=" << r.merged << '\n';
      return 0;
    }

    if (*tr) {
      Config c = tr_config.empty() ? Config{} : load_config(tr_config);
      if (tr_episodes >= 0) c.train.episodes = tr_episodes;
      if (!tr_scenes.empty()) c.paths.scenes = tr_scenes;
      if (!tr_graph.empty()) c.paths.graph = tr_graph;
      if (!tr_out.empty()) c.paths.checkpoint = tr_out;
      c.train.validate();
      const auto scenes = shared_scenes(c.paths.scenes);
      GraphFileInfo info;
      auto graph = std::make_shared<const KnowledgeGraph>(load_graph(c.paths.graph, &info));
      check_graph_embedding(info, c);
      const auto provider = make_provider(c);
      if (provider.dim() != graph->features)
        throw DimensionError("embedding dim " + std::to_string(provider.dim()) + " but graph N=" +
                             std::to_string(graph->features));
      const std::string log_path = tr_log.empty() ? c.paths.checkpoint + ".log" : tr_log;
      const std::string goal_path = tr_goals.empty() ? c.paths.checkpoint + ".goals" : tr_goals;
      std::ofstream log(log_path);
      if (!log) throw IoError("cannot write log '" + log_path + "'");
      nlohmann::json head = {{"type", "config"}};
      for (const auto& [k, v] : c.echo()) head["config"][k] = v;
      emit(out, &log, head.dump());
      const auto res = train(c, scenes, graph, provider, [&](const nlohmann::json& j) { emit(out, &log, j.dump()); });
      save_checkpoint(c.paths.checkpoint, res.checkpoint);
      std::ofstream gl(goal_path);
      if (!gl) throw IoError("cannot write goal log '" + goal_path + "'");
      write_goal_log(gl, res.goal_log);
      emit(out, &log,
           nlohmann::json{{"type", "done"},
                          {"checkpoint", c.paths.checkpoint},
                          {"episodes", static_cast<long>(res.outcomes.size())},
                          {"moving_sr", res.moving_sr()},
                          {"skipped_updates", res.skipped_updates}}
               .dump());
      return 0;
    }

    if (*ev) {
      const Checkpoint ck = load_checkpoint(ev_ckpt);
      Config c = config_from_echo(ck.config);
      const auto provider = make_provider(c);
      if (provider.dim() != ck.params.dims.embed)
        throw DimensionError("checkpoint expects D=" + std::to_string(ck.params.dims.embed) + ", provider gives " +
                             std::to_string(provider.dim()));
      const auto scenes = shared_scenes(ev_scenes.empty() ? c.paths.scenes : ev_scenes);
      const SplitMode split = parse_split(ev_split);
      const int episodes = *ev_episodes_opt ? ev_episodes : c.eval.episodes;
      if (episodes < 1) throw UsageError("--episodes must be >= 1");
      const auto seeds = ev_seeds.empty() ? c.eval.seeds : detail::parse_seed_list("--seeds", ev_seeds);
      EvalOptions opt;
      opt.t_max = c.train.t_max;
      opt.mask = parse_mask(ev_mask);
      if (ev_policy == "greedy") opt.selection = ActionSelection::Greedy;
      else if (ev_policy == "sample") opt.selection = ActionSelection::Sample;
      else if (ev_policy == "random") opt.selection = ActionSelection::Uniform;
      else throw UsageError("--policy must be greedy, sample or random");
      const auto r = evaluate(ck.params, ck.graph, provider, scenes, split, episodes, seeds, opt);
      auto echo = ck.config;
      echo.emplace_back("eval.checkpoint", ev_ckpt);
      echo.emplace_back("eval.split", std::string(to_string(split)));
      if (!ev_out.empty()) {
        std::ofstream f(ev_out);
        if (!f) throw IoError("cannot write report '" + ev_out + "'");
        write_report(f, r, echo);
      }
      write_report(out, r, echo, false);
      return 0;
    }

    if (*ig) {
      GraphFileInfo info;
      const auto g = load_graph(ig_path, &info);
      Config c = ig_config.empty() ? Config{} : load_config(ig_config);
      if (ig_config.empty()) {
        c.embedding.dim = g.features;
        if (auto it = info.header.find("embedding.seed"); it != info.header.end()) c.set("embedding.seed", it->second);
      }
      if (!ig_embeddings.empty()) {
        c.embedding.mode = "file";
        c.embedding.path = ig_embeddings;
      }
      out << inspect_graph(g, make_provider(c), ig_top, &info);
      return 0;
    }

    if (*sc) {
      int failed = 0;
      const auto results = run_selfcheck(sc_seed);
      for (const auto& r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) out << " (" << r.detail << ')';
        out << '\n';
        failed += r.pass ? 0 : 1;
      }
      out << "selfcheck: " << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " passed\n";
      if (failed) {
        err << "error: selfcheck: " << failed << " check(s) failed\n";
        return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << e.category() << ": " << msg << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace zonegraph
