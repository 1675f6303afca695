#pragma once
// Flat `key = value` configuration. Every key has a default; unknown keys are
// rejected; `echo()` reproduces the effective configuration for artifact headers.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zonegraph/common.hpp"
#include "zonegraph/policy.hpp"

namespace zonegraph {

enum class SyncMode { Synchronous, Asynchronous };
enum class SplitMode { General, ZeroShot };

inline std::string_view to_string(SyncMode m) { return m == SyncMode::Synchronous ? "synchronous" : "asynchronous"; }
inline std::string_view to_string(SplitMode m) { return m == SplitMode::General ? "general" : "zero_shot"; }

inline SplitMode parse_split(std::string_view s) {
  if (s == "general") return SplitMode::General;
  if (s == "zero_shot" || s == "zero-shot") return SplitMode::ZeroShot;
  throw ParseError("unknown split '" + std::string(s) + "' (general, zero-shot)");
}

struct TrainConfig {
  long episodes = 20000;
  int workers = 4;
  double gamma = 0.99;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double lr = 1e-4;
  int t_max = kDefaultTMax;
  std::uint64_t seed = 0;
  SyncMode sync_mode = SyncMode::Synchronous;
  int hidden = kDefaultHidden;
  SplitMode split = SplitMode::General;
  InputMask mask;
  long log_every = 1000;

  A2cConfig a2c() const { return {gamma, entropy_coef, value_coef}; }

  void validate() const {
    if (episodes < 0) throw ConfigError("train.episodes must be >= 0");
    if (workers < 1) throw ConfigError("train.workers must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma must be in (0, 1]");
    if (entropy_coef < 0.0 || value_coef < 0.0) throw ConfigError("loss coefficients must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
    if (t_max < 1) throw ConfigError("sim.t_max must be >= 1");
    if (hidden < 1) throw ConfigError("train.hidden must be >= 1");
    if (log_every < 1) throw ConfigError("train.log_every must be >= 1");
  }
};

struct Config {
  struct {
    int dim = 64;
    std::string mode = "synthetic";
    std::uint64_t seed = 0;
    std::string path;
  } embedding;
  struct {
    int zones = 8;
    double eps = 0.5;
    std::uint64_t seed = 0;
  } graph;
  struct {
    int width = 8;
    int depth = 8;
  } sim;
  TrainConfig train;
  struct {
    std::vector<std::uint64_t> seeds{1, 2, 3};
    int episodes = 100;
  } eval;
  struct {
    std::string scenes = "scenes";
    std::string graph = "graph.kg";
    std::string checkpoint = "model.ckpt";
    std::string report = "report.jsonl";
  } paths;

  /// Sets one key from its text form; throws ConfigError on unknown keys.
  void set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> echo() const;
};

namespace detail {

inline long parse_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || v[0] == '-')
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return x;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x))
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return x;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_u64(key, tok));
  if (out.empty()) throw ConfigError("'" + key + "' needs at least one seed");
  return out;
}

}  // namespace detail

inline void Config::set(const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "embedding.dim") embedding.dim = static_cast<int>(parse_long(key, v));
  else if (key == "embedding.mode") {
    if (v != "synthetic" && v != "file") throw ConfigError("embedding.mode must be synthetic or file");
    embedding.mode = v;
  } else if (key == "embedding.seed") embedding.seed = parse_u64(key, v);
  else if (key == "embedding.path") embedding.path = v;
  else if (key == "graph.zones") graph.zones = static_cast<int>(parse_long(key, v));
  else if (key == "graph.eps") graph.eps = parse_double(key, v);
  else if (key == "graph.seed") graph.seed = parse_u64(key, v);
  else if (key == "sim.width") sim.width = static_cast<int>(parse_long(key, v));
  else if (key == "sim.depth") sim.depth = static_cast<int>(parse_long(key, v));
  else if (key == "sim.t_max") train.t_max = static_cast<int>(parse_long(key, v));
  else if (key == "train.episodes") train.episodes = parse_long(key, v);
  else if (key == "train.workers") train.workers = static_cast<int>(parse_long(key, v));
  else if (key == "train.gamma") train.gamma = parse_double(key, v);
  else if (key == "train.entropy_coef") train.entropy_coef = parse_double(key, v);
  else if (key == "train.value_coef") train.value_coef = parse_double(key, v);
  else if (key == "train.lr") train.lr = parse_double(key, v);
  else if (key == "train.seed") train.seed = parse_u64(key, v);
  else if (key == "train.sync_mode") {
    if (v == "synchronous") train.sync_mode = SyncMode::Synchronous;
    else if (v == "asynchronous") train.sync_mode = SyncMode::Asynchronous;
    else throw ConfigError("train.sync_mode must be synchronous or asynchronous");
  } else if (key == "train.hidden") train.hidden = static_cast<int>(parse_long(key, v));
  else if (key == "train.split") {
    try {
      train.split = parse_split(v);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "train.mask") {
    try {
      train.mask = parse_mask(v);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "train.log_every") train.log_every = parse_long(key, v);
  else if (key == "eval.seeds") eval.seeds = parse_seed_list(key, v);
  else if (key == "eval.episodes") eval.episodes = static_cast<int>(parse_long(key, v));
  else if (key == "paths.scenes") paths.scenes = v;
  else if (key == "paths.graph") paths.graph = v;
  else if (key == "paths.checkpoint") paths.checkpoint = v;
  else if (key == "paths.report") paths.report = v;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

inline std::vector<std::pair<std::string, std::string>> Config::echo() const {
  using detail::format_double;
  std::string seeds;
  for (std::size_t i = 0; i < eval.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(eval.seeds[i]);
  return {
      {"embedding.dim", std::to_string(embedding.dim)},
      {"embedding.mode", embedding.mode},
      {"embedding.seed", std::to_string(embedding.seed)},
      {"embedding.path", embedding.path},
      {"graph.zones", std::to_string(graph.zones)},
      {"graph.eps", format_double(graph.eps)},
      {"graph.seed", std::to_string(graph.seed)},
      {"sim.width", std::to_string(sim.width)},
      {"sim.depth", std::to_string(sim.depth)},
      {"sim.t_max", std::to_string(train.t_max)},
      {"train.episodes", std::to_string(train.episodes)},
      {"train.workers", std::to_string(train.workers)},
      {"train.gamma", format_double(train.gamma)},
      {"train.entropy_coef", format_double(train.entropy_coef)},
      {"train.value_coef", format_double(train.value_coef)},
      {"train.lr", format_double(train.lr)},
      {"train.seed", std::to_string(train.seed)},
      {"train.sync_mode", std::string(to_string(train.sync_mode))},
      {"train.hidden", std::to_string(train.hidden)},
      {"train.split", std::string(to_string(train.split))},
      {"train.mask", to_string(train.mask)},
      {"train.log_every", std::to_string(train.log_every)},
      {"eval.seeds", seeds},
      {"eval.episodes", std::to_string(eval.episodes)},
      {"paths.scenes", paths.scenes},
      {"paths.graph", paths.graph},
      {"paths.checkpoint", paths.checkpoint},
      {"paths.report", paths.report},
  };
}

inline Config parse_config(std::istream& in, Config base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      base.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline Config load_config(const std::string& path, Config base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

inline std::string config_to_string(const Config& c) {
  std::string s;
  for (const auto& [k, v] : c.echo()) s += k + " = " + v + "\n";
  return s;
}

/// Provider described by the embedding section.
inline EmbeddingProvider make_provider(const Config& c) {
  if (c.embedding.mode == "file") {
    if (c.embedding.path.empty()) throw ConfigError("embedding.mode = file needs embedding.path");
    return load_embeddings(c.embedding.path);
  }
  return EmbeddingProvider::synthetic(c.embedding.seed, c.embedding.dim);
}

/// Worker cap from ZONEGRAPH_THREADS (unset or invalid: no cap).
inline int thread_cap(int requested) {
  int n = std::max(1, requested);
  if (const char* env = std::getenv("ZONEGRAPH_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

}  // namespace zonegraph
