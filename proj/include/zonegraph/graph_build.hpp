#pragma once
// Offline knowledge-graph construction for a room category:
//   sweep every reachable position and view, average the detected object
//   embeddings per position, cluster positions into zones, turn zones into
//   nodes (mean feature) and edges (fraction of adjacent cross-zone pairs),
//   then align and average the graphs of several rooms.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zonegraph/encoder.hpp"
#include "zonegraph/hungarian.hpp"
#include "zonegraph/kmeans.hpp"
#include "zonegraph/scene.hpp"
#include "zonegraph/tensor.hpp"

namespace zonegraph {

inline constexpr int kDefaultZones = 8;
inline constexpr double kDefaultEps = 0.5;

struct PositionFeature {
  int ix = 0;
  int iz = 0;
  Vec feature;
  int detection_count = 0;
};

/// Swept positions in row-major cell order.
struct PositionFeatureMap {
  RoomCategory room = RoomCategory::LivingRoom;
  int dim = 0;
  std::vector<PositionFeature> entries;
};

struct ZoneAssignment {
  std::vector<int> assignment;  // parallel to PositionFeatureMap::entries
  std::vector<Vec> centers;
  int zones = 0;  // effective M after dropping empty clusters
};

struct KnowledgeGraph {
  int zones = 0;     // M
  int features = 0;  // N
  Tensor nodes;      // M x N
  Tensor edges;      // M x M, symmetric, unit diagonal
  RoomCategory room = RoomCategory::LivingRoom;
  bool operator==(const KnowledgeGraph&) const = default;
};

/// Distinct goal categories seen in one view.
inline std::vector<std::string> detected_goals(const Observation& obs) {
  std::vector<std::string> cats;
  for (const auto& s : obs.visible)
    if (s.alpha == 1 && is_goal_category(s.category)) cats.push_back(s.category);
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  return cats;
}

/// Mean embedding of the goal categories detected in a single view (zero if none).
inline Vec observation_feature(const EmbeddingProvider& provider, const Observation& obs) {
  Vec f(static_cast<std::size_t>(provider.dim()), 0.0);
  const auto cats = detected_goals(obs);
  if (cats.empty()) return f;
  for (const auto& c : cats) {
    const auto e = provider.object_embedding(c);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += e.values[j];
  }
  for (auto& v : f) v /= static_cast<double>(cats.size());
  return f;
}

/// For each reachable cell, average f_obj over every (view, category) detection
/// across all 8 yaws x 3 pitches.
inline PositionFeatureMap sweep_position_features(const Scene& scene, const EmbeddingProvider& provider) {
  PositionFeatureMap map;
  map.room = scene.room;
  map.dim = provider.dim();
  const auto d = static_cast<std::size_t>(provider.dim());
  std::map<std::string, Embedding> cache;
  for (int iz = 0; iz < scene.depth; ++iz)
    for (int ix = 0; ix < scene.width; ++ix) {
      if (!scene.is_reachable(ix, iz)) continue;
      PositionFeature pf{ix, iz, Vec(d, 0.0), 0};
      for (int yaw = 0; yaw < 360; yaw += kYawStep)
        for (int pitch : kPitches) {
          for (const auto& c : detected_goals(visible_objects(scene, {ix, iz, yaw, pitch}))) {
            auto it = cache.find(c);
            if (it == cache.end()) it = cache.emplace(c, provider.object_embedding(c)).first;
            for (std::size_t j = 0; j < d; ++j) pf.feature[j] += it->second.values[j];
            ++pf.detection_count;
          }
        }
      if (pf.detection_count > 0)
        for (auto& v : pf.feature) v /= pf.detection_count;
      map.entries.push_back(std::move(pf));
    }
  return map;
}

inline ZoneAssignment cluster_zones(const PositionFeatureMap& features, int zones, std::uint64_t seed) {
  if (features.entries.empty()) throw UsageError("cluster_zones: no swept positions");
  std::vector<Vec> points;
  points.reserve(features.entries.size());
  for (const auto& e : features.entries) points.push_back(e.feature);
  auto km = kmeans(points, zones, seed, 100, 1e-6);
  ZoneAssignment za;
  za.assignment = std::move(km.labels);
  za.centers = std::move(km.centers);
  za.zones = static_cast<int>(za.centers.size());
  return za;
}

/// Nodes are zone means; edge (m, n) is the fraction of cross-zone position
/// pairs whose Manhattan distance is within eps meters.
inline KnowledgeGraph build_room_graph(const ZoneAssignment& za, const PositionFeatureMap& fm,
                                       double eps = kDefaultEps) {
  if (za.assignment.size() != fm.entries.size())
    throw UsageError("build_room_graph: assignment does not cover the feature map");
  const int m = za.zones;
  const int n = fm.dim;
  KnowledgeGraph g;
  g.zones = m;
  g.features = n;
  g.room = fm.room;
  g.nodes = Tensor::matrix(m, n);
  g.edges = Tensor::matrix(m, m);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < za.assignment.size(); ++i) {
    const int z = za.assignment[i];
    if (z < 0 || z >= m) throw UsageError("build_room_graph: zone id out of range");
    members[static_cast<std::size_t>(z)].push_back(i);
  }
  for (int z = 0; z < m; ++z) {
    const auto& mem = members[static_cast<std::size_t>(z)];
    auto row = g.nodes.row(z);
    for (std::size_t i : mem)
      for (int j = 0; j < n; ++j) row[j] += fm.entries[i].feature[j];
    if (!mem.empty())
      for (auto& v : row) v /= static_cast<double>(mem.size());
  }
  for (int a = 0; a < m; ++a) {
    g.edges(a, a) = 1.0;
    for (int b = a + 1; b < m; ++b) {
      const auto& ma = members[static_cast<std::size_t>(a)];
      const auto& mb = members[static_cast<std::size_t>(b)];
      std::size_t near = 0;
      for (std::size_t i : ma)
        for (std::size_t j : mb) {
          const auto& p = fm.entries[i];
          const auto& q = fm.entries[j];
          const double manhattan = (std::abs(p.ix - q.ix) + std::abs(p.iz - q.iz)) * kGridStep;
          if (manhattan <= eps + kGeomTol) ++near;
        }
      const double denom = static_cast<double>(ma.size()) * static_cast<double>(mb.size());
      const double e = denom > 0 ? static_cast<double>(near) / denom : 0.0;
      g.edges(a, b) = e;
      g.edges(b, a) = e;
    }
  }
  return g;
}

/// Cosine similarity between A's and B's nodes (rows: A, columns: B).
inline Tensor node_similarity(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  Tensor s = Tensor::matrix(a.zones, b.zones);
  for (int i = 0; i < a.zones; ++i)
    for (int j = 0; j < b.zones; ++j) s(i, j) = cosine(a.nodes.row(i), b.nodes.row(j));
  return s;
}

/// perm[m] = node of B matched to node m of A, maximizing total cosine.
/// When the identity is among the optimal assignments it is returned.
inline std::vector<int> match_graphs(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  if (a.zones != b.zones)
    throw UsageError("match_graphs: zone counts differ (" + std::to_string(a.zones) + " vs " +
                     std::to_string(b.zones) + ")");
  if (a.features != b.features) throw DimensionError("match_graphs: feature lengths differ");
  const Tensor s = node_similarity(a, b);
  auto perm = solve_assignment_max(s);
  std::vector<int> id(static_cast<std::size_t>(a.zones));
  for (int i = 0; i < a.zones; ++i) id[static_cast<std::size_t>(i)] = i;
  if (assignment_value(s, id) >= assignment_value(s, perm) - 1e-12) return id;
  return perm;
}

/// Reorders B's nodes and edges so node m corresponds to B's node perm[m].
inline KnowledgeGraph permute_graph(const KnowledgeGraph& b, const std::vector<int>& perm) {
  KnowledgeGraph out = b;
  for (int m = 0; m < b.zones; ++m) {
    const auto src = b.nodes.row(perm[static_cast<std::size_t>(m)]);
    std::copy(src.begin(), src.end(), out.nodes.row(m).begin());
    for (int n = 0; n < b.zones; ++n)
      out.edges(m, n) = b.edges(perm[static_cast<std::size_t>(m)], perm[static_cast<std::size_t>(n)]);
  }
  return out;
}

inline KnowledgeGraph merge_graphs(const std::vector<KnowledgeGraph>& graphs) {
  if (graphs.empty()) throw UsageError("merge_graphs: no graphs");
  const auto& first = graphs.front();
  for (const auto& g : graphs) {
    if (g.room != first.room) throw UsageError("merge_graphs: mixed room categories");
    if (g.zones != first.zones) throw UsageError("merge_graphs: zone counts differ");
  }
  if (graphs.size() == 1) return first;
  KnowledgeGraph acc = first;
  for (std::size_t k = 1; k < graphs.size(); ++k) {
    const auto aligned = permute_graph(graphs[k], match_graphs(first, graphs[k]));
    for (std::size_t i = 0; i < acc.nodes.size(); ++i) acc.nodes[i] += aligned.nodes[i];
    for (std::size_t i = 0; i < acc.edges.size(); ++i) acc.edges[i] += aligned.edges[i];
  }
  const double n = static_cast<double>(graphs.size());
  for (auto& v : acc.nodes.values) v /= n;
  for (auto& v : acc.edges.values) v /= n;
  return acc;
}

struct GraphBuildResult {
  KnowledgeGraph graph;
  std::vector<KnowledgeGraph> per_scene;
  std::vector<std::string> warnings;
  int merged = 0;
};

/// Sweep, cluster and build per scene, then merge. Scenes whose clustering
/// ends with a different zone count than the reference are left out.
inline GraphBuildResult build_graph_from_scenes(const std::vector<Scene>& scenes, const EmbeddingProvider& provider,
                                                int zones = kDefaultZones, double eps = kDefaultEps,
                                                std::uint64_t seed = 0) {
  if (scenes.empty()) throw UsageError("build-graph: no scenes");
  for (const auto& s : scenes)
    if (s.room != scenes.front().room)
      throw UsageError("build-graph: mixed room categories (" + std::string(to_string(scenes.front().room)) + " and " +
                       std::string(to_string(s.room)) + ")");
  GraphBuildResult r;
  for (const auto& s : scenes) {
    const auto fm = sweep_position_features(s, provider);
    r.per_scene.push_back(build_room_graph(cluster_zones(fm, zones, seed), fm, eps));
  }
  int ref = 0;
  for (const auto& g : r.per_scene) ref = std::max(ref, g.zones);
  std::vector<KnowledgeGraph> keep;
  for (std::size_t i = 0; i < r.per_scene.size(); ++i) {
    if (r.per_scene[i].zones == ref) keep.push_back(r.per_scene[i]);
    else
      r.warnings.push_back("scene '" + scenes[i].id + "' produced " + std::to_string(r.per_scene[i].zones) +
                           " zones instead of " + std::to_string(ref) + "; skipped");
  }
  if (ref < zones) r.warnings.push_back("only " + std::to_string(ref) + " non-empty zones out of " + std::to_string(zones));
  r.merged = static_cast<int>(keep.size());
  r.graph = merge_graphs(keep);
  return r;
}

/// Problems with the graph invariants; empty when valid.
inline std::vector<std::string> graph_problems(const KnowledgeGraph& g) {
  std::vector<std::string> out;
  if (g.nodes.rows() != g.zones || g.nodes.cols() != g.features) out.push_back("node matrix shape");
  if (g.edges.rows() != g.zones || g.edges.cols() != g.zones) out.push_back("edge matrix shape");
  if (!out.empty()) return out;
  if (!all_finite(g.nodes.values)) out.push_back("non-finite node feature");
  for (int a = 0; a < g.zones; ++a) {
    if (g.edges(a, a) != 1.0) out.push_back("diagonal not 1 at " + std::to_string(a));
    for (int b = 0; b < g.zones; ++b) {
      const double e = g.edges(a, b);
      if (!(e >= 0.0 && e <= 1.0)) out.push_back("edge out of [0,1]");
      if (e != g.edges(b, a)) out.push_back("edges not symmetric");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// kg-v1 text format

struct GraphFileInfo {
  std::map<std::string, std::string> header;  // every key=value on line 1
};

inline void write_graph(std::ostream& os, const KnowledgeGraph& g,
                        const std::map<std::string, std::string>& echo = {}) {
  os << "kg-v1 M=" << g.zones << " N=" << g.features << " room=" << to_string(g.room);
  for (const auto& [k, v] : echo) os << ' ' << k << '=' << v;
  os << '\n';
  char buf[32];
  auto rows = [&](const Tensor& t) {
    for (int r = 0; r < t.rows(); ++r) {
      for (int c = 0; c < t.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", t(r, c));
        os << (c ? " " : "") << buf;
      }
      os << '\n';
    }
  };
  rows(g.nodes);
  rows(g.edges);
}

inline KnowledgeGraph read_graph(std::istream& in, GraphFileInfo* info = nullptr, int first_line = 1) {
  std::string line;
  int lineno = first_line;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("graph: line " + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("empty input");
  std::istringstream hs(line);
  std::string magic;
  hs >> magic;
  if (magic != "kg-v1") throw fail("expected version header 'kg-v1'");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw fail("bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  if (!kv.count("M") || !kv.count("N") || !kv.count("room")) throw fail("header needs M=, N= and room=");
  KnowledgeGraph g;
  try {
    g.zones = std::stoi(kv["M"]);
    g.features = std::stoi(kv["N"]);
  } catch (const std::exception&) {
    throw fail("bad M or N");
  }
  if (g.zones < 1 || g.features < 1) throw fail("M and N must be positive");
  try {
    g.room = parse_room(kv["room"]);
  } catch (const ParseError& e) {
    throw fail(e.what());
  }
  auto read_rows = [&](Tensor& t, int r, int c) {
    t = Tensor::matrix(r, c);
    for (int i = 0; i < r; ++i) {
      ++lineno;
      if (!std::getline(in, line)) throw fail("unexpected end of file");
      std::istringstream ls(line);
      for (int j = 0; j < c; ++j) {
        std::string v;
        if (!(ls >> v)) throw fail("expected " + std::to_string(c) + " values");
        char* end = nullptr;
        t(i, j) = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') throw fail("unparsable float '" + v + "'");
      }
      std::string extra;
      if (ls >> extra) throw fail("too many values");
    }
  };
  read_rows(g.nodes, g.zones, g.features);
  read_rows(g.edges, g.zones, g.zones);
  if (info) info->header = std::move(kv);
  return g;
}

inline void save_graph(const std::string& path, const KnowledgeGraph& g,
                       const std::map<std::string, std::string>& echo = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write graph '" + path + "'");
  write_graph(out, g, echo);
}

inline KnowledgeGraph load_graph(const std::string& path, GraphFileInfo* info = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open graph '" + path + "'");
  return read_graph(in, info);
}

}  // namespace zonegraph
