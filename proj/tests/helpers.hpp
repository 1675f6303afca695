#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "zonegraph/zonegraph.hpp"

namespace zgtest {

using namespace zonegraph;

/// Fully open w x d kitchen with the given objects.
inline Scene open_scene(int w, int d, std::vector<ObjectInstance> objects = {}) {
  Scene s;
  s.id = "hand";
  s.room = RoomCategory::Kitchen;
  s.width = w;
  s.depth = d;
  s.reachable.assign(static_cast<std::size_t>(w * d), 1);
  s.objects = std::move(objects);
  return s;
}

inline void block(Scene& s, int ix, int iz) { s.reachable[static_cast<std::size_t>(iz * s.width + ix)] = 0; }

inline std::shared_ptr<const Scene> share(Scene s) { return std::make_shared<const Scene>(std::move(s)); }

inline EpisodeState episode(const Scene& s, const std::string& goal, Pose p, int t_max = kDefaultTMax) {
  EpisodeState st;
  st.scene = share(s);
  st.goal = goal;
  st.pose = p;
  st.t_max = t_max;
  return st;
}

/// Unit basis provider over a handful of names.
inline EmbeddingProvider basis_provider(const std::vector<std::string>& names, int dim) {
  std::map<std::string, Embedding> t;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Vec v(static_cast<std::size_t>(dim), 0.0);
    v[i % static_cast<std::size_t>(dim)] = 1.0;
    t[names[i]] = {v};
  }
  return EmbeddingProvider::from_table(dim, std::move(t));
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("zonegraph-" + tag + "-" + std::to_string(std::hash<std::string>{}(tag + std::to_string(::getpid()))));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

inline std::string read_file(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace zgtest
