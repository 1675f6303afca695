#pragma once
// Discrete gridworld simulator: poses, visibility, episode stepping,
// procedural scene generation and the geodesic oracle used by SPL/DTS.
//
// Coordinates: cell (ix, iz) sits at (x, z) = (0.5 * ix, 0.5 * iz) meters.
// Yaw 0 faces +z, yaw 90 faces +x; RotateRight adds 45 degrees.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zonegraph/categories.hpp"
#include "zonegraph/common.hpp"

namespace zonegraph {

inline constexpr double kGridStep = 0.5;          // meters per cell
inline constexpr double kVisibilityRange = 1.5;   // meters
inline constexpr double kHalfFov = 45.0;          // degrees
inline constexpr int kYawStep = 45;
inline constexpr int kPitchStep = 30;
inline constexpr int kDefaultTMax = 100;
inline constexpr std::array<int, 3> kPitches = {-30, 0, 30};
inline constexpr double kGeomTol = 1e-9;

enum class Action : int { MoveAhead = 0, RotateLeft, RotateRight, LookDown, LookUp, Done };
inline constexpr int kNumActions = 6;

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::MoveAhead: return "MoveAhead";
    case Action::RotateLeft: return "RotateLeft";
    case Action::RotateRight: return "RotateRight";
    case Action::LookDown: return "LookDown";
    case Action::LookUp: return "LookUp";
    case Action::Done: return "Done";
  }
  return "?";
}

struct Pose {
  int ix = 0;
  int iz = 0;
  int yaw = 0;    // degrees, multiple of 45 in [0, 360)
  int pitch = 0;  // degrees, one of -30, 0, 30

  double x() const { return ix * kGridStep; }
  double z() const { return iz * kGridStep; }
  bool operator==(const Pose&) const = default;
};

struct ObjectInstance {
  std::string category;
  int ix = 0;
  int iz = 0;
  HeightBand band = HeightBand::Mid;

  double x() const { return ix * kGridStep; }
  double z() const { return iz * kGridStep; }
  bool operator==(const ObjectInstance&) const = default;
};

struct Scene {
  std::string id;
  RoomCategory room = RoomCategory::LivingRoom;
  int width = 0;  // cells along x
  int depth = 0;  // cells along z
  std::vector<std::uint8_t> reachable;  // row-major, index iz * width + ix
  std::vector<ObjectInstance> objects;
  std::uint64_t seed = 0;

  bool in_bounds(int ix, int iz) const { return ix >= 0 && iz >= 0 && ix < width && iz < depth; }
  bool is_reachable(int ix, int iz) const {
    return in_bounds(ix, iz) && reachable[static_cast<std::size_t>(iz * width + ix)] != 0;
  }
  bool has_category(std::string_view c) const {
    return std::any_of(objects.begin(), objects.end(), [&](const auto& o) { return o.category == c; });
  }
  /// Distinct goal categories present, sorted.
  std::vector<std::string> goal_categories() const {
    std::vector<std::string> out;
    for (const auto& o : objects)
      if (is_goal_category(o.category)) out.push_back(o.category);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  bool operator==(const Scene&) const = default;
};

struct Sighting {
  std::string category;
  int alpha = 1;
  double bearing = 0.0;   // degrees, positive to the right of the heading
  double distance = 0.0;  // meters
};

struct Observation {
  std::vector<Sighting> visible;
  Pose pose;
};

inline bool is_valid_pose(const Scene& s, const Pose& p) {
  return s.is_reachable(p.ix, p.iz) && p.yaw >= 0 && p.yaw < 360 && p.yaw % kYawStep == 0 &&
         (p.pitch == -30 || p.pitch == 0 || p.pitch == 30);
}

namespace detail {

inline double wrap_degrees(double a) {
  while (a > 180.0) a -= 360.0;
  while (a <= -180.0) a += 360.0;
  return a;
}

inline bool connected(const std::vector<std::uint8_t>& open, int w, int d) {
  int first = -1;
  int total = 0;
  for (int i = 0; i < w * d; ++i)
    if (open[i]) {
      if (first < 0) first = i;
      ++total;
    }
  if (first < 0) return false;
  std::vector<std::uint8_t> seen(open.size(), 0);
  std::deque<int> q{first};
  seen[first] = 1;
  int count = 0;
  while (!q.empty()) {
    const int c = q.front();
    q.pop_front();
    ++count;
    const int cx = c % w, cz = c / w;
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& n : nb) {
      const int nx = cx + n[0], nz = cz + n[1];
      if (nx < 0 || nz < 0 || nx >= w || nz >= d) continue;
      const int ni = nz * w + nx;
      if (open[ni] && !seen[ni]) {
        seen[ni] = 1;
        q.push_back(ni);
      }
    }
  }
  return count == total;
}

inline bool has_open_neighbor(const std::vector<std::uint8_t>& open, int w, int d, int ix, int iz) {
  const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (const auto& n : nb) {
    const int nx = ix + n[0], nz = iz + n[1];
    if (nx >= 0 && nz >= 0 && nx < w && nz < d && open[nz * w + nx]) return true;
  }
  return false;
}

}  // namespace detail

/// Objects seen from `pose`: within 1.5 m, within +-45 degrees of the heading,
/// and in the height band matching the current pitch.
inline Observation visible_objects(const Scene& scene, const Pose& pose) {
  Observation obs;
  obs.pose = pose;
  for (const auto& o : scene.objects) {
    if (band_pitch(o.band) != pose.pitch) continue;
    const double dx = (o.ix - pose.ix) * kGridStep;
    const double dz = (o.iz - pose.iz) * kGridStep;
    const double dist = std::sqrt(dx * dx + dz * dz);
    if (dist > kVisibilityRange + kGeomTol) continue;
    double bearing = 0.0;
    if (dist > 0.0) {
      bearing = detail::wrap_degrees(std::atan2(dx, dz) * 180.0 / 3.14159265358979323846 - pose.yaw);
      if (std::abs(bearing) > kHalfFov + kGeomTol) continue;
    }
    obs.visible.push_back({o.category, 1, bearing, dist});
  }
  return obs;
}

inline bool goal_visible(const Scene& scene, const Pose& pose, std::string_view goal) {
  const auto obs = visible_objects(scene, pose);
  return std::any_of(obs.visible.begin(), obs.visible.end(),
                     [&](const Sighting& s) { return s.category == goal; });
}

// ---------------------------------------------------------------------------
// Episodes

struct EpisodeState {
  std::shared_ptr<const Scene> scene;
  std::string goal;
  Pose pose;
  int step_count = 0;
  int t_max = kDefaultTMax;
  bool terminated = false;
  bool success = false;
  bool done_issued = false;
  double path_length = 0.0;  // meters actually traveled
};

struct StepEvent {
  bool moved = false;
  bool blocked = false;
  bool clamped = false;
  bool done_issued = false;
  bool success = false;
  bool timeout = false;
  bool terminated = false;
};

struct StepResult {
  Observation observation;
  StepEvent event;
};

/// Unit cell offset for a heading; diagonal yaws move to the diagonal neighbor.
inline std::pair<int, int> heading_offset(int yaw) {
  static constexpr int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr int dz[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const int k = ((yaw % 360) + 360) % 360 / kYawStep;
  return {dx[k], dz[k]};
}

inline StepResult step(EpisodeState& state, Action action) {
  if (state.terminated) throw UsageError("step called on a terminated episode");
  const Scene& scene = *state.scene;
  StepEvent ev;
  Pose& p = state.pose;
  switch (action) {
    case Action::MoveAhead: {
      const auto [dx, dz] = heading_offset(p.yaw);
      const int nx = p.ix + dx, nz = p.iz + dz;
      bool ok = scene.is_reachable(nx, nz);
      // Diagonal moves may not cut a blocked corner.
      if (ok && dx != 0 && dz != 0)
        ok = scene.is_reachable(p.ix + dx, p.iz) && scene.is_reachable(p.ix, p.iz + dz);
      if (ok) {
        p.ix = nx;
        p.iz = nz;
        state.path_length += (dx != 0 && dz != 0) ? kGridStep * std::sqrt(2.0) : kGridStep;
        ev.moved = true;
      } else {
        ev.blocked = true;
      }
      break;
    }
    case Action::RotateLeft: p.yaw = (p.yaw + 360 - kYawStep) % 360; break;
    case Action::RotateRight: p.yaw = (p.yaw + kYawStep) % 360; break;
    case Action::LookDown:
      if (p.pitch <= -kPitchStep) ev.clamped = true;
      else p.pitch -= kPitchStep;
      break;
    case Action::LookUp:
      if (p.pitch >= kPitchStep) ev.clamped = true;
      else p.pitch += kPitchStep;
      break;
    case Action::Done:
      ev.done_issued = true;
      state.done_issued = true;
      state.terminated = true;
      state.success = goal_visible(scene, p, state.goal);
      ev.success = state.success;
      break;
  }
  ++state.step_count;
  if (!state.terminated && state.step_count >= state.t_max) {
    state.terminated = true;
    ev.timeout = true;
  }
  ev.terminated = state.terminated;
  return {visible_objects(scene, p), ev};
}

inline std::vector<std::size_t> reachable_cells(const Scene& s) {
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < s.reachable.size(); ++i)
    if (s.reachable[i]) cells.push_back(i);
  return cells;
}

/// Uniform start over reachable cells x yaws, level pitch.
inline EpisodeState reset_episode(std::shared_ptr<const Scene> scene, const std::string& goal,
                                  std::uint64_t seed, int t_max = kDefaultTMax) {
  if (!scene->has_category(goal))
    throw ConfigError("goal '" + goal + "' is not present in scene '" + scene->id + "'");
  if (t_max < 1) throw ConfigError("t_max must be positive");
  const auto cells = reachable_cells(*scene);
  if (cells.empty()) throw ConfigError("scene '" + scene->id + "' has no reachable cell");
  Rng rng(seed);
  const std::size_t cell = cells[rng.index(cells.size())];
  const int yaw = static_cast<int>(rng.index(8)) * kYawStep;
  EpisodeState st;
  st.scene = std::move(scene);
  st.goal = goal;
  st.pose = {static_cast<int>(cell % st.scene->width), static_cast<int>(cell / st.scene->width), yaw, 0};
  st.t_max = t_max;
  return st;
}

// ---------------------------------------------------------------------------
// Geodesic oracle

/// Reachable cells from which some heading and pitch make `goal` visible.
inline std::vector<std::uint8_t> success_cells(const Scene& scene, std::string_view goal) {
  std::vector<std::uint8_t> mask(scene.reachable.size(), 0);
  for (int iz = 0; iz < scene.depth; ++iz)
    for (int ix = 0; ix < scene.width; ++ix) {
      if (!scene.is_reachable(ix, iz)) continue;
      bool hit = false;
      for (int yaw = 0; yaw < 360 && !hit; yaw += kYawStep)
        for (int pitch : kPitches)
          if (goal_visible(scene, {ix, iz, yaw, pitch}, goal)) {
            hit = true;
            break;
          }
      mask[static_cast<std::size_t>(iz * scene.width + ix)] = hit;
    }
  return mask;
}

/// Breadth-first distance (4-neighborhood, 0.5 m per hop) to the nearest
/// cell in `targets`; nullopt when none is reachable.
inline std::optional<double> geodesic_to_mask(const Scene& scene, int ix, int iz,
                                              const std::vector<std::uint8_t>& targets) {
  if (!scene.is_reachable(ix, iz)) return std::nullopt;
  const int w = scene.width;
  std::vector<int> dist(scene.reachable.size(), -1);
  std::deque<int> q{iz * w + ix};
  dist[iz * w + ix] = 0;
  while (!q.empty()) {
    const int c = q.front();
    q.pop_front();
    if (targets[c]) return dist[c] * kGridStep;
    const int cx = c % w, cz = c / w;
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& n : nb) {
      const int nx = cx + n[0], nz = cz + n[1];
      if (!scene.is_reachable(nx, nz)) continue;
      const int ni = nz * w + nx;
      if (dist[ni] < 0) {
        dist[ni] = dist[c] + 1;
        q.push_back(ni);
      }
    }
  }
  return std::nullopt;
}

inline std::optional<double> shortest_path_length(const Scene& scene, const Pose& pose,
                                                  std::string_view goal) {
  return geodesic_to_mask(scene, pose.ix, pose.iz, success_cells(scene, goal));
}

// ---------------------------------------------------------------------------
// Procedural generation

/// Problems with a scene's structural invariants; empty when valid.
inline std::vector<std::string> scene_problems(const Scene& s) {
  std::vector<std::string> out;
  if (s.width < 1 || s.depth < 1 ||
      s.reachable.size() != static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.depth)) {
    out.push_back("bad dimensions");
    return out;
  }
  if (!detail::connected(s.reachable, s.width, s.depth)) out.push_back("reachable cells not connected");
  for (const auto& o : s.objects) {
    if (o.category.empty()) out.push_back("object with empty category");
    if (!s.in_bounds(o.ix, o.iz)) out.push_back("object '" + o.category + "' out of bounds");
    else if (!detail::has_open_neighbor(s.reachable, s.width, s.depth, o.ix, o.iz))
      out.push_back("object '" + o.category + "' has no reachable neighbor");
  }
  if (s.goal_categories().size() < 4) out.push_back("fewer than 4 goal categories");
  return out;
}

namespace detail {

inline Scene generate_attempt(RoomCategory room, int width, int depth, std::uint64_t seed,
                              const RoomTables& tables, std::uint64_t stream) {
  const auto& templates = tables.for_room(room);
  Rng rng(stream);

  std::vector<std::size_t> order(templates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::size_t n_zones = std::min<std::size_t>(2 + rng.index(3), order.size());
  auto distinct_goals = [&](std::size_t n) {
    std::vector<std::string> g;
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& item : templates[order[i]])
        if (is_goal_category(item.category)) g.push_back(item.category);
    std::sort(g.begin(), g.end());
    return static_cast<std::size_t>(std::unique(g.begin(), g.end()) - g.begin());
  };
  while (distinct_goals(n_zones) < 4 && n_zones < order.size()) ++n_zones;
  if (distinct_goals(n_zones) < 4)
    throw GenerationError("room tables for " + std::string(to_string(room)) +
                          " cannot supply 4 goal categories");

  const int cells = width * depth;
  std::vector<std::uint8_t> open(static_cast<std::size_t>(cells), 1);
  std::vector<std::pair<int, int>> occupied;  // cells holding objects
  std::vector<std::pair<int, int>> anchors;
  Scene scene;

  auto placement_ok = [&](const std::vector<std::pair<int, int>>& extra_occupied) {
    int n_open = 0;
    for (auto v : open) n_open += v;
    if (n_open * 2 < cells) return false;
    if (!detail::connected(open, width, depth)) return false;
    for (auto [x, z] : occupied)
      if (!detail::has_open_neighbor(open, width, depth, x, z)) return false;
    for (auto [x, z] : extra_occupied)
      if (!detail::has_open_neighbor(open, width, depth, x, z)) return false;
    return true;
  };

  for (std::size_t zi = 0; zi < n_zones; ++zi) {
    const auto& items = templates[order[zi]];
    const bool two_cells = items.size() > 2;
    bool placed = false;
    for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
      const int ax = static_cast<int>(rng.index(static_cast<std::size_t>(width)));
      const int az = static_cast<int>(rng.index(static_cast<std::size_t>(depth)));
      if (!open[az * width + ax]) continue;
      if (attempt < 200) {
        bool far = true;
        for (auto [px, pz] : anchors)
          if (std::max(std::abs(px - ax), std::abs(pz - az)) < 3) far = false;
        if (!far) continue;
      }
      std::vector<std::pair<int, int>> mine{{ax, az}};
      if (two_cells) {
        const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        const auto& n = nb[rng.index(4)];
        const int bx = ax + n[0], bz = az + n[1];
        if (bx < 0 || bz < 0 || bx >= width || bz >= depth || !open[bz * width + bx]) continue;
        mine.push_back({bx, bz});
      }
      for (auto [x, z] : mine) open[z * width + x] = 0;
      if (!placement_ok(mine)) {
        for (auto [x, z] : mine) open[z * width + x] = 1;
        continue;
      }
      placed = true;
      anchors.push_back({ax, az});
      const std::size_t on_first = two_cells ? (items.size() + 1) / 2 : items.size();
      for (std::size_t k = 0; k < items.size(); ++k) {
        const auto [x, z] = mine[k < on_first ? 0 : 1];
        scene.objects.push_back({items[k].category, x, z, items[k].band});
      }
      for (auto c : mine) occupied.push_back(c);
    }
    if (!placed)
      throw GenerationError("could not place zone " + std::to_string(zi) + " in a " +
                            std::to_string(width) + "x" + std::to_string(depth) + " scene");
  }

  // A little bare furniture for detours in larger rooms.
  if (cells >= 36) {
    const std::size_t extra = rng.index(3);
    for (std::size_t k = 0; k < extra; ++k)
      for (int attempt = 0; attempt < 50; ++attempt) {
        const int x = static_cast<int>(rng.index(static_cast<std::size_t>(width)));
        const int z = static_cast<int>(rng.index(static_cast<std::size_t>(depth)));
        if (!open[z * width + x]) continue;
        open[z * width + x] = 0;
        if (placement_ok({})) break;
        open[z * width + x] = 1;
      }
  }

  scene.id = std::string(to_string(room)) + "-" + std::to_string(seed);
  scene.room = room;
  scene.width = width;
  scene.depth = depth;
  scene.reachable = std::move(open);
  scene.seed = seed;
  return scene;
}

}  // namespace detail

inline constexpr int kGenerationAttempts = 64;

inline Scene generate_scene(RoomCategory room, int width, int depth, std::uint64_t seed,
                            const RoomTables& tables = builtin_room_tables()) {
  if (width < 4 || depth < 4)
    throw GenerationError("scene size " + std::to_string(width) + "x" + std::to_string(depth) +
                          " is too small to host 4 goal objects (minimum 4x4)");
  const std::uint64_t base =
      hash_combine(seed, hash_combine(hash_string(to_string(room)), static_cast<std::uint64_t>(width) * 4096 + depth));
  for (int attempt = 0;; ++attempt) {
    try {
      return detail::generate_attempt(room, width, depth, seed, tables,
                                      attempt == 0 ? base : hash_combine(base, static_cast<std::uint64_t>(attempt)));
    } catch (const GenerationError&) {
      if (attempt + 1 == kGenerationAttempts) throw;
    }
  }
}

// ---------------------------------------------------------------------------
// scene-v1 text format

namespace detail {
inline std::string format_meters(int cells) {
  std::ostringstream os;
  os << cells * kGridStep;
  return os.str();
}

inline int meters_to_cell(double m, int lineno) {
  const double c = m / kGridStep;
  const double r = std::round(c);
  if (std::abs(c - r) > 1e-9)
    throw ParseError("scene: line " + std::to_string(lineno) + ": coordinate " + std::to_string(m) +
                     " is not on the 0.5 m grid");
  return static_cast<int>(r);
}
}  // namespace detail

inline void write_scene(std::ostream& os, const Scene& s) {
  os << "scene-v1\n";
  os << "id " << s.id << "\n";
  os << "room " << to_string(s.room) << "\n";
  os << "size " << s.width << " " << s.depth << "\n";
  os << "seed " << s.seed << "\n";
  os << "reachable\n";
  for (int iz = 0; iz < s.depth; ++iz) {
    for (int ix = 0; ix < s.width; ++ix) os << (s.is_reachable(ix, iz) ? '1' : '0');
    os << "\n";
  }
  os << "objects " << s.objects.size() << "\n";
  for (const auto& o : s.objects)
    os << o.category << " " << detail::format_meters(o.ix) << " " << detail::format_meters(o.iz) << " "
       << to_string(o.band) << "\n";
}

inline std::string scene_to_string(const Scene& s) {
  std::ostringstream os;
  write_scene(os, s);
  return os.str();
}

inline Scene read_scene(std::istream& in) {
  Scene s;
  std::string line;
  int lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line))
      throw ParseError("scene: line " + std::to_string(lineno + 1) + ": unexpected end of file, expected " +
                       what);
    ++lineno;
    return std::istringstream(line);
  };
  auto expect_key = [&](std::istringstream& ls, const char* key) {
    std::string k;
    if (!(ls >> k) || k != key)
      throw ParseError("scene: line " + std::to_string(lineno) + ": expected '" + key + "'");
  };
  {
    next("header");
    if (line != "scene-v1")
      throw ParseError("scene: line 1: expected version header 'scene-v1', got '" + line + "'");
  }
  {
    auto ls = next("id");
    expect_key(ls, "id");
    if (!(ls >> s.id)) throw ParseError("scene: line " + std::to_string(lineno) + ": missing id");
  }
  {
    auto ls = next("room");
    expect_key(ls, "room");
    std::string r;
    ls >> r;
    s.room = parse_room(r);
  }
  {
    auto ls = next("size");
    expect_key(ls, "size");
    if (!(ls >> s.width >> s.depth) || s.width < 1 || s.depth < 1)
      throw ParseError("scene: line " + std::to_string(lineno) + ": bad size");
  }
  {
    auto ls = next("seed");
    expect_key(ls, "seed");
    if (!(ls >> s.seed)) throw ParseError("scene: line " + std::to_string(lineno) + ": bad seed");
  }
  {
    auto ls = next("reachable");
    expect_key(ls, "reachable");
  }
  s.reachable.assign(static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.depth), 0);
  for (int iz = 0; iz < s.depth; ++iz) {
    next("bitmap row");
    if (static_cast<int>(line.size()) != s.width)
      throw ParseError("scene: line " + std::to_string(lineno) + ": bitmap row must have " +
                       std::to_string(s.width) + " characters");
    for (int ix = 0; ix < s.width; ++ix) {
      if (line[ix] != '0' && line[ix] != '1')
        throw ParseError("scene: line " + std::to_string(lineno) + ": bitmap must be 0/1");
      s.reachable[static_cast<std::size_t>(iz * s.width + ix)] = line[ix] == '1';
    }
  }
  std::size_t n = 0;
  {
    auto ls = next("objects");
    expect_key(ls, "objects");
    if (!(ls >> n)) throw ParseError("scene: line " + std::to_string(lineno) + ": bad object count");
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto ls = next("object record");
    ObjectInstance o;
    double x = 0, z = 0;
    std::string band;
    if (!(ls >> o.category >> x >> z >> band))
      throw ParseError("scene: line " + std::to_string(lineno) + ": expected 'category x z band'");
    o.ix = detail::meters_to_cell(x, lineno);
    o.iz = detail::meters_to_cell(z, lineno);
    o.band = parse_band(band);
    s.objects.push_back(std::move(o));
  }
  return s;
}

inline Scene scene_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_scene(in);
}

inline void save_scene(const std::string& path, const Scene& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scene '" + path + "'");
  write_scene(out, s);
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scene '" + path + "'");
  return read_scene(in);
}

/// All `*.scene` files in a directory, in lexicographic path order.
inline std::vector<Scene> load_scene_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("scene directory '" + dir + "' does not exist");
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".scene") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<Scene> out;
  for (const auto& p : paths) out.push_back(load_scene(p.string()));
  if (out.empty()) throw IoError("no .scene files in '" + dir + "'");
  return out;
}

}  // namespace zonegraph
