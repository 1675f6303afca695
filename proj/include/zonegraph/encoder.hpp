#pragma once
// Shared object/image embedding space. Object categories map to unit vectors;
// the image feature splats those same vectors onto a G x G grid, so the two
// modalities are directly comparable.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "zonegraph/categories.hpp"
#include "zonegraph/common.hpp"
#include "zonegraph/scene.hpp"

namespace zonegraph {

inline constexpr int kDefaultEmbeddingDim = 64;
inline constexpr int kDefaultGrid = 7;

struct Embedding {
  Vec values;
  bool operator==(const Embedding&) const = default;
};

/// G x G x D tensor, row-major over (row, col, channel).
struct SpatialFeature {
  int grid = kDefaultGrid;
  int dim = 0;
  Vec data;

  std::span<const double> cell(int row, int col) const {
    return {data.data() + (static_cast<std::size_t>(row) * grid + col) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> cell(int row, int col) {
    return {data.data() + (static_cast<std::size_t>(row) * grid + col) * dim, static_cast<std::size_t>(dim)};
  }
};

class EmbeddingProvider {
 public:
  enum class Mode { Synthetic, File };

  /// Seeded pseudo-random unit vectors keyed by (seed, category name).
  static EmbeddingProvider synthetic(std::uint64_t seed, int dim = kDefaultEmbeddingDim) {
    if (dim < 1) throw ConfigError("embedding dimension must be positive");
    EmbeddingProvider p(Mode::Synthetic, dim);
    p.seed_ = seed;
    for (const auto& c : known_categories(builtin_room_tables())) p.table_[c] = p.derive(c);
    return p;
  }

  static EmbeddingProvider from_table(int dim, std::map<std::string, Embedding> table) {
    EmbeddingProvider p(Mode::File, dim);
    for (auto& [k, v] : table)
      if (static_cast<int>(v.values.size()) != dim)
        throw DimensionError("embedding for '" + k + "' has " + std::to_string(v.values.size()) +
                             " values, expected " + std::to_string(dim));
    p.table_ = std::move(table);
    return p;
  }

  Mode mode() const { return mode_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<std::string, Embedding>& table() const { return table_; }

  Embedding object_embedding(std::string_view category) const {
    auto it = table_.find(std::string(category));
    if (it != table_.end()) return it->second;
    if (mode_ == Mode::Synthetic) return derive(category);
    throw LookupError("no embedding for category '" + std::string(category) + "'");
  }

  /// Human-readable description echoed into artifact headers.
  std::string describe() const {
    if (mode_ == Mode::Synthetic) return "synthetic:" + std::to_string(seed_) + ":" + std::to_string(dim_);
    return "file:" + std::to_string(dim_);
  }

 private:
  EmbeddingProvider(Mode m, int dim) : mode_(m), dim_(dim) {}

  Embedding derive(std::string_view category) const {
    Rng rng(hash_combine(seed_, hash_string(category)));
    Embedding e{Vec(static_cast<std::size_t>(dim_))};
    double n = 0.0;
    do {
      for (auto& v : e.values) v = rng.normal();
      n = norm2(e.values);
    } while (n == 0.0);
    for (auto& v : e.values) v /= n;
    return e;
  }

  Mode mode_;
  int dim_;
  std::uint64_t seed_ = 0;
  std::map<std::string, Embedding> table_;
};

// ---------------------------------------------------------------------------
// embeddings-v1 file format

inline void write_embeddings(std::ostream& os, const EmbeddingProvider& p) {
  os << "embeddings-v1 D=" << p.dim() << "\n";
  char buf[32];
  for (const auto& [name, e] : p.table()) {
    os << name;
    for (double v : e.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ' ' << buf;
    }
    os << "\n";
  }
}

inline void save_embeddings(const std::string& path, const EmbeddingProvider& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings '" + path + "'");
  write_embeddings(out, p);
}

inline EmbeddingProvider read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("embeddings: line 1: empty file");
  int dim = 0;
  {
    std::istringstream ls(line);
    std::string magic, dtok;
    ls >> magic >> dtok;
    if (magic != "embeddings-v1")
      throw ParseError("embeddings: line 1: expected version header 'embeddings-v1'");
    if (dtok.rfind("D=", 0) != 0) throw ParseError("embeddings: line 1: missing D=<int>");
    try {
      dim = std::stoi(dtok.substr(2));
    } catch (const std::exception&) {
      throw ParseError("embeddings: line 1: bad dimension '" + dtok + "'");
    }
    if (dim < 1) throw ParseError("embeddings: line 1: dimension must be positive");
  }
  std::map<std::string, Embedding> table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    Embedding e;
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
        throw ParseError("embeddings: line " + std::to_string(lineno) + ": unparsable float '" + tok + "'");
      e.values.push_back(v);
    }
    if (static_cast<int>(e.values.size()) != dim)
      throw DimensionError("embeddings: line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                           " values, got " + std::to_string(e.values.size()));
    const double n = norm2(e.values);
    if (n == 0.0) throw ParseError("embeddings: line " + std::to_string(lineno) + ": zero vector");
    // Leave already-unit rows untouched so saved tables reload bit-exactly.
    if (std::abs(n - 1.0) > 1e-12)
      for (auto& v : e.values) v /= n;
    if (!table.emplace(name, std::move(e)).second)
      throw ParseError("embeddings: line " + std::to_string(lineno) + ": duplicate category '" + name + "'");
  }
  return EmbeddingProvider::from_table(dim, std::move(table));
}

inline EmbeddingProvider load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings '" + path + "'");
  return read_embeddings(in);
}

// ---------------------------------------------------------------------------
// Image feature

/// Column from bearing over [-45, 45], row from distance over [0, 1.5].
inline std::pair<int, int> splat_cell(double bearing, double distance, int grid) {
  auto bin = [grid](double t) {
    const int b = static_cast<int>(std::floor(t * grid));
    return std::clamp(b, 0, grid - 1);
  };
  return {bin(distance / kVisibilityRange), bin((bearing + kHalfFov) / (2.0 * kHalfFov))};
}

inline SpatialFeature image_feature(const EmbeddingProvider& provider, const Observation& obs,
                                    int grid = kDefaultGrid) {
  const int d = provider.dim();
  SpatialFeature f{grid, d, Vec(static_cast<std::size_t>(grid) * grid * d, 0.0)};
  // Fixed accumulation order makes the result independent of list order.
  std::vector<const Sighting*> sorted;
  for (const auto& s : obs.visible) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const Sighting* a, const Sighting* b) {
    return std::tie(a->category, a->distance, a->bearing) < std::tie(b->category, b->distance, b->bearing);
  });
  std::vector<int> counts(static_cast<std::size_t>(grid) * grid, 0);
  for (const Sighting* s : sorted) {
    const auto [row, col] = splat_cell(s->bearing, s->distance, grid);
    const auto e = provider.object_embedding(s->category);
    auto cell = f.cell(row, col);
    for (int k = 0; k < d; ++k) cell[k] += e.values[k];
    ++counts[static_cast<std::size_t>(row) * grid + col];
  }
  for (int row = 0; row < grid; ++row)
    for (int col = 0; col < grid; ++col) {
      const int c = counts[static_cast<std::size_t>(row) * grid + col];
      if (c <= 1) continue;
      // shared cell: mean, then back to unit norm
      auto cell = f.cell(row, col);
      for (auto& v : cell) v /= c;
      const double n = norm2(cell);
      if (n > 0.0)
        for (auto& v : cell) v /= n;
    }
  return f;
}

}  // namespace zonegraph
