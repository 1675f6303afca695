#pragma once
// Lloyd's k-means with k-means++ seeding. Deterministic for a seed; ties in
// the nearest-center search go to the lowest center index; clusters that end
// up empty are dropped, so the returned k may be smaller than requested.
// `kmeans` keeps the lowest-objective run out of several seeded restarts.

#include <limits>
#include <vector>

#include "zonegraph/common.hpp"

namespace zonegraph {

struct KMeansResult {
  std::vector<int> labels;   // one per point, in [0, centers.size())
  std::vector<Vec> centers;  // mean of each cluster's members
  int iterations = 0;
  bool converged = false;
};

inline int nearest_center(const Vec& p, const std::vector<Vec>& centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

inline std::vector<Vec> kmeanspp_seeds(const std::vector<Vec>& points, int k, Rng& rng) {
  std::vector<Vec> centers;
  centers.push_back(points[rng.index(points.size())]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, squared_distance(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      // Every point coincides with a center; the duplicate seed empties out later.
      pick = rng.index(points.size());
    } else {
      double r = rng.uniform() * total;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] <= 0.0 && pick > 0) --pick;
    }
    centers.push_back(points[pick]);
  }
  return centers;
}

inline KMeansResult kmeans_single(const std::vector<Vec>& points, int k, std::uint64_t seed, int max_iter = 100,
                                  double tol = 1e-6) {
  if (points.empty()) throw UsageError("kmeans: no points");
  if (k < 1) throw UsageError("kmeans: k must be at least 1");
  const std::size_t dim = points.front().size();
  Rng rng(seed);
  KMeansResult r;
  r.centers = kmeanspp_seeds(points, k, rng);
  r.labels.assign(points.size(), 0);

  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it + 1;
    for (std::size_t i = 0; i < points.size(); ++i) r.labels[i] = nearest_center(points[i], r.centers);

    std::vector<Vec> sums(r.centers.size(), Vec(dim, 0.0));
    std::vector<int> counts(r.centers.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[static_cast<std::size_t>(r.labels[i])];
      for (std::size_t j = 0; j < dim; ++j) s[j] += points[i][j];
      ++counts[static_cast<std::size_t>(r.labels[i])];
    }
    // Drop empty clusters and relabel densely, preserving order.
    std::vector<int> remap(r.centers.size(), -1);
    std::vector<Vec> next;
    std::vector<Vec> prev;
    for (std::size_t c = 0; c < r.centers.size(); ++c) {
      if (counts[c] == 0) continue;
      remap[c] = static_cast<int>(next.size());
      for (auto& v : sums[c]) v /= counts[c];
      next.push_back(std::move(sums[c]));
      prev.push_back(r.centers[c]);
    }
    for (auto& l : r.labels) l = remap[static_cast<std::size_t>(l)];

    double shift = 0.0;
    for (std::size_t c = 0; c < next.size(); ++c) shift = std::max(shift, std::sqrt(squared_distance(next[c], prev[c])));
    const bool dropped = next.size() != r.centers.size();
    r.centers = std::move(next);
    if (!dropped && shift <= tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

/// Sum of squared distances from each point to its assigned center.
inline double kmeans_objective(const std::vector<Vec>& points, const std::vector<int>& labels,
                               const std::vector<Vec>& centers) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    s += squared_distance(points[i], centers[static_cast<std::size_t>(labels[i])]);
  return s;
}

inline constexpr int kDefaultRestarts = 10;

/// Run 0 uses `seed` itself, run r > 0 uses hash_combine(seed, r); the first
/// run reaching the lowest objective wins.
inline KMeansResult kmeans(const std::vector<Vec>& points, int k, std::uint64_t seed, int max_iter = 100,
                           double tol = 1e-6, int restarts = kDefaultRestarts) {
  KMeansResult best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    auto run = kmeans_single(points, k, r == 0 ? seed : hash_combine(seed, static_cast<std::uint64_t>(r)), max_iter, tol);
    const double obj = kmeans_objective(points, run.labels, run.centers);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(run);
    }
  }
  return best;
}

}  // namespace zonegraph
