#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "gvqa/nn/rng.hpp"
#include "gvqa/vision/region_graph.hpp"

namespace gvqa::gestalt {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double num = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return num / (std::sqrt(na) * std::sqrt(nb));
}

// weight_i proportional to max(0, cosine(query_feature, feature_i)),
// normalized. All-zero similarity falls back to uniform over the allowed
// set. `cluster_filter`, when non-empty, zeroes regions outside the query's
// cluster (the clustering bias hook).
inline std::vector<double> similarity_weights(const vision::RegionGraph& g,
                                              const std::vector<double>& query_feature,
                                              const std::vector<int>* cluster_filter = nullptr,
                                              int query_cluster = -1) {
  double qnorm = 0.0;
  for (double v : query_feature) qnorm += v * v;
  if (query_feature.empty() || qnorm == 0.0)
    throw std::invalid_argument("similarity_weights: zero query vector");
  std::vector<double> w(g.regions.size(), 0.0);
  std::vector<char> allowed(g.regions.size(), 1);
  if (cluster_filter) {
    if (cluster_filter->size() != g.regions.size())
      throw std::invalid_argument("similarity_weights: cluster filter size mismatch");
    for (size_t i = 0; i < allowed.size(); ++i)
      allowed[i] = (*cluster_filter)[i] == query_cluster ? 1 : 0;
  }
  double total = 0.0;
  int nallowed = 0;
  for (size_t i = 0; i < g.regions.size(); ++i) {
    if (!allowed[i]) continue;
    ++nallowed;
    w[i] = std::max(0.0, cosine(query_feature, g.regions[i].feature));
    total += w[i];
  }
  if (nallowed == 0) throw std::invalid_argument("similarity_weights: empty cluster restriction");
  if (total == 0.0) {
    for (size_t i = 0; i < w.size(); ++i) w[i] = allowed[i] ? 1.0 / nallowed : 0.0;
  } else {
    for (auto& v : w) v /= total;
  }
  return w;
}

// Seeded k-means over region features (k-means++ seeding, Lloyd updates).
inline std::vector<int> cluster_regions(const vision::RegionGraph& g, int k, uint64_t seed) {
  int n = g.region_count();
  if (k < 1 || k > n) throw std::invalid_argument("cluster_regions: k out of range");
  size_t dim = g.regions[0].feature.size();
  auto sqdist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers;
  std::uniform_int_distribution<int> first(0, n - 1);
  centers.push_back(g.regions[static_cast<size_t>(first(rng))].feature);
  std::vector<double> d2(static_cast<size_t>(n));
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& c : centers) best = std::min(best, sqdist(g.regions[static_cast<size_t>(i)].feature, c));
      d2[static_cast<size_t>(i)] = best;
      total += best;
    }
    if (total == 0.0) {
      // All remaining points coincide with centers; pick round-robin.
      centers.push_back(g.regions[centers.size() % n].feature);
      continue;
    }
    std::uniform_real_distribution<double> pick(0.0, total);
    double r = pick(rng), acc = 0.0;
    int chosen = n - 1;
    for (int i = 0; i < n; ++i) {
      acc += d2[static_cast<size_t>(i)];
      if (acc >= r) {
        chosen = i;
        break;
      }
    }
    centers.push_back(g.regions[static_cast<size_t>(chosen)].feature);
  }

  std::vector<int> assign(static_cast<size_t>(n), 0);
  for (int it = 0; it < 25; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        double d = sqdist(g.regions[static_cast<size_t>(i)].feature, centers[static_cast<size_t>(c)]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[static_cast<size_t>(i)] != best) {
        assign[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }
    std::vector<std::vector<double>> sums(static_cast<size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      ++counts[static_cast<size_t>(assign[static_cast<size_t>(i)])];
      for (size_t d = 0; d < dim; ++d) sums[static_cast<size_t>(assign[static_cast<size_t>(i)])][d] += g.regions[static_cast<size_t>(i)].feature[d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      for (size_t d = 0; d < dim; ++d) centers[static_cast<size_t>(c)][d] = sums[static_cast<size_t>(c)][d] / counts[static_cast<size_t>(c)];
    }
    if (!changed) break;
  }
  return assign;
}

}  // namespace gvqa::gestalt
