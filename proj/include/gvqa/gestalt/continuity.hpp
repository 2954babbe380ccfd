#pragma once

// Continuity layer: a greedy path walk over entity regions, guided by
// per-region text scores. Background regions are skipped but may bridge two
// entities that are not directly adjacent.

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "gvqa/vision/region_graph.hpp"

namespace gvqa::gestalt {

// Entity / background split by feature variance (feature[channels] holds the
// intensity variance). The harness overrides this with ground truth.
inline std::vector<uint8_t> entity_split(const vision::RegionGraph& g, int channels,
                                         double variance_threshold) {
  std::vector<uint8_t> entity(g.regions.size(), 0);
  for (size_t i = 0; i < g.regions.size(); ++i)
    entity[i] = g.regions[i].feature[static_cast<size_t>(channels)] > variance_threshold ? 1 : 0;
  return entity;
}

namespace detail {

// Neighbors reachable either directly or through one background region.
inline std::vector<int> entity_neighbors(const std::vector<std::vector<int>>& adj,
                                         const std::vector<uint8_t>& entity, int from) {
  std::vector<int> out;
  for (int n : adj[static_cast<size_t>(from)]) {
    if (entity[static_cast<size_t>(n)]) {
      out.push_back(n);
    } else {
      for (int n2 : adj[static_cast<size_t>(n)])
        if (n2 != from && entity[static_cast<size_t>(n2)]) out.push_back(n2);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Connected entity component of `start` in the entity subgraph with
// one-background bridging; index-based.
inline std::vector<int> entity_component(const vision::RegionGraph& g,
                                         const std::vector<uint8_t>& entity, int start_index) {
  auto adj = g.adjacency_by_index();
  std::vector<uint8_t> seen(g.regions.size(), 0);
  std::deque<int> queue{start_index};
  seen[static_cast<size_t>(start_index)] = 1;
  std::vector<int> comp;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    comp.push_back(cur);
    for (int n : detail::entity_neighbors(adj, entity, cur)) {
      if (!seen[static_cast<size_t>(n)]) {
        seen[static_cast<size_t>(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  std::sort(comp.begin(), comp.end());
  return comp;
}

// Greedy walk from `start`: step to the unvisited entity neighbor with the
// highest direction score; step t carries weight decay^t; off-path regions
// get 0; output normalized to sum 1. Equal-or-absent scores fall back to a
// uniform weighting of start's connected entity component.
inline std::vector<double> trace_continuity_path(const vision::RegionGraph& g, int start_id,
                                                 const std::vector<double>& direction_scores,
                                                 double decay,
                                                 const std::vector<uint8_t>& entity) {
  if (decay <= 0.0 || decay >= 1.0)
    throw std::invalid_argument("trace_continuity_path: decay must be in (0,1)");
  int si = g.index_of(start_id);
  if (si < 0) throw std::out_of_range("trace_continuity_path: unknown start region");
  if (entity.size() != g.regions.size())
    throw std::invalid_argument("trace_continuity_path: entity flags size mismatch");
  if (!direction_scores.empty() && direction_scores.size() != g.regions.size())
    throw std::invalid_argument("trace_continuity_path: direction scores size mismatch");

  std::vector<double> w(g.regions.size(), 0.0);

  bool all_equal = direction_scores.empty();
  if (!all_equal) {
    all_equal = true;
    for (size_t i = 1; i < direction_scores.size(); ++i)
      if (direction_scores[i] != direction_scores[0]) {
        all_equal = false;
        break;
      }
  }
  if (all_equal) {
    auto comp = entity_component(g, entity, si);
    for (int i : comp) w[static_cast<size_t>(i)] = 1.0 / comp.size();
    return w;
  }

  auto adj = g.adjacency_by_index();
  std::vector<uint8_t> visited(g.regions.size(), 0);
  int cur = si;
  visited[static_cast<size_t>(cur)] = 1;
  double weight = 1.0, total = 1.0;
  w[static_cast<size_t>(cur)] = weight;
  while (true) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::max();
    for (int n : detail::entity_neighbors(adj, entity, cur)) {
      if (visited[static_cast<size_t>(n)]) continue;
      double s = direction_scores[static_cast<size_t>(n)];
      if (s > best_score) {  // ties resolve to the lowest index (sorted neighbors)
        best_score = s;
        best = n;
      }
    }
    if (best < 0) break;
    cur = best;
    visited[static_cast<size_t>(cur)] = 1;
    weight *= decay;
    w[static_cast<size_t>(cur)] = weight;
    total += weight;
  }
  for (auto& v : w) v /= total;
  return w;
}

}  // namespace gvqa::gestalt
