#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gvqa/vision/region_graph.hpp"

namespace gvqa::gestalt {

struct ProximityParams {
  double tau = 8.0;  // decay length, pixels
  vision::DistanceMetric metric = vision::DistanceMetric::kEuclidean;
  int hops = 1 << 20;  // max graph-propagation depth

  void validate() const {
    if (tau <= 0.0) throw std::invalid_argument("ProximityParams: tau must be > 0");
    if (hops < 1) throw std::invalid_argument("ProximityParams: hops must be >= 1");
  }
};

// Hop count from the query region over the adjacency graph; -1 = unreachable.
inline std::vector<int> hop_distances(const vision::RegionGraph& g, int query_index) {
  auto adj = g.adjacency_by_index();
  std::vector<int> hops(g.regions.size(), -1);
  std::deque<int> queue{query_index};
  hops[static_cast<size_t>(query_index)] = 0;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int n : adj[static_cast<size_t>(cur)]) {
      if (hops[static_cast<size_t>(n)] == -1) {
        hops[static_cast<size_t>(n)] = hops[static_cast<size_t>(cur)] + 1;
        queue.push_back(n);
      }
    }
  }
  return hops;
}

// weight_i proportional to exp(-d(query,i)/tau) for regions reachable within
// `hops` graph hops, 0 beyond; normalized to sum 1.
inline std::vector<double> proximity_weights(const vision::RegionGraph& g, int query_id,
                                             const ProximityParams& params) {
  params.validate();
  int qi = g.index_of(query_id);
  if (qi < 0) throw std::out_of_range("proximity_weights: unknown region id");
  auto hops = hop_distances(g, qi);
  const vision::Region& q = g.regions[static_cast<size_t>(qi)];
  std::vector<double> w(g.regions.size(), 0.0);
  double total = 0.0;
  for (size_t i = 0; i < g.regions.size(); ++i) {
    if (hops[i] < 0 || hops[i] > params.hops) continue;
    double d = vision::spatial_distance(q, g.regions[i], params.metric);
    w[i] = std::exp(-d / params.tau);
    total += w[i];
  }
  for (auto& v : w) v /= total;  // query itself always contributes, total > 0
  return w;
}

}  // namespace gvqa::gestalt
