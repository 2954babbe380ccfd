#pragma once

// The tower: four Gestalt layer maps over a region graph, combined by a
// softmax-gated convex mix into the prior that stands in for an attention
// distribution.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gvqa/gestalt/closure.hpp"
#include "gvqa/gestalt/continuity.hpp"
#include "gvqa/gestalt/proximity.hpp"
#include "gvqa/gestalt/similarity.hpp"
#include "gvqa/vision/edges.hpp"
#include "gvqa/vision/image.hpp"

namespace gvqa::gestalt {

inline constexpr int kLayerCount = 4;
enum LayerIndex { kProximity = 0, kSimilarity = 1, kClosure = 2, kContinuity = 3 };

struct GestaltPrior {
  std::vector<double> weights;        // per region, sums to 1
  std::vector<double> layer_contrib;  // row-major {regions, 4}, each column normalized
  std::array<double, kLayerCount> gate{};  // convex coefficients
};

struct TowerConfig {
  ProximityParams proximity;
  double bridge_gap_max = 5.0;
  double decay = 0.8;
  double edge_threshold = 0.5;
  double entity_variance_threshold = 1e-3;
};

inline std::array<double, kLayerCount> gate_softmax(const std::array<double, kLayerCount>& logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::array<double, kLayerCount> out{};
  double z = 0.0;
  for (int i = 0; i < kLayerCount; ++i) {
    out[static_cast<size_t>(i)] = std::exp(logits[static_cast<size_t>(i)] - mx);
    z += out[static_cast<size_t>(i)];
  }
  for (auto& v : out) v /= z;
  return out;
}

// The four per-region layer maps, each a probability vector over regions.
// Column order: proximity, similarity, closure, continuity.
inline std::vector<double> compute_layer_maps(const vision::RegionGraph& g,
                                              const vision::Image& img, int query_id,
                                              const std::vector<double>& query_feature,
                                              const std::vector<double>& text_guidance,
                                              const TowerConfig& cfg,
                                              const std::vector<uint8_t>* entity_override = nullptr,
                                              const std::vector<uint8_t>* closure_fill_override = nullptr) {
  int n = g.region_count();
  std::vector<double> maps(static_cast<size_t>(n) * kLayerCount, 0.0);

  auto prox = proximity_weights(g, query_id, cfg.proximity);
  auto sim = similarity_weights(g, query_feature);

  std::vector<uint8_t> fill;
  if (closure_fill_override) {
    fill = *closure_fill_override;
  } else {
    auto edges = vision::edge_map(img, cfg.edge_threshold);
    fill = fill_closed(complete_contour(edges, img.width, img.height, cfg.bridge_gap_max),
                       img.width, img.height);
  }
  auto clo = closure_region_map(g, fill);

  std::vector<uint8_t> entity =
      entity_override ? *entity_override : entity_split(g, img.channels, cfg.entity_variance_threshold);
  auto cont = trace_continuity_path(g, query_id, text_guidance, cfg.decay, entity);

  for (int i = 0; i < n; ++i) {
    maps[static_cast<size_t>(i) * kLayerCount + kProximity] = prox[static_cast<size_t>(i)];
    maps[static_cast<size_t>(i) * kLayerCount + kSimilarity] = sim[static_cast<size_t>(i)];
    maps[static_cast<size_t>(i) * kLayerCount + kClosure] = clo[static_cast<size_t>(i)];
    maps[static_cast<size_t>(i) * kLayerCount + kContinuity] = cont[static_cast<size_t>(i)];
  }
  return maps;
}

inline GestaltPrior combine_layers(const std::vector<double>& layer_maps,
                                   const std::array<double, kLayerCount>& gate_logits) {
  int n = static_cast<int>(layer_maps.size()) / kLayerCount;
  GestaltPrior prior;
  prior.layer_contrib = layer_maps;
  prior.gate = gate_softmax(gate_logits);
  prior.weights.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int l = 0; l < kLayerCount; ++l)
      v += prior.gate[static_cast<size_t>(l)] * layer_maps[static_cast<size_t>(i) * kLayerCount + l];
    prior.weights[static_cast<size_t>(i)] = v;
  }
  return prior;
}

inline GestaltPrior gestalt_forward(const vision::RegionGraph& g, const vision::Image& img,
                                    int query_id, const std::vector<double>& query_feature,
                                    const std::vector<double>& text_guidance,
                                    const std::array<double, kLayerCount>& gate_logits,
                                    const TowerConfig& cfg,
                                    const std::vector<uint8_t>* entity_override = nullptr,
                                    const std::vector<uint8_t>* closure_fill_override = nullptr) {
  auto maps = compute_layer_maps(g, img, query_id, query_feature, text_guidance, cfg,
                                 entity_override, closure_fill_override);
  return combine_layers(maps, gate_logits);
}

// Prior weights spread onto the pixel grid, scaled so the peak region maps
// to 1 (the convention the binarization threshold is defined against).
inline std::vector<double> rasterize_prior(const vision::RegionGraph& g,
                                           const std::vector<double>& weights) {
  if (weights.size() != g.regions.size())
    throw std::invalid_argument("rasterize_prior: weight count mismatch");
  double mx = 0.0;
  for (double v : weights) mx = std::max(mx, v);
  std::vector<double> map(static_cast<size_t>(g.width) * g.height, 0.0);
  if (mx <= 0.0) return map;
  for (size_t r = 0; r < g.regions.size(); ++r)
    for (auto [x, y] : g.regions[r].pixels)
      map[static_cast<size_t>(y) * g.width + x] = weights[r] / mx;
  return map;
}

}  // namespace gvqa::gestalt
