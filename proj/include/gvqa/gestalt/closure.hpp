#pragma once

// Contour completion: trace pixel chains in a binary edge map, close small
// gaps with a straight virtual bridge, and fill the enclosed area. The fill
// defines the inferred object region used by the closure layer and loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "gvqa/nn/tensor.hpp"
#include "gvqa/vision/region_graph.hpp"

namespace gvqa::gestalt {

struct Contour {
  std::vector<std::pair<int, int>> points;  // ordered chain
  bool closed = false;
  bool bridged = false;

  std::pair<std::pair<int, int>, std::pair<int, int>> gap_endpoints() const {
    if (closed || points.empty()) throw std::logic_error("gap_endpoints: contour is closed");
    return {points.front(), points.back()};
  }
};

struct ContourSet {
  std::vector<Contour> contours;
};

namespace detail {

inline std::vector<std::pair<int, int>> bresenham(std::pair<int, int> a, std::pair<int, int> b) {
  std::vector<std::pair<int, int>> pts;
  int x0 = a.first, y0 = a.second, x1 = b.first, y1 = b.second;
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    pts.emplace_back(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return pts;
}

}  // namespace detail

// Orders edge pixels into chains. Chains starting at a degree-1 pixel are
// open; chains that return next to their start are closed loops. Branching
// structures decompose into several chains deterministically.
inline ContourSet trace_contours(const std::vector<uint8_t>& edges, int width, int height) {
  if (static_cast<int>(edges.size()) != width * height)
    throw std::invalid_argument("trace_contours: edge map size mismatch");
  auto is_edge = [&](int x, int y) {
    return x >= 0 && x < width && y >= 0 && y < height && edges[static_cast<size_t>(y) * width + x] != 0;
  };
  const int nx8[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const int ny8[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  auto degree = [&](int x, int y) {
    int d = 0;
    for (int k = 0; k < 8; ++k)
      if (is_edge(x + nx8[k], y + ny8[k])) ++d;
    return d;
  };

  std::vector<uint8_t> visited(edges.size(), 0);
  ContourSet set;

  auto walk = [&](int sx, int sy) {
    Contour c;
    int x = sx, y = sy;
    visited[static_cast<size_t>(y) * width + x] = 1;
    c.points.emplace_back(x, y);
    while (true) {
      int found = -1;
      for (int k = 0; k < 8; ++k) {
        int nx = x + nx8[k], ny = y + ny8[k];
        if (is_edge(nx, ny) && !visited[static_cast<size_t>(ny) * width + nx]) {
          found = k;
          break;
        }
      }
      if (found < 0) break;
      x += nx8[found];
      y += ny8[found];
      visited[static_cast<size_t>(y) * width + x] = 1;
      c.points.emplace_back(x, y);
    }
    if (c.points.size() >= 3) {
      auto [fx, fy] = c.points.front();
      auto [lx, ly] = c.points.back();
      c.closed = std::max(std::abs(fx - lx), std::abs(fy - ly)) <= 1;
    }
    return c;
  };

  // Open chains first (start from degree-1 endpoints), then remaining loops.
  for (int pass = 0; pass < 2; ++pass) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (!is_edge(x, y) || visited[static_cast<size_t>(y) * width + x]) continue;
        if (pass == 0 && degree(x, y) != 1) continue;
        set.contours.push_back(walk(x, y));
      }
    }
  }
  return set;
}

// Traces chains and closes any open contour whose endpoints are at most
// bridge_gap_max pixels apart with a straight-line virtual bridge.
inline ContourSet complete_contour(const std::vector<uint8_t>& edges, int width, int height,
                                   double bridge_gap_max) {
  ContourSet set = trace_contours(edges, width, height);
  for (Contour& c : set.contours) {
    if (c.closed || c.points.size() < 3) continue;
    auto [a, b] = c.gap_endpoints();
    double gap = std::hypot(a.first - b.first, a.second - b.second);
    if (gap > bridge_gap_max) continue;
    auto line = detail::bresenham(b, a);
    for (size_t i = 1; i + 1 < line.size(); ++i) c.points.push_back(line[i]);
    c.closed = true;
    c.bridged = true;
  }
  return set;
}

// Interior fill of closed contours; the inferred object region is the union
// of each closed chain with its enclosed pixels.
inline std::vector<uint8_t> fill_closed(const ContourSet& set, int width, int height) {
  std::vector<uint8_t> mask(static_cast<size_t>(width) * height, 0);
  for (const Contour& c : set.contours) {
    if (!c.closed || c.points.empty()) continue;
    int x0 = width, x1 = -1, y0 = height, y1 = -1;
    for (auto [x, y] : c.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    int bw = x1 - x0 + 3, bh = y1 - y0 + 3;  // one-cell margin all around
    std::vector<uint8_t> local(static_cast<size_t>(bw) * bh, 0);
    for (auto [x, y] : c.points) local[static_cast<size_t>(y - y0 + 1) * bw + (x - x0 + 1)] = 1;
    // Flood the exterior from the margin.
    std::vector<uint8_t> outside(local.size(), 0);
    std::deque<int> queue{0};
    outside[0] = 1;
    while (!queue.empty()) {
      int p = queue.front();
      queue.pop_front();
      int lx = p % bw, ly = p / bw;
      const int dx[4] = {1, -1, 0, 0};
      const int dy[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        int nx = lx + dx[d], ny = ly + dy[d];
        if (nx < 0 || nx >= bw || ny < 0 || ny >= bh) continue;
        int q = ny * bw + nx;
        if (!outside[static_cast<size_t>(q)] && !local[static_cast<size_t>(q)]) {
          outside[static_cast<size_t>(q)] = 1;
          queue.push_back(q);
        }
      }
    }
    for (int ly = 0; ly < bh; ++ly) {
      for (int lx = 0; lx < bw; ++lx) {
        if (outside[static_cast<size_t>(ly) * bw + lx]) continue;
        int x = lx + x0 - 1, y = ly + y0 - 1;
        if (x >= 0 && x < width && y >= 0 && y < height) mask[static_cast<size_t>(y) * width + x] = 1;
      }
    }
  }
  return mask;
}

// ---- IoU losses ----

inline double mask_iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mask_iou: size mismatch");
  double inter = 0.0, uni = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    bool va = a[i] != 0, vb = b[i] != 0;
    inter += va && vb ? 1.0 : 0.0;
    uni += va || vb ? 1.0 : 0.0;
  }
  if (uni == 0.0) return 1.0;  // both empty: treated as a perfect match
  return inter / uni;
}

// 1 - IoU with the empty-union convention: both masks empty -> 0, exactly
// one empty -> 1.
inline double closure_loss(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  return 1.0 - mask_iou(a, b);
}

inline std::vector<uint8_t> binarize_prior_map(const std::vector<double>& prior_map, double theta = 0.5) {
  double mx = 0.0;
  for (double v : prior_map) mx = std::max(mx, v);
  std::vector<uint8_t> out(prior_map.size(), 0);
  if (mx <= 0.0) return out;
  for (size_t i = 0; i < prior_map.size(); ++i) out[i] = prior_map[i] >= theta * mx ? 1 : 0;
  return out;
}

inline double closure_loss_prior(const std::vector<double>& prior_map,
                                 const std::vector<uint8_t>& object_mask, double theta = 0.5) {
  if (prior_map.size() != object_mask.size())
    throw std::invalid_argument("closure_loss_prior: size mismatch");
  return closure_loss(binarize_prior_map(prior_map, theta), object_mask);
}

// Differentiable surrogate on soft values: 1 - sum(min)/sum(max). Plain
// version for oracle checks.
inline double soft_iou_loss_value(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("soft_iou_loss: size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += std::min(a[i], b[i]);
    den += std::max(a[i], b[i]);
  }
  if (den == 0.0) return 0.0;
  return 1.0 - num / den;
}

// Tape version: gradient flows into `soft_map`.
inline nn::Tensor soft_iou_loss(nn::Tape& tape, nn::Tensor soft_map, const std::vector<double>& target) {
  if (static_cast<size_t>(soft_map.size()) != target.size())
    throw std::invalid_argument("soft_iou_loss: size mismatch");
  nn::Tensor tgt = tape.leaf(soft_map.shape(), target);
  nn::Tensor inter = nn::sum(nn::emin(soft_map, tgt));
  nn::Tensor uni = nn::sum(nn::emax(soft_map, tgt));
  return nn::affine(nn::divt(inter, uni), -1.0, 1.0);
}

// Per-region closure layer: the mass of the completed-contour fill inside
// each region, normalized to sum 1 (uniform when the fill is empty).
inline std::vector<double> closure_region_map(const vision::RegionGraph& g,
                                              const std::vector<uint8_t>& fill_mask) {
  if (static_cast<int>(fill_mask.size()) != g.width * g.height)
    throw std::invalid_argument("closure_region_map: mask size mismatch");
  std::vector<double> w(g.regions.size(), 0.0);
  double total = 0.0;
  for (size_t r = 0; r < g.regions.size(); ++r) {
    for (auto [x, y] : g.regions[r].pixels)
      if (fill_mask[static_cast<size_t>(y) * g.width + x]) w[r] += 1.0;
    total += w[r];
  }
  if (total == 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / w.size());
  } else {
    for (auto& v : w) v /= total;
  }
  return w;
}

}  // namespace gvqa::gestalt
