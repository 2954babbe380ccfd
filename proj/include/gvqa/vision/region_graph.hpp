#pragma once

// Superpixel regions as graph nodes, 4-connected pixel contact as edges.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvqa/vision/image.hpp"

namespace gvqa::vision {

enum class DistanceMetric { kEuclidean, kManhattan };

struct Region {
  int id = -1;
  std::vector<std::pair<int, int>> pixels;    // (x, y)
  double cx = 0.0, cy = 0.0;                  // arithmetic mean of pixels
  std::vector<double> feature;                // [mean/ch | variance | cx/w, cy/h], learned dims appended later
  std::vector<std::pair<int, int>> boundary;  // pixels with a foreign or out-of-image 4-neighbor

  void recompute_centroid() {
    double sx = 0.0, sy = 0.0;
    for (auto [x, y] : pixels) {
      sx += x;
      sy += y;
    }
    cx = sx / pixels.size();
    cy = sy / pixels.size();
  }
};

struct Edge {
  int a = -1, b = -1;   // region ids, a < b
  double dist = 0.0;    // euclidean centroid distance
};

struct RegionGraph {
  int width = 0, height = 0;
  std::vector<Region> regions;
  std::vector<Edge> edges;

  int index_of(int id) const {
    for (size_t i = 0; i < regions.size(); ++i)
      if (regions[i].id == id) return static_cast<int>(i);
    return -1;
  }
  const Region& region(int id) const {
    int i = index_of(id);
    if (i < 0) throw std::out_of_range("region id not in graph");
    return regions[static_cast<size_t>(i)];
  }
  int region_count() const { return static_cast<int>(regions.size()); }

  // label_map[y*width+x] = index into regions (not id).
  std::vector<int> label_map() const {
    std::vector<int> labels(static_cast<size_t>(width) * height, -1);
    for (size_t r = 0; r < regions.size(); ++r)
      for (auto [x, y] : regions[r].pixels) labels[static_cast<size_t>(y) * width + x] = static_cast<int>(r);
    return labels;
  }

  std::vector<std::vector<int>> adjacency_by_index() const {
    std::vector<std::vector<int>> adj(regions.size());
    std::map<int, int> idx;
    for (size_t i = 0; i < regions.size(); ++i) idx[regions[i].id] = static_cast<int>(i);
    for (const Edge& e : edges) {
      adj[static_cast<size_t>(idx.at(e.a))].push_back(idx.at(e.b));
      adj[static_cast<size_t>(idx.at(e.b))].push_back(idx.at(e.a));
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    return adj;
  }
};

inline double spatial_distance(const Region& a, const Region& b, DistanceMetric metric) {
  double dx = a.cx - b.cx, dy = a.cy - b.cy;
  if (metric == DistanceMetric::kManhattan) return std::abs(dx) + std::abs(dy);
  return std::hypot(dx, dy);
}

// Edges between regions with 4-connected pixel contact. Regions must
// partition an image (overlap throws).
inline std::vector<Edge> build_adjacency(const std::vector<Region>& regions, int width, int height) {
  std::vector<int> owner(static_cast<size_t>(width) * height, -1);
  for (size_t r = 0; r < regions.size(); ++r) {
    for (auto [x, y] : regions[r].pixels) {
      if (x < 0 || x >= width || y < 0 || y >= height)
        throw std::invalid_argument("build_adjacency: pixel outside image");
      int& slot = owner[static_cast<size_t>(y) * width + x];
      if (slot != -1) throw std::invalid_argument("build_adjacency: overlapping regions");
      slot = static_cast<int>(r);
    }
  }
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> edges;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int a = owner[static_cast<size_t>(y) * width + x];
      if (a < 0) continue;
      const int dx[2] = {1, 0};
      const int dy[2] = {0, 1};
      for (int d = 0; d < 2; ++d) {
        int nx = x + dx[d], ny = y + dy[d];
        if (nx >= width || ny >= height) continue;
        int b = owner[static_cast<size_t>(ny) * width + nx];
        if (b < 0 || b == a) continue;
        int ia = regions[static_cast<size_t>(a)].id, ib = regions[static_cast<size_t>(b)].id;
        auto key = std::minmax(ia, ib);
        if (seen.insert(key).second) {
          double dist = spatial_distance(regions[static_cast<size_t>(a)], regions[static_cast<size_t>(b)],
                                         DistanceMetric::kEuclidean);
          edges.push_back({key.first, key.second, dist});
        }
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    return l.a != r.a ? l.a < r.a : l.b < r.b;
  });
  return edges;
}

inline void compute_boundaries(std::vector<Region>& regions, int width, int height) {
  std::vector<int> owner(static_cast<size_t>(width) * height, -1);
  for (size_t r = 0; r < regions.size(); ++r)
    for (auto [x, y] : regions[r].pixels) owner[static_cast<size_t>(y) * width + x] = static_cast<int>(r);
  for (size_t r = 0; r < regions.size(); ++r) {
    regions[r].boundary.clear();
    for (auto [x, y] : regions[r].pixels) {
      const int dx[4] = {1, -1, 0, 0};
      const int dy[4] = {0, 0, 1, -1};
      bool edge_pixel = false;
      for (int d = 0; d < 4 && !edge_pixel; ++d) {
        int nx = x + dx[d], ny = y + dy[d];
        if (nx < 0 || nx >= width || ny < 0 || ny >= height ||
            owner[static_cast<size_t>(ny) * width + nx] != static_cast<int>(r))
          edge_pixel = true;
      }
      if (edge_pixel) regions[r].boundary.emplace_back(x, y);
    }
  }
}

// Handcrafted region features: [mean per channel | intensity variance |
// normalized centroid x, y].
inline void compute_features(std::vector<Region>& regions, const Image& img) {
  for (Region& r : regions) {
    std::vector<double> mean(static_cast<size_t>(img.channels), 0.0);
    double isum = 0.0, isq = 0.0;
    for (auto [x, y] : r.pixels) {
      for (int c = 0; c < img.channels; ++c) mean[static_cast<size_t>(c)] += img.at(x, y, c);
      double i = img.intensity(x, y);
      isum += i;
      isq += i * i;
    }
    double n = static_cast<double>(r.pixels.size());
    for (auto& m : mean) m /= n;
    double imean = isum / n;
    double var = std::max(0.0, isq / n - imean * imean);
    r.feature.clear();
    r.feature.insert(r.feature.end(), mean.begin(), mean.end());
    r.feature.push_back(var);
    r.feature.push_back(r.cx / img.width);
    r.feature.push_back(r.cy / img.height);
  }
}

// Line-oriented text dump: one `R id cx cy npix` per region then one
// `E id id dist` per edge.
inline void write_graph_text(const std::string& path, const RegionGraph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[160];
  for (const Region& r : g.regions) {
    std::snprintf(buf, sizeof buf, "R %d %.9g %.9g %zu\n", r.id, r.cx, r.cy, r.pixels.size());
    out << buf;
  }
  for (const Edge& e : g.edges) {
    std::snprintf(buf, sizeof buf, "E %d %d %.9g\n", e.a, e.b, e.dist);
    out << buf;
  }
}

// Region label map as PGM, label index = gray level.
inline void write_label_pgm(const std::string& path, const RegionGraph& g) {
  if (g.region_count() > 256) throw std::invalid_argument("label pgm: more than 256 regions");
  Image img(g.width, g.height, 1);
  auto labels = g.label_map();
  for (size_t i = 0; i < labels.size(); ++i) img.data[i] = labels[i] < 0 ? 0.0 : labels[i] / 255.0;
  write_pnm(path, img);
}

}  // namespace gvqa::vision
