#pragma once

// SLIC-style superpixels: k-means over (x, y, intensity channels) with
// compactness weighting the spatial terms, seeds on a uniform grid,
// windowed assignment. Connected components smaller than kOrphanMinPixels
// merge into the adjacent region with the nearest feature so the partition
// invariant holds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gvqa/vision/image.hpp"
#include "gvqa/vision/region_graph.hpp"

namespace gvqa::vision {

inline constexpr int kOrphanMinPixels = 4;

namespace detail {

struct SlicCenter {
  double x = 0.0, y = 0.0;
  std::vector<double> color;
};

inline std::vector<SlicCenter> grid_seeds(const Image& img, int k) {
  int w = img.width, h = img.height;
  int nx = std::clamp(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k) * w / h))), 1, w);
  int ny = std::clamp(static_cast<int>(std::ceil(static_cast<double>(k) / nx)), 1, h);
  std::vector<SlicCenter> seeds;
  for (int gy = 0; gy < ny && static_cast<int>(seeds.size()) < k; ++gy) {
    for (int gx = 0; gx < nx && static_cast<int>(seeds.size()) < k; ++gx) {
      SlicCenter c;
      c.x = (gx + 0.5) * w / nx - 0.5;
      c.y = (gy + 0.5) * h / ny - 0.5;
      int px = std::clamp(static_cast<int>(std::lround(c.x)), 0, w - 1);
      int py = std::clamp(static_cast<int>(std::lround(c.y)), 0, h - 1);
      c.color.resize(static_cast<size_t>(img.channels));
      for (int ch = 0; ch < img.channels; ++ch) c.color[static_cast<size_t>(ch)] = img.at(px, py, ch);
      seeds.push_back(std::move(c));
    }
  }
  return seeds;
}

}  // namespace detail

inline RegionGraph segment_slic(const Image& img, int k, double compactness = 10.0, int iters = 10) {
  int w = img.width, h = img.height;
  if (w <= 0 || h <= 0 || img.data.empty()) throw std::invalid_argument("segment_slic: empty image");
  if (k < 1) throw std::invalid_argument("segment_slic: k must be >= 1");
  if (k > w * h) throw std::invalid_argument("segment_slic: k exceeds pixel count");
  if (compactness < 0.0) throw std::invalid_argument("segment_slic: compactness must be >= 0");

  auto centers = detail::grid_seeds(img, k);
  int nc = static_cast<int>(centers.size());
  double step = std::sqrt(static_cast<double>(w) * h / nc);
  double spatial_w = compactness / step;
  int window = std::max(1, static_cast<int>(std::ceil(2.0 * step)));

  std::vector<int> assign(static_cast<size_t>(w) * h, -1);
  std::vector<double> best(static_cast<size_t>(w) * h, std::numeric_limits<double>::max());

  for (int it = 0; it < iters; ++it) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::max());
    for (int ci = 0; ci < nc; ++ci) {
      const auto& c = centers[static_cast<size_t>(ci)];
      int x0 = std::max(0, static_cast<int>(std::floor(c.x)) - window);
      int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x)) + window);
      int y0 = std::max(0, static_cast<int>(std::floor(c.y)) - window);
      int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y)) + window);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          double dc = 0.0;
          for (int ch = 0; ch < img.channels; ++ch) {
            double d = img.at(x, y, ch) - c.color[static_cast<size_t>(ch)];
            dc += d * d;
          }
          double dx = x - c.x, dy = y - c.y;
          double d2 = dc + spatial_w * spatial_w * (dx * dx + dy * dy);
          size_t idx = static_cast<size_t>(y) * w + x;
          if (d2 < best[idx]) {
            best[idx] = d2;
            assign[idx] = ci;
          }
        }
      }
    }
    // Pixels outside every window fall back to the globally nearest center.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        size_t idx = static_cast<size_t>(y) * w + x;
        if (assign[idx] >= 0) continue;
        double bd = std::numeric_limits<double>::max();
        for (int ci = 0; ci < nc; ++ci) {
          const auto& c = centers[static_cast<size_t>(ci)];
          double dc = 0.0;
          for (int ch = 0; ch < img.channels; ++ch) {
            double d = img.at(x, y, ch) - c.color[static_cast<size_t>(ch)];
            dc += d * d;
          }
          double dx = x - c.x, dy = y - c.y;
          double d2 = dc + spatial_w * spatial_w * (dx * dx + dy * dy);
          if (d2 < bd) {
            bd = d2;
            assign[idx] = ci;
          }
        }
      }
    }
    // Update step: per-cluster means of position and color.
    std::vector<double> sx(static_cast<size_t>(nc), 0.0), sy(static_cast<size_t>(nc), 0.0), cnt(static_cast<size_t>(nc), 0.0);
    std::vector<std::vector<double>> scol(static_cast<size_t>(nc), std::vector<double>(static_cast<size_t>(img.channels), 0.0));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int ci = assign[static_cast<size_t>(y) * w + x];
        sx[static_cast<size_t>(ci)] += x;
        sy[static_cast<size_t>(ci)] += y;
        cnt[static_cast<size_t>(ci)] += 1.0;
        for (int ch = 0; ch < img.channels; ++ch) scol[static_cast<size_t>(ci)][static_cast<size_t>(ch)] += img.at(x, y, ch);
      }
    }
    for (int ci = 0; ci < nc; ++ci) {
      if (cnt[static_cast<size_t>(ci)] == 0.0) continue;  // empty cluster keeps its seed
      centers[static_cast<size_t>(ci)].x = sx[static_cast<size_t>(ci)] / cnt[static_cast<size_t>(ci)];
      centers[static_cast<size_t>(ci)].y = sy[static_cast<size_t>(ci)] / cnt[static_cast<size_t>(ci)];
      for (int ch = 0; ch < img.channels; ++ch)
        centers[static_cast<size_t>(ci)].color[static_cast<size_t>(ch)] = scol[static_cast<size_t>(ci)][static_cast<size_t>(ch)] / cnt[static_cast<size_t>(ci)];
    }
  }

  // Split cluster labels into 4-connected components.
  std::vector<int> comp(static_cast<size_t>(w) * h, -1);
  int ncomp = 0;
  std::vector<std::vector<int>> comp_pixels;  // flat indices
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (comp[static_cast<size_t>(start)] != -1) continue;
    int label = assign[static_cast<size_t>(start)];
    int cid = ncomp++;
    comp_pixels.emplace_back();
    stack.assign(1, start);
    comp[static_cast<size_t>(start)] = cid;
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      comp_pixels[static_cast<size_t>(cid)].push_back(p);
      int x = p % w, y = p / w;
      const int dx[4] = {1, -1, 0, 0};
      const int dy[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        int nx2 = x + dx[d], ny2 = y + dy[d];
        if (nx2 < 0 || nx2 >= w || ny2 < 0 || ny2 >= h) continue;
        int q = ny2 * w + nx2;
        if (comp[static_cast<size_t>(q)] == -1 && assign[static_cast<size_t>(q)] == label) {
          comp[static_cast<size_t>(q)] = cid;
          stack.push_back(q);
        }
      }
    }
  }

  // Merge orphan components into the adjacent component with the nearest
  // mean color.
  auto comp_mean_color = [&](int cid) {
    std::vector<double> mc(static_cast<size_t>(img.channels), 0.0);
    for (int p : comp_pixels[static_cast<size_t>(cid)])
      for (int ch = 0; ch < img.channels; ++ch) mc[static_cast<size_t>(ch)] += img.data[static_cast<size_t>(p) * img.channels + ch];
    for (auto& v : mc) v /= comp_pixels[static_cast<size_t>(cid)].size();
    return mc;
  };
  bool merged = true;
  while (merged) {
    merged = false;
    for (int cid = 0; cid < ncomp; ++cid) {
      auto& pix = comp_pixels[static_cast<size_t>(cid)];
      if (pix.empty() || static_cast<int>(pix.size()) >= kOrphanMinPixels) continue;
      // Collect adjacent components.
      std::vector<int> neigh;
      for (int p : pix) {
        int x = p % w, y = p / w;
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          int nx2 = x + dx[d], ny2 = y + dy[d];
          if (nx2 < 0 || nx2 >= w || ny2 < 0 || ny2 >= h) continue;
          int c2 = comp[static_cast<size_t>(ny2) * w + nx2];
          if (c2 != cid && !comp_pixels[static_cast<size_t>(c2)].empty()) neigh.push_back(c2);
        }
      }
      std::sort(neigh.begin(), neigh.end());
      neigh.erase(std::unique(neigh.begin(), neigh.end()), neigh.end());
      if (neigh.empty()) continue;  // single-component image smaller than the threshold
      auto mine = comp_mean_color(cid);
      int best_n = neigh[0];
      double best_d = std::numeric_limits<double>::max();
      for (int n : neigh) {
        auto theirs = comp_mean_color(n);
        double d = 0.0;
        for (size_t ch = 0; ch < mine.size(); ++ch) d += (mine[ch] - theirs[ch]) * (mine[ch] - theirs[ch]);
        if (d < best_d) {
          best_d = d;
          best_n = n;
        }
      }
      for (int p : pix) comp[static_cast<size_t>(p)] = best_n;
      auto& dst = comp_pixels[static_cast<size_t>(best_n)];
      dst.insert(dst.end(), pix.begin(), pix.end());
      pix.clear();
      merged = true;
    }
  }

  // Surviving components become regions, ids assigned in scan order of the
  // first pixel so output is deterministic.
  RegionGraph g;
  g.width = w;
  g.height = h;
  std::vector<int> region_of_comp(static_cast<size_t>(ncomp), -1);
  for (int p = 0; p < w * h; ++p) {
    int cid = comp[static_cast<size_t>(p)];
    if (region_of_comp[static_cast<size_t>(cid)] == -1) {
      region_of_comp[static_cast<size_t>(cid)] = static_cast<int>(g.regions.size());
      Region r;
      r.id = static_cast<int>(g.regions.size());
      g.regions.push_back(std::move(r));
    }
    g.regions[static_cast<size_t>(region_of_comp[static_cast<size_t>(cid)])].pixels.emplace_back(p % w, p / w);
  }
  for (Region& r : g.regions) r.recompute_centroid();
  compute_features(g.regions, img);
  compute_boundaries(g.regions, w, h);
  g.edges = build_adjacency(g.regions, w, h);
  return g;
}

}  // namespace gvqa::vision
