#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gvqa/nn/tensor.hpp"

namespace gvqa::nn {

// splitmix64 step; used to derive independent stream seeds.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> uniform_vec(std::mt19937_64& rng, size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> normal_vec(std::mt19937_64& rng, size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

// Xavier-style uniform init for a {rows, cols} weight.
inline void init_xavier(Param& p, std::mt19937_64& rng) {
  int fan_in = p.shape.size() == 2 ? p.shape[1] : p.size();
  int fan_out = p.shape.size() == 2 ? p.shape[0] : p.size();
  double bound = std::sqrt(6.0 / (fan_in + fan_out));
  p.value = uniform_vec(rng, p.value.size(), -bound, bound);
}

}  // namespace gvqa::nn
