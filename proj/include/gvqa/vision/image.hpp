#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvqa::vision {

// Row-major intensity grid in [0,1], 1 or 3 channels, interleaved.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw std::invalid_argument("Image: bad dimensions");
    data.assign(static_cast<size_t>(w) * h * c, fill);
  }

  double at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  // Mean over channels.
  double intensity(int x, int y) const {
    double s = 0.0;
    for (int c = 0; c < channels; ++c) s += at(x, y, c);
    return s / channels;
  }

  int pixel_count() const { return width * height; }
};

namespace detail {

inline int read_pnm_int(std::istream& in) {
  // Skips whitespace and '#' comments per the PNM grammar.
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = in.get();
  }
  if (ch == EOF) throw std::runtime_error("pnm: unexpected end of header");
  int value = 0;
  bool any = false;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    any = true;
    ch = in.get();
  }
  if (!any) throw std::runtime_error("pnm: malformed header integer");
  return value;
}

}  // namespace detail

// Binary PGM (P5) or PPM (P6), maxval <= 255, mapped to [0,1].
inline Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pnm: cannot open " + path);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw std::runtime_error("pnm: expected binary P5/P6 in " + path);
  int channels = magic[1] == '5' ? 1 : 3;
  int w = detail::read_pnm_int(in);
  int h = detail::read_pnm_int(in);
  int maxval = detail::read_pnm_int(in);
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("pnm: maxval must be in 1..255");
  Image img(w, h, channels);
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw std::runtime_error("pnm: truncated pixel data in " + path);
  for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / static_cast<double>(maxval);
  return img;
}

inline void write_pnm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pnm: cannot write " + path);
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.data.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    double v = std::clamp(img.data[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

// Grayscale heat map scaled so the max value maps to white.
inline void write_heatmap_pgm(const std::string& path, const std::vector<double>& values,
                              int width, int height) {
  if (static_cast<int>(values.size()) != width * height)
    throw std::invalid_argument("heatmap: size mismatch");
  double mx = 0.0;
  for (double v : values) mx = std::max(mx, std::abs(v));
  Image img(width, height, 1);
  if (mx > 0.0)
    for (size_t i = 0; i < values.size(); ++i) img.data[i] = std::abs(values[i]) / mx;
  write_pnm(path, img);
}

}  // namespace gvqa::vision
