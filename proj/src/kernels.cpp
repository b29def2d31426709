#include "domainaug/kernels.hpp"

#include <cassert>
#include <stdexcept>

namespace domainaug::kernels {

namespace {

inline void resize_row(const Image& src, Image& dst, int q, double sx, double sy) {
  const double v = (q + 0.5) * sy;
  for (int p = 0; p < dst.width; ++p) {
    const double u = (p + 0.5) * sx;
    for (int c = 0; c < 3; ++c) dst.at(p, q, c) = quantize(sample_bilinear(src, u, v, c));
  }
}

inline void composite_row(Image& dst, const Image& src, const TileTransform& t, int q) {
  const double v = (q + 0.5 - t.offset_y) / t.scale_y;
  for (int p = t.crop_x0; p < t.crop_x1; ++p) {
    const double u = (p + 0.5 - t.offset_x) / t.scale_x;
    for (int c = 0; c < 3; ++c) dst.at(p, q, c) = quantize(sample_bilinear(src, u, v, c));
  }
}

inline void blend_row(const Image& a, const Image& b, Image& out, int q, double lambda) {
  for (int p = 0; p < out.width; ++p)
    for (int c = 0; c < 3; ++c)
      out.at(p, q, c) = quantize(lambda * a.at(p, q, c) + (1.0 - lambda) * b.at(p, q, c));
}

inline void patch_row(const Image& src, Image& out, int q, double rx0, double ry0, double su, double sv) {
  const double v = ry0 + (q + 0.5) * sv;
  for (int p = 0; p < out.width; ++p) {
    const double u = rx0 + (p + 0.5) * su;
    for (int c = 0; c < 3; ++c) out.at(p, q, c) = quantize(sample_bilinear(src, u, v, c));
  }
}

inline void blend_patch_row(Image& host, int x0, int y0, const Image& patch, const std::vector<double>& weights, int q) {
  for (int p = 0; p < patch.width; ++p) {
    const double w = weights[static_cast<std::size_t>(q) * patch.width + p];
    for (int c = 0; c < 3; ++c) {
      const double hv = host.at(x0 + p, y0 + q, c);
      const double pv = patch.at(p, q, c);
      host.at(x0 + p, y0 + q, c) = quantize(w * hv + (1.0 - w) * pv);
    }
  }
}

// Cell bounds for index g of count cells over n pixels; never empty.
inline void cell_range(int g, int count, int n, int& lo, int& hi) {
  lo = static_cast<int>((static_cast<long long>(g) * n) / count);
  hi = static_cast<int>((static_cast<long long>(g + 1) * n) / count);
  if (lo >= n) lo = n - 1;
  if (hi <= lo) hi = lo + 1;
}

inline void pool_cell(const Image& img, int grid, int idx, std::vector<double>& out) {
  const int gx = idx % grid;
  const int gy = idx / grid;
  int x0, x1, y0, y1;
  cell_range(gx, grid, img.width, x0, x1);
  cell_range(gy, grid, img.height, y0, y1);
  std::uint64_t sum[3] = {0, 0, 0};
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int c = 0; c < 3; ++c) sum[c] += img.at(x, y, c);
  const double n = static_cast<double>(x1 - x0) * (y1 - y0);
  for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(idx) * 3 + c] = static_cast<double>(sum[c]) / n / 255.0;
}

void check_same_dims(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("image dimension mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                                " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
}

}  // namespace

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  Image dst(out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < out_h; ++q) resize_row(src, dst, q, sx, sy);
  return dst;
}

Image resize_bilinear_ref(const Image& src, int out_w, int out_h) {
  Image dst(out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int q = 0; q < out_h; ++q) resize_row(src, dst, q, sx, sy);
  return dst;
}

void composite_tile(Image& dst, const Image& src, const TileTransform& t) {
#pragma omp parallel for schedule(static)
  for (int q = t.crop_y0; q < t.crop_y1; ++q) composite_row(dst, src, t, q);
}

void composite_tile_ref(Image& dst, const Image& src, const TileTransform& t) {
  for (int q = t.crop_y0; q < t.crop_y1; ++q) composite_row(dst, src, t, q);
}

Image blend_images(const Image& a, const Image& b, double lambda) {
  check_same_dims(a, b);
  Image out(a.width, a.height);
#pragma omp parallel for schedule(static)
  for (int q = 0; q < out.height; ++q) blend_row(a, b, out, q, lambda);
  return out;
}

Image blend_images_ref(const Image& a, const Image& b, double lambda) {
  check_same_dims(a, b);
  Image out(a.width, a.height);
  for (int q = 0; q < out.height; ++q) blend_row(a, b, out, q, lambda);
  return out;
}

Image resample_patch(const Image& src, double rx0, double ry0, double rx1, double ry1, int out_w, int out_h) {
  Image out(out_w, out_h);
  const double su = (rx1 - rx0) / out_w;
  const double sv = (ry1 - ry0) / out_h;
#pragma omp parallel for schedule(static)
  for (int q = 0; q < out_h; ++q) patch_row(src, out, q, rx0, ry0, su, sv);
  return out;
}

Image resample_patch_ref(const Image& src, double rx0, double ry0, double rx1, double ry1, int out_w, int out_h) {
  Image out(out_w, out_h);
  const double su = (rx1 - rx0) / out_w;
  const double sv = (ry1 - ry0) / out_h;
  for (int q = 0; q < out_h; ++q) patch_row(src, out, q, rx0, ry0, su, sv);
  return out;
}

void blend_patch(Image& host, int x0, int y0, const Image& patch, const std::vector<double>& weights) {
  assert(weights.size() == static_cast<std::size_t>(patch.width) * patch.height);
#pragma omp parallel for schedule(static)
  for (int q = 0; q < patch.height; ++q) blend_patch_row(host, x0, y0, patch, weights, q);
}

void blend_patch_ref(Image& host, int x0, int y0, const Image& patch, const std::vector<double>& weights) {
  assert(weights.size() == static_cast<std::size_t>(patch.width) * patch.height);
  for (int q = 0; q < patch.height; ++q) blend_patch_row(host, x0, y0, patch, weights, q);
}

std::vector<double> gaussian_fill(int w, int h, const GaussianParams& g) {
  std::vector<double> out(static_cast<std::size_t>(w) * h);
#pragma omp parallel for schedule(static)
  for (int q = 0; q < h; ++q)
    for (int p = 0; p < w; ++p) out[static_cast<std::size_t>(q) * w + p] = g.value_at(p, q);
  return out;
}

std::vector<double> gaussian_fill_ref(int w, int h, const GaussianParams& g) {
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int q = 0; q < h; ++q)
    for (int p = 0; p < w; ++p) out[static_cast<std::size_t>(q) * w + p] = g.value_at(p, q);
  return out;
}

std::vector<double> grid_mean_pool(const Image& img, int grid) {
  std::vector<double> out(static_cast<std::size_t>(grid) * grid * 3);
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < grid * grid; ++idx) pool_cell(img, grid, idx, out);
  return out;
}

std::vector<double> grid_mean_pool_ref(const Image& img, int grid) {
  std::vector<double> out(static_cast<std::size_t>(grid) * grid * 3);
  for (int idx = 0; idx < grid * grid; ++idx) pool_cell(img, grid, idx, out);
  return out;
}

}  // namespace domainaug::kernels
