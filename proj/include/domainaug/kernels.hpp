#ifndef DOMAINAUG_KERNELS_HPP
#define DOMAINAUG_KERNELS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "domainaug/types.hpp"

// Pixel-level kernels behind the augmentation and embedding paths. Every kernel comes in
// two variants: the plain name is OpenMP-parallel and is what the library calls; the
// *_ref sibling is the serial reference kept for tests and the benchmark. Both share the
// same per-pixel arithmetic, so outputs are bit-identical regardless of thread count.
namespace domainaug::kernels {

// Bilinear sample of one channel at continuous point (u, v), pixel centers at i + 0.5,
// borders clamped.
inline double sample_bilinear(const Image& src, double u, double v, int c) {
  const double gu = u - 0.5;
  const double gv = v - 0.5;
  double fu = std::floor(gu);
  double fv = std::floor(gv);
  int x0 = static_cast<int>(fu);
  int y0 = static_cast<int>(fv);
  const double ax = gu - fu;
  const double ay = gv - fv;
  const auto clampx = [&](int x) { return x < 0 ? 0 : (x >= src.width ? src.width - 1 : x); };
  const auto clampy = [&](int y) { return y < 0 ? 0 : (y >= src.height ? src.height - 1 : y); };
  const int x1 = clampx(x0 + 1);
  const int y1 = clampy(y0 + 1);
  x0 = clampx(x0);
  y0 = clampy(y0);
  const double top = (1.0 - ax) * src.at(x0, y0, c) + ax * src.at(x1, y0, c);
  const double bot = (1.0 - ax) * src.at(x0, y1, c) + ax * src.at(x1, y1, c);
  return (1.0 - ay) * top + ay * bot;
}

inline std::uint8_t quantize(double v) {
  const long long r = std::llround(v);
  return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

// Full-image bilinear resize to out_w x out_h.
Image resize_bilinear(const Image& src, int out_w, int out_h);
Image resize_bilinear_ref(const Image& src, int out_w, int out_h);

// Axis-aligned affine placement of src onto dst: dst_point = src_point * scale + offset.
// Only dst pixels inside [crop_x0, crop_x1) x [crop_y0, crop_y1) are written.
struct TileTransform {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  int crop_x0 = 0;
  int crop_y0 = 0;
  int crop_x1 = 0;
  int crop_y1 = 0;
};

void composite_tile(Image& dst, const Image& src, const TileTransform& t);
void composite_tile_ref(Image& dst, const Image& src, const TileTransform& t);

// Per-pixel convex mix: out = round(lambda * a + (1 - lambda) * b). Dims must match.
Image blend_images(const Image& a, const Image& b, double lambda);
Image blend_images_ref(const Image& a, const Image& b, double lambda);

// Resamples the continuous source rect [rx0, rx1] x [ry0, ry1] to an out_w x out_h patch.
Image resample_patch(const Image& src, double rx0, double ry0, double rx1, double ry1, int out_w, int out_h);
Image resample_patch_ref(const Image& src, double rx0, double ry0, double rx1, double ry1, int out_w, int out_h);

// In-place weighted patch blend: host(x0+p, y0+q) = round(w(p,q) * host + (1 - w(p,q)) * patch).
// weights is row-major patch.height x patch.width.
void blend_patch(Image& host, int x0, int y0, const Image& patch, const std::vector<double>& weights);
void blend_patch_ref(Image& host, int x0, int y0, const Image& patch, const std::vector<double>& weights);

// Separable Gaussian falloff, value 1 at (mu_x, mu_y).
struct GaussianParams {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;

  double value_at(double p, double q) const {
    const double dx = (p - mu_x) / sigma_x;
    const double dy = (q - mu_y) / sigma_y;
    return std::exp(-(dx * dx + dy * dy));
  }
};

std::vector<double> gaussian_fill(int w, int h, const GaussianParams& g);
std::vector<double> gaussian_fill_ref(int w, int h, const GaussianParams& g);

// Per-cell per-channel mean over a grid x grid partition, each entry scaled to [0, 1].
// Output is cell-major then channel: entry[(gy * grid + gx) * 3 + c].
std::vector<double> grid_mean_pool(const Image& img, int grid);
std::vector<double> grid_mean_pool_ref(const Image& img, int grid);

}  // namespace domainaug::kernels

#endif
