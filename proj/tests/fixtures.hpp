#ifndef DOMAINAUG_TESTS_FIXTURES_HPP
#define DOMAINAUG_TESTS_FIXTURES_HPP

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "domainaug/dataset.hpp"
#include "domainaug/rng.hpp"
#include "domainaug/types.hpp"

namespace test_support {

using namespace domainaug;

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    static std::atomic<int> counter{0};
    const int id = counter++;
    path_ = std::filesystem::temp_directory_path() /
            ("domainaug_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(id));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Image solid_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  return img;
}

inline BoxLabel one_hot_box(int cls, int num_classes, double cx, double cy, double w, double h) {
  BoxLabel box;
  box.class_conf.assign(num_classes, 0.0);
  box.class_conf[cls] = 1.0;
  box.cx = cx;
  box.cy = cy;
  box.w = w;
  box.h = h;
  return box;
}

// Box whose continuous rect coincides with the integer pixel rect [x0, x0+pw) x [y0, y0+ph).
inline BoxLabel pixel_aligned_box(int cls, int num_classes, int x0, int y0, int pw, int ph, int image_w, int image_h) {
  return one_hot_box(cls, num_classes, (x0 + pw / 2.0) / image_w, (y0 + ph / 2.0) / image_h,
                     static_cast<double>(pw) / image_w, static_cast<double>(ph) / image_h);
}

struct FixtureOptions {
  int width = 128;
  int height = 128;
  int num_classes = 3;
  int min_boxes = 1;
  int max_boxes = 3;
  bool dark = false;       // dark, blue-tinted variant (deployment-conditions stand-in)
  bool red_free = false;   // keep the red channel at zero so it can carry a marker
};

// Synthetic annotated image: tinted background plus solid rectangles as objects.
inline LabeledImage fixture_image(const std::string& id, DomainTag tag, Rng& rng, const FixtureOptions& opt = {}) {
  LabeledImage img;
  img.id = id;
  img.domain_tag = tag;

  const auto shade = [&](int bright_lo, int bright_hi) {
    return static_cast<std::uint8_t>(bright_lo + rng.uniform_int(bright_hi - bright_lo + 1));
  };
  std::uint8_t bg[3];
  if (opt.dark) {
    bg[0] = shade(10, 50);
    bg[1] = shade(10, 50);
    bg[2] = shade(40, 90);  // blue haze
  } else {
    bg[0] = shade(170, 240);
    bg[1] = shade(170, 240);
    bg[2] = shade(170, 240);
  }
  if (opt.red_free) bg[0] = 0;
  img.pixels = solid_image(opt.width, opt.height, bg[0], bg[1], bg[2]);

  const int n_boxes = opt.min_boxes + static_cast<int>(rng.uniform_int(opt.max_boxes - opt.min_boxes + 1));
  for (int b = 0; b < n_boxes; ++b) {
    // Pixel-aligned boxes: the painted footprint equals the label's continuous rect.
    const int pw = std::max(2, static_cast<int>(std::llround(opt.width * rng.uniform(0.15, 0.45))));
    const int ph = std::max(2, static_cast<int>(std::llround(opt.height * rng.uniform(0.15, 0.45))));
    const int x0 = static_cast<int>(rng.uniform_int(opt.width - pw + 1));
    const int y0 = static_cast<int>(rng.uniform_int(opt.height - ph + 1));
    const int cls = static_cast<int>(rng.uniform_int(opt.num_classes));
    std::uint8_t fill[3] = {shade(60, 200), shade(60, 200), shade(60, 200)};
    if (opt.dark)
      for (auto& v : fill) v = static_cast<std::uint8_t>(v / 4);
    if (opt.red_free) fill[0] = 0;
    for (int y = y0; y < y0 + ph; ++y)
      for (int x = x0; x < x0 + pw; ++x)
        for (int c = 0; c < 3; ++c) img.pixels.at(x, y, c) = fill[c];
    img.labels.push_back(pixel_aligned_box(cls, opt.num_classes, x0, y0, pw, ph, opt.width, opt.height));
  }
  return img;
}

inline DatasetSplit fixture_split(Role role, int count, std::uint64_t seed, FixtureOptions opt = {}) {
  DatasetSplit split;
  split.role = role;
  for (int c = 0; c < opt.num_classes; ++c) split.category_names.push_back("class_" + std::to_string(c));
  Rng rng(seed);
  const char* prefix = role == Role::source ? "src" : "tgt";
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s_%04d", prefix, i);
    split.images.push_back(
        fixture_image(id, role == Role::source ? DomainTag::source : DomainTag::target, rng, opt));
  }
  return split;
}

// --- marker-pixel oracle -------------------------------------------------------------
//
// Paint a box interior pure red in a red-free image, run the transform, then detect the
// pixels whose red channel is majority-marker (>= 128, i.e. >= 50% marker weight under
// round-to-nearest). The detected rectangle is compared against the recomputed label
// quantized by the same pixel-center rule.

inline void paint_marker(Image& img, const PixelRect& r) {
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) img.at(x, y, 0) = 255;
}

inline std::optional<PixelRect> detect_marker(const Image& img) {
  PixelRect r{img.width, img.height, 0, 0};
  bool found = false;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y, 0) >= 128) {
        found = true;
        r.x0 = std::min(r.x0, x);
        r.y0 = std::min(r.y0, y);
        r.x1 = std::max(r.x1, x + 1);
        r.y1 = std::max(r.y1, y + 1);
      }
  if (!found) return std::nullopt;
  return r;
}

// Pixels whose centers fall inside the continuous rect [x0,x1] x [y0,y1], boundaries
// inclusive (a center exactly on the edge carries 50% marker weight and rounds to marked).
inline PixelRect quantize_rect(double x0, double y0, double x1, double y1) {
  PixelRect r;
  r.x0 = static_cast<int>(std::ceil(x0 - 0.5));
  r.y0 = static_cast<int>(std::ceil(y0 - 0.5));
  r.x1 = static_cast<int>(std::floor(x1 - 0.5)) + 1;
  r.y1 = static_cast<int>(std::floor(y1 - 0.5)) + 1;
  return r;
}

inline PixelRect quantize_box(const BoxLabel& box, int image_w, int image_h) {
  return quantize_rect((box.cx - box.w / 2) * image_w, (box.cy - box.h / 2) * image_h,
                       (box.cx + box.w / 2) * image_w, (box.cy + box.h / 2) * image_h);
}

inline double rect_iou(const PixelRect& a, const PixelRect& b) {
  const double ix = std::max(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double iy = std::max(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = ix * iy;
  const double area_a = static_cast<double>(a.width()) * a.height();
  const double area_b = static_cast<double>(b.width()) * b.height();
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// IoU between the detected marker rect and the recomputed box quantized by the pixel-center
// rule. When a box edge sits exactly on a pixel-center boundary the 50% weight makes the
// rounding side float-noise dependent, so within a tiny window either side is accepted.
inline double marker_iou(const PixelRect& detected, const BoxLabel& box, int image_w, int image_h) {
  const double edges[4] = {(box.cx - box.w / 2) * image_w, (box.cy - box.h / 2) * image_h,
                           (box.cx + box.w / 2) * image_w, (box.cy + box.h / 2) * image_h};
  const int det[4] = {detected.x0, detected.y0, detected.x1, detected.y1};
  int out[4];
  for (int e = 0; e < 4; ++e) {
    const double t = edges[e] - 0.5;  // threshold on pixel-center indices
    const bool knife = std::abs(t - std::llround(t)) < 1e-6;
    int analytic;
    if (e < 2)
      analytic = static_cast<int>(std::ceil(t));            // first included center
    else
      analytic = static_cast<int>(std::floor(t)) + 1;       // one past the last included
    if (knife) {
      const int a = static_cast<int>(std::llround(t));
      const int inclusive = e < 2 ? a : a + 1;
      const int exclusive = e < 2 ? a + 1 : a;
      analytic = (det[e] == inclusive || det[e] == exclusive) ? det[e] : inclusive;
    }
    out[e] = analytic;
  }
  return rect_iou(detected, PixelRect{out[0], out[1], out[2], out[3]});
}

}  // namespace test_support

#endif
