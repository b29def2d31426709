#include "domainaug/box_aug.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "domainaug/dataset.hpp"

namespace domainaug {

const char* to_string(ExchangeMode m) {
  switch (m) {
    case ExchangeMode::direct: return "direct";
    case ExchangeMode::mixture: return "mixture";
    case ExchangeMode::gaussian: return "gaussian";
  }
  return "?";
}

double WeightMap::mean() const {
  if (mode == ExchangeMode::direct) return 0.0;
  if (mode == ExchangeMode::mixture) return beta_mix;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::vector<BoxPair> pair_boxes(const LabeledImage& host, const std::vector<LabeledImage>& donors, double p_exchange,
                                Rng& rng) {
  // Flat (image, box) list per class so a donor can be drawn uniformly.
  struct DonorRef {
    int image;
    int box;
  };
  std::vector<std::vector<DonorRef>> by_class;
  for (int di = 0; di < static_cast<int>(donors.size()); ++di) {
    const auto& labels = donors[di].labels;
    for (int bi = 0; bi < static_cast<int>(labels.size()); ++bi) {
      const int cls = labels[bi].argmax_class();
      if (cls >= static_cast<int>(by_class.size())) by_class.resize(cls + 1);
      by_class[cls].push_back({di, bi});
    }
  }

  std::vector<BoxPair> pairs;
  for (int hb = 0; hb < static_cast<int>(host.labels.size()); ++hb) {
    const BoxLabel& box = host.labels[hb];
    const PixelRect rect = box_pixel_rect(box, host.pixels.width, host.pixels.height);
    if (rect.width() < 2 || rect.height() < 2) continue;
    const int cls = box.argmax_class();
    if (cls >= static_cast<int>(by_class.size()) || by_class[cls].empty()) continue;
    if (!rng.bernoulli(p_exchange)) continue;
    const DonorRef& d = by_class[cls][rng.uniform_int(by_class[cls].size())];
    pairs.push_back({hb, d.image, d.box, rect.width(), rect.height()});
  }
  return pairs;
}

WeightMap gaussian_weight_map(int w, int h, int image_w, int image_h) {
  if (w < 2 || h < 2 || w > image_w || h > image_h)
    throw std::invalid_argument("gaussian_weight_map requires 2 <= w <= W and 2 <= h <= H");
  WeightMap map;
  map.w = w;
  map.h = h;
  map.mode = ExchangeMode::gaussian;
  const double spread = std::sqrt(static_cast<double>(h) * w / (2.0 * std::numbers::pi));
  map.gaussian.sigma_x = static_cast<double>(w) / image_w * spread;
  map.gaussian.sigma_y = static_cast<double>(h) / image_h * spread;
  map.gaussian.mu_x = (w - 1) / 2.0;
  map.gaussian.mu_y = (h - 1) / 2.0;
  map.values = kernels::gaussian_fill(w, h, map.gaussian);
  return map;
}

WeightMap make_weight_map(ExchangeMode mode, int w, int h, int image_w, int image_h, double alpha_m, Rng& rng) {
  if (mode == ExchangeMode::gaussian) return gaussian_weight_map(w, h, image_w, image_h);
  WeightMap map;
  map.w = w;
  map.h = h;
  map.mode = mode;
  map.beta_mix = mode == ExchangeMode::mixture ? rng.beta_symmetric(alpha_m) : 0.0;
  map.values.assign(static_cast<std::size_t>(w) * h, map.beta_mix);
  return map;
}

bool exchange(LabeledImage& host, const std::vector<LabeledImage>& donors, const BoxPair& pair, const WeightMap& weights,
              Counters* counters) {
  BoxLabel& host_box = host.labels[pair.host_box];
  const PixelRect rect = box_pixel_rect(host_box, host.pixels.width, host.pixels.height);
  const LabeledImage& donor_img = donors[pair.donor_image];
  const BoxLabel& donor_box = donor_img.labels[pair.donor_box];
  const int dw = donor_img.pixels.width;
  const int dh = donor_img.pixels.height;
  const double rx0 = (donor_box.cx - donor_box.w / 2) * dw;
  const double rx1 = (donor_box.cx + donor_box.w / 2) * dw;
  const double ry0 = (donor_box.cy - donor_box.h / 2) * dh;
  const double ry1 = (donor_box.cy + donor_box.h / 2) * dh;
  if (rect.width() != pair.common_w || rect.height() != pair.common_h || rect.width() < 2 || rect.height() < 2 ||
      rx1 - rx0 < 1.0 || ry1 - ry0 < 1.0) {
    if (counters) ++counters->exchange_pairs_skipped;
    return false;
  }

  const Image patch = kernels::resample_patch(donor_img.pixels, rx0, ry0, rx1, ry1, pair.common_w, pair.common_h);
  kernels::blend_patch(host.pixels, rect.x0, rect.y0, patch, weights.values);

  if (host_box.class_conf.size() != donor_box.class_conf.size())
    throw std::invalid_argument("exchange across different category counts");
  const double beta_bar = weights.mean();
  for (std::size_t c = 0; c < host_box.class_conf.size(); ++c)
    host_box.class_conf[c] = beta_bar * host_box.class_conf[c] + (1.0 - beta_bar) * donor_box.class_conf[c];
  return true;
}

int exchange_all(LabeledImage& host, const std::vector<LabeledImage>& donors, ExchangeMode mode, double alpha_m,
                 double p_exchange, Rng& rng, Counters* counters) {
  const std::vector<BoxPair> pairs = pair_boxes(host, donors, p_exchange, rng);
  int patched = 0;
  for (const BoxPair& pair : pairs) {
    const WeightMap map = make_weight_map(mode, pair.common_w, pair.common_h, host.pixels.width, host.pixels.height,
                                          alpha_m, rng);
    if (exchange(host, donors, pair, map, counters)) ++patched;
  }
  return patched;
}

}  // namespace domainaug
