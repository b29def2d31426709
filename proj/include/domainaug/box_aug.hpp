#ifndef DOMAINAUG_BOX_AUG_HPP
#define DOMAINAUG_BOX_AUG_HPP

#include <vector>

#include "domainaug/kernels.hpp"
#include "domainaug/rng.hpp"
#include "domainaug/types.hpp"

namespace domainaug {

enum class ExchangeMode { direct, mixture, gaussian };

const char* to_string(ExchangeMode m);

// Per-pixel weight beta for the host content inside an exchanged box: the patched value is
// beta * host + (1 - beta) * donor. direct: all zeros. mixture: one shared beta_mix.
// gaussian: scale-aware falloff, 1 at the box center.
struct WeightMap {
  int w = 0;
  int h = 0;
  std::vector<double> values;  // row-major h x w
  ExchangeMode mode = ExchangeMode::direct;
  double beta_mix = 0.0;
  kernels::GaussianParams gaussian;

  double value_at(int p, int q) const { return values[static_cast<std::size_t>(q) * w + p]; }
  double mean() const;
};

// A host box matched with a same-class donor box. Pixel content is exchanged at the host
// box's resolution (common_w x common_h).
struct BoxPair {
  int host_box = 0;
  int donor_image = 0;
  int donor_box = 0;
  int common_w = 0;
  int common_h = 0;
};

// For each host box, with probability p_exchange, picks a uniformly random donor box of the
// same argmax class. Host boxes under 2 pixels of extent or without a same-class donor are
// skipped.
std::vector<BoxPair> pair_boxes(const LabeledImage& host, const std::vector<LabeledImage>& donors, double p_exchange,
                                Rng& rng);

// Scale-aware Gaussian weights for a w x h box inside an image_w x image_h image:
//   beta(p,q) = exp(-((p-mu_x)^2/sigma_x^2 + (q-mu_y)^2/sigma_y^2))
//   sigma_x = (w/image_w) * sqrt(h*w / (2*pi)),  sigma_y = (h/image_h) * sqrt(h*w / (2*pi))
// with mu at the box center ((w-1)/2, (h-1)/2) in 0-based pixel coordinates.
WeightMap gaussian_weight_map(int w, int h, int image_w, int image_h);

WeightMap make_weight_map(ExchangeMode mode, int w, int h, int image_w, int image_h, double alpha_m, Rng& rng);

// Patches the donor box content into the host box region, blended by the weight map. The
// host box keeps its geometry; its confidences become mean(beta)*host + (1-mean(beta))*donor.
// Returns false when the donor patch is degenerate and the pair was skipped.
bool exchange(LabeledImage& host, const std::vector<LabeledImage>& donors, const BoxPair& pair, const WeightMap& weights,
              Counters* counters = nullptr);

// Pairs and exchanges every eligible host box in one pass; returns the number of boxes patched.
int exchange_all(LabeledImage& host, const std::vector<LabeledImage>& donors, ExchangeMode mode, double alpha_m,
                 double p_exchange, Rng& rng, Counters* counters = nullptr);

}  // namespace domainaug

#endif
