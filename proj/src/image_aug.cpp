#include "domainaug/image_aug.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "domainaug/kernels.hpp"

namespace domainaug {

namespace {

// Without replacement when the pool is large enough, with replacement otherwise.
std::vector<int> sample_indices(std::size_t pool_size, int count, Rng& rng) {
  std::vector<int> out;
  out.reserve(count);
  if (pool_size >= static_cast<std::size_t>(count)) {
    std::vector<int> all(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) all[i] = static_cast<int>(i);
    for (int i = 0; i < count; ++i) {
      const std::uint64_t j = i + rng.uniform_int(all.size() - i);
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
  } else {
    for (int i = 0; i < count; ++i) out.push_back(static_cast<int>(rng.uniform_int(pool_size)));
  }
  return out;
}

BoxLabel scale_confidence(BoxLabel box, double factor) {
  for (double& v : box.class_conf) v *= factor;
  return box;
}

}  // namespace

const char* to_string(Recipe r) {
  switch (r) {
    case Recipe::splice: return "splice";
    case Recipe::reallocation: return "reallocation";
    case Recipe::splice_reallocation: return "splice_reallocation";
  }
  return "?";
}

AugmentedSample domain_splice(const std::vector<LabeledImage>& pool_source, const std::vector<LabeledImage>& pool_target,
                              int canvas_side, Rng& rng, double clip_drop_threshold, Counters* counters,
                              SpliceDetail* detail) {
  if (pool_source.empty() || pool_target.empty())
    throw std::invalid_argument("domain_splice requires both domains to appear (m,n >= 1)");
  if (canvas_side < 2) throw std::invalid_argument("canvas_side must be >= 2");
  if (!(clip_drop_threshold >= 0.0 && clip_drop_threshold <= 1.0))
    throw std::invalid_argument("clip_drop_threshold must be in [0,1]");

  const int S = canvas_side;
  const int W2 = 2 * S;

  const int m = 1 + static_cast<int>(rng.uniform_int(3));  // source tiles, {1,2,3}
  const int n = 4 - m;

  std::vector<DomainTag> slots;
  slots.insert(slots.end(), m, DomainTag::source);
  slots.insert(slots.end(), n, DomainTag::target);
  for (int i = 3; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(i + 1));
    std::swap(slots[i], slots[j]);
  }

  const std::vector<int> src_idx = sample_indices(pool_source.size(), m, rng);
  const std::vector<int> tgt_idx = sample_indices(pool_target.size(), n, rng);

  // Jittered mosaic center, uniform over the middle half of each axis.
  const int jcx = S / 2 + static_cast<int>(rng.uniform_int(S + 1));
  const int jcy = S / 2 + static_cast<int>(rng.uniform_int(S + 1));

  Image canvas(W2, W2, 114);

  struct TileRef {
    const LabeledImage* img;
    DomainTag domain;
    int pool_index;
    kernels::TileTransform t;
  };
  std::vector<TileRef> tiles(4);
  int si = 0, ti = 0;
  for (int q = 0; q < 4; ++q) {
    TileRef& tile = tiles[q];
    tile.domain = slots[q];
    if (slots[q] == DomainTag::source) {
      tile.pool_index = src_idx[si++];
      tile.img = &pool_source[tile.pool_index];
    } else {
      tile.pool_index = tgt_idx[ti++];
      tile.img = &pool_target[tile.pool_index];
    }
    // Quadrants in TL, TR, BL, BR order around the jittered center.
    const int x0 = (q % 2 == 0) ? 0 : jcx;
    const int x1 = (q % 2 == 0) ? jcx : W2;
    const int y0 = (q < 2) ? 0 : jcy;
    const int y1 = (q < 2) ? jcy : W2;
    const int qw = x1 - x0;
    const int qh = y1 - y0;
    const int iw = tile.img->pixels.width;
    const int ih = tile.img->pixels.height;
    // Cover the quadrant, anchored at the center corner; overflow is cropped away.
    const double scale = std::max(static_cast<double>(qw) / iw, static_cast<double>(qh) / ih);
    const double sw = iw * scale;
    const double sh = ih * scale;
    kernels::TileTransform& t = tile.t;
    t.scale_x = scale;
    t.scale_y = scale;
    t.offset_x = (q % 2 == 0) ? jcx - sw : jcx;
    t.offset_y = (q < 2) ? jcy - sh : jcy;
    t.crop_x0 = x0;
    t.crop_y0 = y0;
    t.crop_x1 = x1;
    t.crop_y1 = y1;
    kernels::composite_tile(canvas, tile.img->pixels, t);
  }

  AugmentedSample sample;
  sample.recipe = Recipe::splice;
  sample.image.domain_tag = DomainTag::augmented;
  sample.image.pixels = kernels::resize_bilinear(canvas, S, S);

  if (detail) {
    detail->tiles.clear();
    detail->boxes.clear();
    detail->center_x = jcx;
    detail->center_y = jcy;
    detail->num_source = m;
    detail->num_target = n;
  }

  for (int q = 0; q < 4; ++q) {
    const TileRef& tile = tiles[q];
    const kernels::TileTransform& t = tile.t;
    if (detail) {
      SpliceDetail::Tile dt;
      dt.placement = {t.scale_x, t.scale_y, t.offset_x, t.offset_y, t.crop_x0, t.crop_y0, t.crop_x1, t.crop_y1};
      dt.domain = tile.domain;
      dt.pool_index = tile.pool_index;
      detail->tiles.push_back(dt);
    }
    const int iw = tile.img->pixels.width;
    const int ih = tile.img->pixels.height;
    const TilePlacement placement{t.scale_x, t.scale_y, t.offset_x, t.offset_y,
                                  t.crop_x0, t.crop_y0, t.crop_x1, t.crop_y1};
    for (int b = 0; b < static_cast<int>(tile.img->labels.size()); ++b) {
      const BoxLabel& box = tile.img->labels[b];
      SpliceDetail::BoxTrace trace;
      trace.tile = q;
      trace.box = b;
      // Corner transform, then clip to the tile crop.
      const ContinuousRect mapped = placement_map_box(box, iw, ih, placement);
      const double X0 = mapped.x0, X1 = mapped.x1, Y0 = mapped.y0, Y1 = mapped.y1;
      const double CX0 = std::max(X0, static_cast<double>(t.crop_x0));
      const double CX1 = std::min(X1, static_cast<double>(t.crop_x1));
      const double CY0 = std::max(Y0, static_cast<double>(t.crop_y0));
      const double CY1 = std::min(Y1, static_cast<double>(t.crop_y1));
      const double cw = CX1 - CX0;
      const double ch = CY1 - CY0;
      bool drop = false;
      if (cw <= 0.0 || ch <= 0.0) {
        trace.clip_ratio = 0.0;
        drop = true;
      } else {
        trace.clip_ratio = (cw * ch) / ((X1 - X0) * (Y1 - Y0));
        drop = trace.clip_ratio < clip_drop_threshold;
      }
      if (drop) {
        if (counters) ++counters->boxes_dropped_clipped;
      } else if (cw / 2.0 < 1.0 || ch / 2.0 < 1.0) {
        // Below one pixel after the half-size downscale.
        drop = true;
        if (counters) ++counters->boxes_dropped_degenerate;
      }
      if (!drop) {
        BoxLabel nb = box;  // lambda_cls = 1: confidences unchanged
        nb.cx = (CX0 + CX1) / 2.0 / W2;
        nb.cy = (CY0 + CY1) / 2.0 / W2;
        nb.w = cw / W2;
        nb.h = ch / W2;
        trace.output_index = static_cast<int>(sample.image.labels.size());
        sample.image.labels.push_back(std::move(nb));
      }
      trace.dropped = drop;
      if (detail) detail->boxes.push_back(trace);
    }
    sample.provenance.push_back({tile.img->id, tile.domain, 1.0, 1.0});
  }
  return sample;
}

ContinuousRect placement_map_box(const BoxLabel& box, int image_w, int image_h, const TilePlacement& t) {
  ContinuousRect r;
  r.x0 = (box.cx - box.w / 2) * image_w * t.scale_x + t.offset_x;
  r.x1 = (box.cx + box.w / 2) * image_w * t.scale_x + t.offset_x;
  r.y0 = (box.cy - box.h / 2) * image_h * t.scale_y + t.offset_y;
  r.y1 = (box.cy + box.h / 2) * image_h * t.scale_y + t.offset_y;
  return r;
}

AugmentedSample reallocate_with_lambda(const LabeledImage& a, const LabeledImage& b, double lambda) {
  if (a.pixels.width != b.pixels.width || a.pixels.height != b.pixels.height)
    throw std::invalid_argument("domain_reallocation requires identical dimensions (letterbox first)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0,1]");

  AugmentedSample sample;
  sample.recipe = Recipe::reallocation;
  sample.image.domain_tag = DomainTag::augmented;
  sample.image.pixels = kernels::blend_images(a.pixels, b.pixels, lambda);
  sample.image.labels.reserve(a.labels.size() + b.labels.size());
  for (const BoxLabel& box : a.labels) sample.image.labels.push_back(scale_confidence(box, lambda));
  for (const BoxLabel& box : b.labels) sample.image.labels.push_back(scale_confidence(box, 1.0 - lambda));
  sample.provenance.push_back({a.id, a.domain_tag, lambda, lambda});
  sample.provenance.push_back({b.id, b.domain_tag, 1.0 - lambda, 1.0 - lambda});
  return sample;
}

AugmentedSample domain_reallocation(const LabeledImage& a, const LabeledImage& b, double alpha, Rng& rng) {
  const bool a_aug = a.domain_tag == DomainTag::augmented;
  const bool b_aug = b.domain_tag == DomainTag::augmented;
  if (!a_aug && !b_aug && a.domain_tag == b.domain_tag)
    throw std::invalid_argument("domain_reallocation requires one source and one target image");
  return reallocate_with_lambda(a, b, rng.beta_symmetric(alpha));
}

AugmentedSample splice_then_reallocate(const std::vector<LabeledImage>& pool_source,
                                       const std::vector<LabeledImage>& pool_target, int canvas_side, double alpha,
                                       Rng& rng, double clip_drop_threshold, Counters* counters) {
  AugmentedSample first = domain_splice(pool_source, pool_target, canvas_side, rng, clip_drop_threshold, counters);
  AugmentedSample second = domain_splice(pool_source, pool_target, canvas_side, rng, clip_drop_threshold, counters);
  const double lambda = rng.beta_symmetric(alpha);

  AugmentedSample sample;
  sample.recipe = Recipe::splice_reallocation;
  sample.image.domain_tag = DomainTag::augmented;
  sample.image.pixels = kernels::blend_images(first.image.pixels, second.image.pixels, lambda);
  sample.image.labels.reserve(first.image.labels.size() + second.image.labels.size());
  for (const BoxLabel& box : first.image.labels) sample.image.labels.push_back(scale_confidence(box, lambda));
  for (const BoxLabel& box : second.image.labels) sample.image.labels.push_back(scale_confidence(box, 1.0 - lambda));
  for (const ProvenanceEntry& p : first.provenance)
    sample.provenance.push_back({p.origin_id, p.origin_domain, lambda * p.lambda, lambda * p.lambda_cls});
  for (const ProvenanceEntry& p : second.provenance)
    sample.provenance.push_back({p.origin_id, p.origin_domain, (1.0 - lambda) * p.lambda, (1.0 - lambda) * p.lambda_cls});
  return sample;
}

}  // namespace domainaug
