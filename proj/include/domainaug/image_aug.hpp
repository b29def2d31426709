#ifndef DOMAINAUG_IMAGE_AUG_HPP
#define DOMAINAUG_IMAGE_AUG_HPP

#include <string>
#include <vector>

#include "domainaug/rng.hpp"
#include "domainaug/types.hpp"

namespace domainaug {

// Axis-aligned affine placement of one tile: canvas_point = source_point * scale + offset,
// visible only inside the crop rectangle. The same map is applied to box corner points.
struct TilePlacement {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  int crop_x0 = 0, crop_y0 = 0, crop_x1 = 0, crop_y1 = 0;
};

enum class Recipe { splice, reallocation, splice_reallocation };

const char* to_string(Recipe r);

// One contributing input image: its pixel weight and the weight applied to its boxes'
// class confidences.
struct ProvenanceEntry {
  std::string origin_id;
  DomainTag origin_domain = DomainTag::source;
  double lambda = 1.0;
  double lambda_cls = 1.0;
};

struct AugmentedSample {
  LabeledImage image;  // domain_tag == augmented
  Recipe recipe = Recipe::splice;
  std::vector<ProvenanceEntry> provenance;

  int count_domain(DomainTag tag) const {
    int n = 0;
    for (const auto& p : provenance)
      if (p.origin_domain == tag) ++n;
    return n;
  }
};

// Bookkeeping trace of a splice build, for tests and reporting. Maps every output label
// back to its (tile, box) origin.
struct SpliceDetail {
  struct Tile {
    TilePlacement placement;
    DomainTag domain = DomainTag::source;
    int pool_index = 0;
  };
  struct BoxTrace {
    int tile = 0;
    int box = 0;
    double clip_ratio = 1.0;  // surviving area fraction after clipping to the tile crop
    bool dropped = false;
    int output_index = -1;  // index into image.labels when not dropped
  };
  std::vector<Tile> tiles;
  std::vector<BoxTrace> boxes;
  int center_x = 0, center_y = 0;  // jittered mosaic center on the working canvas
  int num_source = 0, num_target = 0;
};

// Four-way cross-domain mosaic. Picks m source + n target tiles (m+n = 4, m,n >= 1),
// composites them around a jittered center on a doubled working canvas, downscales to
// canvas_side, and remaps all labels. Boxes keeping less than clip_drop_threshold of
// their area after clipping are dropped.
AugmentedSample domain_splice(const std::vector<LabeledImage>& pool_source,
                              const std::vector<LabeledImage>& pool_target, int canvas_side, Rng& rng,
                              double clip_drop_threshold = 0.2, Counters* counters = nullptr,
                              SpliceDetail* detail = nullptr);

// Continuous canvas rectangle of a box pushed through a tile placement (corner transform,
// before any clipping).
struct ContinuousRect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
ContinuousRect placement_map_box(const BoxLabel& box, int image_w, int image_h, const TilePlacement& t);

// Two-way weighted blend with lambda ~ Beta(alpha, alpha): pixels lambda*a + (1-lambda)*b,
// labels concatenated with geometry unchanged and confidences scaled by lambda / 1-lambda.
AugmentedSample domain_reallocation(const LabeledImage& a, const LabeledImage& b, double alpha, Rng& rng);

// Same blend with the weight pinned; lambda must be in [0, 1].
AugmentedSample reallocate_with_lambda(const LabeledImage& a, const LabeledImage& b, double lambda);

// Reallocation applied to two independently generated splice mosaics.
AugmentedSample splice_then_reallocate(const std::vector<LabeledImage>& pool_source,
                                       const std::vector<LabeledImage>& pool_target, int canvas_side, double alpha,
                                       Rng& rng, double clip_drop_threshold = 0.2, Counters* counters = nullptr);

}  // namespace domainaug

#endif
