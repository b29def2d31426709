#ifndef DOMAINAUG_TYPES_HPP
#define DOMAINAUG_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace domainaug {

enum class DomainTag { source, target, augmented };

const char* to_string(DomainTag tag);

// Interleaved RGB, row-major. Pixel (x, y) channel c lives at data[(y*width + x)*3 + c].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  bool empty() const { return width <= 0 || height <= 0; }

  bool operator==(const Image&) const = default;
};

// One annotated object. Geometry is a normalized center/size box; class_conf holds one
// soft confidence per category (typically one-hot).
struct BoxLabel {
  std::vector<double> class_conf;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  // Index of the strongest class; ties resolve to the lowest index.
  int argmax_class() const;
  // True when exactly one entry is 1 and the rest are 0.
  bool is_one_hot() const;

  bool operator==(const BoxLabel&) const = default;
};

struct LabeledImage {
  Image pixels;
  std::vector<BoxLabel> labels;
  DomainTag domain_tag = DomainTag::source;
  std::string id;
};

enum class Role { source, target };

struct DatasetSplit {
  std::vector<LabeledImage> images;
  Role role = Role::source;
  std::vector<std::string> category_names;

  int num_categories() const { return static_cast<int>(category_names.size()); }
};

// Tally of boxes dropped or pairs skipped along the augmentation path. Totals are
// reported per epoch; all fields are plain counts and merge by addition.
struct Counters {
  std::uint64_t boxes_dropped_degenerate = 0;  // below 1 pixel after a transform
  std::uint64_t boxes_dropped_clipped = 0;     // below the clip area threshold in a mosaic
  std::uint64_t exchange_pairs_skipped = 0;    // degenerate donor patch
  std::uint64_t zero_norm_embeddings = 0;      // cosine distance fallback engaged

  Counters& operator+=(const Counters& o) {
    boxes_dropped_degenerate += o.boxes_dropped_degenerate;
    boxes_dropped_clipped += o.boxes_dropped_clipped;
    exchange_pairs_skipped += o.exchange_pairs_skipped;
    zero_norm_embeddings += o.zero_norm_embeddings;
    return *this;
  }
  std::uint64_t total() const {
    return boxes_dropped_degenerate + boxes_dropped_clipped + exchange_pairs_skipped + zero_norm_embeddings;
  }
};

// Validates a label against image dimensions: coordinates in range, positive extent,
// box inside the image up to one pixel of rounding slack. Returns an empty string when valid.
std::string validate_box(const BoxLabel& box, int image_w, int image_h, int num_categories);

}  // namespace domainaug

#endif
