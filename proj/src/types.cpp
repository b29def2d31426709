#include "domainaug/types.hpp"

#include <cmath>
#include <sstream>

namespace domainaug {

const char* to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::source: return "source";
    case DomainTag::target: return "target";
    case DomainTag::augmented: return "augmented";
  }
  return "?";
}

int BoxLabel::argmax_class() const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(class_conf.size()); ++i)
    if (class_conf[i] > class_conf[best]) best = i;
  return best;
}

bool BoxLabel::is_one_hot() const {
  int ones = 0;
  for (double v : class_conf) {
    if (v == 1.0)
      ++ones;
    else if (v != 0.0)
      return false;
  }
  return ones == 1;
}

std::string validate_box(const BoxLabel& box, int image_w, int image_h, int num_categories) {
  std::ostringstream err;
  if (static_cast<int>(box.class_conf.size()) != num_categories) {
    err << "class_conf has " << box.class_conf.size() << " entries, expected " << num_categories;
    return err.str();
  }
  for (double v : box.class_conf)
    if (!(v >= 0.0 && v <= 1.0)) {
      err << "class confidence " << v << " out of [0,1]";
      return err.str();
    }
  if (!(box.cx >= 0.0 && box.cx <= 1.0)) return "cx out of range";
  if (!(box.cy >= 0.0 && box.cy <= 1.0)) return "cy out of range";
  if (!(box.w > 0.0 && box.w <= 1.0)) return "w out of range";
  if (!(box.h > 0.0 && box.h <= 1.0)) return "h out of range";
  // One pixel of slack for rounding at the borders.
  const double sx = image_w > 0 ? 1.0 / image_w : 0.0;
  const double sy = image_h > 0 ? 1.0 / image_h : 0.0;
  if (box.cx - box.w / 2 < -sx || box.cx + box.w / 2 > 1.0 + sx) return "box extends past image horizontally";
  if (box.cy - box.h / 2 < -sy || box.cy + box.h / 2 > 1.0 + sy) return "box extends past image vertically";
  return {};
}

}  // namespace domainaug
