#ifndef DOMAINAUG_DATASET_HPP
#define DOMAINAUG_DATASET_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "domainaug/types.hpp"

namespace domainaug {

// On-disk layout: <root>/images/*.{png,jpg,jpeg} with a same-stem <root>/labels/<stem>.txt.
// Label line: `class cx cy w h` (one-hot) or `class conf cx cy w h` (soft confidence for
// one class), space-separated, one box per line. An optional <root>/classes.txt pins the
// category list; without it the category count is inferred from the largest class index.
DatasetSplit load_dataset(const std::filesystem::path& root, Role role);

// Writes images (always PNG), labels and classes.txt so that load_dataset round-trips.
// Returns the number of images written.
int save_dataset(const DatasetSplit& split, const std::filesystem::path& root);

// Decode/encode a single image file (PNG or JPEG only).
Image load_image(const std::filesystem::path& path);
void save_image_png(const Image& img, const std::filesystem::path& path);

// Scales the image to fit a side x side square, preserving aspect ratio, and pads the rest
// with gray (114,114,114). Labels are remapped onto the new canvas; boxes that fall below
// one pixel of extent are dropped and counted.
LabeledImage resize_letterbox(const LabeledImage& img, int side, Counters* counters = nullptr);

// Pixel rectangle [x0, x1) x [y0, y1) covered by a normalized box.
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};
PixelRect box_pixel_rect(const BoxLabel& box, int image_w, int image_h);

}  // namespace domainaug

#endif
