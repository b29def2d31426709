#include "domainaug/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "domainaug/errors.hpp"
#include "domainaug/kernels.hpp"

namespace fs = std::filesystem;

namespace domainaug {

namespace {

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

bool parse_double(std::string_view tok, double& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(std::string_view tok, int& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

struct RawBox {
  int class_index = 0;
  double conf = 1.0;
  double cx = 0, cy = 0, w = 0, h = 0;
};

std::vector<RawBox> parse_label_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  std::vector<RawBox> boxes;
  std::string line;
  int line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 5 && toks.size() != 6) fail("expected 5 or 6 fields, got " + std::to_string(toks.size()));
    RawBox b;
    std::size_t at = 0;
    if (!parse_int(toks[at++], b.class_index) || b.class_index < 0) fail("bad class index '" + std::string(toks[0]) + "'");
    if (toks.size() == 6) {
      if (!parse_double(toks[at], b.conf)) fail("bad confidence '" + std::string(toks[at]) + "'");
      if (!(b.conf >= 0.0 && b.conf <= 1.0)) fail("confidence out of [0,1]");
      ++at;
    }
    double* geom[4] = {&b.cx, &b.cy, &b.w, &b.h};
    const char* names[4] = {"cx", "cy", "w", "h"};
    for (int g = 0; g < 4; ++g, ++at) {
      if (!parse_double(toks[at], *geom[g])) fail(std::string("bad ") + names[g] + " '" + std::string(toks[at]) + "'");
    }
    if (!(b.cx >= 0.0 && b.cx <= 1.0)) fail("cx out of range");
    if (!(b.cy >= 0.0 && b.cy <= 1.0)) fail("cy out of range");
    if (!(b.w > 0.0 && b.w <= 1.0)) fail("w out of range");
    if (!(b.h > 0.0 && b.h <= 1.0)) fail("h out of range");
    boxes.push_back(b);
  }
  return boxes;
}

std::vector<std::string> read_classes_file(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

}  // namespace

Image load_image(const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext != ".png" && ext != ".jpg" && ext != ".jpeg")
    throw DataError("unsupported image format '" + ext + "' for " + path.string() + " (PNG and JPEG only)");
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw DataError("failed to decode image " + path.string());
  Image img(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) {
      img.at(x, y, 0) = row[x][2];
      img.at(x, y, 1) = row[x][1];
      img.at(x, y, 2) = row[x][0];
    }
  }
  return img;
}

void save_image_png(const Image& img, const fs::path& path) {
  cv::Mat m(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      row[x][0] = img.at(x, y, 2);
      row[x][1] = img.at(x, y, 1);
      row[x][2] = img.at(x, y, 0);
    }
  }
  if (!cv::imwrite(path.string(), m)) throw DataError("failed to write image " + path.string());
}

DatasetSplit load_dataset(const fs::path& root, Role role) {
  const fs::path images_dir = root / "images";
  const fs::path labels_dir = root / "labels";
  if (!fs::is_directory(images_dir)) throw DataError("missing images/ directory under " + root.string());
  if (!fs::is_directory(labels_dir)) throw DataError("missing labels/ directory under " + root.string());

  std::vector<fs::path> image_files;
  for (const auto& entry : fs::directory_iterator(images_dir)) {
    if (!entry.is_regular_file()) continue;
    image_files.push_back(entry.path());
  }
  std::sort(image_files.begin(), image_files.end());
  if (image_files.empty()) throw DataError("no images found under " + images_dir.string());
  for (std::size_t i = 1; i < image_files.size(); ++i)
    if (image_files[i].stem() == image_files[i - 1].stem())
      throw DataError("duplicate image stem '" + image_files[i].stem().string() + "' under " + images_dir.string());

  struct Item {
    std::string stem;
    Image pixels;
    std::vector<RawBox> raw;
    std::string error;
  };
  std::vector<Item> items(image_files.size());

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(image_files.size()); ++i) {
    Item& it = items[i];
    it.stem = image_files[i].stem().string();
    try {
      const fs::path label_path = labels_dir / (it.stem + ".txt");
      if (!fs::exists(label_path)) throw DataError("missing label file for stem '" + it.stem + "'");
      it.pixels = load_image(image_files[i]);
      it.raw = parse_label_file(label_path);
    } catch (const std::exception& e) {
      it.error = e.what();
    }
  }
  for (const Item& it : items)
    if (!it.error.empty()) throw DataError(it.error);

  DatasetSplit split;
  split.role = role;
  const fs::path classes_path = root / "classes.txt";
  if (fs::exists(classes_path)) {
    split.category_names = read_classes_file(classes_path);
    if (split.category_names.empty()) throw DataError("classes.txt under " + root.string() + " is empty");
  } else {
    int max_index = -1;
    for (const Item& it : items)
      for (const RawBox& b : it.raw) max_index = std::max(max_index, b.class_index);
    for (int c = 0; c <= max_index; ++c) split.category_names.push_back("class_" + std::to_string(c));
    if (split.category_names.empty()) split.category_names.push_back("class_0");
  }
  const int num_cat = split.num_categories();

  split.images.reserve(items.size());
  for (Item& it : items) {
    LabeledImage li;
    li.id = it.stem;
    li.domain_tag = role == Role::source ? DomainTag::source : DomainTag::target;
    li.pixels = std::move(it.pixels);
    for (const RawBox& b : it.raw) {
      if (b.class_index >= num_cat)
        throw DataError("class index " + std::to_string(b.class_index) + " out of range for stem '" + it.stem +
                        "' (have " + std::to_string(num_cat) + " categories)");
      BoxLabel box;
      box.class_conf.assign(num_cat, 0.0);
      box.class_conf[b.class_index] = b.conf;
      box.cx = b.cx;
      box.cy = b.cy;
      box.w = b.w;
      box.h = b.h;
      const std::string err = validate_box(box, li.pixels.width, li.pixels.height, num_cat);
      if (!err.empty()) throw DataError("stem '" + it.stem + "': " + err);
      li.labels.push_back(std::move(box));
    }
    split.images.push_back(std::move(li));
  }
  return split;
}

int save_dataset(const DatasetSplit& split, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root / "images", ec);
  fs::create_directories(root / "labels", ec);
  if (!fs::is_directory(root / "images") || !fs::is_directory(root / "labels"))
    throw DataError("cannot create dataset directories under " + root.string());

  {
    std::ofstream out(root / "classes.txt", std::ios::binary);
    for (const std::string& name : split.category_names) out << name << "\n";
    if (!out) throw DataError("cannot write classes.txt under " + root.string());
  }

  for (const LabeledImage& li : split.images) {
    save_image_png(li.pixels, root / "images" / (li.id + ".png"));
    std::ofstream out(root / "labels" / (li.id + ".txt"), std::ios::binary);
    if (!out) throw DataError("cannot write label file for '" + li.id + "'");
    for (const BoxLabel& box : li.labels) {
      const int cls = box.argmax_class();
      int nonzero = 0;
      for (double v : box.class_conf)
        if (v != 0.0) ++nonzero;
      if (nonzero > 1)
        throw DataError("box in '" + li.id + "' has " + std::to_string(nonzero) +
                        " nonzero confidences; the label format stores one class per box");
      if (box.is_one_hot())
        out << cls;
      else
        out << cls << ' ' << format_double(box.class_conf[cls]);
      out << ' ' << format_double(box.cx) << ' ' << format_double(box.cy) << ' ' << format_double(box.w) << ' '
          << format_double(box.h) << "\n";
    }
  }
  return static_cast<int>(split.images.size());
}

PixelRect box_pixel_rect(const BoxLabel& box, int image_w, int image_h) {
  PixelRect r;
  const auto clampi = [](long long v, int hi) { return static_cast<int>(std::clamp<long long>(v, 0, hi)); };
  r.x0 = clampi(std::llround((box.cx - box.w / 2) * image_w), image_w);
  r.x1 = clampi(std::llround((box.cx + box.w / 2) * image_w), image_w);
  r.y0 = clampi(std::llround((box.cy - box.h / 2) * image_h), image_h);
  r.y1 = clampi(std::llround((box.cy + box.h / 2) * image_h), image_h);
  return r;
}

LabeledImage resize_letterbox(const LabeledImage& img, int side, Counters* counters) {
  if (side < 2) throw std::invalid_argument("letterbox side must be >= 2");
  const int W = img.pixels.width;
  const int H = img.pixels.height;
  if (W == side && H == side) return img;

  const double scale = std::min(static_cast<double>(side) / W, static_cast<double>(side) / H);
  const int new_w = std::clamp(static_cast<int>(std::llround(W * scale)), 1, side);
  const int new_h = std::clamp(static_cast<int>(std::llround(H * scale)), 1, side);
  const int pad_x = (side - new_w) / 2;
  const int pad_y = (side - new_h) / 2;
  // Effective per-axis scales after rounding; labels use the same map as the pixels.
  const double sx = static_cast<double>(new_w) / W;
  const double sy = static_cast<double>(new_h) / H;

  LabeledImage out;
  out.id = img.id;
  out.domain_tag = img.domain_tag;
  out.pixels = Image(side, side, 114);
  kernels::TileTransform t;
  t.scale_x = sx;
  t.scale_y = sy;
  t.offset_x = pad_x;
  t.offset_y = pad_y;
  t.crop_x0 = pad_x;
  t.crop_y0 = pad_y;
  t.crop_x1 = pad_x + new_w;
  t.crop_y1 = pad_y + new_h;
  kernels::composite_tile(out.pixels, img.pixels, t);

  for (const BoxLabel& box : img.labels) {
    BoxLabel nb = box;
    const double px_w = box.w * W * sx;
    const double px_h = box.h * H * sy;
    if (px_w < 1.0 || px_h < 1.0) {
      if (counters) ++counters->boxes_dropped_degenerate;
      continue;
    }
    nb.cx = (box.cx * W * sx + pad_x) / side;
    nb.cy = (box.cy * H * sy + pad_y) / side;
    nb.w = px_w / side;
    nb.h = px_h / side;
    out.labels.push_back(std::move(nb));
  }
  return out;
}

}  // namespace domainaug
