#include "domainaug/embedding.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "domainaug/errors.hpp"
#include "domainaug/kernels.hpp"

namespace fs = std::filesystem;

namespace domainaug {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

EmbeddingVector embed_builtin(const LabeledImage& img) {
  if (img.pixels.empty()) throw DataError("cannot embed empty image '" + img.id + "'");
  EmbeddingVector v;
  v.values = kernels::grid_mean_pool(img.pixels, kBuiltinGrid);
  v.source_id = img.id;
  return v;
}

std::map<std::string, EmbeddingVector> load_embedding_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("embedding file " + path.string() + " is empty");
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  int dim = 0;
  if (line.rfind("dim=", 0) != 0 ||
      std::from_chars(line.data() + 4, line.data() + line.size(), dim).ec != std::errc() || dim < 1)
    throw DataError("embedding file " + path.string() + ": bad header '" + line + "', expected dim=<d>");

  std::map<std::string, EmbeddingVector> table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size() || line[i] == '\r') continue;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    const std::string id = line.substr(i, j - i);
    const auto fail = [&](const std::string& what) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": record '" + id + "': " + what);
    };
    EmbeddingVector v;
    v.source_id = id;
    v.values.reserve(dim);
    const char* p = line.data() + j;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p >= end) break;
      double x = 0;
      auto [np, ec] = std::from_chars(p, end, x);
      if (ec != std::errc()) fail("unparseable value");
      if (!std::isfinite(x)) fail("non-finite value");
      v.values.push_back(x);
      p = np;
    }
    if (v.dimension() != dim)
      fail("has " + std::to_string(v.dimension()) + " values, header declares " + std::to_string(dim));
    if (table.count(id)) fail("duplicate id");
    table.emplace(id, std::move(v));
  }
  return table;
}

void save_embedding_file(const fs::path& path, const std::vector<EmbeddingVector>& vectors) {
  if (vectors.empty()) throw DataError("refusing to write empty embedding file " + path.string());
  const int dim = vectors.front().dimension();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embedding file " + path.string());
  out << "dim=" << dim << "\n";
  for (const EmbeddingVector& v : vectors) {
    if (v.dimension() != dim)
      throw DataError("embedding dimension mismatch for '" + v.source_id + "' while writing " + path.string());
    out << v.source_id;
    for (double x : v.values) out << ' ' << format_double(x);
    out << "\n";
  }
}

EmbeddingVector BuiltinProvider::get(const LabeledImage& img, int epoch) {
  EmbeddingVector v = embed_builtin(img);
  v.epoch = epoch;
  return v;
}

FileProvider::FileProvider(std::string path_template, double timeout_s, double poll_interval_s)
    : template_(std::move(path_template)), timeout_s_(timeout_s), poll_interval_s_(poll_interval_s) {
  if (template_.find("{epoch}") == std::string::npos)
    throw ConfigError("embedding path template must contain {epoch}: " + template_);
}

fs::path FileProvider::path_for_epoch(int epoch) const {
  std::string p = template_;
  const auto pos = p.find("{epoch}");
  p.replace(pos, 7, std::to_string(epoch));
  return p;
}

void FileProvider::begin_epoch(int epoch) {
  const fs::path path = path_for_epoch(epoch);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s_);
  while (!fs::exists(path)) {
    if (std::chrono::steady_clock::now() >= deadline)
      throw ProviderTimeout("embedding file for epoch " + std::to_string(epoch) + " did not appear within " +
                            std::to_string(timeout_s_) + "s: " + path.string());
    std::this_thread::sleep_for(std::chrono::duration<double>(poll_interval_s_));
  }
  table_ = load_embedding_file(path);
  if (table_.empty()) throw DataError("embedding file " + path.string() + " has no records");
  const int dim = table_.begin()->second.dimension();
  if (dim_ >= 0 && dim != dim_)
    throw DataError("embedding dimension changed between epochs: " + std::to_string(dim_) + " -> " + std::to_string(dim));
  dim_ = dim;
  loaded_epoch_ = epoch;
  for (auto& [id, v] : table_) v.epoch = epoch;
}

EmbeddingVector FileProvider::get(const LabeledImage& img, int epoch) {
  if (epoch != loaded_epoch_) begin_epoch(epoch);
  const auto it = table_.find(img.id);
  if (it == table_.end())
    throw DataError("embedding provider is missing id '" + img.id + "' at epoch " + std::to_string(epoch));
  return it->second;
}

std::vector<std::string> FileProvider::missing(const std::vector<std::string>& ids, int epoch) {
  if (epoch != loaded_epoch_) begin_epoch(epoch);
  std::vector<std::string> out;
  for (const std::string& id : ids)
    if (!table_.count(id)) out.push_back(id);
  return out;
}

}  // namespace domainaug
