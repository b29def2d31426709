#ifndef DOMAINAUG_EMBEDDING_HPP
#define DOMAINAUG_EMBEDDING_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "domainaug/types.hpp"

namespace domainaug {

struct EmbeddingVector {
  std::vector<double> values;
  std::string source_id;
  int epoch = 0;

  int dimension() const { return static_cast<int>(values.size()); }
};

// 8x8 color-grid embedding: per-cell per-channel mean scaled to [0, 1], 192 dims.
// Deterministic and invariant to lossless re-encoding, so the pipeline runs without a trainer.
inline constexpr int kBuiltinGrid = 8;
inline constexpr int kBuiltinDim = kBuiltinGrid * kBuiltinGrid * 3;
EmbeddingVector embed_builtin(const LabeledImage& img);

// Exchange format: line 1 `dim=<d>`, then `<id> <v1> ... <vd>` per record.
std::map<std::string, EmbeddingVector> load_embedding_file(const std::filesystem::path& path);
void save_embedding_file(const std::filesystem::path& path, const std::vector<EmbeddingVector>& vectors);

// Produces per-image feature vectors for one epoch. Implementations must be deterministic
// within an epoch: same image id + same epoch always yields the same vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  // True when a trainer refreshes the vectors between epochs.
  virtual bool refreshable() const = 0;
  // Called once per epoch before any get(); file-backed providers load here.
  virtual void begin_epoch(int epoch) = 0;
  virtual EmbeddingVector get(const LabeledImage& img, int epoch) = 0;
  // Ids from `ids` the provider cannot serve this epoch.
  virtual std::vector<std::string> missing(const std::vector<std::string>& ids, int epoch) = 0;
};

class BuiltinProvider final : public EmbeddingProvider {
 public:
  int dimension() const override { return kBuiltinDim; }
  bool refreshable() const override { return false; }
  void begin_epoch(int) override {}
  EmbeddingVector get(const LabeledImage& img, int epoch) override;
  std::vector<std::string> missing(const std::vector<std::string>&, int) override { return {}; }
};

// Reads one embedding file per epoch from a path template in which `{epoch}` is replaced
// by the epoch index. Polls for the file until timeout_s elapses.
class FileProvider final : public EmbeddingProvider {
 public:
  FileProvider(std::string path_template, double timeout_s, double poll_interval_s = 1.0);

  int dimension() const override { return dim_; }
  bool refreshable() const override { return true; }
  void begin_epoch(int epoch) override;
  EmbeddingVector get(const LabeledImage& img, int epoch) override;
  std::vector<std::string> missing(const std::vector<std::string>& ids, int epoch) override;

  std::filesystem::path path_for_epoch(int epoch) const;

 private:
  std::string template_;
  double timeout_s_;
  double poll_interval_s_;
  int dim_ = -1;
  int loaded_epoch_ = -1;
  std::map<std::string, EmbeddingVector> table_;
};

}  // namespace domainaug

#endif
