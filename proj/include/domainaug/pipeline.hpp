#ifndef DOMAINAUG_PIPELINE_HPP
#define DOMAINAUG_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "domainaug/box_aug.hpp"
#include "domainaug/embedding.hpp"
#include "domainaug/image_aug.hpp"
#include "domainaug/selection.hpp"
#include "domainaug/types.hpp"

namespace domainaug {

// All knobs of the epoch loop. `provider` is either "builtin" or "file:<template>" where the
// template contains {epoch}.
struct PipelineConfig {
  int epochs = 1;
  int candidates_per_epoch = 16;
  double shrink_k = 0.8;
  Metric metric = Metric::mmd;
  double mix_splice = 0.5;
  double mix_reallocation = 0.25;
  double mix_splice_reallocation = 0.25;
  std::optional<ExchangeMode> box_mode;  // disengaged = no box-level exchange
  double alpha = 1.0;
  double alpha_m = 1.0;
  double p_exchange = 0.5;
  double clip_drop_threshold = 0.2;
  int canvas_side = 640;
  std::uint64_t seed = 0;
  std::string provider = "builtin";
  DomainTag exchange_donor_domain = DomainTag::target;  // set to source for the reciprocal direction
  bool frozen_pool = false;
  double poll_interval_s = 1.0;
  double timeout_s = 600.0;

  // Throws ConfigError on invalid values.
  void validate() const;
};

// Reads `key = value` lines ('#' comments) on top of the given defaults.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig defaults = {});

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config);

struct DistanceStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  int count = 0;
};

struct EpochState {
  int epoch = 0;
  std::vector<std::string> kept_ids;  // ascending distance
  DistanceStats kept;
  DistanceStats rejected;
  std::map<std::string, int> recipe_counts;
  Counters warnings;
};

struct RunSummary {
  std::filesystem::path run_dir;
  std::vector<EpochState> epochs;
  int total_kept = 0;
};

// Builds the per-epoch candidate pool: candidates_per_epoch samples, recipes drawn from the
// configured mix, each candidate seeded by (seed, epoch, index). Ids are e<epoch>_c<index>.
std::vector<AugmentedSample> generate_candidates(const DatasetSplit& source, const DatasetSplit& target,
                                                 const PipelineConfig& config, int epoch,
                                                 Counters* counters = nullptr);

// CSV manifest of a candidate pool: recipe, domain counts, contributing images and weights.
void save_candidate_manifest(const std::filesystem::path& path, const std::vector<AugmentedSample>& candidates);

// Embeds candidates and targets, scores, filters, and writes epoch_<n>/ (kept set as a
// dataset, scores.csv, candidates.csv manifest) under run_dir.
EpochState run_epoch(const std::vector<AugmentedSample>& candidates, const DatasetSplit& target,
                     EmbeddingProvider& provider, const PipelineConfig& config, int epoch,
                     const std::filesystem::path& run_dir, Counters generation_warnings = {});

// The full loop: for each epoch, regenerate candidates, (file mode) emit the pool and await
// embeddings, then score/filter/emit. Writes summary.txt and summary.csv.
RunSummary run_loop(const DatasetSplit& source, const DatasetSplit& target, const PipelineConfig& config,
                    const std::filesystem::path& run_dir);

struct EpochReport {
  int epoch = 0;
  int n_a = 0;
  int kept = 0;
  double dist_lo = 0.0;
  double dist_hi = 0.0;
  std::array<int, 10> histogram{};
  std::map<std::string, int> recipe_counts;
  Counters warnings;
};

struct RunReport {
  std::vector<EpochReport> epochs;
  std::string text;
};

// Re-reads a finished run directory and renders distance histograms, kept/rejected counts,
// recipe breakdown and warning totals. Also writes report.csv under run_dir.
RunReport report(const std::filesystem::path& run_dir);

}  // namespace domainaug

#endif
