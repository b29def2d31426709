#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "domainaug/dataset.hpp"
#include "domainaug/errors.hpp"
#include "domainaug/pipeline.hpp"
#include "domainaug/selection.hpp"

namespace fs = std::filesystem;
using namespace domainaug;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTimeout = 4;

struct ConfigFlags {
  std::string config_path;
  std::optional<int> epochs, candidates, canvas_side;
  std::optional<double> k, alpha, alpha_m, p_exchange, clip_drop, poll_interval, timeout;
  std::optional<double> mix_splice, mix_realloc, mix_combined;
  std::optional<std::string> metric, box_mode, provider, exchange_donor;
  std::optional<std::uint64_t> seed;
  std::optional<bool> frozen_pool;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file; flags override it");
  cmd->add_option("--epochs,-T", f.epochs, "number of epochs");
  cmd->add_option("--candidates,-n", f.candidates, "candidates generated per epoch");
  cmd->add_option("--k", f.k, "shrinkage ratio in (0,1]");
  cmd->add_option("--metric", f.metric, "mmd or cosine");
  cmd->add_option("--mix-splice", f.mix_splice, "weight of the 4-way mosaic recipe");
  cmd->add_option("--mix-reallocation", f.mix_realloc, "weight of the 2-way blend recipe");
  cmd->add_option("--mix-splice-reallocation", f.mix_combined, "weight of the combined recipe");
  cmd->add_option("--box-mode", f.box_mode, "off, direct, mixture or gaussian");
  cmd->add_option("--alpha", f.alpha, "Beta parameter for the blend weight");
  cmd->add_option("--alpha-m", f.alpha_m, "Beta parameter for mixture exchange");
  cmd->add_option("--p-exchange", f.p_exchange, "per-box exchange probability");
  cmd->add_option("--clip-drop-threshold", f.clip_drop, "minimum surviving area fraction after clipping");
  cmd->add_option("--canvas-side", f.canvas_side, "output image side in pixels");
  cmd->add_option("--provider", f.provider, "builtin or file:<template with {epoch}>");
  cmd->add_option("--exchange-donor", f.exchange_donor, "donor domain for box exchange: target or source");
  cmd->add_option("--frozen-pool", f.frozen_pool, "reuse the epoch-1 candidate pool every epoch");
  cmd->add_option("--poll-interval", f.poll_interval, "seconds between embedding file polls");
  cmd->add_option("--timeout", f.timeout, "seconds to wait for an embedding file");
  cmd->add_option("--seed", f.seed, "RNG seed");
}

PipelineConfig resolve_config(const ConfigFlags& f, bool seed_required) {
  PipelineConfig cfg;
  if (!f.config_path.empty()) cfg = load_config_file(f.config_path, cfg);
  if (f.epochs) cfg.epochs = *f.epochs;
  if (f.candidates) cfg.candidates_per_epoch = *f.candidates;
  if (f.k) cfg.shrink_k = *f.k;
  if (f.metric) {
    if (*f.metric == "mmd") cfg.metric = Metric::mmd;
    else if (*f.metric == "cosine") cfg.metric = Metric::cosine;
    else throw ConfigError("metric must be mmd or cosine");
  }
  if (f.mix_splice) cfg.mix_splice = *f.mix_splice;
  if (f.mix_realloc) cfg.mix_reallocation = *f.mix_realloc;
  if (f.mix_combined) cfg.mix_splice_reallocation = *f.mix_combined;
  if (f.box_mode) {
    if (*f.box_mode == "off") cfg.box_mode.reset();
    else if (*f.box_mode == "direct") cfg.box_mode = ExchangeMode::direct;
    else if (*f.box_mode == "mixture") cfg.box_mode = ExchangeMode::mixture;
    else if (*f.box_mode == "gaussian") cfg.box_mode = ExchangeMode::gaussian;
    else throw ConfigError("box-mode must be off, direct, mixture or gaussian");
  }
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.alpha_m) cfg.alpha_m = *f.alpha_m;
  if (f.p_exchange) cfg.p_exchange = *f.p_exchange;
  if (f.clip_drop) cfg.clip_drop_threshold = *f.clip_drop;
  if (f.canvas_side) cfg.canvas_side = *f.canvas_side;
  if (f.provider) cfg.provider = *f.provider;
  if (f.exchange_donor) {
    if (*f.exchange_donor == "target") cfg.exchange_donor_domain = DomainTag::target;
    else if (*f.exchange_donor == "source") cfg.exchange_donor_domain = DomainTag::source;
    else throw ConfigError("exchange-donor must be source or target");
  }
  if (f.frozen_pool) cfg.frozen_pool = *f.frozen_pool;
  if (f.poll_interval) cfg.poll_interval_s = *f.poll_interval;
  if (f.timeout) cfg.timeout_s = *f.timeout;
  if (f.seed) cfg.seed = *f.seed;
  else if (seed_required) throw ConfigError("--seed is required");
  cfg.validate();
  return cfg;
}

int run_main(int argc, char** argv) {
  CLI::App app{"Domain-aware detection-dataset augmentation with adaptive candidate filtering"};
  app.require_subcommand(1);

  // augment
  auto* augment = app.add_subcommand("augment", "Generate one pool of augmented candidates");
  std::string aug_source, aug_target, aug_out;
  ConfigFlags aug_flags;
  augment->add_option("--source", aug_source, "source dataset directory")->required();
  augment->add_option("--target", aug_target, "target dataset directory")->required();
  augment->add_option("--out", aug_out, "output dataset directory")->required();
  add_config_flags(augment, aug_flags);

  // score
  auto* score = app.add_subcommand("score", "Score a candidate dataset against the target set");
  std::string score_cands, score_target, score_out, score_embeddings;
  ConfigFlags score_flags;
  score->add_option("--pool", score_cands, "candidate dataset directory")->required();
  score->add_option("--target", score_target, "target dataset directory")->required();
  score->add_option("--out", score_out, "output CSV path")->required();
  score->add_option("--embeddings", score_embeddings, "embedding file covering candidate and target ids");
  add_config_flags(score, score_flags);

  // filter
  auto* filter = app.add_subcommand("filter", "Apply the shrinkage filter to a score CSV");
  std::string filter_in, filter_out;
  double filter_k = 0.8;
  filter->add_option("--scores", filter_in, "input score CSV")->required();
  filter->add_option("--out", filter_out, "output CSV path")->required();
  filter->add_option("--k", filter_k, "shrinkage ratio in (0,1]");

  // run
  auto* run = app.add_subcommand("run", "Run the full epoch loop");
  std::string run_source, run_target, run_out;
  ConfigFlags run_flags;
  run->add_option("--source", run_source, "source dataset directory")->required();
  run->add_option("--target", run_target, "target dataset directory")->required();
  run->add_option("--out", run_out, "run output directory")->required();
  add_config_flags(run, run_flags);

  // report
  auto* rep = app.add_subcommand("report", "Summarize a finished run directory");
  std::string rep_dir;
  rep->add_option("--run-dir", rep_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*augment) {
      const PipelineConfig cfg = resolve_config(aug_flags, true);
      const DatasetSplit source = load_dataset(aug_source, Role::source);
      const DatasetSplit target = load_dataset(aug_target, Role::target);
      Counters counters;
      const std::vector<AugmentedSample> pool = generate_candidates(source, target, cfg, 1, &counters);
      DatasetSplit out_split;
      out_split.role = Role::target;
      out_split.category_names = target.category_names;
      for (const AugmentedSample& s : pool) out_split.images.push_back(s.image);
      const int written = save_dataset(out_split, aug_out);
      save_candidate_manifest(fs::path(aug_out) / "candidates.csv", pool);
      std::printf("wrote %d candidates to %s (warnings: %llu)\n", written, aug_out.c_str(),
                  static_cast<unsigned long long>(counters.total()));
    } else if (*score) {
      const PipelineConfig cfg = resolve_config(score_flags, false);
      const DatasetSplit cands = load_dataset(score_cands, Role::target);
      const DatasetSplit target = load_dataset(score_target, Role::target);
      std::vector<EmbeddingVector> cand_vecs, target_vecs;
      if (!score_embeddings.empty()) {
        const auto table = load_embedding_file(score_embeddings);
        const auto lookup = [&](const std::string& id) {
          const auto it = table.find(id);
          if (it == table.end()) throw DataError("embedding file is missing id '" + id + "'");
          return it->second;
        };
        for (const LabeledImage& img : cands.images) cand_vecs.push_back(lookup(img.id));
        for (const LabeledImage& img : target.images) target_vecs.push_back(lookup(img.id));
      } else {
        for (const LabeledImage& img : cands.images) cand_vecs.push_back(embed_builtin(img));
        for (const LabeledImage& img : target.images) target_vecs.push_back(embed_builtin(img));
      }
      Counters counters;
      const std::vector<double> d = score_candidates(cand_vecs, target_vecs, cfg.metric, &counters);
      std::vector<ScoredCandidate> scored(cands.images.size());
      for (std::size_t i = 0; i < cands.images.size(); ++i) scored[i] = {cands.images[i].id, d[i], 0, false};
      const auto ranked = rank_candidates(std::move(scored), cfg.shrink_k);
      save_score_csv(score_out, ranked);
      std::printf("scored %zu candidates with %s, kept %d, wrote %s\n", cands.images.size(), to_string(cfg.metric),
                  shrink_count(static_cast<int>(cands.images.size()), cfg.shrink_k), score_out.c_str());
    } else if (*filter) {
      const std::vector<ScoredCandidate> scored = load_score_csv(filter_in);
      const auto ranked = rank_candidates(scored, filter_k);
      save_score_csv(filter_out, ranked);
      int kept = 0;
      for (const auto& c : ranked)
        if (c.kept) ++kept;
      std::printf("kept %d of %zu candidates, wrote %s\n", kept, ranked.size(), filter_out.c_str());
    } else if (*run) {
      const PipelineConfig cfg = resolve_config(run_flags, true);
      const DatasetSplit source = load_dataset(run_source, Role::source);
      const DatasetSplit target = load_dataset(run_target, Role::target);
      const RunSummary summary = run_loop(source, target, cfg, run_out);
      for (const EpochState& st : summary.epochs)
        std::printf("epoch %d: kept %d, kept mean distance %.6g\n", st.epoch, st.kept.count, st.kept.mean);
      std::printf("run complete: %d kept over %zu epochs, outputs under %s\n", summary.total_kept,
                  summary.epochs.size(), run_out.c_str());
    } else if (*rep) {
      const RunReport r = report(rep_dir);
      std::fputs(r.text.c_str(), stdout);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ProviderTimeout& e) {
    std::fprintf(stderr, "provider timeout: %s\n", e.what());
    return kExitTimeout;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run_main(argc, argv); }
