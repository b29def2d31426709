#include "domainaug/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "domainaug/dataset.hpp"
#include "domainaug/errors.hpp"
#include "domainaug/rng.hpp"

namespace fs = std::filesystem;

namespace domainaug {

namespace {

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string candidate_id(int epoch, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "e%04d_c%06d", epoch, index);
  return buf;
}

DistanceStats stats_of(const std::vector<double>& values) {
  DistanceStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

}  // namespace

void PipelineConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (candidates_per_epoch < 1) throw ConfigError("candidates_per_epoch must be >= 1");
  if (!(shrink_k > 0.0 && shrink_k <= 1.0)) throw ConfigError("k must be in (0,1]");
  if (shrink_count(candidates_per_epoch, shrink_k) < 1)
    throw ConfigError("shrinkage ratio eliminates all candidates: floor(" + std::to_string(candidates_per_epoch) +
                      " * " + format_double(shrink_k) + ") = 0");
  if (mix_splice < 0.0 || mix_reallocation < 0.0 || mix_splice_reallocation < 0.0)
    throw ConfigError("augmentation mix weights must be non-negative");
  if (mix_splice + mix_reallocation + mix_splice_reallocation <= 0.0)
    throw ConfigError("augmentation mix weights must not all be zero");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(alpha_m > 0.0)) throw ConfigError("alpha_m must be positive");
  if (!(p_exchange >= 0.0 && p_exchange <= 1.0)) throw ConfigError("p_exchange must be in [0,1]");
  if (!(clip_drop_threshold >= 0.0 && clip_drop_threshold <= 1.0))
    throw ConfigError("clip_drop_threshold must be in [0,1]");
  if (canvas_side < 2) throw ConfigError("canvas_side must be >= 2");
  if (exchange_donor_domain == DomainTag::augmented)
    throw ConfigError("exchange_donor must be source or target");
  if (provider != "builtin" && provider.rfind("file:", 0) != 0)
    throw ConfigError("provider must be 'builtin' or 'file:<template>', got '" + provider + "'");
  if (provider.rfind("file:", 0) == 0 && provider.find("{epoch}") == std::string::npos)
    throw ConfigError("file provider template must contain {epoch}");
  if (!(poll_interval_s > 0.0)) throw ConfigError("poll_interval_s must be positive");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout_s must be positive");
}

PipelineConfig load_config_file(const fs::path& path, PipelineConfig config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    std::string key, value;
    if (eq != std::string::npos) {
      key = line.substr(0, eq);
      value = line.substr(eq + 1);
    } else {
      key = line;
    }
    const auto trim = [](std::string& s) {
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
      std::size_t i = 0;
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
      s.erase(0, i);
    };
    trim(key);
    trim(value);
    if (key.empty()) {
      if (!value.empty()) fail("missing key");
      continue;
    }
    if (eq == std::string::npos) fail("expected key = value");

    const auto parse_int = [&](int& out) {
      if (std::from_chars(value.data(), value.data() + value.size(), out).ec != std::errc())
        fail("bad integer '" + value + "' for " + key);
    };
    const auto parse_u64 = [&](std::uint64_t& out) {
      if (std::from_chars(value.data(), value.data() + value.size(), out).ec != std::errc())
        fail("bad integer '" + value + "' for " + key);
    };
    const auto parse_real = [&](double& out) {
      if (std::from_chars(value.data(), value.data() + value.size(), out).ec != std::errc())
        fail("bad number '" + value + "' for " + key);
    };
    const auto parse_bool = [&](bool& out) {
      if (value == "1" || value == "true")
        out = true;
      else if (value == "0" || value == "false")
        out = false;
      else
        fail("bad boolean '" + value + "' for " + key);
    };

    if (key == "epochs") parse_int(config.epochs);
    else if (key == "candidates_per_epoch") parse_int(config.candidates_per_epoch);
    else if (key == "k") parse_real(config.shrink_k);
    else if (key == "metric") {
      if (value == "mmd") config.metric = Metric::mmd;
      else if (value == "cosine") config.metric = Metric::cosine;
      else fail("metric must be mmd or cosine");
    } else if (key == "mix_splice") parse_real(config.mix_splice);
    else if (key == "mix_reallocation") parse_real(config.mix_reallocation);
    else if (key == "mix_splice_reallocation") parse_real(config.mix_splice_reallocation);
    else if (key == "box_mode") {
      if (value == "off") config.box_mode.reset();
      else if (value == "direct") config.box_mode = ExchangeMode::direct;
      else if (value == "mixture") config.box_mode = ExchangeMode::mixture;
      else if (value == "gaussian") config.box_mode = ExchangeMode::gaussian;
      else fail("box_mode must be off, direct, mixture or gaussian");
    } else if (key == "alpha") parse_real(config.alpha);
    else if (key == "alpha_m") parse_real(config.alpha_m);
    else if (key == "p_exchange") parse_real(config.p_exchange);
    else if (key == "clip_drop_threshold") parse_real(config.clip_drop_threshold);
    else if (key == "canvas_side") parse_int(config.canvas_side);
    else if (key == "seed") parse_u64(config.seed);
    else if (key == "provider") config.provider = value;
    else if (key == "exchange_donor") {
      if (value == "target") config.exchange_donor_domain = DomainTag::target;
      else if (value == "source") config.exchange_donor_domain = DomainTag::source;
      else fail("exchange_donor must be source or target");
    } else if (key == "frozen_pool") parse_bool(config.frozen_pool);
    else if (key == "poll_interval_s") parse_real(config.poll_interval_s);
    else if (key == "timeout_s") parse_real(config.timeout_s);
    else fail("unknown key '" + key + "'");
  }
  return config;
}

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config) {
  if (config.provider == "builtin") return std::make_unique<BuiltinProvider>();
  if (config.provider.rfind("file:", 0) == 0)
    return std::make_unique<FileProvider>(config.provider.substr(5), config.timeout_s, config.poll_interval_s);
  throw ConfigError("provider must be 'builtin' or 'file:<template>', got '" + config.provider + "'");
}

std::vector<AugmentedSample> generate_candidates(const DatasetSplit& source, const DatasetSplit& target,
                                                 const PipelineConfig& config, int epoch, Counters* counters) {
  config.validate();
  if (target.images.empty()) throw DataError("target split is empty: adaptation requires at least one target image");
  if (source.images.empty()) throw DataError("source split is empty");
  if (source.num_categories() != target.num_categories())
    throw DataError("source and target category counts differ: " + std::to_string(source.num_categories()) + " vs " +
                    std::to_string(target.num_categories()));

  const int n_a = config.candidates_per_epoch;
  const double mix_total = config.mix_splice + config.mix_reallocation + config.mix_splice_reallocation;
  const double p_splice = config.mix_splice / mix_total;
  const double p_realloc = config.mix_reallocation / mix_total;

  std::vector<AugmentedSample> out(n_a);
  std::vector<Counters> local(n_a);
  std::vector<std::string> errors(n_a);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_a; ++i) {
    try {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(i)));
      const double pick = rng.uniform();
      AugmentedSample sample;
      if (pick < p_splice) {
        sample = domain_splice(source.images, target.images, config.canvas_side, rng, config.clip_drop_threshold,
                               &local[i]);
      } else if (pick < p_splice + p_realloc) {
        const LabeledImage& a = source.images[rng.uniform_int(source.images.size())];
        const LabeledImage& b = target.images[rng.uniform_int(target.images.size())];
        const LabeledImage ra = resize_letterbox(a, config.canvas_side, &local[i]);
        const LabeledImage rb = resize_letterbox(b, config.canvas_side, &local[i]);
        sample = domain_reallocation(ra, rb, config.alpha, rng);
      } else {
        sample = splice_then_reallocate(source.images, target.images, config.canvas_side, config.alpha, rng,
                                        config.clip_drop_threshold, &local[i]);
      }
      if (config.box_mode) {
        const auto& donors = config.exchange_donor_domain == DomainTag::target ? target.images : source.images;
        exchange_all(sample.image, donors, *config.box_mode, config.alpha_m, config.p_exchange, rng, &local[i]);
      }
      sample.image.id = candidate_id(epoch, i);
      sample.image.domain_tag = DomainTag::augmented;
      out[i] = std::move(sample);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const std::string& err : errors)
    if (!err.empty()) throw DataError("candidate generation failed: " + err);
  if (counters)
    for (const Counters& c : local) *counters += c;
  return out;
}

void save_candidate_manifest(const fs::path& path, const std::vector<AugmentedSample>& candidates) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << "candidate_id,recipe,n_source,n_target,num_boxes,origins,lambdas\n";
  for (const AugmentedSample& s : candidates) {
    out << s.image.id << ',' << to_string(s.recipe) << ',' << s.count_domain(DomainTag::source) << ','
        << s.count_domain(DomainTag::target) << ',' << s.image.labels.size() << ',';
    for (std::size_t i = 0; i < s.provenance.size(); ++i) {
      if (i) out << '|';
      out << s.provenance[i].origin_id;
    }
    out << ',';
    for (std::size_t i = 0; i < s.provenance.size(); ++i) {
      if (i) out << '|';
      out << format_double(s.provenance[i].lambda);
    }
    out << "\n";
  }
}

namespace {

void append_summary_row(std::ostream& csv, const EpochState& st, int n_a) {
  csv << st.epoch << ',' << n_a << ',' << st.kept.count << ',' << format_double(st.kept.min) << ','
      << format_double(st.kept.mean) << ',' << format_double(st.kept.max) << ',' << format_double(st.rejected.min)
      << ',' << format_double(st.rejected.mean) << ',' << format_double(st.rejected.max) << ','
      << (st.recipe_counts.count("splice") ? st.recipe_counts.at("splice") : 0) << ','
      << (st.recipe_counts.count("reallocation") ? st.recipe_counts.at("reallocation") : 0) << ','
      << (st.recipe_counts.count("splice_reallocation") ? st.recipe_counts.at("splice_reallocation") : 0) << ','
      << st.warnings.boxes_dropped_degenerate << ',' << st.warnings.boxes_dropped_clipped << ','
      << st.warnings.exchange_pairs_skipped << ',' << st.warnings.zero_norm_embeddings << "\n";
}

constexpr const char* kSummaryHeader =
    "epoch,n_a,kept,kept_min,kept_mean,kept_max,rej_min,rej_mean,rej_max,"
    "splice,reallocation,splice_reallocation,"
    "warn_degenerate,warn_clipped,warn_exchange_skipped,warn_zero_norm\n";

}  // namespace

EpochState run_epoch(const std::vector<AugmentedSample>& candidates, const DatasetSplit& target,
                     EmbeddingProvider& provider, const PipelineConfig& config, int epoch, const fs::path& run_dir,
                     Counters generation_warnings) {
  if (candidates.empty()) throw DataError("run_epoch called with no candidates");
  provider.begin_epoch(epoch);

  std::vector<std::string> ids;
  ids.reserve(candidates.size() + target.images.size());
  for (const AugmentedSample& s : candidates) ids.push_back(s.image.id);
  for (const LabeledImage& t : target.images) ids.push_back(t.id);
  const std::vector<std::string> absent = provider.missing(ids, epoch);
  if (!absent.empty()) {
    std::string msg = "embedding provider is missing " + std::to_string(absent.size()) + " id(s) at epoch " +
                      std::to_string(epoch) + ":";
    for (const std::string& id : absent) msg += " " + id;
    throw DataError(msg);
  }

  std::vector<EmbeddingVector> cand_vecs(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i)
    cand_vecs[i] = provider.get(candidates[i].image, epoch);
  std::vector<EmbeddingVector> target_vecs;
  target_vecs.reserve(target.images.size());
  for (const LabeledImage& t : target.images) target_vecs.push_back(provider.get(t, epoch));

  EpochState state;
  state.epoch = epoch;
  state.warnings = generation_warnings;
  const std::vector<double> distances = score_candidates(cand_vecs, target_vecs, config.metric, &state.warnings);

  std::vector<ScoredCandidate> scored(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    scored[i] = {candidates[i].image.id, distances[i], 0, false};
  const std::vector<ScoredCandidate> ranked = rank_candidates(std::move(scored), config.shrink_k);

  const fs::path epoch_dir = run_dir / ("epoch_" + std::to_string(epoch));
  std::error_code ec;
  fs::create_directories(epoch_dir, ec);
  save_score_csv(epoch_dir / "scores.csv", ranked);
  save_candidate_manifest(epoch_dir / "candidates.csv", candidates);

  std::map<std::string, const AugmentedSample*> by_id;
  for (const AugmentedSample& s : candidates) by_id.emplace(s.image.id, &s);

  DatasetSplit kept_split;
  kept_split.role = Role::target;
  kept_split.category_names = target.category_names;
  std::vector<double> kept_d, rej_d;
  for (const ScoredCandidate& c : ranked) {
    if (c.kept) {
      kept_d.push_back(c.distance);
      state.kept_ids.push_back(c.candidate_id);
      kept_split.images.push_back(by_id.at(c.candidate_id)->image);
    } else {
      rej_d.push_back(c.distance);
    }
  }
  save_dataset(kept_split, epoch_dir);

  state.kept = stats_of(kept_d);
  state.rejected = stats_of(rej_d);
  for (const AugmentedSample& s : candidates) ++state.recipe_counts[to_string(s.recipe)];
  return state;
}

RunSummary run_loop(const DatasetSplit& source, const DatasetSplit& target, const PipelineConfig& config,
                    const fs::path& run_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (!fs::is_directory(run_dir)) throw DataError("cannot create run directory " + run_dir.string());

  {
    std::ofstream cfg(run_dir / "config.txt", std::ios::binary);
    cfg << "epochs = " << config.epochs << "\n"
        << "candidates_per_epoch = " << config.candidates_per_epoch << "\n"
        << "k = " << format_double(config.shrink_k) << "\n"
        << "metric = " << to_string(config.metric) << "\n"
        << "mix_splice = " << format_double(config.mix_splice) << "\n"
        << "mix_reallocation = " << format_double(config.mix_reallocation) << "\n"
        << "mix_splice_reallocation = " << format_double(config.mix_splice_reallocation) << "\n"
        << "box_mode = " << (config.box_mode ? to_string(*config.box_mode) : "off") << "\n"
        << "alpha = " << format_double(config.alpha) << "\n"
        << "alpha_m = " << format_double(config.alpha_m) << "\n"
        << "p_exchange = " << format_double(config.p_exchange) << "\n"
        << "clip_drop_threshold = " << format_double(config.clip_drop_threshold) << "\n"
        << "canvas_side = " << config.canvas_side << "\n"
        << "seed = " << config.seed << "\n"
        << "provider = " << config.provider << "\n"
        << "exchange_donor = " << to_string(config.exchange_donor_domain) << "\n"
        << "frozen_pool = " << (config.frozen_pool ? 1 : 0) << "\n";
  }

  const std::unique_ptr<EmbeddingProvider> provider = make_provider(config);
  const bool file_mode = provider->refreshable();

  RunSummary summary;
  summary.run_dir = run_dir;

  std::vector<AugmentedSample> frozen;
  Counters frozen_warnings;

  std::ofstream summary_csv(run_dir / "summary.csv", std::ios::binary);
  summary_csv << kSummaryHeader;
  std::ostringstream summary_txt;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Counters gen_warnings;
    std::vector<AugmentedSample> pool;
    if (config.frozen_pool) {
      if (frozen.empty()) {
        frozen = generate_candidates(source, target, config, 1, &frozen_warnings);
      }
      pool = frozen;
      gen_warnings = frozen_warnings;
    } else {
      pool = generate_candidates(source, target, config, epoch, &gen_warnings);
    }

    if (file_mode) {
      // The pool goes out first so the trainer can embed it; pool.done marks completion.
      const fs::path epoch_dir = run_dir / ("epoch_" + std::to_string(epoch));
      fs::create_directories(epoch_dir, ec);
      DatasetSplit pool_split;
      pool_split.role = Role::target;
      pool_split.category_names = target.category_names;
      for (const AugmentedSample& s : pool) pool_split.images.push_back(s.image);
      save_dataset(pool_split, epoch_dir / "pool");
      std::ofstream(epoch_dir / "pool.done").put('\n');
    }

    EpochState state = run_epoch(pool, target, *provider, config, epoch, run_dir, gen_warnings);
    summary.total_kept += state.kept.count;

    summary_txt << "epoch " << epoch << ": kept " << state.kept.count << "/" << pool.size() << ", kept distance ["
                << format_double(state.kept.min) << ", " << format_double(state.kept.mean) << ", "
                << format_double(state.kept.max) << "]";
    if (state.rejected.count > 0)
      summary_txt << ", rejected distance [" << format_double(state.rejected.min) << ", "
                  << format_double(state.rejected.mean) << ", " << format_double(state.rejected.max) << "]";
    summary_txt << ", warnings " << state.warnings.total() << "\n";
    append_summary_row(summary_csv, state, static_cast<int>(pool.size()));
    summary.epochs.push_back(std::move(state));
  }

  summary_txt << "total kept: " << summary.total_kept << "\n";
  std::ofstream(run_dir / "summary.txt", std::ios::binary) << summary_txt.str();
  return summary;
}

RunReport report(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw DataError("run directory does not exist: " + run_dir.string());

  std::vector<std::pair<int, fs::path>> epoch_dirs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("epoch_", 0) != 0) continue;
    int n = 0;
    const char* b = name.data() + 6;
    if (std::from_chars(b, name.data() + name.size(), n).ec != std::errc()) continue;
    epoch_dirs.emplace_back(n, entry.path());
  }
  std::sort(epoch_dirs.begin(), epoch_dirs.end());
  if (epoch_dirs.empty()) throw DataError("no epoch directories under " + run_dir.string());

  // Warning totals come from summary.csv.
  std::map<int, Counters> warnings;
  {
    std::ifstream in(run_dir / "summary.csv");
    if (!in) throw DataError("missing summary.csv under " + run_dir.string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::size_t start = 0;
      while (start <= line.size()) {
        const auto comma = line.find(',', start);
        cols.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (cols.size() < 16) continue;
      Counters c;
      const int ep = std::atoi(cols[0].c_str());
      c.boxes_dropped_degenerate = std::strtoull(cols[12].c_str(), nullptr, 10);
      c.boxes_dropped_clipped = std::strtoull(cols[13].c_str(), nullptr, 10);
      c.exchange_pairs_skipped = std::strtoull(cols[14].c_str(), nullptr, 10);
      c.zero_norm_embeddings = std::strtoull(cols[15].c_str(), nullptr, 10);
      warnings[ep] = c;
    }
  }

  RunReport rep;
  std::ostringstream text;
  std::ofstream csv(run_dir / "report.csv", std::ios::binary);
  csv << "epoch,bin,lo,hi,count\n";

  for (const auto& [n, dir] : epoch_dirs) {
    const std::vector<ScoredCandidate> scored = load_score_csv(dir / "scores.csv");
    if (scored.empty()) throw DataError("empty scores.csv under " + dir.string());

    EpochReport er;
    er.epoch = n;
    er.n_a = static_cast<int>(scored.size());
    er.dist_lo = scored.front().distance;
    er.dist_hi = scored.front().distance;
    for (const ScoredCandidate& c : scored) {
      if (c.kept) ++er.kept;
      er.dist_lo = std::min(er.dist_lo, c.distance);
      er.dist_hi = std::max(er.dist_hi, c.distance);
    }
    const double span = er.dist_hi - er.dist_lo;
    for (const ScoredCandidate& c : scored) {
      int bin = span > 0.0 ? static_cast<int>((c.distance - er.dist_lo) / span * 10.0) : 0;
      if (bin > 9) bin = 9;
      ++er.histogram[bin];
    }

    // Recipe breakdown from the manifest.
    std::ifstream manifest(dir / "candidates.csv");
    if (!manifest) throw DataError("missing candidates.csv under " + dir.string());
    std::string line;
    std::getline(manifest, line);
    while (std::getline(manifest, line)) {
      const auto c1 = line.find(',');
      if (c1 == std::string::npos) continue;
      const auto c2 = line.find(',', c1 + 1);
      ++er.recipe_counts[line.substr(c1 + 1, c2 - c1 - 1)];
    }
    if (warnings.count(n)) er.warnings = warnings.at(n);

    text << "epoch " << n << ": " << er.kept << "/" << er.n_a << " kept, distance range ["
         << format_double(er.dist_lo) << ", " << format_double(er.dist_hi) << "]\n";
    const double width = span > 0.0 ? span / 10.0 : 0.0;
    int max_count = 1;
    for (int c : er.histogram) max_count = std::max(max_count, c);
    for (int b = 0; b < 10; ++b) {
      const double lo = er.dist_lo + b * width;
      const double hi = b == 9 ? er.dist_hi : er.dist_lo + (b + 1) * width;
      text << "  [" << format_double(lo) << ", " << format_double(hi) << "] " << er.histogram[b] << " ";
      const int bar = er.histogram[b] * 40 / max_count;
      for (int i = 0; i < bar; ++i) text << '#';
      text << "\n";
      csv << n << ',' << b << ',' << format_double(lo) << ',' << format_double(hi) << ',' << er.histogram[b] << "\n";
    }
    text << "  recipes:";
    for (const auto& [name, count] : er.recipe_counts) text << ' ' << name << '=' << count;
    text << "\n  warnings: degenerate=" << er.warnings.boxes_dropped_degenerate
         << " clipped=" << er.warnings.boxes_dropped_clipped
         << " exchange_skipped=" << er.warnings.exchange_pairs_skipped
         << " zero_norm=" << er.warnings.zero_norm_embeddings << "\n";
    rep.epochs.push_back(std::move(er));
  }

  rep.text = text.str();
  return rep;
}

}  // namespace domainaug
