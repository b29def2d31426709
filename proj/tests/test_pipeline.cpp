#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "domainaug/errors.hpp"
#include "domainaug/pipeline.hpp"

#include "fixtures.hpp"

using namespace domainaug;
using namespace test_support;

namespace {

PipelineConfig small_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.epochs = 2;
  cfg.candidates_per_epoch = 10;
  cfg.shrink_k = 0.8;
  cfg.canvas_side = 96;
  cfg.seed = seed;
  cfg.mix_splice = 0.6;
  cfg.mix_reallocation = 0.2;
  cfg.mix_splice_reallocation = 0.2;
  return cfg;
}

DatasetSplit small_source() {
  return fixture_split(Role::source, 6, 1001, {.width = 40, .height = 40});
}
DatasetSplit small_target() {
  return fixture_split(Role::target, 3, 2002, {.width = 40, .height = 40, .dark = true});
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config validation rejects bad knobs") {
  PipelineConfig cfg = small_config(1);
  SUBCASE("epochs") { cfg.epochs = 0; CHECK_THROWS_AS(cfg.validate(), ConfigError); }
  SUBCASE("k range") { cfg.shrink_k = 1.5; CHECK_THROWS_AS(cfg.validate(), ConfigError); }
  SUBCASE("k eliminates everything") {
    cfg.candidates_per_epoch = 1;
    cfg.shrink_k = 0.3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("mix weights") {
    cfg.mix_splice = cfg.mix_reallocation = cfg.mix_splice_reallocation = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("negative mix weight") { cfg.mix_splice = -0.1; CHECK_THROWS_AS(cfg.validate(), ConfigError); }
  SUBCASE("provider string") { cfg.provider = "grpc:foo"; CHECK_THROWS_AS(cfg.validate(), ConfigError); }
  SUBCASE("file template needs {epoch}") {
    cfg.provider = "file:/tmp/embeddings.txt";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("config file parsing with overrides and errors") {
  TempDir dir("config");
  {
    std::ofstream out(dir.path() / "run.conf");
    out << "# comment\n"
        << "epochs = 5\n"
        << "candidates_per_epoch = 24\n"
        << "k = 0.5\n"
        << "metric = cosine\n"
        << "box_mode = gaussian\n"
        << "seed = 77\n"
        << "mix_splice = 1\n"
        << "mix_reallocation = 0\n"
        << "mix_splice_reallocation = 0\n";
  }
  const PipelineConfig cfg = load_config_file(dir.path() / "run.conf");
  CHECK(cfg.epochs == 5);
  CHECK(cfg.candidates_per_epoch == 24);
  CHECK(cfg.shrink_k == 0.5);
  CHECK(cfg.metric == Metric::cosine);
  REQUIRE(cfg.box_mode.has_value());
  CHECK(*cfg.box_mode == ExchangeMode::gaussian);
  CHECK(cfg.seed == 77);

  {
    std::ofstream out(dir.path() / "bad.conf");
    out << "not_a_key = 3\n";
  }
  CHECK_THROWS_AS(load_config_file(dir.path() / "bad.conf"), ConfigError);
}

TEST_CASE("generate_candidates: counts, ids, determinism, splice provenance") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(99);
  cfg.candidates_per_epoch = 17;
  cfg.mix_splice = 1.0;
  cfg.mix_reallocation = 0.0;
  cfg.mix_splice_reallocation = 0.0;

  const auto pool_a = generate_candidates(source, target, cfg, 1);
  REQUIRE(pool_a.size() == 17);
  for (const auto& s : pool_a) {
    CHECK(s.recipe == Recipe::splice);
    CHECK(s.provenance.size() == 4);  // forced by m + n = 4
    CHECK(s.image.domain_tag == DomainTag::augmented);
  }
  CHECK(pool_a.front().image.id == "e0001_c000000");
  CHECK(pool_a.back().image.id == "e0001_c000016");

  const auto pool_b = generate_candidates(source, target, cfg, 1);
  for (std::size_t i = 0; i < pool_a.size(); ++i) {
    CHECK(pool_a[i].image.id == pool_b[i].image.id);
    CHECK(pool_a[i].image.pixels == pool_b[i].image.pixels);
  }

  // A different epoch draws a different stream.
  const auto pool_c = generate_candidates(source, target, cfg, 2);
  CHECK(pool_c.front().image.id == "e0002_c000000");
  bool any_diff = false;
  for (std::size_t i = 0; i < pool_a.size(); ++i)
    if (!(pool_c[i].image.pixels == pool_a[i].image.pixels)) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("generate_candidates demands a non-empty target split") {
  const DatasetSplit source = small_source();
  DatasetSplit empty_target;
  empty_target.role = Role::target;
  empty_target.category_names = source.category_names;
  CHECK_THROWS_AS(generate_candidates(source, empty_target, small_config(1), 1), DataError);
}

TEST_CASE("run_epoch filters, persists and reports stats") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(5);
  cfg.candidates_per_epoch = 10;
  const auto pool = generate_candidates(source, target, cfg, 1);

  TempDir dir("epoch");
  BuiltinProvider provider;

  SUBCASE("k = 0.8 keeps exactly 8 and kept distances dominate rejected") {
    const EpochState st = run_epoch(pool, target, provider, cfg, 1, dir.path());
    CHECK(st.kept.count == 8);
    CHECK(st.kept_ids.size() == 8);
    CHECK(st.rejected.count == 2);
    CHECK(st.kept.mean <= st.rejected.mean);
    CHECK(st.kept.max <= st.rejected.min);  // partition respects the distance order

    const DatasetSplit kept = load_dataset(dir.path() / "epoch_1", Role::target);
    CHECK(kept.images.size() == 8);
    const auto scores = load_score_csv(dir.path() / "epoch_1" / "scores.csv");
    CHECK(scores.size() == 10);
    int kept_flags = 0;
    for (const auto& s : scores) kept_flags += s.kept ? 1 : 0;
    CHECK(kept_flags == 8);
    CHECK(std::filesystem::exists(dir.path() / "epoch_1" / "candidates.csv"));
  }
  SUBCASE("k = 1 keeps everything") {
    cfg.shrink_k = 1.0;
    const EpochState st = run_epoch(pool, target, provider, cfg, 1, dir.path());
    CHECK(st.kept.count == 10);
    CHECK(st.rejected.count == 0);
  }
}

TEST_CASE("run_loop with the builtin provider is self-contained and deterministic") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(123);
  cfg.epochs = 3;

  TempDir dir_a("runA");
  TempDir dir_b("runB");
  const RunSummary a = run_loop(source, target, cfg, dir_a.path());
  const RunSummary b = run_loop(source, target, cfg, dir_b.path());

  REQUIRE(a.epochs.size() == 3);
  CHECK(a.total_kept == 3 * 8);
  for (int n = 1; n <= 3; ++n) {
    CHECK(std::filesystem::is_directory(dir_a.path() / ("epoch_" + std::to_string(n))));
    CHECK(read_text(dir_a.path() / ("epoch_" + std::to_string(n)) / "scores.csv") ==
          read_text(dir_b.path() / ("epoch_" + std::to_string(n)) / "scores.csv"));
  }
  CHECK(read_text(dir_a.path() / "summary.csv") == read_text(dir_b.path() / "summary.csv"));
  CHECK(read_text(dir_a.path() / "summary.txt") == read_text(dir_b.path() / "summary.txt"));

  // Epoch sizes hold every epoch.
  for (const EpochState& st : a.epochs) CHECK(st.kept.count == 8);
}

TEST_CASE("frozen pool reuses the epoch-1 candidates") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(321);
  cfg.epochs = 2;
  cfg.frozen_pool = true;
  TempDir dir("frozen");
  const RunSummary s = run_loop(source, target, cfg, dir.path());
  CHECK(read_text(dir.path() / "epoch_1" / "scores.csv") == read_text(dir.path() / "epoch_2" / "scores.csv"));
}

TEST_CASE("file provider mode reproduces the builtin run when fed builtin embeddings") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig builtin_cfg = small_config(777);
  builtin_cfg.epochs = 2;

  TempDir builtin_dir("fbuiltin");
  const RunSummary want = run_loop(source, target, builtin_cfg, builtin_dir.path());

  // Precompute per-epoch embedding files from the (deterministic) pools.
  TempDir emb_dir("femb");
  for (int epoch = 1; epoch <= builtin_cfg.epochs; ++epoch) {
    const auto pool = generate_candidates(source, target, builtin_cfg, epoch);
    std::vector<EmbeddingVector> vecs;
    for (const auto& s : pool) vecs.push_back(embed_builtin(s.image));
    for (const auto& t : target.images) vecs.push_back(embed_builtin(t));
    save_embedding_file(emb_dir.path() / ("emb_" + std::to_string(epoch) + ".txt"), vecs);
  }

  PipelineConfig file_cfg = builtin_cfg;
  file_cfg.provider = "file:" + (emb_dir.path() / "emb_{epoch}.txt").string();
  TempDir file_dir("ffile");
  const RunSummary got = run_loop(source, target, file_cfg, file_dir.path());

  for (int n = 1; n <= builtin_cfg.epochs; ++n) {
    CHECK(read_text(builtin_dir.path() / ("epoch_" + std::to_string(n)) / "scores.csv") ==
          read_text(file_dir.path() / ("epoch_" + std::to_string(n)) / "scores.csv"));
    // File mode also emits the full pool for the trainer.
    CHECK(std::filesystem::is_directory(file_dir.path() / ("epoch_" + std::to_string(n)) / "pool" / "images"));
    CHECK(std::filesystem::exists(file_dir.path() / ("epoch_" + std::to_string(n)) / "pool.done"));
  }
  CHECK(got.total_kept == want.total_kept);
}

TEST_CASE("file provider handshake: a trainer thread answering pool.done drives the loop") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(888);
  cfg.epochs = 2;
  cfg.poll_interval_s = 0.02;
  cfg.timeout_s = 20.0;

  TempDir dir("handshake");
  const auto run_dir = dir.path() / "run";
  const auto emb_path = [&](int epoch) { return dir.path() / ("emb_" + std::to_string(epoch) + ".txt"); };
  cfg.provider = "file:" + (dir.path() / "emb_{epoch}.txt").string();

  // Stand-in trainer: waits for each epoch's pool.done, embeds the emitted pool plus the
  // targets, and publishes the embedding file via write-then-rename.
  std::thread trainer([&] {
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      const auto done = run_dir / ("epoch_" + std::to_string(epoch)) / "pool.done";
      while (!std::filesystem::exists(done)) std::this_thread::sleep_for(std::chrono::milliseconds(5));
      const DatasetSplit pool = load_dataset(run_dir / ("epoch_" + std::to_string(epoch)) / "pool", Role::target);
      std::vector<EmbeddingVector> vecs;
      for (const auto& img : pool.images) vecs.push_back(embed_builtin(img));
      for (const auto& img : target.images) vecs.push_back(embed_builtin(img));
      const auto tmp = dir.path() / ("tmp_" + std::to_string(epoch) + ".txt");
      save_embedding_file(tmp, vecs);
      std::filesystem::rename(tmp, emb_path(epoch));
    }
  });
  const RunSummary got = run_loop(source, target, cfg, run_dir);
  trainer.join();

  // Builtin embeddings through the file channel give the same scores as a builtin run.
  PipelineConfig builtin_cfg = cfg;
  builtin_cfg.provider = "builtin";
  TempDir builtin_dir("handshake_builtin");
  run_loop(source, target, builtin_cfg, builtin_dir.path());
  for (int n = 1; n <= cfg.epochs; ++n)
    CHECK(read_text(run_dir / ("epoch_" + std::to_string(n)) / "scores.csv") ==
          read_text(builtin_dir.path() / ("epoch_" + std::to_string(n)) / "scores.csv"));
  CHECK(got.total_kept == 2 * 8);
}

TEST_CASE("file provider missing ids and timeouts surface as typed errors") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(42);
  cfg.epochs = 1;
  cfg.candidates_per_epoch = 4;

  TempDir dir("fmiss");
  SUBCASE("missing candidate ids are listed") {
    // File contains only the targets.
    std::vector<EmbeddingVector> vecs;
    for (const auto& t : target.images) vecs.push_back(embed_builtin(t));
    save_embedding_file(dir.path() / "emb_1.txt", vecs);
    cfg.provider = "file:" + (dir.path() / "emb_{epoch}.txt").string();
    TempDir run_dir("fmissrun");
    try {
      run_loop(source, target, cfg, run_dir.path());
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("e0001_c000000") != std::string::npos);
    }
  }
  SUBCASE("timeout aborts with the epoch index") {
    cfg.provider = "file:" + (dir.path() / "never_{epoch}.txt").string();
    cfg.timeout_s = 0.2;
    cfg.poll_interval_s = 0.05;
    TempDir run_dir("ftimeout");
    CHECK_THROWS_WITH_AS(run_loop(source, target, cfg, run_dir.path()), doctest::Contains("epoch 1"),
                         ProviderTimeout);
  }
}

TEST_CASE("report renders histograms that conserve candidate counts") {
  const DatasetSplit source = small_source();
  const DatasetSplit target = small_target();
  PipelineConfig cfg = small_config(2024);
  cfg.epochs = 2;
  cfg.candidates_per_epoch = 12;
  TempDir dir("report");
  run_loop(source, target, cfg, dir.path());

  const RunReport rep = report(dir.path());
  REQUIRE(rep.epochs.size() == 2);
  for (const EpochReport& er : rep.epochs) {
    int total = 0;
    for (int c : er.histogram) total += c;
    CHECK(total == 12);
    CHECK(er.kept == 9);  // floor(12 * 0.8)
    int recipes = 0;
    for (const auto& [name, count] : er.recipe_counts) recipes += count;
    CHECK(recipes == 12);
  }
  // Two histogram blocks in the text, one per epoch.
  CHECK(rep.text.find("epoch 1:") != std::string::npos);
  CHECK(rep.text.find("epoch 2:") != std::string::npos);
  CHECK(std::filesystem::exists(dir.path() / "report.csv"));
}

TEST_CASE("report on an empty run directory is an error") {
  TempDir dir("empty");
  CHECK_THROWS_AS(report(dir.path()), DataError);
}
