#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "domainaug/image_aug.hpp"
#include "domainaug/rng.hpp"

#include "fixtures.hpp"

using namespace domainaug;
using namespace test_support;

namespace {

// Pools sized so every tile upscales into its quadrant (images smaller than any quadrant),
// which keeps the marker-pixel oracle sharp.
struct MarkerPools {
  std::vector<LabeledImage> source;
  std::vector<LabeledImage> target;
};

MarkerPools marker_pools(std::uint64_t seed) {
  MarkerPools pools;
  Rng rng(seed);
  for (int i = 0; i < 6; ++i) {
    FixtureOptions opt;
    opt.width = 80 + static_cast<int>(rng.uniform_int(49));
    opt.height = 80 + static_cast<int>(rng.uniform_int(49));
    opt.red_free = true;
    opt.min_boxes = 1;
    opt.max_boxes = 3;
    pools.source.push_back(fixture_image("s" + std::to_string(i), DomainTag::source, rng, opt));
  }
  for (int i = 0; i < 4; ++i) {
    FixtureOptions opt;
    opt.width = 80 + static_cast<int>(rng.uniform_int(49));
    opt.height = 80 + static_cast<int>(rng.uniform_int(49));
    opt.red_free = true;
    opt.dark = true;
    pools.target.push_back(fixture_image("t" + std::to_string(i), DomainTag::target, rng, opt));
  }
  return pools;
}

}  // namespace

TEST_CASE("placement_map_box: pure translation moves box corners verbatim") {
  // 100x100 tile at offset (50,50), scale 1: pixel box (10,10)-(30,30) lands at (60,60)-(80,80).
  const BoxLabel box = pixel_aligned_box(0, 1, 10, 10, 20, 20, 100, 100);
  const TilePlacement t{1.0, 1.0, 50.0, 50.0, 0, 0, 200, 200};
  const ContinuousRect r = placement_map_box(box, 100, 100, t);
  CHECK(r.x0 == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(r.y0 == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(r.x1 == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(r.y1 == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("domain_splice enforces that both domains appear") {
  const MarkerPools pools = marker_pools(1);
  Rng rng(2);
  CHECK_THROWS_AS(domain_splice({}, pools.target, 320, rng), std::invalid_argument);
  CHECK_THROWS_AS(domain_splice(pools.source, {}, 320, rng), std::invalid_argument);
}

TEST_CASE("domain_splice output shape, provenance and domain coverage") {
  const MarkerPools pools = marker_pools(3);
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    Rng rng(seed);
    SpliceDetail detail;
    const AugmentedSample s = domain_splice(pools.source, pools.target, 320, rng, 0.2, nullptr, &detail);
    CHECK(s.image.pixels.width == 320);
    CHECK(s.image.pixels.height == 320);
    CHECK(s.image.domain_tag == DomainTag::augmented);
    CHECK(s.recipe == Recipe::splice);
    REQUIRE(s.provenance.size() == 4);
    CHECK(s.count_domain(DomainTag::source) >= 1);
    CHECK(s.count_domain(DomainTag::target) >= 1);
    CHECK(s.count_domain(DomainTag::source) + s.count_domain(DomainTag::target) == 4);
    for (const auto& p : s.provenance) {
      CHECK(p.lambda == 1.0);
      CHECK(p.lambda_cls == 1.0);
    }
    // Center jitter stays in the middle half of the doubled canvas.
    CHECK(detail.center_x >= 160);
    CHECK(detail.center_x <= 480);
    CHECK(detail.center_y >= 160);
    CHECK(detail.center_y <= 480);
    // Confidences untouched: every surviving box is still one-hot.
    for (const BoxLabel& b : s.image.labels) CHECK(b.is_one_hot());
  }
}

TEST_CASE("domain_splice is deterministic for a fixed seed") {
  const MarkerPools pools = marker_pools(4);
  Rng rng_a(42), rng_b(42);
  const AugmentedSample a = domain_splice(pools.source, pools.target, 256, rng_a);
  const AugmentedSample b = domain_splice(pools.source, pools.target, 256, rng_b);
  CHECK(a.image.pixels == b.image.pixels);
  REQUIRE(a.image.labels.size() == b.image.labels.size());
  for (std::size_t i = 0; i < a.image.labels.size(); ++i) CHECK(a.image.labels[i] == b.image.labels[i]);
  REQUIRE(a.provenance.size() == b.provenance.size());
  for (std::size_t i = 0; i < a.provenance.size(); ++i) {
    CHECK(a.provenance[i].origin_id == b.provenance[i].origin_id);
    CHECK(a.provenance[i].lambda == b.provenance[i].lambda);
  }
}

TEST_CASE("domain_splice labels align with painted pixels (marker oracle)") {
  const int S = 320;
  int checked = 0, fully_clipped_checked = 0;
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const MarkerPools pools = marker_pools(seed);
    SpliceDetail detail;
    {
      Rng rng(seed * 17 + 1);
      (void)domain_splice(pools.source, pools.target, S, rng, 0.2, nullptr, &detail);
    }
    for (const SpliceDetail::BoxTrace& trace : detail.boxes) {
      // Repaint only this box in a pool copy and rebuild with the same seed.
      MarkerPools painted = pools;
      const SpliceDetail::Tile& tile = detail.tiles[trace.tile];
      LabeledImage& img = tile.domain == DomainTag::source ? painted.source[tile.pool_index]
                                                           : painted.target[tile.pool_index];
      paint_marker(img.pixels, box_pixel_rect(img.labels[trace.box], img.pixels.width, img.pixels.height));
      Rng rng(seed * 17 + 1);
      SpliceDetail detail2;
      const AugmentedSample rebuilt =
          domain_splice(painted.source, painted.target, S, rng, 0.2, nullptr, &detail2);
      REQUIRE(detail2.boxes.size() == detail.boxes.size());
      const auto detected = detect_marker(rebuilt.image.pixels);

      if (!trace.dropped && trace.clip_ratio == 1.0) {
        REQUIRE(detected.has_value());
        const BoxLabel& out = rebuilt.image.labels[trace.output_index];
        CHECK(marker_iou(*detected, out, S, S) >= 0.99);
        ++checked;
      } else if (trace.clip_ratio == 0.0) {
        // Fully outside its tile crop: no painted pixel survives.
        CHECK_FALSE(detected.has_value());
        ++fully_clipped_checked;
      }
    }
  }
  // The sweep must actually exercise both situations.
  CHECK(checked >= 20);
  CHECK(fully_clipped_checked >= 1);
}

TEST_CASE("domain_splice never emits a box below the clip threshold") {
  for (std::uint64_t seed = 500; seed < 540; ++seed) {
    const MarkerPools pools = marker_pools(seed);
    Rng rng(seed);
    SpliceDetail detail;
    const AugmentedSample s = domain_splice(pools.source, pools.target, 256, rng, 0.2, nullptr, &detail);
    for (const auto& trace : detail.boxes) {
      if (trace.output_index >= 0) CHECK(trace.clip_ratio >= 0.2);
      if (trace.clip_ratio < 0.2) CHECK(trace.dropped);
    }
    // Every surviving label is inside the unit square.
    for (const BoxLabel& b : s.image.labels) CHECK(validate_box(b, 256, 256, 3).empty());
  }
}

TEST_CASE("reallocate_with_lambda blends pixels and scales confidences") {
  LabeledImage a, b;
  a.id = "a";
  a.domain_tag = DomainTag::source;
  a.pixels = solid_image(8, 8, 100, 100, 100);
  a.labels.push_back(one_hot_box(0, 2, 0.5, 0.5, 0.5, 0.5));
  b.id = "b";
  b.domain_tag = DomainTag::target;
  b.pixels = solid_image(8, 8, 200, 200, 200);
  b.labels.push_back(one_hot_box(1, 2, 0.25, 0.25, 0.25, 0.25));
  b.labels.push_back(one_hot_box(0, 2, 0.75, 0.75, 0.25, 0.25));

  SUBCASE("midpoint blend") {
    const AugmentedSample s = reallocate_with_lambda(a, b, 0.5);
    for (auto v : s.image.pixels.data) CHECK(v == 150);
    REQUIRE(s.image.labels.size() == 3);  // concat: count(a) + count(b)
    CHECK(s.image.labels[0].class_conf == std::vector<double>{0.5, 0});
    CHECK(s.image.labels[1].class_conf == std::vector<double>{0, 0.5});
    // Geometry unchanged.
    CHECK(s.image.labels[1].cx == 0.25);
    CHECK(s.image.labels[2].cx == 0.75);
    CHECK(s.provenance[0].lambda + s.provenance[1].lambda == doctest::Approx(1.0));
  }
  SUBCASE("lambda = 1 boundary: pixels equal a, b confidences scale to zero") {
    const AugmentedSample s = reallocate_with_lambda(a, b, 1.0);
    CHECK(s.image.pixels == a.pixels);
    CHECK(s.image.labels[0].class_conf == std::vector<double>{1, 0});
    CHECK(s.image.labels[1].class_conf == std::vector<double>{0, 0});
    CHECK(s.image.labels[2].class_conf == std::vector<double>{0, 0});
  }
  SUBCASE("dimension mismatch is an error") {
    LabeledImage c = b;
    c.pixels = solid_image(9, 8, 0, 0, 0);
    CHECK_THROWS_AS(reallocate_with_lambda(a, c, 0.5), std::invalid_argument);
  }
}

TEST_CASE("domain_reallocation demands one image per domain") {
  Rng rng(8);
  LabeledImage a, b;
  a.pixels = solid_image(4, 4, 0, 0, 0);
  b.pixels = solid_image(4, 4, 0, 0, 0);
  a.domain_tag = DomainTag::source;
  b.domain_tag = DomainTag::source;
  CHECK_THROWS_AS(domain_reallocation(a, b, 1.0, rng), std::invalid_argument);
  b.domain_tag = DomainTag::target;
  CHECK_NOTHROW(domain_reallocation(a, b, 1.0, rng));
}

TEST_CASE("domain_reallocation blend stays within one of exact real arithmetic") {
  Rng rng(55);
  for (int it = 0; it < 20; ++it) {
    LabeledImage a, b;
    a.domain_tag = DomainTag::source;
    b.domain_tag = DomainTag::target;
    a.pixels = Image(32, 32);
    b.pixels = Image(32, 32);
    for (auto& v : a.pixels.data) v = static_cast<std::uint8_t>(rng.uniform_int(256));
    for (auto& v : b.pixels.data) v = static_cast<std::uint8_t>(rng.uniform_int(256));
    const AugmentedSample s = domain_reallocation(a, b, 0.8, rng);
    const double lambda = s.provenance[0].lambda;
    CHECK(lambda >= 0.0);
    CHECK(lambda <= 1.0);
    for (std::size_t i = 0; i < s.image.pixels.data.size(); ++i) {
      const double exact = lambda * a.pixels.data[i] + (1.0 - lambda) * b.pixels.data[i];
      CHECK(std::abs(s.image.pixels.data[i] - exact) <= 1.0);
    }
  }
}

TEST_CASE("splice_then_reallocate composes the two ops") {
  const MarkerPools pools = marker_pools(9);
  const std::uint64_t seed = 77;
  Rng rng(seed);
  const AugmentedSample s = splice_then_reallocate(pools.source, pools.target, 256, 1.0, rng, 0.2);
  CHECK(s.recipe == Recipe::splice_reallocation);
  CHECK(s.image.pixels.width == 256);
  CHECK(s.provenance.size() == 8);  // 4 + 4 contributors

  // Replay the internal sequence to check the confidence composition.
  Rng replay(seed);
  const AugmentedSample first = domain_splice(pools.source, pools.target, 256, replay, 0.2);
  const AugmentedSample second = domain_splice(pools.source, pools.target, 256, replay, 0.2);
  const double lambda = replay.beta_symmetric(1.0);
  REQUIRE(s.image.labels.size() == first.image.labels.size() + second.image.labels.size());
  for (std::size_t i = 0; i < first.image.labels.size(); ++i)
    for (std::size_t c = 0; c < first.image.labels[i].class_conf.size(); ++c)
      CHECK(s.image.labels[i].class_conf[c] ==
            doctest::Approx(lambda * first.image.labels[i].class_conf[c]).epsilon(1e-12));
  for (const auto& p : s.provenance) {
    CHECK((p.lambda == doctest::Approx(lambda) || p.lambda == doctest::Approx(1.0 - lambda)));
  }
  // All output confidences stay in [0,1].
  for (const BoxLabel& b : s.image.labels)
    for (double v : b.class_conf) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}
