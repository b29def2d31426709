// Benchmark comparing the OpenMP kernels against their serial references.
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "domainaug/kernels.hpp"
#include "domainaug/rng.hpp"
#include "domainaug/selection.hpp"

using namespace domainaug;

namespace {

Image random_image(int w, int h, Rng& rng) {
  Image img(w, h);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng.uniform_int(256));
  return img;
}

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const double t0 = omp_get_wtime();
  for (int i = 0; i < reps; ++i) fn();
  return (omp_get_wtime() - t0) / reps;
}

void row(const std::string& name, double serial, double parallel) {
  std::printf("%-24s %10.3f ms %10.3f ms %8.2fx\n", name.c_str(), serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  Rng rng(7);
  const Image big = random_image(1280, 1280, rng);
  const Image a = random_image(640, 640, rng);
  const Image b = random_image(640, 640, rng);

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  row("resize_bilinear",
      time_of([&] { kernels::resize_bilinear_ref(big, 640, 640); }, 5),
      time_of([&] { kernels::resize_bilinear(big, 640, 640); }, 5));

  kernels::TileTransform t{1.3, 1.3, -100.0, -50.0, 0, 0, 640, 640};
  Image canvas(1280, 1280, 114);
  row("composite_tile",
      time_of([&] { kernels::composite_tile_ref(canvas, a, t); }, 5),
      time_of([&] { kernels::composite_tile(canvas, a, t); }, 5));

  row("blend_images",
      time_of([&] { kernels::blend_images_ref(a, b, 0.37); }, 5),
      time_of([&] { kernels::blend_images(a, b, 0.37); }, 5));

  row("resample_patch",
      time_of([&] { kernels::resample_patch_ref(big, 10.5, 20.5, 900.5, 700.25, 512, 512); }, 5),
      time_of([&] { kernels::resample_patch(big, 10.5, 20.5, 900.5, 700.25, 512, 512); }, 5));

  const kernels::GaussianParams g{255.5, 255.5, 40.0, 40.0};
  row("gaussian_fill",
      time_of([&] { kernels::gaussian_fill_ref(512, 512, g); }, 10),
      time_of([&] { kernels::gaussian_fill(512, 512, g); }, 10));

  row("grid_mean_pool",
      time_of([&] { kernels::grid_mean_pool_ref(big, 8); }, 10),
      time_of([&] { kernels::grid_mean_pool(big, 8); }, 10));

  std::vector<EmbeddingVector> cands(2000), targets(8);
  for (auto& v : cands) {
    v.values.resize(192);
    for (double& x : v.values) x = rng.uniform();
  }
  for (auto& v : targets) {
    v.values.resize(192);
    for (double& x : v.values) x = rng.uniform();
  }
  row("score mmd",
      time_of([&] { score_candidates_ref(cands, targets, Metric::mmd); }, 10),
      time_of([&] { score_candidates(cands, targets, Metric::mmd); }, 10));
  row("score cosine",
      time_of([&] { score_candidates_ref(cands, targets, Metric::cosine); }, 10),
      time_of([&] { score_candidates(cands, targets, Metric::cosine); }, 10));

  return 0;
}
