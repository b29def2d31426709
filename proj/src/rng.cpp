#include "domainaug/rng.hpp"

#include <cmath>

namespace domainaug {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ (a + 0x632be59bd9b4e019ull));
  s = splitmix64(s ^ (b + 0x9e6c63d0876a9a47ull));
  return s;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Marsaglia polar method, no cached spare so the draw count per call is data-dependent
  // but fully determined by the stream.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::gamma(double shape) {
  // Marsaglia-Tsang; shapes below 1 boosted via the power transform.
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta_symmetric(double alpha) {
  if (alpha == 1.0) return uniform();
  const double x = gamma(alpha);
  const double y = gamma(alpha);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

}  // namespace domainaug
