#ifndef DOMAINAUG_RNG_HPP
#define DOMAINAUG_RNG_HPP

#include <cstdint>
#include <random>

namespace domainaug {

// Mixes a stream id into a base seed. Used to hand every (epoch, candidate) pair its own
// independent generator so parallel candidate generation stays reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// Seeded generator with hand-rolled variate mappings. std::mt19937_64 output is fixed by
// the standard and the mappings below avoid the implementation-defined std distributions,
// so a given seed yields the same draw sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (0, 1); safe under log().
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform integer on [0, n). Rejection keeps it unbiased.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  double normal();

  // Beta(alpha, alpha) on [0, 1].
  double beta_symmetric(double alpha);

 private:
  double gamma(double shape);

  std::mt19937_64 eng_;
};

}  // namespace domainaug

#endif
