#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace flasheval {

// Deterministic random stream. Every randomized operation in the library
// draws from an Rng so that a whole run is reproducible from one 64-bit
// seed, independent of platform and of how work is scheduled across threads.
//
// Child streams are derived from the constructor seed, not from the evolving
// engine state: split(id) seeds the child with
//   mix(mix(seed) ^ mix(id + 1))
// where mix is the splitmix64 finalizer. Splitting is therefore stable no
// matter how many draws the parent has already made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  // Standard normal via the polar method; one value cached per pair.
  double normal();

  // Uniform in [0, n), unbiased (rejection sampling). Requires n >= 1.
  std::size_t uniform_index(std::size_t n);

  // Uniform over [lo, hi).
  double uniform(double lo, double hi);

  Rng split(std::uint64_t stream_id) const;

  // k distinct values drawn uniformly from [0, n), returned sorted ascending.
  std::vector<std::uint32_t> sample_sorted(std::size_t n, std::size_t k);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const std::size_t j = i + uniform_index(values.size() - i);
      std::swap(values[i], values[j]);
    }
  }

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

namespace detail {

// Scratch state for repeated without-replacement draws from [0, n).
// `pool` is kept as the identity permutation between calls so a draw costs
// O(k log k) instead of O(n).
struct SampleScratch {
  std::vector<std::uint32_t> pool;
  std::vector<std::uint32_t> swaps;

  void reset(std::size_t n);
};

// Draws k distinct positions from [0, |scratch.pool|) into `out`, sorted
// ascending. Consumes exactly k uniform_index() draws; every caller that has
// to reproduce the same subsets for the same stream state goes through here.
void sample_positions(SampleScratch& scratch, std::size_t k, Rng& rng,
                      std::vector<std::uint32_t>& out);

}  // namespace detail
}  // namespace flasheval
