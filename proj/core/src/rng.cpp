#include "flasheval/rng.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace flasheval {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_normal_ = true;
  return u * f;
}

std::size_t Rng::uniform_index(std::size_t n) {
  assert(n >= 1);
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

Rng Rng::split(std::uint64_t stream_id) const {
  return Rng(splitmix64(splitmix64(seed_) ^ splitmix64(stream_id + 1)));
}

std::vector<std::uint32_t> Rng::sample_sorted(std::size_t n, std::size_t k) {
  detail::SampleScratch scratch;
  scratch.reset(n);
  std::vector<std::uint32_t> out;
  detail::sample_positions(scratch, k, *this, out);
  return out;
}

namespace detail {

void SampleScratch::reset(std::size_t n) {
  pool.resize(n);
  std::iota(pool.begin(), pool.end(), 0u);
  swaps.clear();
}

void sample_positions(SampleScratch& scratch, std::size_t k, Rng& rng,
                      std::vector<std::uint32_t>& out) {
  const std::size_t n = scratch.pool.size();
  assert(k <= n);
  auto& pool = scratch.pool;
  auto& swaps = scratch.swaps;
  swaps.clear();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    swaps.push_back(static_cast<std::uint32_t>(j));
    std::swap(pool[i], pool[j]);
  }
  out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  for (std::size_t i = k; i-- > 0;) {
    std::swap(pool[i], pool[swaps[i]]);
  }
}

}  // namespace detail
}  // namespace flasheval
