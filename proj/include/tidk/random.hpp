#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace tidk {

// std::*_distribution output is implementation-defined, so the toolkit draws
// bounded integers, uniforms and normals itself from the raw mt19937_64 stream.
// That keeps seeded results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// `count` distinct indices from [0, population), in draw order (Floyd's algorithm).
  std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count) {
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    std::vector<bool> taken;
    // Small populations use a bitmap; large ones fall back to a linear probe of `chosen`
    // (count is tiny there: psi or Nystrom landmarks).
    const bool use_bitmap = population <= (std::size_t{1} << 24);
    if (use_bitmap) taken.assign(population, false);
    auto is_taken = [&](std::size_t v) {
      if (use_bitmap) return static_cast<bool>(taken[v]);
      for (auto c : chosen)
        if (c == v) return true;
      return false;
    };
    for (std::size_t j = population - count; j < population; ++j) {
      std::size_t r = static_cast<std::size_t>(below(j + 1));
      if (is_taken(r)) r = j;
      chosen.push_back(r);
      if (use_bitmap) taken[r] = true;
    }
    return chosen;
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tidk
