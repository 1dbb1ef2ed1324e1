#pragma once

// Portable random helpers. std::mt19937_64 output is fixed by the standard,
// the std distributions are not, so every draw goes through these functions.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace apex {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent seed for a named sub-stream of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Uniform real in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace apex
