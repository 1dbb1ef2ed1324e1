#include "apex/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace apex {

namespace {

struct DirectionSpec {
  unsigned s;
  unsigned a;
  std::array<std::uint32_t, 6> m;
};

// new-joe-kuo-6.21201, dimensions 2..16.
constexpr std::array<DirectionSpec, 15> kJoeKuo{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

constexpr unsigned kBits = 32;

}  // namespace

SobolSequence::SobolSequence(std::size_t dimensions, std::uint64_t shift_seed, bool shifted)
    : dims_(dimensions), directions_(dimensions), state_(dimensions, 0), shift_(dimensions, 0) {
  if (dimensions == 0 || dimensions > kMaxDimensions)
    throw std::invalid_argument("Sobol sequence supports 1 to 16 dimensions");
  for (unsigned k = 1; k <= kBits; ++k) directions_[0].push_back(std::uint32_t{1} << (kBits - k));
  for (std::size_t d = 1; d < dimensions; ++d) {
    const auto& spec = kJoeKuo[d - 1];
    auto& v = directions_[d];
    v.resize(kBits + 1);  // 1-based
    for (unsigned k = 1; k <= kBits; ++k) {
      if (k <= spec.s) {
        v[k] = spec.m[k - 1] << (kBits - k);
      } else {
        std::uint32_t x = v[k - spec.s] ^ (v[k - spec.s] >> spec.s);
        for (unsigned i = 1; i < spec.s; ++i)
          if ((spec.a >> (spec.s - 1 - i)) & 1U) x ^= v[k - i];
        v[k] = x;
      }
    }
    v.erase(v.begin());
  }
  if (shifted) {
    Rng rng(shift_seed);
    for (auto& s : shift_) s = static_cast<std::uint32_t>(rng() >> 32);
  }
}

std::vector<double> SobolSequence::next() {
  // Rightmost zero bit of the current index selects the direction number.
  unsigned c = 0;
  for (std::uint64_t i = index_; i & 1U; i >>= 1) ++c;
  if (c >= kBits) throw std::out_of_range("Sobol sequence exhausted");
  ++index_;
  std::vector<double> point(dims_);
  for (std::size_t d = 0; d < dims_; ++d) {
    state_[d] ^= directions_[d][c];
    point[d] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1.0p-32;
  }
  return point;
}

SetIndex snap_to_grid(const ParameterSpace& space, const std::vector<double>& unit_point) {
  std::vector<std::size_t> idx(space.dimensions());
  for (std::size_t q = 0; q < idx.size(); ++q) {
    const std::size_t n = space.defs()[q].values.size();
    const double u = std::clamp(unit_point.at(q), 0.0, 1.0);
    idx[q] = std::min(n - 1, static_cast<std::size_t>(std::floor(u * static_cast<double>(n))));
  }
  return space.index_of_value_indices(idx);
}

std::vector<SetIndex> design(const ParameterSpace& space, InitStrategy strategy, std::size_t count,
                             const std::vector<SetIndex>& taken, Rng& rng) {
  std::vector<bool> used(space.size(), false);
  for (SetIndex t : taken) used.at(t) = true;
  std::vector<SetIndex> free;
  for (SetIndex j = 0; j < space.size(); ++j)
    if (!used[j]) free.push_back(j);
  if (count > free.size()) throw std::invalid_argument("not enough unused parameter sets for the initial design");

  std::vector<SetIndex> out;
  auto take = [&](SetIndex j) {
    if (used[j]) return false;
    used[j] = true;
    out.push_back(j);
    return true;
  };
  auto fill_random = [&] {
    std::vector<SetIndex> rest;
    for (SetIndex j = 0; j < space.size(); ++j)
      if (!used[j]) rest.push_back(j);
    while (out.size() < count) {
      const std::size_t k = uniform_index(rng, rest.size());
      take(rest[k]);
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
    }
  };

  switch (strategy) {
    case InitStrategy::random:
      break;
    case InitStrategy::latin_hypercube: {
      const std::size_t b = space.dimensions();
      std::vector<std::vector<std::size_t>> strata(b);
      for (auto& s : strata) s = random_permutation(count, rng);
      for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> u(b);
        for (std::size_t q = 0; q < b; ++q)
          u[q] = (static_cast<double>(strata[q][i]) + uniform01(rng)) / static_cast<double>(count);
        take(snap_to_grid(space, u));
      }
      break;
    }
    case InitStrategy::sobol: {
      SobolSequence seq(space.dimensions(), rng(), true);
      const std::size_t max_draws = 64 * space.size() + 64;
      for (std::size_t i = 0; i < max_draws && out.size() < count; ++i) take(snap_to_grid(space, seq.next()));
      break;
    }
  }
  fill_random();
  return out;
}

}  // namespace apex
