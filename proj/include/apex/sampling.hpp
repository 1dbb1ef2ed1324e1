#pragma once

// Space-filling designs mapped onto the grid of a ParameterSpace.

#include "apex/domain.hpp"
#include "apex/random.hpp"

#include <cstdint>
#include <vector>

namespace apex {

enum class InitStrategy { random, latin_hypercube, sobol };

/// Gray-code Sobol generator (Joe-Kuo direction numbers, up to 16 dims)
/// with an optional random digital shift.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDimensions = 16;

  explicit SobolSequence(std::size_t dimensions, std::uint64_t shift_seed = 0, bool shifted = false);

  /// Next point in [0, 1)^d. The all-zero first point is skipped.
  std::vector<double> next();

 private:
  std::size_t dims_;
  std::uint64_t index_ = 0;
  std::vector<std::vector<std::uint32_t>> directions_;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
};

/// Grid cell of a unit-cube point: floor(u_q * size_q) per dimension.
SetIndex snap_to_grid(const ParameterSpace& space, const std::vector<double>& unit_point);

/// `count` distinct sets not in `taken`, drawn by `strategy`.
std::vector<SetIndex> design(const ParameterSpace& space, InitStrategy strategy, std::size_t count,
                             const std::vector<SetIndex>& taken, Rng& rng);

}  // namespace apex
