#pragma once

// Common interface of the next-test-point strategies.

#include "apex/acquisition.hpp"
#include "apex/domain.hpp"
#include "apex/random.hpp"
#include "apex/surrogate.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apex {

/// What a selector may look at when choosing trial `trial`.
struct SelectionContext {
  const ParameterSpace& space;
  const Requirement& requirement;  // canonical
  const History& history;
  std::span<const SetIndex> satisfying;  // D_n, unobserved sets included
  std::span<const SetIndex> candidates;  // D_n without exhausted sets
  const std::vector<bool>& exhausted;
  int trial;
  Rng& rng;

  // Goal model state, filled once at least one trial exists.
  const Posterior* goal = nullptr;
  double kappa = 0.0;
  double f_best = 0.0;
  KernelConfig kernel{};
};

struct Selection {
  Selection(SetIndex s = 0, bool t = false, std::optional<EscapeMode> e = std::nullopt)
      : set(s), trapped(t), escape(e) {}
  SetIndex set;
  bool trapped;
  std::optional<EscapeMode> escape;
};

class Selector {
 public:
  virtual ~Selector() = default;
  virtual std::string name() const = 0;
  /// Whether the run starts with the configured initial design.
  virtual bool uses_initial_design() const { return true; }
  /// May be called again in the same trial with fewer candidates when the
  /// previous choice turned out to be exhausted. nullopt asks the engine for
  /// a random available set.
  virtual std::optional<Selection> select(const SelectionContext& ctx) = 0;
};

/// True when every constraint's median over the set's observations satisfies
/// the canonical bound. Sets without observations are not checked here.
bool medians_satisfy(const History& history, SetIndex set, const Requirement& canonical);

/// D_n: unobserved sets plus observed sets whose medians satisfy.
std::vector<SetIndex> filter_satisfying(const History& history, const Requirement& canonical);

/// Observed sets whose medians satisfy.
std::vector<SetIndex> observed_satisfying(const History& history, const Requirement& canonical);

/// Sets that have not been exhausted.
std::vector<SetIndex> available_sets(const std::vector<bool>& exhausted);

/// Observed sets whose constraint medians violate the requirement and that
/// are still available (D'_n).
std::vector<SetIndex> unsatisfying_sets(const SelectionContext& ctx);

}  // namespace apex
