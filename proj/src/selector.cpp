#include "apex/selector.hpp"

namespace apex {

bool medians_satisfy(const History& history, SetIndex set, const Requirement& canonical) {
  for (const auto& c : canonical.constraints) {
    auto v = history.values(set, c.metric);
    for (double& x : v) x = c.canonical(x);
    if (!(median(std::move(v)) <= c.bound)) return false;
  }
  return true;
}

std::vector<SetIndex> filter_satisfying(const History& history, const Requirement& canonical) {
  std::vector<SetIndex> out;
  for (SetIndex j = 0; j < history.space_size(); ++j)
    if (history.count(j) == 0 || medians_satisfy(history, j, canonical)) out.push_back(j);
  return out;
}

std::vector<SetIndex> observed_satisfying(const History& history, const Requirement& canonical) {
  std::vector<SetIndex> out;
  for (SetIndex j = 0; j < history.space_size(); ++j)
    if (history.count(j) > 0 && medians_satisfy(history, j, canonical)) out.push_back(j);
  return out;
}

std::vector<SetIndex> available_sets(const std::vector<bool>& exhausted) {
  std::vector<SetIndex> out;
  for (SetIndex j = 0; j < exhausted.size(); ++j)
    if (!exhausted[j]) out.push_back(j);
  return out;
}

std::vector<SetIndex> unsatisfying_sets(const SelectionContext& ctx) {
  std::vector<SetIndex> out;
  for (SetIndex j = 0; j < ctx.space.size(); ++j)
    if (!ctx.exhausted[j] && ctx.history.count(j) > 0 && !medians_satisfy(ctx.history, j, ctx.requirement))
      out.push_back(j);
  return out;
}

}  // namespace apex
