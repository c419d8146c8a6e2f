#include "formation/goal_map.hpp"

#include <string>
#include <vector>

#include "formation/errors.hpp"

namespace formation {

GoalMap::GoalMap(Mat initial_goals) : goals_(initial_goals), initial_(std::move(initial_goals)) {
  if (!initial_.allFinite()) throw InputError("GoalMap: non-finite goal");
}

Vec GoalMap::goal(AgentId i) const {
  if (i < 1 || i > size()) throw InputError("GoalMap: no follower " + std::to_string(i));
  return goals_.row(i - 1).transpose();
}

GoalMap GoalMap::swapped(AgentId a, AgentId b) const {
  if (a < 1 || a > size() || b < 1 || b > size()) {
    throw InputError("GoalMap::swapped: agent id out of range");
  }
  GoalMap out = *this;
  out.goals_.row(a - 1).swap(out.goals_.row(b - 1));
  return out;
}

bool GoalMap::is_permutation_of_initial() const {
  // Exact row matching; goals are only ever moved, never recomputed.
  std::vector<bool> used(size(), false);
  for (int i = 0; i < size(); ++i) {
    bool found = false;
    for (int j = 0; j < size() && !found; ++j) {
      if (!used[j] && goals_.row(i) == initial_.row(j)) {
        used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace formation
