#pragma once

#include "formation/types.hpp"

namespace formation {

/// Current goal slot of every follower. Goals only ever change by
/// transpositions, so `goals()` stays a permutation of `initial_goals()`.
class GoalMap {
 public:
  GoalMap() = default;
  explicit GoalMap(Mat initial_goals);

  int size() const { return static_cast<int>(goals_.rows()); }
  int dim() const { return static_cast<int>(goals_.cols()); }
  const Mat& goals() const { return goals_; }
  const Mat& initial_goals() const { return initial_; }
  Vec goal(AgentId i) const;

  GoalMap swapped(AgentId a, AgentId b) const;
  bool is_permutation_of_initial() const;

 private:
  Mat goals_;
  Mat initial_;
};

}  // namespace formation
