#pragma once

#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "orgnav/env.hpp"

namespace orgnav {

// Shortest-path expert over the discrete pose graph (cell x heading x pitch,
// unit-cost motion edges). Distance fields are computed per target with a
// multi-source Dijkstra seeded at every successful pose and cached, so
// repeated queries along a rollout are cheap.
//
// Ties between optimal first actions break by fixed priority:
// MoveAhead < RotateLeft < RotateRight < LookUp < LookDown < Done.
class ExpertPlanner {
 public:
  explicit ExpertPlanner(const SceneSpec& scene, EpisodeConfig episode = {}, SimConfig sim = {});

  // First action of a minimum-length sequence to a successful Done.
  Action expert_action(const AgentState& state, int target);

  // Minimal number of actions, terminal Done included.
  int optimal_length(const AgentState& state, int target);

  bool reachable(const AgentState& state, int target);

  // Number of expert_action queries answered; used to verify that training
  // without imitation never consults the expert.
  std::int64_t action_queries() const { return action_queries_; }

  const SceneSpec& scene() const { return *scene_; }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max();

  int pose_index(const AgentState& s) const;
  AgentState pose_state(int index) const;
  int next_pose(int pose, Action a) const;
  const std::vector<int>& distances(int target);

  const SceneSpec* scene_;
  EpisodeConfig episode_;
  SimConfig sim_;
  int pose_count_;
  std::vector<int> next_;                         // pose_count x 5 motion actions
  std::vector<std::vector<int>> predecessors_;    // reverse adjacency
  std::unordered_map<int, std::vector<int>> distance_fields_;
  std::int64_t action_queries_ = 0;
};

// One-shot conveniences over a throwaway planner.
Action expert_action(const SceneSpec& scene, const AgentState& state, int target,
                     const EpisodeConfig& episode = {}, const SimConfig& sim = {});
int optimal_length(const SceneSpec& scene, const AgentState& state, int target,
                   const EpisodeConfig& episode = {}, const SimConfig& sim = {});

}  // namespace orgnav
