#include "orgnav/expert.hpp"

#include <queue>

#include "orgnav/categories.hpp"

namespace orgnav {

namespace {
constexpr int kHeadings[4] = {0, 90, 180, 270};
constexpr int kPitches[3] = {-30, 0, 30};
}  // namespace

ExpertPlanner::ExpertPlanner(const SceneSpec& scene, EpisodeConfig episode, SimConfig sim)
    : scene_(&scene), episode_(episode), sim_(sim) {
  pose_count_ = scene.width * scene.height * 4 * 3;
  next_.assign(static_cast<std::size_t>(pose_count_) * kMotionActions.size(), -1);
  predecessors_.assign(static_cast<std::size_t>(pose_count_), {});

  for (int p = 0; p < pose_count_; ++p) {
    const AgentState s = pose_state(p);
    if (scene.blocked(s.x, s.y)) continue;
    for (std::size_t ai = 0; ai < kMotionActions.size(); ++ai) {
      const StepResult r = step(scene, s, kMotionActions[ai], /*target=*/0, episode_, sim_);
      const int q = pose_index(r.next);
      next_[static_cast<std::size_t>(p) * kMotionActions.size() + ai] = q;
      if (q != p) predecessors_[static_cast<std::size_t>(q)].push_back(p);
    }
  }
}

int ExpertPlanner::pose_index(const AgentState& s) const {
  const int h = s.heading_deg / 90;
  const int v = s.pitch_deg / 30 + 1;
  return ((s.y * scene_->width + s.x) * 4 + h) * 3 + v;
}

AgentState ExpertPlanner::pose_state(int index) const {
  AgentState s;
  s.pitch_deg = kPitches[index % 3];
  index /= 3;
  s.heading_deg = kHeadings[index % 4];
  index /= 4;
  s.x = index % scene_->width;
  s.y = index / scene_->width;
  return s;
}

int ExpertPlanner::next_pose(int pose, Action a) const {
  return next_[static_cast<std::size_t>(pose) * kMotionActions.size() + static_cast<std::size_t>(a)];
}

const std::vector<int>& ExpertPlanner::distances(int target) {
  if (auto it = distance_fields_.find(target); it != distance_fields_.end()) return it->second;
  if (!valid_category(target)) throw IndexError("target category out of range");

  // Multi-source Dijkstra from every success pose, expanded over reverse
  // edges. All edges have unit cost, so the priority queue settles states in
  // breadth order.
  std::vector<int> dist(static_cast<std::size_t>(pose_count_), kInf);
  using Entry = std::pair<int, int>;  // (distance, pose)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  for (int p = 0; p < pose_count_; ++p) {
    const AgentState s = pose_state(p);
    if (scene_->blocked(s.x, s.y)) continue;
    if (success_check(*scene_, s, target, episode_, sim_)) {
      dist[static_cast<std::size_t>(p)] = 0;
      frontier.emplace(0, p);
    }
  }
  while (!frontier.empty()) {
    const auto [d, p] = frontier.top();
    frontier.pop();
    if (d != dist[static_cast<std::size_t>(p)]) continue;
    for (int q : predecessors_[static_cast<std::size_t>(p)]) {
      if (d + 1 < dist[static_cast<std::size_t>(q)]) {
        dist[static_cast<std::size_t>(q)] = d + 1;
        frontier.emplace(d + 1, q);
      }
    }
  }
  return distance_fields_.emplace(target, std::move(dist)).first->second;
}

Action ExpertPlanner::expert_action(const AgentState& state, int target) {
  ++action_queries_;
  if (success_check(*scene_, state, target, episode_, sim_)) return Action::Done;
  const std::vector<int>& dist = distances(target);
  const int p = pose_index(state);
  const int d = dist[static_cast<std::size_t>(p)];
  if (d == kInf) {
    throw PlanningError("target " + std::string(category_name(target)) + " unreachable from (" +
                        std::to_string(state.x) + "," + std::to_string(state.y) + ")");
  }
  for (std::size_t ai = 0; ai < kMotionActions.size(); ++ai) {
    const int q = next_[static_cast<std::size_t>(p) * kMotionActions.size() + ai];
    if (q >= 0 && dist[static_cast<std::size_t>(q)] == d - 1) return kMotionActions[ai];
  }
  throw PlanningError("inconsistent distance field");  // unreachable by construction
}

int ExpertPlanner::optimal_length(const AgentState& state, int target) {
  if (success_check(*scene_, state, target, episode_, sim_)) return 1;
  const std::vector<int>& dist = distances(target);
  const int d = dist[static_cast<std::size_t>(pose_index(state))];
  if (d == kInf) {
    throw PlanningError("target " + std::string(category_name(target)) + " unreachable");
  }
  return d + 1;
}

bool ExpertPlanner::reachable(const AgentState& state, int target) {
  if (!scene_->has_category(target)) return false;
  return distances(target)[static_cast<std::size_t>(pose_index(state))] != kInf;
}

Action expert_action(const SceneSpec& scene, const AgentState& state, int target,
                     const EpisodeConfig& episode, const SimConfig& sim) {
  ExpertPlanner planner(scene, episode, sim);
  return planner.expert_action(state, target);
}

int optimal_length(const SceneSpec& scene, const AgentState& state, int target,
                   const EpisodeConfig& episode, const SimConfig& sim) {
  ExpertPlanner planner(scene, episode, sim);
  return planner.optimal_length(state, target);
}

}  // namespace orgnav
