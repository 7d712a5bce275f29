#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orgnav/scene.hpp"

namespace orgnav {

// Heading degrees: 0 = +x, 90 = -y, 180 = -x, 270 = +y (grid y grows down,
// so RotateLeft adds 90 and turns the agent counterclockwise on screen).
struct AgentState {
  int x = 0;
  int y = 0;
  int heading_deg = 0;  // one of 0, 90, 180, 270
  int pitch_deg = 0;    // one of -30, 0, 30

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

enum class Action : int {
  MoveAhead = 0,
  RotateLeft = 1,
  RotateRight = 2,
  LookUp = 3,
  LookDown = 4,
  Done = 5,
};

inline constexpr int kActionCount = 6;
inline constexpr std::array<Action, 5> kMotionActions = {
    Action::MoveAhead, Action::RotateLeft, Action::RotateRight, Action::LookUp, Action::LookDown};

std::string action_name(Action a);
Action action_from_name(const std::string& name);

// Forward unit vector for a heading.
std::pair<int, int> heading_vector(int heading_deg);

struct Detection {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double confidence = 0;
  bool present() const { return confidence > 0.0; }
};

// What the agent senses at one pose. A deterministic function of
// (scene, state, noise_seed). Undetected categories carry an all-zero record.
struct Observation {
  std::array<Detection, kNumCategories> detections;
  // kNumCategories x appearance_dim, row-major; zero rows when undetected.
  std::vector<double> appearance;
  int appearance_dim = 0;
  // Egocentric occupancy plus visible-category confidences plus pitch and bias.
  std::vector<double> global_feature;

  std::span<const double> appearance_row(int category) const {
    return {appearance.data() + static_cast<std::size_t>(category) * appearance_dim,
            static_cast<std::size_t>(appearance_dim)};
  }
};

struct EpisodeConfig {
  int max_steps = 99;
  double success_distance_m = 1.5;
  double step_penalty = -0.001;
  double success_reward = 5.0;
};

// Sensor model parameters. Detection noise is uniform in
// [-confidence_noise, +confidence_noise] and derived from (noise_seed, pose),
// so repeated visits to a pose within one episode see identical observations.
struct SimConfig {
  double fov_deg = 90.0;
  int visibility_range_cells = 10;
  double confidence_noise = 0.1;
  int appearance_dim = 16;
  double appearance_noise = 0.05;
  double camera_height_m = 1.5;
  double object_height_m = 0.75;
  double object_size_m = 0.4;
  int occupancy_depth = 8;
  int occupancy_halfwidth = 2;  // lateral cells each side

  int occupancy_dim() const { return occupancy_depth * (2 * occupancy_halfwidth + 1); }
  int global_dim() const { return occupancy_dim() + kNumCategories + 2; }
};

enum class StepEvent { None, Collision, Success, Failure };

struct StepResult {
  AgentState next;
  double reward = 0.0;
  bool done = false;
  StepEvent event = StepEvent::None;
};

bool state_valid(const SceneSpec& scene, const AgentState& state);

// True iff the nearest instance of the target is within the success radius,
// inside the horizontal view frustum, and not blocked by a wall.
bool success_check(const SceneSpec& scene, const AgentState& state, int target,
                   const EpisodeConfig& episode = {}, const SimConfig& sim = {});

// Pure transition. Collisions leave the pose unchanged and flag the event;
// Done always terminates, successfully or not.
StepResult step(const SceneSpec& scene, const AgentState& state, Action action, int target,
                const EpisodeConfig& episode = {}, const SimConfig& sim = {});

Observation render_observation(const SceneSpec& scene, const AgentState& state,
                               const SimConfig& sim, std::uint64_t noise_seed);

// True if `to` is inside the frustum and range of `from` and no wall cell lies
// strictly between them (Bresenham ray).
bool cell_visible(const SceneSpec& scene, const AgentState& from, int to_x, int to_y,
                  double fov_deg, double max_range_cells);

class ExpertPlanner;

struct ResetResult {
  AgentState state;
  int target = 0;
};

// Uniform random valid start pose and a target present in the scene,
// rejecting draws whose target cannot be reached.
ResetResult reset(const SceneSpec& scene, std::uint64_t episode_seed, ExpertPlanner& planner);

// Owns the mutable episode state: pose, step count, termination, and the
// per-episode observation noise stream. Stepping a finished episode throws.
class Episode {
 public:
  Episode(const SceneSpec& scene, int target, AgentState start, EpisodeConfig episode_config,
          SimConfig sim_config, std::uint64_t noise_seed);

  StepResult apply(Action action);
  Observation observe() const;

  const SceneSpec& scene() const { return *scene_; }
  const AgentState& state() const { return state_; }
  int target() const { return target_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  bool succeeded() const { return success_; }
  bool timed_out() const { return timed_out_; }
  double total_reward() const { return total_reward_; }
  const EpisodeConfig& episode_config() const { return episode_config_; }
  const SimConfig& sim_config() const { return sim_config_; }
  std::uint64_t noise_seed() const { return noise_seed_; }

 private:
  const SceneSpec* scene_;
  int target_;
  AgentState state_;
  EpisodeConfig episode_config_;
  SimConfig sim_config_;
  std::uint64_t noise_seed_;
  int steps_ = 0;
  bool done_ = false;
  bool success_ = false;
  bool timed_out_ = false;
  double total_reward_ = 0.0;
};

}  // namespace orgnav
