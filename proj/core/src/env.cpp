#include "orgnav/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orgnav/expert.hpp"
#include "orgnav/rng.hpp"

namespace orgnav {

namespace {

constexpr std::uint64_t kAppearanceSignatureSeed = 0x0a99ea4a5c3ull;

constexpr double kDegPerRad = 57.29577951308232;

int normalize_heading(int deg) {
  int h = deg % 360;
  if (h < 0) h += 360;
  return h;
}

std::uint64_t pose_key(const AgentState& s) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) << 40) ^
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.y)) << 20) ^
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.heading_deg)) << 8) ^
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.pitch_deg + 30));
}

// Relative bearing of (dx,dy) against the heading, in (-180, 180].
double relative_bearing_deg(int heading_deg, double dx, double dy) {
  const double angle = std::atan2(-dy, dx) * kDegPerRad;
  double rel = angle - heading_deg;
  while (rel > 180.0) rel -= 360.0;
  while (rel <= -180.0) rel += 360.0;
  return rel;
}

// Wall test along the open segment between two cells.
bool ray_blocked(const SceneSpec& scene, int x0, int y0, int x1, int y1) {
  int dx = std::abs(x1 - x0);
  int dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1;
  int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    if (!(x == x0 && y == y0) && !(x == x1 && y == y1) && scene.blocked(x, y)) return true;
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return false;
}

struct InstanceView {
  bool visible = false;
  double distance_cells = 0.0;
  double bearing_deg = 0.0;
};

InstanceView view_instance(const SceneSpec& scene, const AgentState& state, int ox, int oy,
                           double fov_deg, double max_range_cells) {
  InstanceView v;
  const double dx = ox - state.x;
  const double dy = oy - state.y;
  v.distance_cells = std::sqrt(dx * dx + dy * dy);
  if (ox == state.x && oy == state.y) {
    v.visible = true;
    return v;
  }
  if (v.distance_cells > max_range_cells) return v;
  v.bearing_deg = relative_bearing_deg(state.heading_deg, dx, dy);
  if (std::abs(v.bearing_deg) > fov_deg / 2.0 + 1e-9) return v;
  if (ray_blocked(scene, state.x, state.y, ox, oy)) return v;
  v.visible = true;
  return v;
}

}  // namespace

std::string action_name(Action a) {
  switch (a) {
    case Action::MoveAhead: return "MoveAhead";
    case Action::RotateLeft: return "RotateLeft";
    case Action::RotateRight: return "RotateRight";
    case Action::LookUp: return "LookUp";
    case Action::LookDown: return "LookDown";
    case Action::Done: return "Done";
  }
  throw Error("unknown action");
}

Action action_from_name(const std::string& name) {
  for (int i = 0; i < kActionCount; ++i) {
    if (action_name(static_cast<Action>(i)) == name) return static_cast<Action>(i);
  }
  throw ConfigError("unknown action '" + name + "'");
}

std::pair<int, int> heading_vector(int heading_deg) {
  switch (normalize_heading(heading_deg)) {
    case 0: return {1, 0};
    case 90: return {0, -1};
    case 180: return {-1, 0};
    case 270: return {0, 1};
  }
  throw Error("heading " + std::to_string(heading_deg) + " is not a multiple of 90");
}

bool state_valid(const SceneSpec& scene, const AgentState& state) {
  if (scene.blocked(state.x, state.y)) return false;
  const int h = state.heading_deg;
  if (h != 0 && h != 90 && h != 180 && h != 270) return false;
  return state.pitch_deg == -30 || state.pitch_deg == 0 || state.pitch_deg == 30;
}

bool cell_visible(const SceneSpec& scene, const AgentState& from, int to_x, int to_y,
                  double fov_deg, double max_range_cells) {
  return view_instance(scene, from, to_x, to_y, fov_deg, max_range_cells).visible;
}

bool success_check(const SceneSpec& scene, const AgentState& state, int target,
                   const EpisodeConfig& episode, const SimConfig& sim) {
  const PlacedObject* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const PlacedObject& o : scene.objects) {
    if (o.category != target) continue;
    const double dx = o.x - state.x;
    const double dy = o.y - state.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d < best) {
      best = d;
      nearest = &o;
    }
  }
  if (nearest == nullptr) return false;
  if (best * scene.cell_size > episode.success_distance_m) return false;
  return cell_visible(scene, state, nearest->x, nearest->y, sim.fov_deg,
                      static_cast<double>(sim.visibility_range_cells));
}

StepResult step(const SceneSpec& scene, const AgentState& state, Action action, int target,
                const EpisodeConfig& episode, const SimConfig& sim) {
  StepResult r;
  r.next = state;
  r.reward = episode.step_penalty;

  switch (action) {
    case Action::MoveAhead: {
      const auto [dx, dy] = heading_vector(state.heading_deg);
      const int nx = state.x + dx;
      const int ny = state.y + dy;
      if (scene.blocked(nx, ny)) {
        r.event = StepEvent::Collision;
      } else {
        r.next.x = nx;
        r.next.y = ny;
      }
      break;
    }
    case Action::RotateLeft:
      r.next.heading_deg = normalize_heading(state.heading_deg + 90);
      break;
    case Action::RotateRight:
      r.next.heading_deg = normalize_heading(state.heading_deg - 90);
      break;
    case Action::LookUp:
      r.next.pitch_deg = std::min(30, state.pitch_deg + 30);
      break;
    case Action::LookDown:
      r.next.pitch_deg = std::max(-30, state.pitch_deg - 30);
      break;
    case Action::Done:
      r.done = true;
      if (success_check(scene, state, target, episode, sim)) {
        r.event = StepEvent::Success;
        r.reward = episode.success_reward;
      } else {
        r.event = StepEvent::Failure;
      }
      break;
  }
  return r;
}

Observation render_observation(const SceneSpec& scene, const AgentState& state,
                               const SimConfig& sim, std::uint64_t noise_seed) {
  Observation obs;
  obs.appearance_dim = sim.appearance_dim;
  obs.appearance.assign(static_cast<std::size_t>(kNumCategories) * sim.appearance_dim, 0.0);

  const double range = static_cast<double>(sim.visibility_range_cells);
  std::array<double, kNumCategories> best_conf{};
  std::array<int, kNumCategories> best_instance;
  best_instance.fill(-1);
  std::array<InstanceView, kNumCategories> best_view{};

  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const PlacedObject& o = scene.objects[i];
    const InstanceView v = view_instance(scene, state, o.x, o.y, sim.fov_deg, range);
    if (!v.visible) continue;
    double conf = 1.0 - v.distance_cells / range;
    if (sim.confidence_noise > 0.0) {
      Rng noise(mix64(noise_seed, pose_key(state), static_cast<std::uint64_t>(i)));
      conf += noise.uniform(-sim.confidence_noise, sim.confidence_noise);
    }
    conf = std::clamp(conf, 0.0, 1.0);
    if (conf > best_conf[static_cast<std::size_t>(o.category)]) {
      best_conf[static_cast<std::size_t>(o.category)] = conf;
      best_instance[static_cast<std::size_t>(o.category)] = static_cast<int>(i);
      best_view[static_cast<std::size_t>(o.category)] = v;
    }
  }

  for (int c = 0; c < kNumCategories; ++c) {
    if (best_instance[static_cast<std::size_t>(c)] < 0) continue;  // all-zero record
    const InstanceView& v = best_view[static_cast<std::size_t>(c)];
    const double dist_m = std::max(v.distance_cells * scene.cell_size, 0.1);

    // Perspective heuristic: center from bearing and pitch, size from 1/distance.
    const double cx = 0.5 + v.bearing_deg / sim.fov_deg;
    const double vangle = std::atan2(sim.object_height_m - sim.camera_height_m, dist_m) * kDegPerRad;
    const double cy = 0.5 - (vangle - state.pitch_deg) / sim.fov_deg;
    const double half = sim.object_size_m / (2.0 * dist_m);

    Detection& det = obs.detections[static_cast<std::size_t>(c)];
    det.x1 = std::clamp(cx - half, 0.0, 1.0);
    det.y1 = std::clamp(cy - half, 0.0, 1.0);
    det.x2 = std::clamp(cx + half, 0.0, 1.0);
    det.y2 = std::clamp(cy + half, 0.0, 1.0);
    det.confidence = best_conf[static_cast<std::size_t>(c)];

    Rng signature(mix64(kAppearanceSignatureSeed, static_cast<std::uint64_t>(c)));
    Rng wobble(mix64(noise_seed, pose_key(state), 0xbeefull, static_cast<std::uint64_t>(c)));
    double* row = obs.appearance.data() + static_cast<std::size_t>(c) * sim.appearance_dim;
    for (int j = 0; j < sim.appearance_dim; ++j) {
      row[j] = signature.uniform(-1.0, 1.0) +
               sim.appearance_noise * wobble.uniform(-1.0, 1.0);
    }
  }

  // Global context: egocentric occupancy, category confidences, pitch, bias.
  obs.global_feature.reserve(static_cast<std::size_t>(sim.global_dim()));
  const auto [fx, fy] = heading_vector(state.heading_deg);
  const auto [rx, ry] = heading_vector(state.heading_deg - 90);
  for (int k = 1; k <= sim.occupancy_depth; ++k) {
    for (int o = -sim.occupancy_halfwidth; o <= sim.occupancy_halfwidth; ++o) {
      const int cx = state.x + k * fx + o * rx;
      const int cy = state.y + k * fy + o * ry;
      obs.global_feature.push_back(scene.blocked(cx, cy) ? 1.0 : 0.0);
    }
  }
  for (int c = 0; c < kNumCategories; ++c) {
    obs.global_feature.push_back(best_conf[static_cast<std::size_t>(c)]);
  }
  obs.global_feature.push_back(state.pitch_deg / 30.0);
  obs.global_feature.push_back(1.0);
  return obs;
}

ResetResult reset(const SceneSpec& scene, std::uint64_t episode_seed, ExpertPlanner& planner) {
  Rng rng(mix64(0x4e5e7ull, episode_seed));
  const std::vector<int> categories = scene.present_categories();
  const int target = categories[static_cast<std::size_t>(rng.uniform_int(
      static_cast<int>(categories.size())))];

  std::vector<int> free_cells;
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      if (!scene.blocked(x, y)) free_cells.push_back(y * scene.width + x);
    }
  }

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int cell = free_cells[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(free_cells.size())))];
    AgentState state{cell % scene.width, cell / scene.width, 90 * rng.uniform_int(4),
                     30 * (rng.uniform_int(3) - 1)};
    if (planner.reachable(state, target)) return {state, target};
  }
  throw PlanningError("no reachable start for target " + std::string(category_name(target)) +
                      " in scene " + scene.scene_id);
}

Episode::Episode(const SceneSpec& scene, int target, AgentState start, EpisodeConfig episode_config,
                 SimConfig sim_config, std::uint64_t noise_seed)
    : scene_(&scene),
      target_(target),
      state_(start),
      episode_config_(episode_config),
      sim_config_(sim_config),
      noise_seed_(noise_seed) {
  if (!valid_category(target)) throw IndexError("episode target out of range");
  if (!state_valid(scene, start)) throw ProtocolError("episode start pose invalid");
}

StepResult Episode::apply(Action action) {
  if (done_) throw ProtocolError("step on a finished episode");
  const StepResult r = step(*scene_, state_, action, target_, episode_config_, sim_config_);
  state_ = r.next;
  ++steps_;
  total_reward_ += r.reward;
  if (r.done) {
    done_ = true;
    success_ = r.event == StepEvent::Success;
  } else if (steps_ >= episode_config_.max_steps) {
    done_ = true;
    timed_out_ = true;
  }
  return r;
}

Observation Episode::observe() const {
  return render_observation(*scene_, state_, sim_config_, noise_seed_);
}

}  // namespace orgnav
