#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "orgnav/categories.hpp"
#include "orgnav/errors.hpp"

namespace orgnav {

enum class SceneType { Kitchen, LivingRoom, Bedroom, Bathroom };

std::string scene_type_name(SceneType t);
SceneType scene_type_from_name(const std::string& name);

struct PlacedObject {
  int category = 0;
  int x = 0;
  int y = 0;
};

// A generated room: a rectangular grid with blocked cells and placed object
// instances. Immutable after generation; safe to share across rollouts.
struct SceneSpec {
  std::string scene_id;
  SceneType scene_type = SceneType::Kitchen;
  int width = 0;
  int height = 0;
  double cell_size = 0.5;  // meters per grid cell
  std::vector<std::pair<int, int>> walls;  // sorted, unique
  std::vector<PlacedObject> objects;
  std::uint64_t rng_seed = 0;

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool blocked(int x, int y) const {
    return !in_bounds(x, y) || blocked_map[static_cast<std::size_t>(y) * width + x];
  }
  int free_cell_count() const;
  std::vector<int> present_categories() const;  // sorted distinct ids
  bool has_category(int category) const;

  // Rebuilds the lookup map and checks invariants; called by generation and load.
  void finalize();

  std::vector<std::uint8_t> blocked_map;  // derived, not serialized
};

// Pairs that should co-occur, with the probability of co-placement and the
// maximum separation (Euclidean, in cells) when co-placed.
struct PairRule {
  int category_a = 0;
  int category_b = 0;
  double probability = 1.0;
  int radius = 2;
};

struct SceneTemplate {
  std::string name;
  SceneType scene_type = SceneType::Kitchen;
  int width = 8;
  int height = 8;
  double cell_size = 0.5;
  int wall_count = 6;  // internal obstacle cells
  std::vector<int> objects;  // category per instance
  std::vector<PairRule> pairs;
};

// Seeded-deterministic generation. Guarantees connectivity of all unblocked
// cells and one object per cell; throws GenerationError when the template
// cannot be satisfied.
SceneSpec generate_scene(std::uint64_t seed, const SceneTemplate& tmpl);

nlohmann::json scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const nlohmann::json& j);

void save_scene(const std::filesystem::path& path, const SceneSpec& scene);
SceneSpec load_scene(const std::filesystem::path& path);

// All *.json files in a directory, sorted by filename.
std::vector<SceneSpec> load_scene_dir(const std::filesystem::path& dir);

nlohmann::json template_to_json(const SceneTemplate& tmpl);
SceneTemplate template_from_json(const nlohmann::json& j);

// A template file holds either a single template object or {"templates": [...]}.
std::vector<SceneTemplate> load_templates(const std::filesystem::path& path);

inline constexpr int kSceneFileVersion = 1;

}  // namespace orgnav
