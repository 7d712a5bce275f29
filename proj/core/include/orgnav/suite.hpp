#pragma once

#include <cstdint>
#include <vector>

#include "orgnav/scene.hpp"

namespace orgnav {

// Disjoint scene splits used by training and evaluation.
struct SceneSets {
  std::vector<SceneSpec> train;
  std::vector<SceneSpec> val;
  std::vector<SceneSpec> test;
};

struct SuiteConfig {
  std::uint64_t seed = 1234;
  int train_per_type = 20;
  int val_per_type = 5;
  int test_per_type = 5;
  int min_size = 8;
  int max_size = 10;
  double pair_probability = 0.9;
  // Internal wall cells as a percentage of the grid area.
  int wall_percent = 8;
};

// One template per scene type, six objects each, with two concurrence pairs.
std::vector<SceneTemplate> builtin_templates(double pair_probability, int width, int height,
                                             int wall_count);

// The default desk-scale suite: per scene type, train/val/test rooms with
// seeded sizes and layouts. Splits are disjoint by construction.
SceneSets make_builtin_suite(const SuiteConfig& config);

// Small open rooms of a single type; used for quick learning checks.
std::vector<SceneSpec> make_single_room_suite(std::uint64_t seed, int count, int size = 8,
                                              int wall_count = 3);

// Throws ConfigError when any scene id appears in two splits.
void assert_disjoint(const SceneSets& sets);

}  // namespace orgnav
