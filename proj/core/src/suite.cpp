#include "orgnav/suite.hpp"

#include <set>
#include <string>

#include "orgnav/rng.hpp"

namespace orgnav {

std::vector<SceneTemplate> builtin_templates(double pair_probability, int width, int height,
                                             int wall_count) {
  auto ids = [](std::initializer_list<const char*> names) {
    std::vector<int> out;
    for (const char* n : names) out.push_back(category_id(n));
    return out;
  };
  auto pair = [pair_probability](const char* a, const char* b) {
    return PairRule{category_id(a), category_id(b), pair_probability, 2};
  };

  SceneTemplate kitchen{"kitchen", SceneType::Kitchen, width, height, 0.5, wall_count,
                        ids({"Sink", "Microwave", "Toaster", "CoffeeMachine", "Fridge",
                             "GarbageCan"}),
                        {pair("CoffeeMachine", "Toaster"), pair("Sink", "GarbageCan")}};
  SceneTemplate living{"living_room", SceneType::LivingRoom, width, height, 0.5, wall_count,
                       ids({"Television", "RemoteControl", "Sofa", "Cushion", "Laptop", "Book"}),
                       {pair("Television", "RemoteControl"), pair("Sofa", "Cushion")}};
  SceneTemplate bedroom{"bedroom", SceneType::Bedroom, width, height, 0.5, wall_count,
                        ids({"Bed", "Pillow", "AlarmClock", "Lamp", "Book", "Mirror"}),
                        {pair("Bed", "Pillow"), pair("AlarmClock", "Lamp")}};
  SceneTemplate bathroom{"bathroom", SceneType::Bathroom, width, height, 0.5, wall_count,
                         ids({"Toilet", "ToiletPaper", "Towel", "SoapBottle", "Mirror", "Sink"}),
                         {pair("Toilet", "ToiletPaper"), pair("Sink", "SoapBottle")}};
  return {kitchen, living, bedroom, bathroom};
}

SceneSets make_builtin_suite(const SuiteConfig& config) {
  SceneSets sets;
  const auto base = builtin_templates(config.pair_probability, config.min_size, config.min_size, 0);
  for (std::size_t type_idx = 0; type_idx < base.size(); ++type_idx) {
    struct Split {
      std::vector<SceneSpec>* out;
      int count;
      const char* tag;
    };
    const Split splits[] = {{&sets.train, config.train_per_type, "train"},
                            {&sets.val, config.val_per_type, "val"},
                            {&sets.test, config.test_per_type, "test"}};
    for (std::size_t split_idx = 0; split_idx < 3; ++split_idx) {
      for (int i = 0; i < splits[split_idx].count; ++i) {
        const std::uint64_t scene_seed =
            mix64(config.seed, type_idx, split_idx, static_cast<std::uint64_t>(i));
        Rng shape_rng(mix64(scene_seed, 0x5a5aull));
        SceneTemplate tmpl = base[type_idx];
        tmpl.name = tmpl.name + "_" + splits[split_idx].tag;
        tmpl.width = config.min_size + shape_rng.uniform_int(config.max_size - config.min_size + 1);
        tmpl.height = config.min_size + shape_rng.uniform_int(config.max_size - config.min_size + 1);
        tmpl.wall_count = tmpl.width * tmpl.height * config.wall_percent / 100;
        splits[split_idx].out->push_back(generate_scene(scene_seed, tmpl));
      }
    }
  }
  assert_disjoint(sets);
  return sets;
}

std::vector<SceneSpec> make_single_room_suite(std::uint64_t seed, int count, int size,
                                              int wall_count) {
  const auto base = builtin_templates(0.9, size, size, wall_count);
  std::vector<SceneSpec> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    SceneTemplate tmpl = base[static_cast<std::size_t>(i) % base.size()];
    tmpl.name = tmpl.name + "_single";
    scenes.push_back(generate_scene(mix64(seed, 0x51ull, static_cast<std::uint64_t>(i)), tmpl));
  }
  return scenes;
}

void assert_disjoint(const SceneSets& sets) {
  std::set<std::string> seen;
  auto check = [&seen](const std::vector<SceneSpec>& scenes, const char* split) {
    for (const SceneSpec& s : scenes) {
      if (!seen.insert(s.scene_id).second) {
        throw ConfigError("scene '" + s.scene_id + "' appears in more than one split (" + split +
                          ")");
      }
    }
  };
  check(sets.train, "train");
  check(sets.val, "val");
  check(sets.test, "test");
}

}  // namespace orgnav
