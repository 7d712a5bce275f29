#include "orgnav/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "orgnav/rng.hpp"

namespace orgnav {

namespace {

bool connected(int width, int height, const std::vector<std::uint8_t>& blocked) {
  const int total = width * height;
  int start = -1;
  int free_cells = 0;
  for (int i = 0; i < total; ++i) {
    if (!blocked[static_cast<std::size_t>(i)]) {
      ++free_cells;
      if (start < 0) start = i;
    }
  }
  if (free_cells == 0) return false;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(total), 0);
  std::queue<int> queue;
  queue.push(start);
  seen[static_cast<std::size_t>(start)] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const int cell = queue.front();
    queue.pop();
    ++reached;
    const int x = cell % width;
    const int y = cell / width;
    const int nx[] = {x + 1, x - 1, x, x};
    const int ny[] = {y, y, y + 1, y - 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || nx[k] >= width || ny[k] < 0 || ny[k] >= height) continue;
      const int n = ny[k] * width + nx[k];
      if (!blocked[static_cast<std::size_t>(n)] && !seen[static_cast<std::size_t>(n)]) {
        seen[static_cast<std::size_t>(n)] = 1;
        queue.push(n);
      }
    }
  }
  return reached == free_cells;
}

double cell_distance(int ax, int ay, int bx, int by) {
  const double dx = ax - bx;
  const double dy = ay - by;
  return std::sqrt(dx * dx + dy * dy);
}

int pick_free_cell(const std::vector<int>& candidates, Rng& rng) {
  return candidates[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(candidates.size())))];
}

}  // namespace

std::string scene_type_name(SceneType t) {
  switch (t) {
    case SceneType::Kitchen: return "kitchen";
    case SceneType::LivingRoom: return "living_room";
    case SceneType::Bedroom: return "bedroom";
    case SceneType::Bathroom: return "bathroom";
  }
  throw Error("unknown scene type");
}

SceneType scene_type_from_name(const std::string& name) {
  if (name == "kitchen") return SceneType::Kitchen;
  if (name == "living_room") return SceneType::LivingRoom;
  if (name == "bedroom") return SceneType::Bedroom;
  if (name == "bathroom") return SceneType::Bathroom;
  throw ConfigError("unknown scene type '" + name + "'");
}

int SceneSpec::free_cell_count() const {
  int n = 0;
  for (std::uint8_t b : blocked_map) {
    if (!b) ++n;
  }
  return n;
}

std::vector<int> SceneSpec::present_categories() const {
  std::set<int> cats;
  for (const PlacedObject& o : objects) cats.insert(o.category);
  return {cats.begin(), cats.end()};
}

bool SceneSpec::has_category(int category) const {
  return std::any_of(objects.begin(), objects.end(),
                     [category](const PlacedObject& o) { return o.category == category; });
}

void SceneSpec::finalize() {
  if (width <= 0 || height <= 0) throw GenerationError("scene has empty grid");
  if (cell_size <= 0.0) throw GenerationError("scene cell_size must be positive");
  blocked_map.assign(static_cast<std::size_t>(width) * height, 0);
  std::sort(walls.begin(), walls.end());
  walls.erase(std::unique(walls.begin(), walls.end()), walls.end());
  for (const auto& [x, y] : walls) {
    if (!in_bounds(x, y)) throw GenerationError("wall cell outside grid");
    blocked_map[static_cast<std::size_t>(y) * width + x] = 1;
  }
  for (const PlacedObject& o : objects) {
    if (!valid_category(o.category)) {
      throw GenerationError("object category " + std::to_string(o.category) + " invalid");
    }
    if (blocked(o.x, o.y)) {
      throw GenerationError("object at (" + std::to_string(o.x) + "," + std::to_string(o.y) +
                            ") sits on a blocked cell");
    }
  }
  if (present_categories().size() < 4) {
    throw GenerationError("scene must contain at least 4 distinct categories, got " +
                          std::to_string(present_categories().size()));
  }
}

SceneSpec generate_scene(std::uint64_t seed, const SceneTemplate& tmpl) {
  const int total = tmpl.width * tmpl.height;
  if (tmpl.wall_count + static_cast<int>(tmpl.objects.size()) >= total) {
    throw GenerationError("template places more cells than the grid holds");
  }
  {
    std::set<int> distinct(tmpl.objects.begin(), tmpl.objects.end());
    if (distinct.size() < 4) {
      throw GenerationError("template must declare at least 4 distinct categories");
    }
  }

  Rng rng(mix64(0x5ce4e5eedull, seed));

  // Walls first: rejection-sample layouts until the free cells stay connected.
  std::vector<std::uint8_t> blocked;
  bool placed_walls = false;
  for (int attempt = 0; attempt < 200 && !placed_walls; ++attempt) {
    blocked.assign(static_cast<std::size_t>(total), 0);
    int placed = 0;
    int guard = 0;
    while (placed < tmpl.wall_count && guard++ < total * 20) {
      const int cell = rng.uniform_int(total);
      if (!blocked[static_cast<std::size_t>(cell)]) {
        blocked[static_cast<std::size_t>(cell)] = 1;
        ++placed;
      }
    }
    placed_walls = placed == tmpl.wall_count && connected(tmpl.width, tmpl.height, blocked);
  }
  if (!placed_walls) {
    throw GenerationError("could not lay out " + std::to_string(tmpl.wall_count) +
                          " walls with a connected interior");
  }

  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(total), 0);
  auto free_cells = [&](auto&& predicate) {
    std::vector<int> out;
    for (int i = 0; i < total; ++i) {
      if (!blocked[static_cast<std::size_t>(i)] && !occupied[static_cast<std::size_t>(i)] &&
          predicate(i % tmpl.width, i / tmpl.width)) {
        out.push_back(i);
      }
    }
    return out;
  };

  std::vector<PlacedObject> objects;
  auto place_at = [&](int category, int cell) {
    occupied[static_cast<std::size_t>(cell)] = 1;
    objects.push_back({category, cell % tmpl.width, cell / tmpl.width});
  };

  // Pair rules apply to the first instance of each member category; everything
  // else is placed uniformly.
  std::vector<int> remaining = tmpl.objects;
  auto take = [&](int category) {
    auto it = std::find(remaining.begin(), remaining.end(), category);
    if (it == remaining.end()) return false;
    remaining.erase(it);
    return true;
  };

  for (const PairRule& rule : tmpl.pairs) {
    if (!valid_category(rule.category_a) || !valid_category(rule.category_b)) {
      throw GenerationError("pair rule names an invalid category");
    }
    if (!take(rule.category_a)) continue;
    if (!take(rule.category_b)) {
      remaining.push_back(rule.category_a);
      continue;
    }
    const bool together = rng.uniform() < rule.probability;
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      const auto anchors = free_cells([](int, int) { return true; });
      if (anchors.empty()) throw GenerationError("no free cell left for pair anchor");
      const int anchor = pick_free_cell(anchors, rng);
      const int ax = anchor % tmpl.width;
      const int ay = anchor / tmpl.width;
      const auto partners = free_cells([&](int x, int y) {
        if (x == ax && y == ay) return false;
        const double d = cell_distance(ax, ay, x, y);
        return together ? d <= rule.radius : d > rule.radius;
      });
      if (partners.empty()) continue;  // try a different anchor
      place_at(rule.category_a, anchor);
      place_at(rule.category_b, pick_free_cell(partners, rng));
      done = true;
    }
    if (!done) {
      throw GenerationError("could not satisfy pair rule " +
                            std::string(category_name(rule.category_a)) + "/" +
                            std::string(category_name(rule.category_b)));
    }
  }

  for (int category : remaining) {
    const auto cells = free_cells([](int, int) { return true; });
    if (cells.empty()) throw GenerationError("too many objects for the free cells");
    place_at(category, pick_free_cell(cells, rng));
  }

  SceneSpec scene;
  {
    std::ostringstream id;
    id << tmpl.name << "_" << std::hex << std::setw(12) << std::setfill('0') << (seed & 0xffffffffffffull);
    scene.scene_id = id.str();
  }
  scene.scene_type = tmpl.scene_type;
  scene.width = tmpl.width;
  scene.height = tmpl.height;
  scene.cell_size = tmpl.cell_size;
  for (int i = 0; i < total; ++i) {
    if (blocked[static_cast<std::size_t>(i)]) scene.walls.emplace_back(i % tmpl.width, i / tmpl.width);
  }
  scene.objects = std::move(objects);
  std::sort(scene.objects.begin(), scene.objects.end(), [](const auto& a, const auto& b) {
    return std::tie(a.category, a.x, a.y) < std::tie(b.category, b.x, b.y);
  });
  scene.rng_seed = seed;
  scene.finalize();
  return scene;
}

nlohmann::json scene_to_json(const SceneSpec& scene) {
  nlohmann::json walls = nlohmann::json::array();
  for (const auto& [x, y] : scene.walls) walls.push_back({x, y});
  nlohmann::json objects = nlohmann::json::array();
  for (const PlacedObject& o : scene.objects) {
    objects.push_back({{"category", o.category}, {"x", o.x}, {"y", o.y}});
  }
  return nlohmann::json{{"version", kSceneFileVersion},
                        {"scene_id", scene.scene_id},
                        {"scene_type", scene_type_name(scene.scene_type)},
                        {"width", scene.width},
                        {"height", scene.height},
                        {"cell_size", scene.cell_size},
                        {"walls", walls},
                        {"objects", objects},
                        {"seed", scene.rng_seed}};
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kSceneFileVersion) {
    throw ConfigError("unsupported scene file version");
  }
  SceneSpec scene;
  scene.scene_id = j.at("scene_id").get<std::string>();
  scene.scene_type = scene_type_from_name(j.at("scene_type").get<std::string>());
  scene.width = j.at("width").get<int>();
  scene.height = j.at("height").get<int>();
  scene.cell_size = j.at("cell_size").get<double>();
  for (const auto& w : j.at("walls")) {
    scene.walls.emplace_back(w.at(0).get<int>(), w.at(1).get<int>());
  }
  for (const auto& o : j.at("objects")) {
    scene.objects.push_back(
        {o.at("category").get<int>(), o.at("x").get<int>(), o.at("y").get<int>()});
  }
  scene.rng_seed = j.at("seed").get<std::uint64_t>();
  scene.finalize();
  return scene;
}

void save_scene(const std::filesystem::path& path, const SceneSpec& scene) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scene file " + path.string());
  out << scene_to_json(scene).dump(2) << "\n";
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read scene file " + path.string());
  nlohmann::json j;
  in >> j;
  return scene_from_json(j);
}

std::vector<SceneSpec> load_scene_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SceneSpec> scenes;
  scenes.reserve(files.size());
  for (const auto& f : files) scenes.push_back(load_scene(f));
  return scenes;
}

nlohmann::json template_to_json(const SceneTemplate& tmpl) {
  nlohmann::json objects = nlohmann::json::array();
  for (int c : tmpl.objects) objects.push_back(std::string(category_name(c)));
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairRule& p : tmpl.pairs) {
    pairs.push_back({{"a", std::string(category_name(p.category_a))},
                     {"b", std::string(category_name(p.category_b))},
                     {"probability", p.probability},
                     {"radius", p.radius}});
  }
  return nlohmann::json{{"name", tmpl.name},
                        {"scene_type", scene_type_name(tmpl.scene_type)},
                        {"width", tmpl.width},
                        {"height", tmpl.height},
                        {"cell_size", tmpl.cell_size},
                        {"wall_count", tmpl.wall_count},
                        {"objects", objects},
                        {"pairs", pairs}};
}

SceneTemplate template_from_json(const nlohmann::json& j) {
  SceneTemplate tmpl;
  tmpl.name = j.at("name").get<std::string>();
  tmpl.scene_type = scene_type_from_name(j.at("scene_type").get<std::string>());
  tmpl.width = j.value("width", 8);
  tmpl.height = j.value("height", 8);
  tmpl.cell_size = j.value("cell_size", 0.5);
  tmpl.wall_count = j.value("wall_count", 6);
  for (const auto& o : j.at("objects")) {
    const int id = o.is_string() ? category_id(o.get<std::string>()) : o.get<int>();
    if (!valid_category(id)) {
      throw ConfigError("template object '" + o.dump() + "' is not a known category");
    }
    tmpl.objects.push_back(id);
  }
  if (j.contains("pairs")) {
    for (const auto& p : j.at("pairs")) {
      PairRule rule;
      const auto& a = p.at("a");
      const auto& b = p.at("b");
      rule.category_a = a.is_string() ? category_id(a.get<std::string>()) : a.get<int>();
      rule.category_b = b.is_string() ? category_id(b.get<std::string>()) : b.get<int>();
      rule.probability = p.value("probability", 1.0);
      rule.radius = p.value("radius", 2);
      if (!valid_category(rule.category_a) || !valid_category(rule.category_b)) {
        throw ConfigError("pair rule names an unknown category: " + p.dump());
      }
      tmpl.pairs.push_back(rule);
    }
  }
  return tmpl;
}

std::vector<SceneTemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read template file " + path.string());
  nlohmann::json j;
  in >> j;
  std::vector<SceneTemplate> out;
  if (j.contains("templates")) {
    for (const auto& t : j.at("templates")) out.push_back(template_from_json(t));
  } else {
    out.push_back(template_from_json(j));
  }
  if (out.empty()) throw ConfigError("template file declares no templates");
  return out;
}

}  // namespace orgnav
