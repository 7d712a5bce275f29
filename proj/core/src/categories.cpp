#include "orgnav/categories.hpp"

#include "orgnav/errors.hpp"

namespace orgnav {

std::string_view category_name(int id) {
  if (!valid_category(id)) throw IndexError("category id " + std::to_string(id) + " out of range");
  return kCategoryNames[static_cast<std::size_t>(id)];
}

int category_id(std::string_view name) {
  for (int i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

bool valid_category(int id) { return id >= 0 && id < kNumCategories; }

}  // namespace orgnav
