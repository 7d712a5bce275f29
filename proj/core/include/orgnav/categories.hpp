#pragma once

#include <array>
#include <string>
#include <string_view>

namespace orgnav {

// The fixed object vocabulary. Indices are stable and appear in scene files,
// checkpoints, and feature layouts.
inline constexpr int kNumCategories = 22;

inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "Sink",        "Microwave",  "Toaster",  "CoffeeMachine", "Fridge",     "GarbageCan",
    "Television",  "RemoteControl", "Sofa",  "Cushion",       "Laptop",     "Mouse",
    "Book",        "AlarmClock", "Bed",      "Pillow",        "Lamp",       "Mirror",
    "Toilet",      "ToiletPaper", "Towel",   "SoapBottle"};

std::string_view category_name(int id);

// Returns -1 when the name is unknown.
int category_id(std::string_view name);

bool valid_category(int id);

}  // namespace orgnav
