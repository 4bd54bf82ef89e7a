#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace radcl::labels {

// Fixed observation order; slot 13 is No Finding.
inline constexpr std::array<std::string_view, 14> kCategoryNames = {
    "Enlarged Cardiomediastinum",
    "Cardiomegaly",
    "Lung Opacity",
    "Lung Lesion",
    "Edema",
    "Consolidation",
    "Pneumonia",
    "Atelectasis",
    "Pneumothorax",
    "Pleural Effusion",
    "Pleural Other",
    "Fracture",
    "Support Devices",
    "No Finding",
};

inline constexpr int kNumCategories = 14;
inline constexpr int kNumFindingSlots = 13;  // slots with 4-class labels
inline constexpr int kNoFindingSlot = 13;    // 2-class slot {Blank, Positive}

enum class ObsClass : std::uint8_t { Blank = 0, Positive = 1, Negative = 2, Uncertain = 3 };

inline constexpr std::array<std::string_view, 4> kClassNames = {"blank", "positive", "negative",
                                                                "uncertain"};

// Classes a slot can take: 4 for findings, 2 for No Finding.
inline int classes_for_slot(int slot) { return slot == kNoFindingSlot ? 2 : 4; }

// -1 if the name is not a category (case-sensitive match on kCategoryNames).
int category_index(std::string_view name);

ObsClass class_from_string(std::string_view s);  // throws LabelDomainError

struct LabelVector {
  std::array<ObsClass, kNumCategories> slots{};

  ObsClass& operator[](int i) { return slots[static_cast<std::size_t>(i)]; }
  ObsClass operator[](int i) const { return slots[static_cast<std::size_t>(i)]; }
  bool operator==(const LabelVector&) const = default;

  // Throws LabelDomainError when slot 13 holds Negative or Uncertain.
  void validate() const;

  static LabelVector from_strings(const std::vector<std::string>& values);
  std::vector<std::string> to_strings() const;
};

}  // namespace radcl::labels

namespace radcl {
using labels::classes_for_slot;
using labels::kCategoryNames;
using labels::kNoFindingSlot;
using labels::kNumCategories;
using labels::kNumFindingSlots;
using labels::LabelVector;
using labels::ObsClass;
}  // namespace radcl
