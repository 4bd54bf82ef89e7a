#include "radcl/labels.hpp"

#include "radcl/errors.hpp"

namespace radcl::labels {

int category_index(std::string_view name) {
  for (int i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

ObsClass class_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == s) return static_cast<ObsClass>(i);
  }
  throw LabelDomainError("unknown label class '" + std::string(s) + "'");
}

void LabelVector::validate() const {
  const ObsClass nf = slots[kNoFindingSlot];
  if (nf == ObsClass::Negative || nf == ObsClass::Uncertain) {
    throw LabelDomainError("No Finding slot only takes blank or positive");
  }
}

LabelVector LabelVector::from_strings(const std::vector<std::string>& values) {
  if (values.size() != kNumCategories) {
    throw LabelDomainError("label vector must have 14 entries, got " +
                           std::to_string(values.size()));
  }
  LabelVector v;
  for (int i = 0; i < kNumCategories; ++i) {
    v[i] = class_from_string(values[static_cast<std::size_t>(i)]);
  }
  v.validate();
  return v;
}

std::vector<std::string> LabelVector::to_strings() const {
  std::vector<std::string> out;
  out.reserve(kNumCategories);
  for (int i = 0; i < kNumCategories; ++i) {
    out.emplace_back(kClassNames[static_cast<std::size_t>(static_cast<std::uint8_t>(slots[static_cast<std::size_t>(i)]))]);
  }
  return out;
}

}  // namespace radcl::labels
