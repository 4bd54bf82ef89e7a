#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "radcl/labels.hpp"

namespace radcl::eval {

// Indexed by ObsClass value: blank, positive, negative, uncertain.
struct CategoryEval {
  std::string category;
  std::array<double, 4> f1{};
  std::array<std::size_t, 4> support{};  // gold support per class
  // Support-weighted mean over positive/negative/uncertain; empty when all
  // three supports are zero.
  std::optional<double> weighted_f1;
};

struct EvalReport {
  std::vector<CategoryEval> categories;     // one per label slot
  std::optional<double> average_weighted;   // unweighted mean over defined rows

  std::string to_csv() const;
  std::string to_table() const;
};

// One-vs-rest F1 for one slot and class; 0 when precision+recall is 0.
double per_task_f1(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds,
                   int slot, ObsClass task);

std::optional<double> weighted_f1(const std::vector<LabelVector>& preds,
                                  const std::vector<LabelVector>& golds, int slot);

EvalReport evaluate_labels(const std::vector<LabelVector>& preds,
                           const std::vector<LabelVector>& golds);

}  // namespace radcl::eval
