#include "radcl/eval/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "radcl/errors.hpp"

namespace radcl::eval {

namespace {

void check_aligned(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds) {
  if (preds.size() != golds.size()) {
    throw LengthMismatch("prediction and gold counts differ");
  }
}

}  // namespace

double per_task_f1(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds,
                   int slot, ObsClass task) {
  check_aligned(preds, golds);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i][slot] == task;
    const bool g = golds[i][slot] == task;
    if (p && g) ++tp;
    if (p && !g) ++fp;
    if (!p && g) ++fn;
  }
  // Integer-count form of 2PR/(P+R); bitwise-reproducible from the counts.
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::optional<double> weighted_f1(const std::vector<LabelVector>& preds,
                                  const std::vector<LabelVector>& golds, int slot) {
  check_aligned(preds, golds);
  double weighted_sum = 0.0;
  std::size_t total_support = 0;
  for (ObsClass task : {ObsClass::Positive, ObsClass::Negative, ObsClass::Uncertain}) {
    std::size_t support = 0;
    for (const auto& g : golds) {
      if (g[slot] == task) ++support;
    }
    if (support == 0) continue;  // zero-support tasks vanish from the mean
    weighted_sum += static_cast<double>(support) * per_task_f1(preds, golds, slot, task);
    total_support += support;
  }
  if (total_support == 0) return std::nullopt;
  return weighted_sum / static_cast<double>(total_support);
}

EvalReport evaluate_labels(const std::vector<LabelVector>& preds,
                           const std::vector<LabelVector>& golds) {
  check_aligned(preds, golds);
  EvalReport report;
  double sum = 0.0;
  std::size_t defined = 0;
  for (int slot = 0; slot < kNumCategories; ++slot) {
    CategoryEval cat;
    cat.category = std::string(kCategoryNames[static_cast<std::size_t>(slot)]);
    for (int c = 0; c < 4; ++c) {
      const auto task = static_cast<ObsClass>(c);
      cat.f1[static_cast<std::size_t>(c)] = per_task_f1(preds, golds, slot, task);
      std::size_t support = 0;
      for (const auto& g : golds) {
        if (g[slot] == task) ++support;
      }
      cat.support[static_cast<std::size_t>(c)] = support;
    }
    cat.weighted_f1 = weighted_f1(preds, golds, slot);
    if (cat.weighted_f1) {
      sum += *cat.weighted_f1;
      ++defined;
    }
    report.categories.push_back(std::move(cat));
  }
  if (defined > 0) report.average_weighted = sum / static_cast<double>(defined);
  return report;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "category,positive_f1,negative_f1,uncertain_f1,blank_f1,weighted_f1,"
         "positive_support,negative_support,uncertain_support,blank_support\n";
  auto idx = [](ObsClass c) { return static_cast<std::size_t>(c); };
  for (const auto& cat : categories) {
    out << '"' << cat.category << '"' << ',' << cat.f1[idx(ObsClass::Positive)] << ','
        << cat.f1[idx(ObsClass::Negative)] << ',' << cat.f1[idx(ObsClass::Uncertain)] << ','
        << cat.f1[idx(ObsClass::Blank)] << ',';
    if (cat.weighted_f1) {
      out << *cat.weighted_f1;
    } else {
      out << "NA";
    }
    out << ',' << cat.support[idx(ObsClass::Positive)] << ','
        << cat.support[idx(ObsClass::Negative)] << ',' << cat.support[idx(ObsClass::Uncertain)]
        << ',' << cat.support[idx(ObsClass::Blank)] << '\n';
  }
  out << "\"Average\",,,,,";
  if (average_weighted) {
    out << *average_weighted;
  } else {
    out << "NA";
  }
  out << ",,,,\n";
  return out.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(28) << "category" << std::right << std::setw(10) << "pos_f1"
      << std::setw(10) << "neg_f1" << std::setw(10) << "unc_f1" << std::setw(10) << "blank_f1"
      << std::setw(12) << "weighted" << '\n';
  auto idx = [](ObsClass c) { return static_cast<std::size_t>(c); };
  for (const auto& cat : categories) {
    out << std::left << std::setw(28) << cat.category << std::right << std::setw(10)
        << cat.f1[idx(ObsClass::Positive)] << std::setw(10) << cat.f1[idx(ObsClass::Negative)]
        << std::setw(10) << cat.f1[idx(ObsClass::Uncertain)] << std::setw(10)
        << cat.f1[idx(ObsClass::Blank)];
    if (cat.weighted_f1) {
      out << std::setw(12) << *cat.weighted_f1;
    } else {
      out << std::setw(12) << "NA";
    }
    out << '\n';
  }
  out << std::left << std::setw(28) << "Average" << std::right << std::setw(40) << ' ';
  if (average_weighted) {
    out << std::setw(12) << *average_weighted;
  } else {
    out << std::setw(12) << "NA";
  }
  out << '\n';
  return out.str();
}

}  // namespace radcl::eval
