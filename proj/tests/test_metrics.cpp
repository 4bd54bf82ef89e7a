// Evaluation metrics against a brute-force confusion-matrix oracle.
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "radcl/eval/metrics.hpp"
#include "radcl/labels.hpp"

using namespace radcl;
using namespace radcl::eval;

namespace {

// Direct one-vs-rest F1 from explicit confusion counts.
double oracle_f1(const std::vector<LabelVector>& preds, const std::vector<LabelVector>& golds,
                 int slot, ObsClass task) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i][slot] == task;
    const bool g = golds[i][slot] == task;
    if (p && g) ++tp;
    if (p && !g) ++fp;
    if (!p && g) ++fn;
  }
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

// Support-weighted mean over the three non-blank classes.
std::optional<double> oracle_weighted_f1(const std::vector<LabelVector>& preds,
                                         const std::vector<LabelVector>& golds, int slot) {
  const std::array<ObsClass, 3> tasks = {ObsClass::Positive, ObsClass::Negative,
                                         ObsClass::Uncertain};
  double weighted = 0.0;
  std::size_t total = 0;
  for (ObsClass t : tasks) {
    std::size_t support = 0;
    for (const auto& g : golds)
      if (g[slot] == t) ++support;
    weighted += static_cast<double>(support) * oracle_f1(preds, golds, slot, t);
    total += support;
  }
  if (total == 0) return std::nullopt;
  return weighted / static_cast<double>(total);
}

LabelVector random_labels(std::mt19937_64& gen) {
  LabelVector v;
  std::uniform_int_distribution<int> four(0, 3);
  std::uniform_int_distribution<int> two(0, 1);
  for (int s = 0; s < kNumFindingSlots; ++s) v[s] = static_cast<ObsClass>(four(gen));
  v[kNoFindingSlot] = static_cast<ObsClass>(two(gen));
  return v;
}

}  // namespace

TEST_CASE("per-task F1 equals the confusion-matrix oracle on random sets") {
  std::mt19937_64 gen(20240817);
  std::uniform_int_distribution<std::size_t> n_dist(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = n_dist(gen);
    std::vector<LabelVector> preds(n), golds(n);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = random_labels(gen);
      golds[i] = random_labels(gen);
    }
    for (int slot : {0, 3, 6, 12, 13}) {
      for (ObsClass task : {ObsClass::Positive, ObsClass::Negative, ObsClass::Uncertain}) {
        if (slot == kNoFindingSlot && task != ObsClass::Positive) continue;
        CAPTURE(trial);
        CAPTURE(slot);
        CHECK(per_task_f1(preds, golds, slot, task) == oracle_f1(preds, golds, slot, task));
      }
      const auto got = weighted_f1(preds, golds, slot);
      const auto want = oracle_weighted_f1(preds, golds, slot);
      REQUIRE(got.has_value() == want.has_value());
      if (want) CHECK(*got == doctest::Approx(*want).epsilon(1e-12));
    }
  }
}

TEST_CASE("weighted F1 reproduces a worked example") {
  // One slot, 30 reports: gold supports are positive 14, negative 9,
  // uncertain 7. The weighted mean is (14*f1_pos + 9*f1_neg + 7*f1_unc)/30.
  std::vector<LabelVector> preds, golds;
  auto push = [&](ObsClass gold, ObsClass pred, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      LabelVector g, p;
      g[0] = gold;
      p[0] = pred;
      preds.push_back(p);
      golds.push_back(g);
    }
  };
  push(ObsClass::Positive, ObsClass::Positive, 5);   // tp for positive
  push(ObsClass::Positive, ObsClass::Negative, 6);   // fn for positive, fp for negative
  push(ObsClass::Positive, ObsClass::Blank, 3);      // fn for positive
  push(ObsClass::Negative, ObsClass::Positive, 3);   // fp positive, fn negative
  push(ObsClass::Negative, ObsClass::Negative, 2);   // tp negative
  push(ObsClass::Negative, ObsClass::Uncertain, 4);  // fn negative, fp uncertain
  push(ObsClass::Uncertain, ObsClass::Uncertain, 4); // tp uncertain
  push(ObsClass::Uncertain, ObsClass::Blank, 3);     // fn uncertain

  // positive: tp=5 fp=3 fn=9 -> F1 = 10/22; negative: tp=2 fp=6 fn=7 -> 4/17;
  // uncertain: tp=4 fp=4 fn=3 -> 8/15.
  const double f1_pos = 10.0 / 22.0;
  const double f1_neg = 4.0 / 17.0;
  const double f1_unc = 8.0 / 15.0;
  CHECK(per_task_f1(preds, golds, 0, ObsClass::Positive) == doctest::Approx(f1_pos));
  CHECK(per_task_f1(preds, golds, 0, ObsClass::Negative) == doctest::Approx(f1_neg));
  CHECK(per_task_f1(preds, golds, 0, ObsClass::Uncertain) == doctest::Approx(f1_unc));

  const double want = (14 * f1_pos + 9 * f1_neg + 7 * f1_unc) / 30.0;
  const auto got = weighted_f1(preds, golds, 0);
  REQUIRE(got);
  CHECK(*got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("blank gold labels carry no weight") {
  // All gold blank: weighted F1 undefined for that slot.
  std::vector<LabelVector> preds(5), golds(5);
  for (auto& p : preds) p[2] = ObsClass::Positive;
  CHECK_FALSE(weighted_f1(preds, golds, 2).has_value());

  // A single positive gold: weight falls entirely on the positive task.
  golds[0][2] = ObsClass::Positive;
  const auto got = weighted_f1(preds, golds, 2);
  REQUIRE(got);
  // tp=1 fp=4 fn=0 -> F1 = 2/(2+4) = 1/3.
  CHECK(*got == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("perfect and disjoint predictions bound the metric") {
  std::mt19937_64 gen(11);
  std::vector<LabelVector> golds(20);
  for (auto& g : golds) g = random_labels(gen);

  SUBCASE("perfect predictions score 1 wherever defined") {
    const auto report = evaluate_labels(golds, golds);
    for (const auto& cat : report.categories) {
      if (cat.weighted_f1) CHECK(*cat.weighted_f1 == doctest::Approx(1.0));
    }
    if (report.average_weighted) CHECK(*report.average_weighted == doctest::Approx(1.0));
  }

  SUBCASE("always-blank predictions score 0 wherever defined") {
    std::vector<LabelVector> blank(golds.size());
    const auto report = evaluate_labels(blank, golds);
    for (const auto& cat : report.categories) {
      if (cat.weighted_f1) CHECK(*cat.weighted_f1 == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("evaluation report covers every category with supports") {
  std::mt19937_64 gen(23);
  std::vector<LabelVector> preds(15), golds(15);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    preds[i] = random_labels(gen);
    golds[i] = random_labels(gen);
  }
  const auto report = evaluate_labels(preds, golds);
  REQUIRE(report.categories.size() == kNumCategories);
  for (int s = 0; s < kNumCategories; ++s) {
    CHECK(report.categories[s].category == kCategoryNames[s]);
    std::size_t total = 0;
    for (auto sup : report.categories[s].support) total += sup;
    CHECK(total == golds.size());
  }
  // The average row equals the mean over defined per-category values.
  double sum = 0;
  std::size_t defined = 0;
  for (const auto& cat : report.categories) {
    if (cat.weighted_f1) {
      sum += *cat.weighted_f1;
      ++defined;
    }
  }
  REQUIRE(defined > 0);
  REQUIRE(report.average_weighted.has_value());
  CHECK(*report.average_weighted == doctest::Approx(sum / defined).epsilon(1e-12));

  // CSV rendering carries one data row per category plus header and average.
  const std::string csv = report.to_csv();
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows >= kNumCategories + 1);
}

TEST_CASE("prediction and gold counts must agree") {
  std::vector<LabelVector> preds(3), golds(4);
  CHECK_THROWS(evaluate_labels(preds, golds));
}
