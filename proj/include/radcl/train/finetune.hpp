#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radcl/labels.hpp"
#include "radcl/nn/params.hpp"
#include "radcl/nn/tensor.hpp"
#include "radcl/nn/vocab.hpp"
#include "radcl/text/corpus.hpp"
#include "radcl/train/pretrain.hpp"

namespace radcl::train {

struct FinetuneConfig {
  enum class Mode { Linear, Full };  // frozen encoder vs end-to-end

  Mode mode = Mode::Linear;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  double lr = 2e-5;
  double beta1 = 0.9, beta2 = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
};

FinetuneConfig::Mode mode_from_string(const std::string& name);
const char* to_string(FinetuneConfig::Mode m);

struct LabeledExample {
  const text::Report* report = nullptr;
  LabelVector gold;
};

// Lemmas fed to the classifier: FINDINGS + IMPRESSION sentences in order,
// or the whole report when neither section exists.
std::vector<std::string> classification_lemmas(const text::Report& report);

// Trains the classification heads (and, in Full mode, the encoder) in
// place. Returns per-step loss telemetry.
std::vector<TelemetryRow> finetune(nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
                                   const std::vector<LabeledExample>& examples,
                                   const FinetuneConfig& config);

struct Prediction {
  LabelVector labels;
  std::vector<std::vector<float>> probs;  // per head, per class
};

Prediction classify(const nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
                    const text::Report& report);

// Gold class index for a slot (No Finding maps onto a 2-class head).
int class_index_for_slot(const LabelVector& labels, int slot);

}  // namespace radcl::train
