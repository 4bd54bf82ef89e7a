#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radcl/nn/params.hpp"
#include "radcl/nn/vocab.hpp"
#include "radcl/text/augment.hpp"

namespace radcl::train {

struct PretrainConfig {
  enum class Algorithm { PatientDoc, DiseaseSentence, DiseaseFactualitySentence };

  Algorithm algorithm = Algorithm::DiseaseFactualitySentence;
  double tau = 0.4;
  std::size_t k = 8;
  std::size_t batch_size = 32;      // reference setup uses 128
  std::size_t epochs = 20;          // reference setup uses 100
  std::size_t steps_per_epoch = 0;  // 0: one pass worth of batches per epoch
  double lr = 0.1;
  // Standard NT-Xent keeps the positive in the denominator; switching this
  // off reproduces the negatives-only variant.
  bool positive_in_denominator = true;
  std::uint64_t seed = 0;

  void validate() const;
};

PretrainConfig::Algorithm algorithm_from_string(const std::string& name);
const char* to_string(PretrainConfig::Algorithm a);

struct TelemetryRow {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;
};

void write_telemetry_csv(const std::string& path, const std::vector<TelemetryRow>& rows);

// Runs contrastive pre-training in place on `params`; returns per-step loss
// telemetry. Sampling, augmentation, and optimization all derive from
// config.seed.
std::vector<TelemetryRow> pretrain(
    nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
    const std::vector<text::Report>& reports,
    const std::map<std::string, std::vector<text::SentenceAnnotation>>& annotations,
    const text::AugmentationPolicy& policy, const PretrainConfig& config);

}  // namespace radcl::train
