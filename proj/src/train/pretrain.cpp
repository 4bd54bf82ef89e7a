#include "radcl/train/pretrain.hpp"

#include <algorithm>
#include <fstream>

#include "radcl/errors.hpp"
#include "radcl/nn/encoder.hpp"
#include "radcl/nn/loss.hpp"
#include "radcl/nn/optim.hpp"
#include "radcl/rng.hpp"

namespace radcl::train {

void PretrainConfig::validate() const {
  if (!(tau > 0.0)) throw UsageError("tau must be positive");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
}

PretrainConfig::Algorithm algorithm_from_string(const std::string& name) {
  if (name == "patient") return PretrainConfig::Algorithm::PatientDoc;
  if (name == "disease") return PretrainConfig::Algorithm::DiseaseSentence;
  if (name == "disease-factuality") {
    return PretrainConfig::Algorithm::DiseaseFactualitySentence;
  }
  throw UsageError("unknown algorithm: " + name +
                   " (expected patient|disease|disease-factuality)");
}

const char* to_string(PretrainConfig::Algorithm a) {
  switch (a) {
    case PretrainConfig::Algorithm::PatientDoc: return "patient";
    case PretrainConfig::Algorithm::DiseaseSentence: return "disease";
    case PretrainConfig::Algorithm::DiseaseFactualitySentence: return "disease-factuality";
  }
  return "disease-factuality";
}

void write_telemetry_csv(const std::string& path, const std::vector<TelemetryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "epoch,step,loss\n";
  for (const auto& r : rows) out << r.epoch << ',' << r.step << ',' << r.loss << '\n';
  if (!out) throw DataError("write failed: " + path);
}

std::vector<TelemetryRow> pretrain(
    nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
    const std::vector<text::Report>& reports,
    const std::map<std::string, std::vector<text::SentenceAnnotation>>& annotations,
    const text::AugmentationPolicy& policy, const PretrainConfig& config) {
  config.validate();
  policy.validate();
  using Algorithm = PretrainConfig::Algorithm;

  std::vector<text::SentenceRef> pool;
  if (config.algorithm != Algorithm::PatientDoc) {
    pool = text::build_sentence_pool(reports, annotations,
                                     config.algorithm == Algorithm::DiseaseSentence);
  }
  const std::size_t pool_size =
      config.algorithm == Algorithm::PatientDoc ? reports.size() : pool.size();
  std::size_t steps = config.steps_per_epoch;
  if (steps == 0) steps = std::max<std::size_t>(1, pool_size / std::max<std::size_t>(1, config.batch_size));

  nn::Sgd<float> opt(static_cast<float>(config.lr));
  nn::ModelParams<float> grads = nn::ModelParams<float>::zeros_like(params);
  const auto max_len = params.config.max_seq_len;

  std::vector<TelemetryRow> telemetry;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t step = 0; step < steps; ++step) {
      Rng rng(split_seed(config.seed, epoch * steps + step));
      text::ContrastiveBatch batch;
      switch (config.algorithm) {
        case Algorithm::PatientDoc:
          batch = text::sample_patient_pairs(reports, annotations, config.batch_size, config.k,
                                             policy, rng);
          break;
        case Algorithm::DiseaseSentence:
          batch = text::sample_disease_pairs(pool, config.batch_size, config.k, policy, rng);
          break;
        case Algorithm::DiseaseFactualitySentence:
          batch = text::sample_disease_factuality_pairs(pool, config.batch_size, config.k,
                                                        policy, rng);
          break;
      }

      // Row layout expected by the loss: queries, positives, negatives.
      std::vector<const text::TextView*> views;
      for (const auto& v : batch.queries) views.push_back(&v);
      for (const auto& v : batch.positives) views.push_back(&v);
      for (const auto& row : batch.negatives) {
        for (const auto& v : row) views.push_back(&v);
      }

      const auto n = static_cast<nn::Index>(views.size());
      const auto d = static_cast<nn::Index>(params.config.d_model);
      std::vector<nn::SeqCache<float>> caches(views.size());
      nn::Mat<float> cls(n, d);
      for (nn::Index i = 0; i < n; ++i) {
        const auto ids = vocab.encode(views[i]->lemmas(), max_len);
        cls.row(i) = nn::encode_forward(params, ids, caches[i]).row(0);
      }

      nn::ProjCache<float> pcache;
      nn::Mat<float> z = nn::project_forward(params, cls, /*train=*/true, pcache);

      nn::Mat<float> dz;
      float loss;
      try {
        loss = nn::nt_xent_rows<float>(z, static_cast<nn::Index>(batch.size()),
                                       static_cast<nn::Index>(config.k),
                                       static_cast<float>(config.tau),
                                       config.positive_in_denominator, dz);
      } catch (const NonFiniteLoss&) {
        throw NonFiniteLoss("non-finite contrastive loss at epoch " + std::to_string(epoch) +
                            " step " + std::to_string(step));
      }

      nn::zero_grads(grads);
      nn::Mat<float> dcls = nn::project_backward(params, pcache, dz, grads);
      nn::Mat<float> dy = nn::Mat<float>::Zero(1, d);
      for (nn::Index i = 0; i < n; ++i) {
        dy.resize(static_cast<nn::Index>(caches[i].ids.size()), d);
        dy.setZero();
        dy.row(0) = dcls.row(i);
        nn::encode_backward(params, caches[i], dy, grads);
      }
      opt.step(params, grads);

      telemetry.push_back({epoch, step, static_cast<double>(loss)});
    }
  }
  return telemetry;
}

}  // namespace radcl::train
