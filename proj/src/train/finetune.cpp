#include "radcl/train/finetune.hpp"

#include <algorithm>

#include "radcl/errors.hpp"
#include "radcl/nn/encoder.hpp"
#include "radcl/nn/loss.hpp"
#include "radcl/nn/optim.hpp"
#include "radcl/rng.hpp"

namespace radcl::train {

void FinetuneConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
}

FinetuneConfig::Mode mode_from_string(const std::string& name) {
  if (name == "linear") return FinetuneConfig::Mode::Linear;
  if (name == "full") return FinetuneConfig::Mode::Full;
  throw UsageError("unknown finetune mode: " + name + " (expected linear|full)");
}

const char* to_string(FinetuneConfig::Mode m) {
  return m == FinetuneConfig::Mode::Linear ? "linear" : "full";
}

std::vector<std::string> classification_lemmas(const text::Report& report) {
  auto in_scope = [](const std::string& section) {
    return section == "FINDINGS" || section == "IMPRESSION" || section == "IMPRESSIONS";
  };
  std::vector<std::string> lemmas;
  bool any_scope = false;
  for (const auto& s : report.sentences) {
    if (in_scope(s.section)) {
      any_scope = true;
      break;
    }
  }
  for (const auto& s : report.sentences) {
    if (any_scope && !in_scope(s.section)) continue;
    for (const auto& t : s.tokens) lemmas.push_back(t.lemma);
  }
  return lemmas;
}

int class_index_for_slot(const LabelVector& labels, int slot) {
  labels.validate();
  const auto cls = labels[slot];
  if (slot == kNoFindingSlot) {
    return cls == ObsClass::Positive ? 1 : 0;
  }
  return static_cast<int>(cls);
}

namespace {

// Logits, loss, and gradients for all heads over a batch of CLS rows.
float heads_forward_backward(nn::ModelParams<float>& params, const nn::Mat<float>& cls,
                             const std::vector<const LabeledExample*>& batch,
                             nn::ModelParams<float>& grads, nn::Mat<float>& dcls) {
  std::vector<std::vector<int>> targets(params.head_w.size());
  for (std::size_t h = 0; h < targets.size(); ++h) {
    targets[h].resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      targets[h][i] = class_index_for_slot(batch[i]->gold, static_cast<int>(h));
    }
  }
  return nn::heads_cross_entropy(cls, params.head_w, params.head_b, targets, grads.head_w,
                                 grads.head_b, dcls);
}

}  // namespace

std::vector<TelemetryRow> finetune(nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
                                   const std::vector<LabeledExample>& examples,
                                   const FinetuneConfig& config) {
  config.validate();
  if (examples.empty()) throw InsufficientData("no labeled examples to fine-tune on");
  for (const auto& ex : examples) ex.gold.validate();

  const auto d = static_cast<nn::Index>(params.config.d_model);
  const auto max_len = params.config.max_seq_len;
  const bool linear = config.mode == FinetuneConfig::Mode::Linear;

  // Frozen encoder: embed every report once and train heads on the cache.
  std::vector<nn::Mat<float>> frozen_cls;
  if (linear) {
    frozen_cls.reserve(examples.size());
    nn::SeqCache<float> cache;
    for (const auto& ex : examples) {
      const auto ids =
          vocab.encode(classification_lemmas(*ex.report), max_len, /*keep_tail=*/true);
      frozen_cls.push_back(nn::encode_forward(params, ids, cache).row(0));
    }
  }

  nn::Adam<float> opt(static_cast<float>(config.lr), static_cast<float>(config.beta1),
                      static_cast<float>(config.beta2));
  nn::ModelParams<float> grads = nn::ModelParams<float>::zeros_like(params);

  // Head tensors sit at the tail of the trainable list.
  nn::TensorMask head_mask;
  const std::size_t total = params.trainable().size();
  for (std::size_t i = total - 2 * params.head_w.size(); i < total; ++i) head_mask.push_back(i);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<TelemetryRow> telemetry;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(split_seed(config.seed, epoch));
    rng.shuffle(order);
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const LabeledExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[order[i]]);
      const auto B = static_cast<nn::Index>(batch.size());

      nn::Mat<float> cls(B, d);
      std::vector<nn::SeqCache<float>> caches;
      if (linear) {
        for (nn::Index i = 0; i < B; ++i) cls.row(i) = frozen_cls[order[start + i]];
      } else {
        caches.resize(batch.size());
        for (nn::Index i = 0; i < B; ++i) {
          const auto ids = vocab.encode(classification_lemmas(*batch[i]->report), max_len,
                                        /*keep_tail=*/true);
          cls.row(i) = nn::encode_forward(params, ids, caches[i]).row(0);
        }
      }

      nn::zero_grads(grads);
      nn::Mat<float> dcls;
      const float loss = heads_forward_backward(params, cls, batch, grads, dcls);

      if (linear) {
        opt.step(params, grads, head_mask);
      } else {
        nn::Mat<float> dy;
        for (nn::Index i = 0; i < B; ++i) {
          dy.resize(static_cast<nn::Index>(caches[i].ids.size()), d);
          dy.setZero();
          dy.row(0) = dcls.row(i);
          nn::encode_backward(params, caches[i], dy, grads);
        }
        opt.step(params, grads);
      }
      telemetry.push_back({epoch, step, static_cast<double>(loss)});
    }
  }
  return telemetry;
}

Prediction classify(const nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
                    const text::Report& report) {
  const auto ids =
      vocab.encode(classification_lemmas(report), params.config.max_seq_len, /*keep_tail=*/true);
  nn::SeqCache<float> cache;
  nn::Mat<float> cls = nn::encode_forward(params, ids, cache).row(0);

  Prediction pred;
  for (std::size_t h = 0; h < params.head_w.size(); ++h) {
    nn::Mat<float> logits =
        (cls * params.head_w[h].transpose()).rowwise() + params.head_b[h].col(0).transpose();
    nn::Mat<float> p = nn::softmax_rows(logits);
    std::vector<float> row(p.cols());
    int best = 0;
    for (nn::Index c = 0; c < p.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = p(0, c);
      if (p(0, c) > p(0, best)) best = static_cast<int>(c);
    }
    pred.probs.push_back(std::move(row));
    const int slot = static_cast<int>(h);
    if (slot == kNoFindingSlot) {
      pred.labels[slot] = best == 1 ? ObsClass::Positive : ObsClass::Blank;
    } else {
      pred.labels[slot] = static_cast<ObsClass>(best);
    }
  }
  pred.labels.validate();
  return pred;
}

}  // namespace radcl::train
