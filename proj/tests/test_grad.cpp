#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "radcl/nn/encoder.hpp"
#include "radcl/nn/loss.hpp"
#include "radcl/nn/params.hpp"
#include "radcl/rng.hpp"

using radcl::Rng;
using radcl::nn::EncoderConfig;
using radcl::nn::Index;
using radcl::nn::Mat;
using radcl::nn::ModelParams;
using radcl::nn::ProjNorm;

namespace {

constexpr double kRelTol = 1e-4;
constexpr double kStep = 1e-5;

EncoderConfig small_config(ProjNorm norm) {
  EncoderConfig cfg;
  cfg.vocab_size = 12;
  cfg.max_seq_len = 10;
  cfg.d_model = 8;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_ff = 16;
  cfg.proj_dim = 8;
  cfg.proj_norm = norm;
  return cfg;
}

std::vector<std::vector<int>> token_sequences(std::size_t count, Rng& rng) {
  std::vector<std::vector<int>> seqs(count);
  for (auto& ids : seqs) {
    ids.push_back(radcl::nn::kClsId);
    const std::size_t len = 3 + rng.uniform_index(5);
    for (std::size_t t = 0; t < len; ++t) {
      ids.push_back(2 + static_cast<int>(rng.uniform_index(10)));
    }
  }
  return seqs;
}

Mat<double> encode_cls(ModelParams<double>& params, const std::vector<std::vector<int>>& seqs,
                       std::vector<radcl::nn::SeqCache<double>>& caches) {
  const auto d = static_cast<Index>(params.config.d_model);
  caches.assign(seqs.size(), {});
  Mat<double> cls(static_cast<Index>(seqs.size()), d);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    cls.row(static_cast<Index>(i)) = radcl::nn::encode_forward(params, seqs[i], caches[i]).row(0);
  }
  return cls;
}

void backprop_cls(ModelParams<double>& params, const std::vector<radcl::nn::SeqCache<double>>& caches,
                  const Mat<double>& dcls, ModelParams<double>& grads) {
  const auto d = static_cast<Index>(params.config.d_model);
  for (std::size_t i = 0; i < caches.size(); ++i) {
    Mat<double> dy = Mat<double>::Zero(static_cast<Index>(caches[i].ids.size()), d);
    dy.row(0) = dcls.row(static_cast<Index>(i));
    radcl::nn::encode_backward(params, caches[i], dy, grads);
  }
}

// Central-difference sweep over every element of every named tensor, skipping
// tensors the loss does not touch (their analytic gradient must be zero too,
// which the sweep verifies implicitly by comparing against a zero FD).
template <typename LossFn>
void check_all_parameters(const ModelParams<double>& params, ModelParams<double>& grads,
                          LossFn loss_at, const std::vector<std::string>& skip_prefixes) {
  ModelParams<double> grads_view = grads;
  auto grad_named = grads_view.named_tensors();
  ModelParams<double> base = params;
  auto base_named = base.named_tensors();

  for (std::size_t t = 0; t < base_named.size(); ++t) {
    const std::string& name = base_named[t].first;
    bool skip = name == "bn_mean" || name == "bn_var";
    for (const auto& p : skip_prefixes) {
      if (name.rfind(p, 0) == 0) skip = true;
    }
    if (skip) continue;

    const Mat<double>& g = *grad_named[t].second;
    double worst = 0.0;
    for (Index r = 0; r < g.rows(); ++r) {
      for (Index c = 0; c < g.cols(); ++c) {
        ModelParams<double> pp = params;
        (*pp.named_tensors()[t].second)(r, c) += kStep;
        ModelParams<double> pm = params;
        (*pm.named_tensors()[t].second)(r, c) -= kStep;
        const double fd = (loss_at(pp) - loss_at(pm)) / (2 * kStep);
        // Directions the loss provably ignores (e.g. uniform shifts removed
        // by batch normalization) leave only rounding noise in the FD.
        if (std::max(std::abs(fd), std::abs(g(r, c))) < 1e-7) continue;
        const double denom = std::max({std::abs(fd), std::abs(g(r, c)), 1e-6});
        worst = std::max(worst, std::abs(fd - g(r, c)) / denom);
      }
    }
    INFO("parameter group " << name);
    CHECK(worst <= kRelTol);
  }
}

void contrastive_gradient_case(ProjNorm norm) {
  Rng rng(311);
  auto cfg = small_config(norm);
  ModelParams<double> params = ModelParams<double>::init(cfg, {}, rng);

  const Index B = 2, k = 2;
  const double tau = 0.4;
  Rng seq_rng(77);
  const auto seqs = token_sequences(static_cast<std::size_t>(B * (2 + k)), seq_rng);

  auto loss_at = [&](ModelParams<double>& p) {
    std::vector<radcl::nn::SeqCache<double>> caches;
    Mat<double> cls = encode_cls(p, seqs, caches);
    radcl::nn::ProjCache<double> pcache;
    Mat<double> z = radcl::nn::project_forward(p, cls, /*train=*/true, pcache);
    Mat<double> dz;
    return radcl::nn::nt_xent_rows(z, B, k, tau, true, dz);
  };

  ModelParams<double> work = params;
  std::vector<radcl::nn::SeqCache<double>> caches;
  Mat<double> cls = encode_cls(work, seqs, caches);
  radcl::nn::ProjCache<double> pcache;
  Mat<double> z = radcl::nn::project_forward(work, cls, /*train=*/true, pcache);
  Mat<double> dz;
  radcl::nn::nt_xent_rows(z, B, k, tau, true, dz);
  ModelParams<double> grads = ModelParams<double>::zeros_like(params);
  Mat<double> dcls = radcl::nn::project_backward(work, pcache, dz, grads);
  backprop_cls(work, caches, dcls, grads);

  check_all_parameters(params, grads, loss_at, {"head"});
}

}  // namespace

TEST_CASE("contrastive loss gradients match finite differences (batch-norm head)") {
  contrastive_gradient_case(ProjNorm::BatchNorm);
}

TEST_CASE("contrastive loss gradients match finite differences (layer-norm head)") {
  contrastive_gradient_case(ProjNorm::LayerNorm);
}

TEST_CASE("classification loss gradients match finite differences") {
  Rng rng(412);
  auto cfg = small_config(ProjNorm::BatchNorm);
  ModelParams<double> params = ModelParams<double>::init(cfg, {4, 2}, rng);

  Rng seq_rng(78);
  const auto seqs = token_sequences(3, seq_rng);
  const std::vector<std::vector<int>> targets{{0, 3, 2}, {1, 0, 1}};

  auto loss_at = [&](ModelParams<double>& p) {
    std::vector<radcl::nn::SeqCache<double>> caches;
    Mat<double> cls = encode_cls(p, seqs, caches);
    std::vector<Mat<double>> gw, gb;
    for (std::size_t h = 0; h < p.head_w.size(); ++h) {
      gw.push_back(Mat<double>::Zero(p.head_w[h].rows(), p.head_w[h].cols()));
      gb.push_back(Mat<double>::Zero(p.head_b[h].rows(), 1));
    }
    Mat<double> dcls;
    return radcl::nn::heads_cross_entropy(cls, p.head_w, p.head_b, targets, gw, gb, dcls);
  };

  ModelParams<double> work = params;
  std::vector<radcl::nn::SeqCache<double>> caches;
  Mat<double> cls = encode_cls(work, seqs, caches);
  ModelParams<double> grads = ModelParams<double>::zeros_like(params);
  Mat<double> dcls;
  radcl::nn::heads_cross_entropy(cls, work.head_w, work.head_b, targets, grads.head_w,
                                 grads.head_b, dcls);
  backprop_cls(work, caches, dcls, grads);

  check_all_parameters(params, grads, loss_at, {"proj_", "norm_"});
}
