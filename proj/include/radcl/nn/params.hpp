#pragma once

#include <string>
#include <utility>
#include <vector>

#include "radcl/nn/config.hpp"
#include "radcl/nn/tensor.hpp"
#include "radcl/rng.hpp"

namespace radcl::nn {

// Reserved token ids shared by the vocabulary and the encoder.
inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kUnkId = 2;
inline constexpr int kDeidId = 3;

template <typename S>
struct ModelParams {
  struct Layer {
    Mat<S> wq, wk, wv, wo;              // d x d
    Mat<S> bq, bk, bv, bo;              // d x 1
    Mat<S> ln1_g, ln1_b, ln2_g, ln2_b;  // d x 1
    Mat<S> w1, b1;                      // d_ff x d, d_ff x 1
    Mat<S> w2, b2;                      // d x d_ff, d x 1
  };

  EncoderConfig config;
  std::vector<std::uint32_t> head_classes;  // class count per classification head

  Mat<S> tok_emb;  // vocab x d
  Mat<S> pos_emb;  // max_seq_len x d
  std::vector<Layer> layers;
  Mat<S> lnf_g, lnf_b;  // final LayerNorm, d x 1

  // Projection head: affine -> norm -> ReLU -> affine, output L2-normalized.
  Mat<S> proj_w1, proj_b1;  // p x d, p x 1
  Mat<S> norm_g, norm_b;    // p x 1
  Mat<S> bn_mean, bn_var;   // running stats (buffers), p x 1
  Mat<S> proj_w2, proj_b2;  // p x p, p x 1

  std::vector<Mat<S>> head_w;  // classes x d
  std::vector<Mat<S>> head_b;  // classes x 1

  static ModelParams init(const EncoderConfig& cfg, std::vector<std::uint32_t> heads, Rng& rng);
  static ModelParams zeros_like(const ModelParams& other);

  template <typename F>
  void for_each_named(F&& f);  // trainable tensors then buffers, fixed order

  std::vector<Mat<S>*> trainable();  // canonical order, stable across calls
  std::vector<std::pair<std::string, Mat<S>*>> named_tensors();  // trainable + buffers

  template <typename T>
  ModelParams<T> cast() const;
};

namespace detail {

template <typename S>
Mat<S> randn(Index rows, Index cols, S stddev, radcl::Rng& rng) {
  Mat<S> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = static_cast<S>(rng.normal()) * stddev;
  }
  return m;
}

}  // namespace detail

template <typename S>
ModelParams<S> ModelParams<S>::init(const EncoderConfig& cfg, std::vector<std::uint32_t> heads,
                                    Rng& rng) {
  cfg.validate();
  const auto d = static_cast<Index>(cfg.d_model);
  const auto p = static_cast<Index>(cfg.proj_dim);
  const auto ff = static_cast<Index>(cfg.d_ff);
  const S sd = static_cast<S>(0.02);

  ModelParams<S> m;
  m.config = cfg;
  m.head_classes = std::move(heads);
  m.tok_emb = detail::randn<S>(static_cast<Index>(cfg.vocab_size), d, sd, rng);
  m.pos_emb = detail::randn<S>(static_cast<Index>(cfg.max_seq_len), d, sd, rng);
  m.layers.resize(cfg.n_layers);
  for (auto& L : m.layers) {
    L.wq = detail::randn<S>(d, d, sd, rng);
    L.wk = detail::randn<S>(d, d, sd, rng);
    L.wv = detail::randn<S>(d, d, sd, rng);
    L.wo = detail::randn<S>(d, d, sd, rng);
    L.bq = Mat<S>::Zero(d, 1);
    L.bk = Mat<S>::Zero(d, 1);
    L.bv = Mat<S>::Zero(d, 1);
    L.bo = Mat<S>::Zero(d, 1);
    L.ln1_g = Mat<S>::Ones(d, 1);
    L.ln1_b = Mat<S>::Zero(d, 1);
    L.ln2_g = Mat<S>::Ones(d, 1);
    L.ln2_b = Mat<S>::Zero(d, 1);
    L.w1 = detail::randn<S>(ff, d, sd, rng);
    L.b1 = Mat<S>::Zero(ff, 1);
    L.w2 = detail::randn<S>(d, ff, sd, rng);
    L.b2 = Mat<S>::Zero(d, 1);
  }
  m.lnf_g = Mat<S>::Ones(d, 1);
  m.lnf_b = Mat<S>::Zero(d, 1);
  m.proj_w1 = detail::randn<S>(p, d, sd, rng);
  m.proj_b1 = Mat<S>::Zero(p, 1);
  m.norm_g = Mat<S>::Ones(p, 1);
  m.norm_b = Mat<S>::Zero(p, 1);
  m.bn_mean = Mat<S>::Zero(p, 1);
  m.bn_var = Mat<S>::Ones(p, 1);
  m.proj_w2 = detail::randn<S>(p, p, sd, rng);
  m.proj_b2 = Mat<S>::Zero(p, 1);
  for (std::uint32_t c : m.head_classes) {
    m.head_w.push_back(detail::randn<S>(static_cast<Index>(c), d, sd, rng));
    m.head_b.push_back(Mat<S>::Zero(static_cast<Index>(c), 1));
  }
  return m;
}

template <typename S>
ModelParams<S> ModelParams<S>::zeros_like(const ModelParams& other) {
  ModelParams<S> m = other;
  auto zero = [](Mat<S>& t) { t.setZero(); };
  zero(m.tok_emb);
  zero(m.pos_emb);
  for (auto& L : m.layers) {
    for (Mat<S>* t : {&L.wq, &L.wk, &L.wv, &L.wo, &L.bq, &L.bk, &L.bv, &L.bo, &L.ln1_g, &L.ln1_b,
                      &L.ln2_g, &L.ln2_b, &L.w1, &L.b1, &L.w2, &L.b2}) {
      zero(*t);
    }
  }
  zero(m.lnf_g);
  zero(m.lnf_b);
  zero(m.proj_w1);
  zero(m.proj_b1);
  zero(m.norm_g);
  zero(m.norm_b);
  zero(m.bn_mean);
  zero(m.bn_var);
  zero(m.proj_w2);
  zero(m.proj_b2);
  for (auto& t : m.head_w) zero(t);
  for (auto& t : m.head_b) zero(t);
  return m;
}

template <typename S>
std::vector<Mat<S>*> ModelParams<S>::trainable() {
  std::vector<Mat<S>*> out{&tok_emb, &pos_emb};
  for (auto& L : layers) {
    for (Mat<S>* t : {&L.wq, &L.bq, &L.wk, &L.bk, &L.wv, &L.bv, &L.wo, &L.bo, &L.ln1_g, &L.ln1_b,
                      &L.ln2_g, &L.ln2_b, &L.w1, &L.b1, &L.w2, &L.b2}) {
      out.push_back(t);
    }
  }
  for (Mat<S>* t : {&lnf_g, &lnf_b, &proj_w1, &proj_b1, &norm_g, &norm_b, &proj_w2, &proj_b2}) {
    out.push_back(t);
  }
  for (auto& t : head_w) out.push_back(&t);
  for (auto& t : head_b) out.push_back(&t);
  return out;
}

template <typename S>
template <typename F>
void ModelParams<S>::for_each_named(F&& f) {
  for (auto& [name, tensor] : named_tensors()) f(name, *tensor);
}

template <typename S>
std::vector<std::pair<std::string, Mat<S>*>> ModelParams<S>::named_tensors() {
  std::vector<std::pair<std::string, Mat<S>*>> out;
  out.emplace_back("tok_emb", &tok_emb);
  out.emplace_back("pos_emb", &pos_emb);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& L = layers[i];
    const std::string prefix = "layer" + std::to_string(i) + ".";
    const std::pair<const char*, Mat<S>*> entries[] = {
        {"wq", &L.wq},       {"bq", &L.bq},       {"wk", &L.wk},       {"bk", &L.bk},
        {"wv", &L.wv},       {"bv", &L.bv},       {"wo", &L.wo},       {"bo", &L.bo},
        {"ln1_g", &L.ln1_g}, {"ln1_b", &L.ln1_b}, {"ln2_g", &L.ln2_g}, {"ln2_b", &L.ln2_b},
        {"w1", &L.w1},       {"b1", &L.b1},       {"w2", &L.w2},       {"b2", &L.b2}};
    for (const auto& [name, tensor] : entries) out.emplace_back(prefix + name, tensor);
  }
  out.emplace_back("lnf_g", &lnf_g);
  out.emplace_back("lnf_b", &lnf_b);
  out.emplace_back("proj_w1", &proj_w1);
  out.emplace_back("proj_b1", &proj_b1);
  out.emplace_back("norm_g", &norm_g);
  out.emplace_back("norm_b", &norm_b);
  out.emplace_back("proj_w2", &proj_w2);
  out.emplace_back("proj_b2", &proj_b2);
  for (std::size_t h = 0; h < head_w.size(); ++h) {
    out.emplace_back("head" + std::to_string(h) + ".w", &head_w[h]);
    out.emplace_back("head" + std::to_string(h) + ".b", &head_b[h]);
  }
  out.emplace_back("bn_mean", &bn_mean);
  out.emplace_back("bn_var", &bn_var);
  return out;
}

template <typename S>
template <typename T>
ModelParams<T> ModelParams<S>::cast() const {
  ModelParams<T> out;
  out.config = config;
  out.head_classes = head_classes;
  auto cv = [](const Mat<S>& m) { return m.template cast<T>().eval(); };
  out.tok_emb = cv(tok_emb);
  out.pos_emb = cv(pos_emb);
  out.layers.resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    auto& b = out.layers[i];
    b.wq = cv(a.wq);
    b.bq = cv(a.bq);
    b.wk = cv(a.wk);
    b.bk = cv(a.bk);
    b.wv = cv(a.wv);
    b.bv = cv(a.bv);
    b.wo = cv(a.wo);
    b.bo = cv(a.bo);
    b.ln1_g = cv(a.ln1_g);
    b.ln1_b = cv(a.ln1_b);
    b.ln2_g = cv(a.ln2_g);
    b.ln2_b = cv(a.ln2_b);
    b.w1 = cv(a.w1);
    b.b1 = cv(a.b1);
    b.w2 = cv(a.w2);
    b.b2 = cv(a.b2);
  }
  out.lnf_g = cv(lnf_g);
  out.lnf_b = cv(lnf_b);
  out.proj_w1 = cv(proj_w1);
  out.proj_b1 = cv(proj_b1);
  out.norm_g = cv(norm_g);
  out.norm_b = cv(norm_b);
  out.bn_mean = cv(bn_mean);
  out.bn_var = cv(bn_var);
  out.proj_w2 = cv(proj_w2);
  out.proj_b2 = cv(proj_b2);
  for (const auto& t : head_w) out.head_w.push_back(cv(t));
  for (const auto& t : head_b) out.head_b.push_back(cv(t));
  return out;
}

}  // namespace radcl::nn
