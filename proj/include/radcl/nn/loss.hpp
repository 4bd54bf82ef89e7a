#pragma once

#include <cmath>
#include <vector>

#include "radcl/errors.hpp"
#include "radcl/nn/tensor.hpp"

namespace radcl::nn {

template <typename S>
S cosine_sim(const Vec<S>& a, const Vec<S>& b) {
  const S na = a.norm(), nb = b.norm();
  if (!(na > S(0)) || !(nb > S(0))) throw ZeroVector("cosine similarity of a zero vector");
  return a.dot(b) / (na * nb);
}

// Contrastive loss for one query given similarity scores. sims[0] is the
// positive, the rest are negatives. include_positive controls whether the
// positive term joins the denominator (default) or only the negatives do.
template <typename S>
S nt_xent_from_sims(const std::vector<S>& sims, S tau, bool include_positive,
                    std::vector<S>* dsims) {
  if (!(tau > S(0))) throw UsageError("temperature must be positive");
  const std::size_t k = sims.size() - 1;
  if (dsims) dsims->assign(sims.size(), S(0));
  if (k == 0) return S(0);

  // log-sum-exp over the denominator terms
  const std::size_t first = include_positive ? 0 : 1;
  S m = sims[first];
  for (std::size_t i = first; i < sims.size(); ++i) m = std::max(m, sims[i]);
  m /= tau;
  S sum = S(0);
  for (std::size_t i = first; i < sims.size(); ++i) sum += std::exp(sims[i] / tau - m);
  const S lse = m + std::log(sum);
  const S loss = lse - sims[0] / tau;

  if (dsims) {
    for (std::size_t i = first; i < sims.size(); ++i) {
      (*dsims)[i] = std::exp(sims[i] / tau - lse) / tau;
    }
    (*dsims)[0] -= S(1) / tau;
  }
  return loss;
}

// Oracle-facing form on raw (not necessarily unit) vectors; sim is cosine.
template <typename S>
S nt_xent(const Vec<S>& z_q, const Vec<S>& z_pos, const std::vector<Vec<S>>& z_negs, S tau,
          bool include_positive = true) {
  std::vector<S> sims;
  sims.push_back(cosine_sim(z_q, z_pos));
  for (const auto& n : z_negs) sims.push_back(cosine_sim(z_q, n));
  for (S s : sims) {
    if (!std::isfinite(s)) throw NonFiniteLoss("non-finite similarity");
  }
  return nt_xent_from_sims(sims, tau, include_positive, static_cast<std::vector<S>*>(nullptr));
}

// Training form over rows of unit-normalized projections. Row layout:
// z[0..B) queries, z[B..2B) positives, z[2B..2B+B*k) negatives grouped by
// query. Returns the summed loss and fills dz (same layout).
template <typename S>
S nt_xent_rows(const Mat<S>& z, Index batch, Index k, S tau, bool include_positive, Mat<S>& dz) {
  dz = Mat<S>::Zero(z.rows(), z.cols());
  S total = S(0);
  for (Index i = 0; i < batch; ++i) {
    const Index qi = i, pi = batch + i, ni = 2 * batch + i * k;
    std::vector<S> sims;
    sims.push_back(z.row(qi).dot(z.row(pi)));
    for (Index j = 0; j < k; ++j) sims.push_back(z.row(qi).dot(z.row(ni + j)));
    std::vector<S> dsims;
    total += nt_xent_from_sims(sims, tau, include_positive, &dsims);
    dz.row(qi) += dsims[0] * z.row(pi);
    dz.row(pi) += dsims[0] * z.row(qi);
    for (Index j = 0; j < k; ++j) {
      dz.row(qi) += dsims[1 + j] * z.row(ni + j);
      dz.row(ni + j) += dsims[1 + j] * z.row(qi);
    }
  }
  if (!std::isfinite(static_cast<double>(total))) throw NonFiniteLoss("contrastive loss");
  return total;
}

// Row-wise softmax with log-sum-exp stabilization.
template <typename S>
Mat<S> softmax_rows(const Mat<S>& logits) {
  Mat<S> p(logits.rows(), logits.cols());
  for (Index t = 0; t < logits.rows(); ++t) {
    const S m = logits.row(t).maxCoeff();
    p.row(t) = (logits.row(t).array() - m).exp();
    p.row(t) /= p.row(t).sum();
  }
  return p;
}

// Summed cross-entropy over one head's batch. targets are class indices.
// dlogits = p - onehot (sum reduction).
template <typename S>
S cross_entropy_rows(const Mat<S>& logits, const std::vector<int>& targets, Mat<S>* dlogits) {
  if (static_cast<Index>(targets.size()) != logits.rows()) {
    throw LengthMismatch("target count does not match logit rows");
  }
  Mat<S> p = softmax_rows(logits);
  S loss = S(0);
  for (Index t = 0; t < logits.rows(); ++t) {
    if (targets[t] < 0 || targets[t] >= logits.cols()) {
      throw LabelDomainError("class index out of range for head");
    }
    const S prob = std::max(p(t, targets[t]), S(1e-12));
    loss -= std::log(prob);
  }
  if (dlogits) {
    *dlogits = p;
    for (Index t = 0; t < logits.rows(); ++t) (*dlogits)(t, targets[t]) -= S(1);
  }
  if (!std::isfinite(static_cast<double>(loss))) throw NonFiniteLoss("classification loss");
  return loss;
}

// Summed cross-entropy over every classification head for a batch of CLS
// rows. targets[h][i] is the class index of row i under head h. Accumulates
// head gradients into gw/gb and returns the gradient w.r.t. cls via dcls.
template <typename S>
S heads_cross_entropy(const Mat<S>& cls, const std::vector<Mat<S>>& head_w,
                      const std::vector<Mat<S>>& head_b,
                      const std::vector<std::vector<int>>& targets, std::vector<Mat<S>>& gw,
                      std::vector<Mat<S>>& gb, Mat<S>& dcls) {
  if (head_w.size() != head_b.size() || head_w.size() != targets.size() ||
      gw.size() != head_w.size() || gb.size() != head_w.size()) {
    throw LengthMismatch("head tensor counts disagree");
  }
  dcls = Mat<S>::Zero(cls.rows(), cls.cols());
  S loss = S(0);
  for (std::size_t h = 0; h < head_w.size(); ++h) {
    Mat<S> logits = (cls * head_w[h].transpose()).rowwise() + head_b[h].col(0).transpose();
    Mat<S> dlogits;
    loss += cross_entropy_rows(logits, targets[h], &dlogits);
    gw[h] += dlogits.transpose() * cls;
    gb[h] += dlogits.colwise().sum().transpose();
    dcls += dlogits * head_w[h];
  }
  return loss;
}

}  // namespace radcl::nn
