#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "radcl/errors.hpp"
#include "radcl/nn/params.hpp"

namespace radcl::nn {

// Optional trainable-tensor mask: when non-empty, only listed indices (into
// ModelParams::trainable()) are updated. Used for frozen-encoder training.
using TensorMask = std::vector<std::size_t>;

template <typename S>
class Sgd {
 public:
  explicit Sgd(S lr, S momentum = S(0)) : lr_(lr), momentum_(momentum) {}

  void step(ModelParams<S>& params, ModelParams<S>& grads, const TensorMask& mask = {}) {
    auto ps = params.trainable();
    auto gs = grads.trainable();
    if (momentum_ != S(0) && velocity_.empty()) {
      for (auto* g : gs) velocity_.push_back(Mat<S>::Zero(g->rows(), g->cols()));
    }
    auto update = [&](std::size_t i) {
      if (momentum_ == S(0)) {
        *ps[i] -= lr_ * (*gs[i]);
      } else {
        velocity_[i] = momentum_ * velocity_[i] + *gs[i];
        *ps[i] -= lr_ * velocity_[i];
      }
    };
    if (mask.empty()) {
      for (std::size_t i = 0; i < ps.size(); ++i) update(i);
    } else {
      for (std::size_t i : mask) update(i);
    }
  }

 private:
  S lr_, momentum_;
  std::vector<Mat<S>> velocity_;
};

template <typename S>
class Adam {
 public:
  explicit Adam(S lr, S beta1 = S(0.9), S beta2 = S(0.99), S eps = S(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ModelParams<S>& params, ModelParams<S>& grads, const TensorMask& mask = {}) {
    auto ps = params.trainable();
    auto gs = grads.trainable();
    if (m_.empty()) {
      for (auto* g : gs) {
        m_.push_back(Mat<S>::Zero(g->rows(), g->cols()));
        v_.push_back(Mat<S>::Zero(g->rows(), g->cols()));
      }
    }
    ++t_;
    const S bc1 = S(1) - std::pow(beta1_, static_cast<S>(t_));
    const S bc2 = S(1) - std::pow(beta2_, static_cast<S>(t_));
    auto update = [&](std::size_t i) {
      m_[i] = beta1_ * m_[i] + (S(1) - beta1_) * (*gs[i]);
      v_[i] = beta2_ * v_[i] + (S(1) - beta2_) * gs[i]->cwiseProduct(*gs[i]);
      const Mat<S> mhat = m_[i] / bc1;
      const Mat<S> vhat = v_[i] / bc2;
      *ps[i] -= lr_ * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
    };
    if (mask.empty()) {
      for (std::size_t i = 0; i < ps.size(); ++i) update(i);
    } else {
      // Moments still decay for masked-out tensors, matching a freeze that
      // zeroes their gradients.
      for (std::size_t i = 0; i < ps.size(); ++i) {
        m_[i] *= beta1_;
        v_[i] *= beta2_;
      }
      for (std::size_t i : mask) {
        m_[i] += (S(1) - beta1_) * (*gs[i]);
        v_[i] += (S(1) - beta2_) * gs[i]->cwiseProduct(*gs[i]);
        const Mat<S> mhat = m_[i] / bc1;
        const Mat<S> vhat = v_[i] / bc2;
        *ps[i] -= lr_ * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
      }
    }
  }

 private:
  S lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Mat<S>> m_, v_;
};

template <typename S>
void zero_grads(ModelParams<S>& grads) {
  for (auto* t : grads.trainable()) t->setZero();
}

}  // namespace radcl::nn
