#pragma once

#include <cmath>
#include <vector>

#include "radcl/errors.hpp"
#include "radcl/nn/params.hpp"
#include "radcl/nn/tensor.hpp"

namespace radcl::nn {

inline constexpr double kLnEps = 1e-5;
inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;

namespace detail {

template <typename S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(0.7071067811865475)));
}

template <typename S>
S gelu_grad(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.7071067811865475)));
  const S pdf = std::exp(S(-0.5) * x * x) * S(0.3989422804014327);
  return cdf + x * pdf;
}

// y = (x - mean) / std * g + b, row-wise over features.
template <typename S>
void layer_norm_forward(const Mat<S>& x, const Mat<S>& g, const Mat<S>& b, Mat<S>& y,
                        Mat<S>& xhat, Vec<S>& inv_std) {
  const Index T = x.rows(), d = x.cols();
  y.resize(T, d);
  xhat.resize(T, d);
  inv_std.resize(T);
  for (Index t = 0; t < T; ++t) {
    const S mean = x.row(t).mean();
    const S var = (x.row(t).array() - mean).square().mean();
    const S is = S(1) / std::sqrt(var + S(kLnEps));
    inv_std(t) = is;
    xhat.row(t) = ((x.row(t).array() - mean) * is).matrix();
    y.row(t) = xhat.row(t).cwiseProduct(g.col(0).transpose()) + b.col(0).transpose();
  }
}

template <typename S>
void layer_norm_backward(const Mat<S>& dy, const Mat<S>& xhat, const Vec<S>& inv_std,
                         const Mat<S>& g, Mat<S>& dx, Mat<S>& dg, Mat<S>& db) {
  const Index T = dy.rows(), d = dy.cols();
  dx.resize(T, d);
  for (Index t = 0; t < T; ++t) {
    dg += dy.row(t).cwiseProduct(xhat.row(t)).transpose();
    db += dy.row(t).transpose();
    const Mat<S> dyg = dy.row(t).cwiseProduct(g.col(0).transpose());
    const S m1 = dyg.mean();
    const S m2 = dyg.cwiseProduct(xhat.row(t)).mean();
    dx.row(t) = ((dyg.array() - m1 - xhat.row(t).array() * m2) * inv_std(t)).matrix();
  }
}

}  // namespace detail

// Forward activations for one sequence, kept for the backward pass.
template <typename S>
struct SeqCache {
  std::vector<int> ids;  // CLS first; no padding
  Mat<S> x0;

  struct LayerCache {
    Mat<S> x_in;
    Mat<S> a, ln1_xhat;
    Vec<S> ln1_inv_std;
    Mat<S> q, k, v;
    std::vector<Mat<S>> probs;  // per head, T x T
    Mat<S> att_concat;
    Mat<S> x_mid;
    Mat<S> b_act, ln2_xhat;
    Vec<S> ln2_inv_std;
    Mat<S> h_pre, h_act;
  };
  std::vector<LayerCache> layers;
  Mat<S> x_final, y, lnf_xhat;
  Vec<S> lnf_inv_std;
};

// ids: CLS first, truncated to max_seq_len, no PADs. Returns all final
// hidden states; row 0 is the CLS embedding.
template <typename S>
const Mat<S>& encode_forward(const ModelParams<S>& params, const std::vector<int>& ids,
                             SeqCache<S>& cache) {
  const auto& cfg = params.config;
  const Index T = static_cast<Index>(ids.size());
  const Index d = static_cast<Index>(cfg.d_model);
  const Index H = static_cast<Index>(cfg.n_heads);
  const Index dh = d / H;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  cache.ids = ids;
  cache.x0.resize(T, d);
  for (Index t = 0; t < T; ++t) {
    cache.x0.row(t) = params.tok_emb.row(ids[t]) + params.pos_emb.row(t);
  }

  cache.layers.assign(cfg.n_layers, {});
  Mat<S> x = cache.x0;
  for (std::uint32_t l = 0; l < cfg.n_layers; ++l) {
    auto& L = params.layers[l];
    auto& C = cache.layers[l];
    C.x_in = x;
    detail::layer_norm_forward(C.x_in, L.ln1_g, L.ln1_b, C.a, C.ln1_xhat, C.ln1_inv_std);
    C.q = (C.a * L.wq.transpose()).rowwise() + L.bq.col(0).transpose();
    C.k = (C.a * L.wk.transpose()).rowwise() + L.bk.col(0).transpose();
    C.v = (C.a * L.wv.transpose()).rowwise() + L.bv.col(0).transpose();
    C.probs.resize(H);
    C.att_concat.resize(T, d);
    for (Index h = 0; h < H; ++h) {
      auto qh = C.q.middleCols(h * dh, dh);
      auto kh = C.k.middleCols(h * dh, dh);
      auto vh = C.v.middleCols(h * dh, dh);
      Mat<S> scores = qh * kh.transpose() * scale;
      Mat<S>& p = C.probs[h];
      p.resize(T, T);
      for (Index t = 0; t < T; ++t) {
        const S m = scores.row(t).maxCoeff();
        p.row(t) = (scores.row(t).array() - m).exp().matrix();
        p.row(t) /= p.row(t).sum();
      }
      C.att_concat.middleCols(h * dh, dh) = p * vh;
    }
    Mat<S> att_out = (C.att_concat * L.wo.transpose()).rowwise() + L.bo.col(0).transpose();
    C.x_mid = C.x_in + att_out;
    detail::layer_norm_forward(C.x_mid, L.ln2_g, L.ln2_b, C.b_act, C.ln2_xhat, C.ln2_inv_std);
    C.h_pre = (C.b_act * L.w1.transpose()).rowwise() + L.b1.col(0).transpose();
    C.h_act = C.h_pre.unaryExpr([](S v) { return detail::gelu(v); });
    Mat<S> ff_out = (C.h_act * L.w2.transpose()).rowwise() + L.b2.col(0).transpose();
    x = C.x_mid + ff_out;
  }
  cache.x_final = x;
  detail::layer_norm_forward(cache.x_final, params.lnf_g, params.lnf_b, cache.y, cache.lnf_xhat,
                             cache.lnf_inv_std);
  return cache.y;
}

// dy: gradient w.r.t. every final hidden state (zero rows for unused
// positions). Accumulates into grads.
template <typename S>
void encode_backward(const ModelParams<S>& params, const SeqCache<S>& cache, const Mat<S>& dy,
                     ModelParams<S>& grads) {
  const auto& cfg = params.config;
  const Index T = static_cast<Index>(cache.ids.size());
  const Index d = static_cast<Index>(cfg.d_model);
  const Index H = static_cast<Index>(cfg.n_heads);
  const Index dh = d / H;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));

  Mat<S> dx;
  detail::layer_norm_backward(dy, cache.lnf_xhat, cache.lnf_inv_std, params.lnf_g, dx,
                              grads.lnf_g, grads.lnf_b);

  for (int l = static_cast<int>(cfg.n_layers) - 1; l >= 0; --l) {
    const auto& L = params.layers[l];
    const auto& C = cache.layers[l];
    auto& G = grads.layers[l];

    // x_out = x_mid + ff(ln2(x_mid)); dx currently holds d(x_out)
    Mat<S> dff_out = dx;
    Mat<S> dh_act = dff_out * L.w2;
    G.w2 += dff_out.transpose() * C.h_act;
    G.b2 += dff_out.colwise().sum().transpose();
    Mat<S> dh_pre =
        dh_act.cwiseProduct(C.h_pre.unaryExpr([](S v) { return detail::gelu_grad(v); }));
    G.w1 += dh_pre.transpose() * C.b_act;
    G.b1 += dh_pre.colwise().sum().transpose();
    Mat<S> db_act = dh_pre * L.w1;

    Mat<S> dx_mid;
    detail::layer_norm_backward(db_act, C.ln2_xhat, C.ln2_inv_std, L.ln2_g, dx_mid, G.ln2_g,
                                G.ln2_b);
    dx_mid += dx;  // residual branch

    // x_mid = x_in + att_out
    Mat<S> datt_out = dx_mid;
    Mat<S> datt_concat = datt_out * L.wo;
    G.wo += datt_out.transpose() * C.att_concat;
    G.bo += datt_out.colwise().sum().transpose();

    Mat<S> dq = Mat<S>::Zero(T, d), dk = Mat<S>::Zero(T, d), dv = Mat<S>::Zero(T, d);
    for (Index h = 0; h < H; ++h) {
      auto qh = C.q.middleCols(h * dh, dh);
      auto kh = C.k.middleCols(h * dh, dh);
      auto vh = C.v.middleCols(h * dh, dh);
      const Mat<S>& p = C.probs[h];
      Mat<S> do_h = datt_concat.middleCols(h * dh, dh);
      Mat<S> dp = do_h * vh.transpose();
      dv.middleCols(h * dh, dh) += p.transpose() * do_h;
      Mat<S> dscores(T, T);
      for (Index t = 0; t < T; ++t) {
        const S dot = dp.row(t).cwiseProduct(p.row(t)).sum();
        dscores.row(t) = (p.row(t).array() * (dp.row(t).array() - dot)).matrix();
      }
      dq.middleCols(h * dh, dh) += dscores * kh * scale;
      dk.middleCols(h * dh, dh) += dscores.transpose() * qh * scale;
    }

    Mat<S> da = dq * L.wq + dk * L.wk + dv * L.wv;
    G.wq += dq.transpose() * C.a;
    G.bq += dq.colwise().sum().transpose();
    G.wk += dk.transpose() * C.a;
    G.bk += dk.colwise().sum().transpose();
    G.wv += dv.transpose() * C.a;
    G.bv += dv.colwise().sum().transpose();

    Mat<S> dx_in;
    detail::layer_norm_backward(da, C.ln1_xhat, C.ln1_inv_std, L.ln1_g, dx_in, G.ln1_g, G.ln1_b);
    dx = dx_in + dx_mid;  // residual branch
  }

  for (Index t = 0; t < T; ++t) {
    grads.tok_emb.row(cache.ids[t]) += dx.row(t);
    grads.pos_emb.row(t) += dx.row(t);
  }
}

// Projection head over a batch of CLS embeddings (rows).
template <typename S>
struct ProjCache {
  bool train = false;
  Mat<S> input;       // B x d
  Mat<S> u;           // B x p, first affine output
  Mat<S> xhat;        // normalized
  Vec<S> inv_std;     // BatchNorm: per feature; LayerNorm: per row
  Mat<S> s, r, w, z;  // scaled, relu, second affine, normalized output
  Vec<S> w_norm;      // per row
};

template <typename S>
Mat<S> project_forward(ModelParams<S>& params, const Mat<S>& cls, bool train,
                       ProjCache<S>& cache) {
  const Index B = cls.rows();
  const Index p = static_cast<Index>(params.config.proj_dim);
  cache.train = train;
  cache.input = cls;
  cache.u = (cls * params.proj_w1.transpose()).rowwise() + params.proj_b1.col(0).transpose();

  cache.xhat.resize(B, p);
  if (params.config.proj_norm == ProjNorm::BatchNorm) {
    if (train) {
      if (B < 2) throw BatchTooSmall("batch statistics need at least 2 rows");
      cache.inv_std.resize(p);
      for (Index j = 0; j < p; ++j) {
        const S mean = cache.u.col(j).mean();
        const S var = (cache.u.col(j).array() - mean).square().mean();
        const S is = S(1) / std::sqrt(var + S(kBnEps));
        cache.inv_std(j) = is;
        cache.xhat.col(j) = ((cache.u.col(j).array() - mean) * is).matrix();
        params.bn_mean(j, 0) =
            S(1 - kBnMomentum) * params.bn_mean(j, 0) + S(kBnMomentum) * mean;
        params.bn_var(j, 0) = S(1 - kBnMomentum) * params.bn_var(j, 0) + S(kBnMomentum) * var;
      }
    } else {
      for (Index j = 0; j < p; ++j) {
        const S is = S(1) / std::sqrt(params.bn_var(j, 0) + S(kBnEps));
        cache.xhat.col(j) = ((cache.u.col(j).array() - params.bn_mean(j, 0)) * is).matrix();
      }
    }
  } else {
    cache.inv_std.resize(B);
    for (Index t = 0; t < B; ++t) {
      const S mean = cache.u.row(t).mean();
      const S var = (cache.u.row(t).array() - mean).square().mean();
      const S is = S(1) / std::sqrt(var + S(kLnEps));
      cache.inv_std(t) = is;
      cache.xhat.row(t) = ((cache.u.row(t).array() - mean) * is).matrix();
    }
  }

  cache.s =
      (cache.xhat.array().rowwise() * params.norm_g.col(0).transpose().array()).matrix();
  cache.s.rowwise() += params.norm_b.col(0).transpose();
  cache.r = cache.s.cwiseMax(S(0));
  cache.w = (cache.r * params.proj_w2.transpose()).rowwise() + params.proj_b2.col(0).transpose();

  cache.z.resize(B, p);
  cache.w_norm.resize(B);
  for (Index t = 0; t < B; ++t) {
    const S n = cache.w.row(t).norm();
    if (!(n > S(1e-12))) throw ZeroVector("projection output has zero norm");
    cache.w_norm(t) = n;
    cache.z.row(t) = cache.w.row(t) / n;
  }
  return cache.z;
}

// Returns gradient w.r.t. the CLS inputs; accumulates parameter grads.
template <typename S>
Mat<S> project_backward(const ModelParams<S>& params, const ProjCache<S>& cache,
                        const Mat<S>& dz, ModelParams<S>& grads) {
  const Index B = dz.rows();
  const Index p = static_cast<Index>(params.config.proj_dim);

  Mat<S> dw(B, p);
  for (Index t = 0; t < B; ++t) {
    const S dot = dz.row(t).cwiseProduct(cache.z.row(t)).sum();
    dw.row(t) = (dz.row(t) - cache.z.row(t) * dot) / cache.w_norm(t);
  }

  Mat<S> dr = dw * params.proj_w2;
  grads.proj_w2 += dw.transpose() * cache.r;
  grads.proj_b2 += dw.colwise().sum().transpose();

  Mat<S> ds = dr.cwiseProduct(
      cache.s.unaryExpr([](S v) { return v > S(0) ? S(1) : S(0); }));

  grads.norm_g += ds.cwiseProduct(cache.xhat).colwise().sum().transpose();
  grads.norm_b += ds.colwise().sum().transpose();
  Mat<S> dxhat =
      (ds.array().rowwise() * params.norm_g.col(0).transpose().array()).matrix();

  Mat<S> du(B, p);
  if (params.config.proj_norm == ProjNorm::BatchNorm) {
    if (cache.train) {
      for (Index j = 0; j < p; ++j) {
        const S m1 = dxhat.col(j).mean();
        const S m2 = dxhat.col(j).cwiseProduct(cache.xhat.col(j)).mean();
        du.col(j) = ((dxhat.col(j).array() - m1 - cache.xhat.col(j).array() * m2) *
                     cache.inv_std(j))
                        .matrix();
      }
    } else {
      for (Index j = 0; j < p; ++j) {
        const S is = S(1) / std::sqrt(params.bn_var(j, 0) + S(kBnEps));
        du.col(j) = dxhat.col(j) * is;
      }
    }
  } else {
    for (Index t = 0; t < B; ++t) {
      const S m1 = dxhat.row(t).mean();
      const S m2 = dxhat.row(t).cwiseProduct(cache.xhat.row(t)).mean();
      du.row(t) = ((dxhat.row(t).array() - m1 - cache.xhat.row(t).array() * m2) *
                   cache.inv_std(t))
                      .matrix();
    }
  }

  grads.proj_w1 += du.transpose() * cache.input;
  grads.proj_b1 += du.colwise().sum().transpose();
  return du * params.proj_w1;
}

}  // namespace radcl::nn
