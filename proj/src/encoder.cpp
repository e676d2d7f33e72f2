#include "segtron/encoder.hpp"

#include <cmath>
#include <numbers>

#include "segtron/errors.hpp"
#include "segtron/rng.hpp"

namespace segtron {

void EncoderConfig::validate() const {
  if (layers < 1) throw UsageError("encoder config: L must be >= 1");
  if (hidden < 1 || heads < 1 || hidden % heads != 0) {
    throw UsageError("encoder config: H must be positive and divisible by A");
  }
  if (ffn < 1) throw UsageError("encoder config: feed-forward width must be positive");
  if (vocab_size < 1) throw UsageError("encoder config: vocabulary size must be positive");
  if (max_positions < 1) throw UsageError("encoder config: max positions must be positive");
  if (tag_count != 6) throw UsageError("encoder config: tag count must be 6");
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("encoder config: dropout in [0,1)");
}

namespace {

constexpr double kLayerNormEps = 1e-12;

double truncated_normal(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (;;) {
    const double v = dist(rng);
    if (std::abs(v) <= 2.0 * stddev) return v;
  }
}

Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = truncated_normal(rng, 0.02);
  return t;
}

Tensor sample_mask(std::size_t rows, std::size_t cols, Dropout d) {
  Tensor mask(rows, cols);
  const double keep = 1.0 - d.rate;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform01(*d.rng) < d.rate ? 0.0 : 1.0 / keep;
  }
  return mask;
}

void apply_mask(Tensor& t, const Tensor& mask) {
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] *= mask.data()[i];
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  LayerNormCache* cache) {
  const std::size_t n = x.rows(), h = x.cols();
  Tensor out(n, h);
  Tensor normalized(n, h);
  std::vector<double> inv_stds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    double mean = 0.0;
    for (std::size_t j = 0; j < h; ++j) mean += row[j];
    mean /= static_cast<double>(h);
    double var = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      const double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(h);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_stds[i] = inv_std;
    double* nrow = normalized.row(i);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < h; ++j) {
      nrow[j] = (row[j] - mean) * inv_std;
      orow[j] = nrow[j] * gain(0, j) + bias(0, j);
    }
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_stds);
  }
  return out;
}

// dx for y = gain * x-hat + bias given upstream dy; accumulates dgain/dbias.
Tensor layer_norm_backward(const Tensor& dy, const LayerNormCache& cache, const Tensor& gain,
                           Tensor& dgain, Tensor& dbias) {
  const std::size_t n = dy.rows(), h = dy.cols();
  Tensor dx(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double* dyr = dy.row(i);
    const double* xh = cache.normalized.row(i);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      dgain(0, j) += dyr[j] * xh[j];
      dbias(0, j) += dyr[j];
      const double dxh = dyr[j] * gain(0, j);
      m1 += dxh;
      m2 += dxh * xh[j];
    }
    m1 /= static_cast<double>(h);
    m2 /= static_cast<double>(h);
    const double inv_std = cache.inv_std[i];
    double* dxr = dx.row(i);
    for (std::size_t j = 0; j < h; ++j) {
      const double dxh = dyr[j] * gain(0, j);
      dxr[j] = inv_std * (dxh - m1 - xh[j] * m2);
    }
  }
  return dx;
}

Tensor col_slice(const Tensor& m, std::size_t begin, std::size_t width) {
  Tensor out(m.rows(), width);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* src = m.row(i) + begin;
    double* dst = out.row(i);
    for (std::size_t j = 0; j < width; ++j) dst[j] = src[j];
  }
  return out;
}

void col_slice_add(Tensor& m, std::size_t begin, const Tensor& part) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* dst = m.row(i) + begin;
    const double* src = part.row(i);
    for (std::size_t j = 0; j < part.cols(); ++j) dst[j] += src[j];
  }
}

void check_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) {
    throw NumericError(std::string("non-finite values in ") + where);
  }
}

EncoderParams make_grads_like(const EncoderParams& p) {
  EncoderParams g;
  g.word_embedding = Tensor::zeros_like(p.word_embedding);
  g.pos_embedding = Tensor::zeros_like(p.pos_embedding);
  g.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const LayerParams& src = p.layers[l];
    LayerParams& dst = g.layers[l];
    dst.attn.wq = Tensor::zeros_like(src.attn.wq);
    dst.attn.wk = Tensor::zeros_like(src.attn.wk);
    dst.attn.wv = Tensor::zeros_like(src.attn.wv);
    dst.attn.wo = Tensor::zeros_like(src.attn.wo);
    dst.ln1_gain = Tensor::zeros_like(src.ln1_gain);
    dst.ln1_bias = Tensor::zeros_like(src.ln1_bias);
    dst.ffn_w1 = Tensor::zeros_like(src.ffn_w1);
    dst.ffn_b1 = Tensor::zeros_like(src.ffn_b1);
    dst.ffn_w2 = Tensor::zeros_like(src.ffn_w2);
    dst.ffn_b2 = Tensor::zeros_like(src.ffn_b2);
    dst.ln2_gain = Tensor::zeros_like(src.ln2_gain);
    dst.ln2_bias = Tensor::zeros_like(src.ln2_bias);
  }
  g.out_weight = Tensor::zeros_like(p.out_weight);
  g.out_bias = Tensor::zeros_like(p.out_bias);
  return g;
}

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void softmax_rows(Tensor& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* row = m.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] /= sum;
  }
}

EncoderParams init_encoder_params(const EncoderConfig& config, std::mt19937_64& rng) {
  config.validate();
  const auto h = static_cast<std::size_t>(config.hidden);
  const auto f = static_cast<std::size_t>(config.ffn);
  const auto t = static_cast<std::size_t>(config.tag_count);
  EncoderParams p;
  p.word_embedding = random_tensor(h, static_cast<std::size_t>(config.vocab_size), rng);
  p.pos_embedding = random_tensor(h, static_cast<std::size_t>(config.max_positions), rng);
  p.layers.resize(static_cast<std::size_t>(config.layers));
  for (auto& layer : p.layers) {
    layer.attn.wq = random_tensor(h, h, rng);
    layer.attn.wk = random_tensor(h, h, rng);
    layer.attn.wv = random_tensor(h, h, rng);
    layer.attn.wo = random_tensor(h, h, rng);
    layer.ln1_gain = Tensor(1, h, 1.0);
    layer.ln1_bias = Tensor(1, h);
    layer.ffn_w1 = random_tensor(f, h, rng);
    layer.ffn_b1 = Tensor(1, f);
    layer.ffn_w2 = random_tensor(h, f, rng);
    layer.ffn_b2 = Tensor(1, h);
    layer.ln2_gain = Tensor(1, h, 1.0);
    layer.ln2_bias = Tensor(1, h);
  }
  p.out_weight = random_tensor(t, h, rng);
  p.out_bias = Tensor(1, t);
  return p;
}

void for_each_tensor(EncoderParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("embed.word", params.word_embedding);
  fn("embed.pos", params.pos_embedding);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const std::string base = "layer" + std::to_string(l) + ".";
    LayerParams& layer = params.layers[l];
    fn(base + "attn.wq", layer.attn.wq);
    fn(base + "attn.wk", layer.attn.wk);
    fn(base + "attn.wv", layer.attn.wv);
    fn(base + "attn.wo", layer.attn.wo);
    fn(base + "ln1.gain", layer.ln1_gain);
    fn(base + "ln1.bias", layer.ln1_bias);
    fn(base + "ffn.w1", layer.ffn_w1);
    fn(base + "ffn.b1", layer.ffn_b1);
    fn(base + "ffn.w2", layer.ffn_w2);
    fn(base + "ffn.b2", layer.ffn_b2);
    fn(base + "ln2.gain", layer.ln2_gain);
    fn(base + "ln2.bias", layer.ln2_bias);
  }
  fn("out.weight", params.out_weight);
  fn("out.bias", params.out_bias);
}

void for_each_tensor(const EncoderParams& params,
                     const std::function<void(const std::string&, const Tensor&)>& fn) {
  for_each_tensor(const_cast<EncoderParams&>(params),
                  [&](const std::string& name, Tensor& t) { fn(name, t); });
}

Tensor embed(const std::vector<int>& token_ids, const EncoderParams& params,
             const EncoderConfig& config) {
  const std::size_t n = token_ids.size();
  const auto h = static_cast<std::size_t>(config.hidden);
  if (n > static_cast<std::size_t>(config.max_positions)) {
    throw UsageError("sequence of " + std::to_string(n) + " tokens exceeds max positions " +
                     std::to_string(config.max_positions));
  }
  Tensor out(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    const int id = token_ids[i];
    if (id < 0 || id >= config.vocab_size) {
      throw UsageError("token id out of range: " + std::to_string(id));
    }
    double* row = out.row(i);
    for (std::size_t j = 0; j < h; ++j) {
      row[j] = params.word_embedding(j, static_cast<std::size_t>(id)) +
               params.pos_embedding(j, i);
    }
  }
  return out;
}

Tensor transformer_block(const Tensor& h_in, const LayerParams& layer,
                         const EncoderConfig& config, LayerCache* cache, Dropout dropout) {
  const std::size_t n = h_in.rows();
  const std::size_t h = static_cast<std::size_t>(config.hidden);
  const std::size_t heads = static_cast<std::size_t>(config.heads);
  const std::size_t dh = h / heads;
  if (h_in.cols() != h) throw UsageError("transformer_block: input width mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor q = matmul_nt(h_in, layer.attn.wq);
  Tensor k = matmul_nt(h_in, layer.attn.wk);
  Tensor v = matmul_nt(h_in, layer.attn.wv);

  Tensor context(n, h);
  std::vector<Tensor> att_probs;
  std::vector<Tensor> att_masks;
  for (std::size_t a = 0; a < heads; ++a) {
    Tensor qa = col_slice(q, a * dh, dh);
    Tensor ka = col_slice(k, a * dh, dh);
    Tensor va = col_slice(v, a * dh, dh);
    Tensor scores = matmul_nt(qa, ka);
    scale_inplace(scores, scale);
    softmax_rows(scores);
    Tensor probs = scores;  // post-softmax
    if (cache) att_probs.push_back(probs);
    if (dropout.enabled()) {
      Tensor mask = sample_mask(n, n, dropout);
      apply_mask(probs, mask);
      if (cache) att_masks.push_back(std::move(mask));
    }
    Tensor ca = matmul(probs, va);
    col_slice_add(context, a * dh, ca);
  }

  Tensor attn = matmul_nt(context, layer.attn.wo);
  check_finite(attn, "attention output");
  Tensor attn_mask;
  if (dropout.enabled()) {
    attn_mask = sample_mask(n, h, dropout);
    apply_mask(attn, attn_mask);
  }

  Tensor s1 = h_in;
  add_inplace(s1, attn);
  LayerNormCache ln1;
  Tensor x1 = layer_norm(s1, layer.ln1_gain, layer.ln1_bias, cache ? &ln1 : nullptr);

  Tensor pre = add_row_broadcast(matmul_nt(x1, layer.ffn_w1), layer.ffn_b1);
  Tensor act(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) act.data()[i] = gelu(pre.data()[i]);
  Tensor ffn = add_row_broadcast(matmul_nt(act, layer.ffn_w2), layer.ffn_b2);
  check_finite(ffn, "feed-forward output");
  Tensor ffn_mask;
  if (dropout.enabled()) {
    ffn_mask = sample_mask(n, h, dropout);
    apply_mask(ffn, ffn_mask);
  }

  Tensor s2 = x1;
  add_inplace(s2, ffn);
  LayerNormCache ln2;
  Tensor out = layer_norm(s2, layer.ln2_gain, layer.ln2_bias, cache ? &ln2 : nullptr);
  check_finite(out, "transformer block output");

  if (cache) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->att_probs = std::move(att_probs);
    cache->att_prob_masks = std::move(att_masks);
    cache->context = std::move(context);
    cache->attn_mask = std::move(attn_mask);
    cache->s1 = std::move(s1);
    cache->ln1 = std::move(ln1);
    cache->x1 = x1;
    cache->ffn_pre = std::move(pre);
    cache->ffn_act = std::move(act);
    cache->ffn_mask = std::move(ffn_mask);
    cache->s2 = std::move(s2);
    cache->ln2 = std::move(ln2);
  }
  return out;
}

EncoderActivations encoder_forward(const std::vector<int>& token_ids,
                                   const EncoderParams& params, const EncoderConfig& config,
                                   bool record, Dropout dropout) {
  EncoderActivations acts;
  acts.token_ids = token_ids;
  acts.hidden.reserve(static_cast<std::size_t>(config.layers) + 1);
  acts.hidden.push_back(embed(token_ids, params, config));
  if (record) acts.cache.resize(static_cast<std::size_t>(config.layers));
  for (int l = 0; l < config.layers; ++l) {
    LayerCache* cache = record ? &acts.cache[static_cast<std::size_t>(l)] : nullptr;
    acts.hidden.push_back(transformer_block(acts.hidden.back(),
                                            params.layers[static_cast<std::size_t>(l)], config,
                                            cache, dropout));
  }
  acts.logits = add_row_broadcast(matmul_nt(acts.hidden.back(), params.out_weight),
                                  params.out_bias);
  return acts;
}

EncoderGrads encoder_backward(const EncoderActivations& acts, const Tensor& d_logits,
                              const EncoderParams& params, const EncoderConfig& config) {
  if (acts.cache.size() != params.layers.size()) {
    throw UsageError("encoder_backward requires activations recorded with record=true");
  }
  if (!d_logits.same_shape(acts.logits)) {
    throw UsageError("encoder_backward: upstream gradient shape mismatch");
  }
  const std::size_t h = static_cast<std::size_t>(config.hidden);
  const std::size_t heads = static_cast<std::size_t>(config.heads);
  const std::size_t dh = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  EncoderGrads grads;
  grads.tensors = make_grads_like(params);

  // Output projection.
  const Tensor& h_last = acts.hidden.back();
  grads.tensors.out_weight = matmul_tn(d_logits, h_last);
  grads.tensors.out_bias = column_sums(d_logits);
  Tensor d_h = matmul(d_logits, params.out_weight);

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const LayerParams& layer = params.layers[l];
    LayerParams& g = grads.tensors.layers[l];
    const LayerCache& c = acts.cache[l];
    const Tensor& h_in = acts.hidden[l];

    // LayerNorm 2.
    Tensor d_s2 = layer_norm_backward(d_h, c.ln2, layer.ln2_gain, g.ln2_gain, g.ln2_bias);
    Tensor d_x1 = d_s2;  // residual branch
    Tensor d_ffn = d_s2;
    if (!c.ffn_mask.empty()) apply_mask(d_ffn, c.ffn_mask);

    // FFN.
    Tensor d_act = matmul(d_ffn, layer.ffn_w2);
    add_inplace(g.ffn_w2, matmul_tn(d_ffn, c.ffn_act));
    add_inplace(g.ffn_b2, column_sums(d_ffn));
    Tensor d_pre = d_act;
    for (std::size_t i = 0; i < d_pre.size(); ++i) {
      d_pre.data()[i] *= gelu_grad(c.ffn_pre.data()[i]);
    }
    add_inplace(d_x1, matmul(d_pre, layer.ffn_w1));
    add_inplace(g.ffn_w1, matmul_tn(d_pre, c.x1));
    add_inplace(g.ffn_b1, column_sums(d_pre));

    // LayerNorm 1.
    Tensor d_s1 = layer_norm_backward(d_x1, c.ln1, layer.ln1_gain, g.ln1_gain, g.ln1_bias);
    Tensor d_hin = d_s1;  // residual branch
    Tensor d_attn = d_s1;
    if (!c.attn_mask.empty()) apply_mask(d_attn, c.attn_mask);

    // Attention output projection.
    Tensor d_context = matmul(d_attn, layer.attn.wo);
    add_inplace(g.attn.wo, matmul_tn(d_attn, c.context));

    Tensor d_q(d_h.rows(), h), d_k(d_h.rows(), h), d_v(d_h.rows(), h);
    for (std::size_t a = 0; a < heads; ++a) {
      Tensor d_ca = col_slice(d_context, a * dh, dh);
      Tensor va = col_slice(c.v, a * dh, dh);
      Tensor qa = col_slice(c.q, a * dh, dh);
      Tensor ka = col_slice(c.k, a * dh, dh);

      Tensor probs_dropped = c.att_probs[a];
      if (!c.att_prob_masks.empty()) apply_mask(probs_dropped, c.att_prob_masks[a]);

      Tensor d_probs = matmul_nt(d_ca, va);
      Tensor d_va = matmul_tn(probs_dropped, d_ca);
      if (!c.att_prob_masks.empty()) apply_mask(d_probs, c.att_prob_masks[a]);

      // Softmax backward per row.
      const Tensor& p = c.att_probs[a];
      Tensor d_scores(p.rows(), p.cols());
      for (std::size_t i = 0; i < p.rows(); ++i) {
        const double* pr = p.row(i);
        const double* dpr = d_probs.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) dot += pr[j] * dpr[j];
        double* dsr = d_scores.row(i);
        for (std::size_t j = 0; j < p.cols(); ++j) dsr[j] = pr[j] * (dpr[j] - dot);
      }
      scale_inplace(d_scores, scale);

      col_slice_add(d_q, a * dh, matmul(d_scores, ka));
      col_slice_add(d_k, a * dh, matmul_tn(d_scores, qa));
      col_slice_add(d_v, a * dh, d_va);
    }

    add_inplace(g.attn.wq, matmul_tn(d_q, h_in));
    add_inplace(g.attn.wk, matmul_tn(d_k, h_in));
    add_inplace(g.attn.wv, matmul_tn(d_v, h_in));
    add_inplace(d_hin, matmul(d_q, layer.attn.wq));
    add_inplace(d_hin, matmul(d_k, layer.attn.wk));
    add_inplace(d_hin, matmul(d_v, layer.attn.wv));

    d_h = std::move(d_hin);
  }

  // Embedding layer: h0 row i = W_e[:, id_i] + W_p[:, i].
  grads.d_input = d_h;
  for (std::size_t i = 0; i < acts.token_ids.size(); ++i) {
    const auto id = static_cast<std::size_t>(acts.token_ids[i]);
    const double* row = d_h.row(i);
    for (std::size_t j = 0; j < h; ++j) {
      grads.tensors.word_embedding(j, id) += row[j];
      grads.tensors.pos_embedding(j, i) += row[j];
    }
  }
  return grads;
}

}  // namespace segtron
