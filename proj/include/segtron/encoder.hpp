#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "segtron/tensor.hpp"

namespace segtron {

struct EncoderConfig {
  int layers = 2;          // L
  int hidden = 64;         // H
  int heads = 4;           // A
  int ffn = 256;           // F, feed-forward inner width
  int vocab_size = 0;      // |D|
  int max_positions = 128; // P
  int tag_count = 6;       // T
  double dropout = 0.1;

  int head_dim() const { return hidden / heads; }
  void validate() const;  // throws UsageError
};

struct AttentionParams {
  Tensor wq, wk, wv, wo;  // each H x H, no biases
};

struct LayerParams {
  AttentionParams attn;
  Tensor ln1_gain, ln1_bias;  // 1 x H
  Tensor ffn_w1, ffn_b1;      // F x H, 1 x F
  Tensor ffn_w2, ffn_b2;      // H x F, 1 x H
  Tensor ln2_gain, ln2_bias;  // 1 x H
};

struct EncoderParams {
  Tensor word_embedding;  // H x |D|
  Tensor pos_embedding;   // H x P
  std::vector<LayerParams> layers;
  Tensor out_weight;  // T x H
  Tensor out_bias;    // 1 x T
};

// Truncated normal (std 0.02, clipped at 2 sigma), layer-norm gains 1, biases 0.
EncoderParams init_encoder_params(const EncoderConfig& config, std::mt19937_64& rng);

// Visits every parameter tensor under a stable name ("embed.word",
// "layer0.attn.wq", "out.bias", ...). Order is fixed.
void for_each_tensor(EncoderParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_tensor(const EncoderParams& params,
                     const std::function<void(const std::string&, const Tensor&)>& fn);

// Inverted dropout; a null rng disables it (evaluation mode).
struct Dropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
  bool enabled() const { return rng != nullptr && rate > 0.0; }
};

struct LayerNormCache {
  Tensor normalized;            // x-hat, before gain/bias
  std::vector<double> inv_std;  // per row
};

struct LayerCache {
  Tensor q, k, v;                      // n x H
  std::vector<Tensor> att_probs;       // per head, n x n, post-softmax pre-dropout
  std::vector<Tensor> att_prob_masks;  // dropout masks, empty when disabled
  Tensor context;                      // n x H, pre output projection
  Tensor attn_mask;                    // n x H
  Tensor s1;
  LayerNormCache ln1;
  Tensor x1;
  Tensor ffn_pre;  // n x F
  Tensor ffn_act;  // n x F
  Tensor ffn_mask;
  Tensor s2;
  LayerNormCache ln2;
};

struct EncoderActivations {
  std::vector<Tensor> hidden;  // L+1 matrices n x H: h^0 .. h^L
  Tensor logits;               // n x T
  std::vector<int> token_ids;
  std::vector<LayerCache> cache;  // populated only when recorded for backward
};

// h^0: row i = word-embedding column of token i plus positional column i.
Tensor embed(const std::vector<int>& token_ids, const EncoderParams& params,
             const EncoderConfig& config);

// Post-layer-norm residual block:
//   x1  = LayerNorm(h_in + MultiHeadSelfAttention(h_in))
//   out = LayerNorm(x1 + FFN(x1)),  FFN with GELU activation.
// Throws NumericError when an intermediate goes non-finite.
Tensor transformer_block(const Tensor& h_in, const LayerParams& layer,
                         const EncoderConfig& config, LayerCache* cache = nullptr,
                         Dropout dropout = {});

EncoderActivations encoder_forward(const std::vector<int>& token_ids,
                                   const EncoderParams& params, const EncoderConfig& config,
                                   bool record = false, Dropout dropout = {});

struct EncoderGrads {
  EncoderParams tensors;  // same shapes as the parameters
  Tensor d_input;         // n x H, gradient at h^0
};

// Exact analytic gradients of encoder_forward; requires recorded activations.
EncoderGrads encoder_backward(const EncoderActivations& acts, const Tensor& d_logits,
                              const EncoderParams& params, const EncoderConfig& config);

double gelu(double x);
double gelu_grad(double x);

// In-place row-wise softmax with max-shift.
void softmax_rows(Tensor& m);

}  // namespace segtron
