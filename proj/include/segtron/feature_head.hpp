#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "segtron/encoder.hpp"
#include "segtron/tensor.hpp"

namespace segtron {

enum class CombinationStrategy {
  FirstLayer,
  SecondToLastHidden,
  LastHidden,
  SumLastFour,
  ConcatLastFour,
  SumAll,
};

const char* strategy_name(CombinationStrategy s);

// Accepts the canonical identifiers above plus the CLI short forms
// (first | second-to-last | last | sum4 | concat4 | sumall).
std::optional<CombinationStrategy> parse_strategy(std::string_view name);

// Output width for a given encoder hidden size (4H for ConcatLastFour).
int strategy_width(CombinationStrategy s, int hidden);

// Throws UsageError when the strategy needs more layers than the config has.
void check_strategy(CombinationStrategy s, const EncoderConfig& config);

// FirstLayer -> h^0; LastHidden -> h^L; SecondToLastHidden -> h^(L-1);
// SumLastFour -> h^(L-3)+..+h^L; ConcatLastFour concatenates those four
// row-wise; SumAll -> h^1+..+h^L (the embedding layer h^0 is excluded).
Tensor combine_layers(const EncoderActivations& acts, CombinationStrategy s,
                      const EncoderConfig& config);

// One direction of one LSTM layer; gate rows packed as [input; forget;
// cell; output], each `hidden` rows.
struct LstmDirParams {
  Tensor wx;  // 4D x input_width
  Tensor wh;  // 4D x D
  Tensor b;   // 1 x 4D
};

struct BiLstmParams {
  int hidden = 64;  // D, per direction
  std::array<std::array<LstmDirParams, 2>, 2> layers;  // [layer][0=fwd,1=bwd]
  Tensor proj_w;  // T x 2D
  Tensor proj_b;  // 1 x T
};

// Uniform init in [-1/sqrt(D), 1/sqrt(D)]; forget-gate biases +1.
BiLstmParams init_bilstm_params(int input_width, int hidden, std::mt19937_64& rng);

void for_each_tensor(BiLstmParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn);

struct LstmDirCache {
  Tensor input;                  // n x in
  Tensor gates;                  // n x 4D, post-nonlinearity [i f g o]
  Tensor cell;                   // n x D
  Tensor hidden_states;          // n x D
};

struct BiLstmCache {
  std::array<std::array<LstmDirCache, 2>, 2> dirs;
  Tensor concat1;  // n x 2D, output of layer 0
  Tensor concat2;  // n x 2D, output of layer 1
};

// Two stacked bidirectional layers, forward/backward states concatenated
// between layers, final projection to the 6 tag logits.
Tensor bilstm_forward(const Tensor& features, const BiLstmParams& params,
                      BiLstmCache* cache = nullptr);

struct BiLstmGrads {
  BiLstmParams tensors;
  Tensor d_features;
};

BiLstmGrads bilstm_backward(const BiLstmCache& cache, const Tensor& d_logits,
                            const BiLstmParams& params);

}  // namespace segtron
