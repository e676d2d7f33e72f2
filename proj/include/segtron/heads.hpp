#pragma once

#include "segtron/tagging.hpp"
#include "segtron/tensor.hpp"

namespace segtron {

// Structural impossibility score: large enough to never win, small enough
// to stay NaN-free in log-sum-exp.
inline constexpr double kNegInf = -1.0e4;

// Tag-bigram scores; entry (a,b) scores tag b following tag a. Transitions
// into START and out of END are pinned to kNegInf.
struct CrfParams {
  Tensor transitions;  // 6 x 6
};

CrfParams make_crf_params();

// Re-pins the structural entries (into START, out of END) after updates.
void pin_crf_transitions(Tensor& transitions);

struct SoftmaxLossResult {
  double loss = 0.0;
  Tensor d_emissions;  // n x 6
};

// Mean per-token cross-entropy over interior positions; START/END rows are
// excluded and carry zero gradient. Softmax runs over all 6 logits.
SoftmaxLossResult softmax_loss(const Tensor& emissions, const TagSequence& gold);

// Per-position argmax over the 4 interior tags; START/END forced at the
// ends; ties broken by lowest tag id.
TagSequence softmax_decode(const Tensor& emissions);

// log-sum-exp over all interior tag sequences (tags B/M/E/S) of
// sum(emissions) + sum(transitions), pinned to START/END at the ends.
double crf_log_partition(const Tensor& emissions, const CrfParams& crf);

struct CrfLossResult {
  double loss = 0.0;
  Tensor d_emissions;    // n x 6
  Tensor d_transitions;  // 6 x 6
};

// NLL = log Z - score(gold); gradients are marginals minus gold indicators,
// marginals via forward-backward. Gold must be a valid aligned tag string.
CrfLossResult crf_loss(const Tensor& emissions, const CrfParams& crf, const TagSequence& gold);

// Viterbi decoding with pinned endpoints; ties broken by lowest tag id at
// each backtrack step.
TagSequence crf_decode(const Tensor& emissions, const CrfParams& crf);

// Position-wise posteriors over the 4 interior tags (rows sum to 1);
// exposed for the forward-backward consistency checks.
Tensor crf_marginals(const Tensor& emissions, const CrfParams& crf);

}  // namespace segtron
