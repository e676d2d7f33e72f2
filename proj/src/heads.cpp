#include "segtron/heads.hpp"

#include <array>
#include <cmath>

#include "segtron/errors.hpp"

namespace segtron {

namespace {

constexpr int kInteriorTags = 4;  // B, M, E, S
constexpr int kStart = static_cast<int>(Tag::Start);
constexpr int kEnd = static_cast<int>(Tag::End);

double log_sum_exp(const double* v, int n) {
  double mx = v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(v[i] - mx);
  return mx + std::log(sum);
}

void check_emissions(const Tensor& emissions) {
  if (emissions.cols() != kTagCount) {
    throw UsageError("emission matrix must have 6 columns");
  }
  if (emissions.rows() < 2) {
    throw UsageError("emission matrix needs at least the START/END positions");
  }
}

// Forward (alpha) and backward (beta) log-scores over interior positions.
struct ForwardBackward {
  Tensor alpha;  // n_int x 4
  Tensor beta;   // n_int x 4
  double log_z = 0.0;
};

ForwardBackward forward_backward(const Tensor& emissions, const Tensor& tr) {
  const std::size_t n = emissions.rows();
  const std::size_t n_int = n - 2;
  ForwardBackward fb;
  if (n_int == 0) {
    fb.log_z = tr(kStart, kEnd);
    return fb;
  }
  fb.alpha = Tensor(n_int, kInteriorTags);
  fb.beta = Tensor(n_int, kInteriorTags);
  for (int t = 0; t < kInteriorTags; ++t) {
    fb.alpha(0, t) = tr(kStart, t) + emissions(1, static_cast<std::size_t>(t));
  }
  double scratch[kInteriorTags];
  for (std::size_t i = 1; i < n_int; ++i) {
    for (int t = 0; t < kInteriorTags; ++t) {
      for (int s = 0; s < kInteriorTags; ++s) scratch[s] = fb.alpha(i - 1, s) + tr(s, t);
      fb.alpha(i, t) = log_sum_exp(scratch, kInteriorTags) +
                       emissions(i + 1, static_cast<std::size_t>(t));
    }
  }
  for (int t = 0; t < kInteriorTags; ++t) fb.beta(n_int - 1, t) = tr(t, kEnd);
  for (std::size_t i = n_int - 1; i-- > 0;) {
    for (int s = 0; s < kInteriorTags; ++s) {
      for (int t = 0; t < kInteriorTags; ++t) {
        scratch[t] = tr(s, t) + emissions(i + 2, static_cast<std::size_t>(t)) + fb.beta(i + 1, t);
      }
      fb.beta(i, s) = log_sum_exp(scratch, kInteriorTags);
    }
  }
  for (int t = 0; t < kInteriorTags; ++t) {
    scratch[t] = fb.alpha(n_int - 1, t) + tr(t, kEnd);
  }
  fb.log_z = log_sum_exp(scratch, kInteriorTags);
  return fb;
}

}  // namespace

CrfParams make_crf_params() {
  CrfParams crf;
  crf.transitions = Tensor(kTagCount, kTagCount);
  pin_crf_transitions(crf.transitions);
  return crf;
}

void pin_crf_transitions(Tensor& transitions) {
  for (int t = 0; t < kTagCount; ++t) {
    transitions(static_cast<std::size_t>(t), kStart) = kNegInf;  // nothing enters START
    transitions(kEnd, static_cast<std::size_t>(t)) = kNegInf;    // nothing leaves END
  }
}

SoftmaxLossResult softmax_loss(const Tensor& emissions, const TagSequence& gold) {
  check_emissions(emissions);
  if (gold.size() != emissions.rows()) {
    throw UsageError("softmax_loss: tag/emission length mismatch");
  }
  const std::size_t n = emissions.rows();
  const std::size_t count = n - 2;
  SoftmaxLossResult res;
  res.d_emissions = Tensor(n, kTagCount);
  if (count == 0) return res;
  double loss = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double* row = emissions.row(i);
    const double lz = log_sum_exp(row, kTagCount);
    const auto g = static_cast<std::size_t>(gold[i]);
    loss += lz - row[g];
    double* drow = res.d_emissions.row(i);
    for (int t = 0; t < kTagCount; ++t) {
      drow[t] = std::exp(row[t] - lz) / static_cast<double>(count);
    }
    drow[g] -= 1.0 / static_cast<double>(count);
  }
  res.loss = loss / static_cast<double>(count);
  return res;
}

TagSequence softmax_decode(const Tensor& emissions) {
  check_emissions(emissions);
  const std::size_t n = emissions.rows();
  TagSequence tags(n);
  tags.front() = Tag::Start;
  tags.back() = Tag::End;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double* row = emissions.row(i);
    int best = 0;
    for (int t = 1; t < kInteriorTags; ++t) {
      if (row[t] > row[best]) best = t;
    }
    tags[i] = static_cast<Tag>(best);
  }
  return tags;
}

double crf_log_partition(const Tensor& emissions, const CrfParams& crf) {
  check_emissions(emissions);
  return forward_backward(emissions, crf.transitions).log_z;
}

CrfLossResult crf_loss(const Tensor& emissions, const CrfParams& crf, const TagSequence& gold) {
  check_emissions(emissions);
  if (gold.size() != emissions.rows()) {
    throw UsageError("crf_loss: tag/emission length mismatch");
  }
  if (!validate_tag_string(gold)) {
    throw DataError("crf_loss: gold tags are not a valid aligned tag string");
  }
  const Tensor& tr = crf.transitions;
  const std::size_t n = emissions.rows();
  const std::size_t n_int = n - 2;
  const ForwardBackward fb = forward_backward(emissions, tr);

  CrfLossResult res;
  res.d_emissions = Tensor(n, kTagCount);
  res.d_transitions = Tensor(kTagCount, kTagCount);

  double gold_score = 0.0;
  int prev = kStart;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const int t = static_cast<int>(gold[i]);
    gold_score += tr(prev, t) + emissions(i, static_cast<std::size_t>(t));
    prev = t;
  }
  gold_score += tr(prev, kEnd);
  res.loss = fb.log_z - gold_score;

  // Gold indicators.
  prev = kStart;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const int t = static_cast<int>(gold[i]);
    res.d_emissions(i, static_cast<std::size_t>(t)) -= 1.0;
    res.d_transitions(prev, t) -= 1.0;
    prev = t;
  }
  res.d_transitions(prev, kEnd) -= 1.0;

  if (n_int == 0) {
    res.d_transitions(kStart, kEnd) += 1.0;  // the single empty path
    return res;
  }

  // Unigram marginals.
  for (std::size_t i = 0; i < n_int; ++i) {
    for (int t = 0; t < kInteriorTags; ++t) {
      const double m = std::exp(fb.alpha(i, t) + fb.beta(i, t) - fb.log_z);
      res.d_emissions(i + 1, static_cast<std::size_t>(t)) += m;
    }
  }
  // Bigram marginals: START->t, s->t between interior positions, t->END.
  for (int t = 0; t < kInteriorTags; ++t) {
    res.d_transitions(kStart, t) +=
        std::exp(tr(kStart, t) + emissions(1, static_cast<std::size_t>(t)) + fb.beta(0, t) -
                 fb.log_z);
    res.d_transitions(t, kEnd) += std::exp(fb.alpha(n_int - 1, t) + tr(t, kEnd) - fb.log_z);
  }
  for (std::size_t i = 0; i + 1 < n_int; ++i) {
    for (int s = 0; s < kInteriorTags; ++s) {
      for (int t = 0; t < kInteriorTags; ++t) {
        res.d_transitions(s, t) +=
            std::exp(fb.alpha(i, s) + tr(s, t) + emissions(i + 2, static_cast<std::size_t>(t)) +
                     fb.beta(i + 1, t) - fb.log_z);
      }
    }
  }
  return res;
}

TagSequence crf_decode(const Tensor& emissions, const CrfParams& crf) {
  check_emissions(emissions);
  const Tensor& tr = crf.transitions;
  const std::size_t n = emissions.rows();
  const std::size_t n_int = n - 2;
  TagSequence tags(n);
  tags.front() = Tag::Start;
  tags.back() = Tag::End;
  if (n_int == 0) return tags;

  Tensor delta(n_int, kInteriorTags);
  std::vector<std::array<int, kInteriorTags>> back(n_int);
  for (int t = 0; t < kInteriorTags; ++t) {
    delta(0, t) = tr(kStart, t) + emissions(1, static_cast<std::size_t>(t));
    back[0][static_cast<std::size_t>(t)] = kStart;
  }
  for (std::size_t i = 1; i < n_int; ++i) {
    for (int t = 0; t < kInteriorTags; ++t) {
      int best_s = 0;
      double best = delta(i - 1, 0) + tr(0, t);
      for (int s = 1; s < kInteriorTags; ++s) {
        const double cand = delta(i - 1, s) + tr(s, t);
        if (cand > best) {  // strict: keeps the lowest id on ties
          best = cand;
          best_s = s;
        }
      }
      delta(i, t) = best + emissions(i + 1, static_cast<std::size_t>(t));
      back[i][static_cast<std::size_t>(t)] = best_s;
    }
  }
  int best_t = 0;
  double best = delta(n_int - 1, 0) + tr(0, kEnd);
  for (int t = 1; t < kInteriorTags; ++t) {
    const double cand = delta(n_int - 1, t) + tr(t, kEnd);
    if (cand > best) {
      best = cand;
      best_t = t;
    }
  }
  for (std::size_t i = n_int; i-- > 0;) {
    tags[i + 1] = static_cast<Tag>(best_t);
    best_t = back[i][static_cast<std::size_t>(best_t)];
  }
  return tags;
}

Tensor crf_marginals(const Tensor& emissions, const CrfParams& crf) {
  check_emissions(emissions);
  const std::size_t n_int = emissions.rows() - 2;
  const ForwardBackward fb = forward_backward(emissions, crf.transitions);
  Tensor m(n_int, kInteriorTags);
  for (std::size_t i = 0; i < n_int; ++i) {
    for (int t = 0; t < kInteriorTags; ++t) {
      m(i, t) = std::exp(fb.alpha(i, t) + fb.beta(i, t) - fb.log_z);
    }
  }
  return m;
}

}  // namespace segtron
