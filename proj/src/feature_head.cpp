#include "segtron/feature_head.hpp"

#include <cmath>

#include "segtron/errors.hpp"

namespace segtron {

const char* strategy_name(CombinationStrategy s) {
  switch (s) {
    case CombinationStrategy::FirstLayer: return "FirstLayer";
    case CombinationStrategy::SecondToLastHidden: return "SecondToLastHidden";
    case CombinationStrategy::LastHidden: return "LastHidden";
    case CombinationStrategy::SumLastFour: return "SumLastFour";
    case CombinationStrategy::ConcatLastFour: return "ConcatLastFour";
    case CombinationStrategy::SumAll: return "SumAll";
  }
  return "?";
}

std::optional<CombinationStrategy> parse_strategy(std::string_view name) {
  using CS = CombinationStrategy;
  if (name == "FirstLayer" || name == "first") return CS::FirstLayer;
  if (name == "SecondToLastHidden" || name == "second-to-last") return CS::SecondToLastHidden;
  if (name == "LastHidden" || name == "last") return CS::LastHidden;
  if (name == "SumLastFour" || name == "sum4") return CS::SumLastFour;
  if (name == "ConcatLastFour" || name == "concat4") return CS::ConcatLastFour;
  if (name == "SumAll" || name == "sumall") return CS::SumAll;
  return std::nullopt;
}

int strategy_width(CombinationStrategy s, int hidden) {
  return s == CombinationStrategy::ConcatLastFour ? 4 * hidden : hidden;
}

void check_strategy(CombinationStrategy s, const EncoderConfig& config) {
  const int need = (s == CombinationStrategy::SumLastFour ||
                    s == CombinationStrategy::ConcatLastFour)
                       ? 4
                       : (s == CombinationStrategy::SecondToLastHidden ? 2 : 1);
  if (config.layers < need) {
    throw UsageError(std::string("strategy ") + strategy_name(s) + " needs at least " +
                     std::to_string(need) + " layers, config has " +
                     std::to_string(config.layers));
  }
}

Tensor combine_layers(const EncoderActivations& acts, CombinationStrategy s,
                      const EncoderConfig& config) {
  check_strategy(s, config);
  const std::size_t last = acts.hidden.size() - 1;  // index of h^L
  switch (s) {
    case CombinationStrategy::FirstLayer:
      return acts.hidden[0];
    case CombinationStrategy::LastHidden:
      return acts.hidden[last];
    case CombinationStrategy::SecondToLastHidden:
      return acts.hidden[last - 1];
    case CombinationStrategy::SumLastFour: {
      Tensor out = acts.hidden[last - 3];
      for (std::size_t l = last - 2; l <= last; ++l) add_inplace(out, acts.hidden[l]);
      return out;
    }
    case CombinationStrategy::ConcatLastFour: {
      const std::size_t n = acts.hidden[last].rows();
      const std::size_t h = acts.hidden[last].cols();
      Tensor out(n, 4 * h);
      for (std::size_t k = 0; k < 4; ++k) {
        const Tensor& src = acts.hidden[last - 3 + k];
        for (std::size_t i = 0; i < n; ++i) {
          double* dst = out.row(i) + k * h;
          const double* s_row = src.row(i);
          for (std::size_t j = 0; j < h; ++j) dst[j] = s_row[j];
        }
      }
      return out;
    }
    case CombinationStrategy::SumAll: {
      Tensor out = acts.hidden[1];
      for (std::size_t l = 2; l <= last; ++l) add_inplace(out, acts.hidden[l]);
      return out;
    }
  }
  throw UsageError("unknown combination strategy");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmDirParams init_dir(int input_width, int hidden, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  LstmDirParams p;
  p.wx = Tensor(static_cast<std::size_t>(4 * hidden), static_cast<std::size_t>(input_width));
  p.wh = Tensor(static_cast<std::size_t>(4 * hidden), static_cast<std::size_t>(hidden));
  p.b = Tensor(1, static_cast<std::size_t>(4 * hidden));
  for (std::size_t i = 0; i < p.wx.size(); ++i) p.wx.data()[i] = dist(rng);
  for (std::size_t i = 0; i < p.wh.size(); ++i) p.wh.data()[i] = dist(rng);
  for (std::size_t i = 0; i < p.b.size(); ++i) p.b.data()[i] = dist(rng);
  // Forget-gate bias +1.
  for (int j = hidden; j < 2 * hidden; ++j) p.b(0, static_cast<std::size_t>(j)) += 1.0;
  return p;
}

// One direction of one layer; dir 0 walks left-to-right, dir 1 right-to-left.
Tensor run_dir(const Tensor& input, const LstmDirParams& p, int dir, LstmDirCache* cache) {
  const std::size_t n = input.rows();
  const std::size_t in_w = input.cols();
  const std::size_t d = p.wh.cols();
  if (p.wx.cols() != in_w) throw UsageError("bilstm: feature width mismatch");
  Tensor hidden(n, d), cell(n, d), gates(n, 4 * d);
  std::vector<double> h_prev(d, 0.0), c_prev(d, 0.0), z(4 * d);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = dir == 0 ? step : n - 1 - step;
    const double* x = input.row(t);
    for (std::size_t j = 0; j < 4 * d; ++j) {
      double acc = p.b(0, j);
      const double* wxr = p.wx.row(j);
      for (std::size_t k = 0; k < in_w; ++k) acc += wxr[k] * x[k];
      const double* whr = p.wh.row(j);
      for (std::size_t k = 0; k < d; ++k) acc += whr[k] * h_prev[k];
      z[j] = acc;
    }
    double* grow = gates.row(t);
    double* crow = cell.row(t);
    double* hrow = hidden.row(t);
    for (std::size_t j = 0; j < d; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[d + j]);
      const double gg = std::tanh(z[2 * d + j]);
      const double og = sigmoid(z[3 * d + j]);
      grow[j] = ig;
      grow[d + j] = fg;
      grow[2 * d + j] = gg;
      grow[3 * d + j] = og;
      crow[j] = fg * c_prev[j] + ig * gg;
      hrow[j] = og * std::tanh(crow[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
      h_prev[j] = hrow[j];
      c_prev[j] = crow[j];
    }
  }
  if (cache) {
    cache->input = input;
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->hidden_states = hidden;
  }
  return hidden;
}

struct DirGrads {
  Tensor dwx, dwh, db;
  Tensor d_input;
};

DirGrads backward_dir(const LstmDirCache& c, const LstmDirParams& p, int dir,
                      const Tensor& d_hidden) {
  const std::size_t n = c.input.rows();
  const std::size_t in_w = c.input.cols();
  const std::size_t d = p.wh.cols();
  DirGrads g;
  g.dwx = Tensor::zeros_like(p.wx);
  g.dwh = Tensor::zeros_like(p.wh);
  g.db = Tensor::zeros_like(p.b);
  g.d_input = Tensor(n, in_w);
  std::vector<double> dh_rec(d, 0.0), dc_rec(d, 0.0), dz(4 * d);
  for (std::size_t step = n; step-- > 0;) {
    const std::size_t t = dir == 0 ? step : n - 1 - step;
    const std::size_t t_prev = dir == 0 ? t - 1 : t + 1;  // valid only when step > 0
    const bool has_prev = step > 0;
    const double* grow = c.gates.row(t);
    const double* crow = c.cell.row(t);
    for (std::size_t j = 0; j < d; ++j) {
      const double ig = grow[j], fg = grow[d + j], gg = grow[2 * d + j], og = grow[3 * d + j];
      const double tc = std::tanh(crow[j]);
      const double dh = d_hidden(t, j) + dh_rec[j];
      const double dog = dh * tc;
      const double dc = dc_rec[j] + dh * og * (1.0 - tc * tc);
      const double dig = dc * gg;
      const double dgg = dc * ig;
      const double c_prev = has_prev ? c.cell(t_prev, j) : 0.0;
      const double dfg = dc * c_prev;
      dc_rec[j] = dc * fg;
      dz[j] = dig * ig * (1.0 - ig);
      dz[d + j] = dfg * fg * (1.0 - fg);
      dz[2 * d + j] = dgg * (1.0 - gg * gg);
      dz[3 * d + j] = dog * og * (1.0 - og);
    }
    const double* x = c.input.row(t);
    double* dx = g.d_input.row(t);
    std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
    for (std::size_t j = 0; j < 4 * d; ++j) {
      const double dzj = dz[j];
      if (dzj == 0.0) continue;
      g.db(0, j) += dzj;
      double* dwxr = g.dwx.row(j);
      for (std::size_t k = 0; k < in_w; ++k) dwxr[k] += dzj * x[k];
      const double* wxr = p.wx.row(j);
      for (std::size_t k = 0; k < in_w; ++k) dx[k] += dzj * wxr[k];
      double* dwhr = g.dwh.row(j);
      const double* whr = p.wh.row(j);
      if (has_prev) {
        const double* hp = c.hidden_states.row(t_prev);
        for (std::size_t k = 0; k < d; ++k) dwhr[k] += dzj * hp[k];
      }
      for (std::size_t k = 0; k < d; ++k) dh_rec[k] += dzj * whr[k];
    }
    if (!has_prev) std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
  }
  return g;
}

Tensor hconcat(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i);
    const double* ar = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) dst[j] = ar[j];
    const double* br = b.row(i);
    for (std::size_t j = 0; j < b.cols(); ++j) dst[a.cols() + j] = br[j];
  }
  return out;
}

Tensor hsplit(const Tensor& m, std::size_t begin, std::size_t width) {
  Tensor out(m.rows(), width);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* src = m.row(i) + begin;
    double* dst = out.row(i);
    for (std::size_t j = 0; j < width; ++j) dst[j] = src[j];
  }
  return out;
}

}  // namespace

BiLstmParams init_bilstm_params(int input_width, int hidden, std::mt19937_64& rng) {
  if (input_width < 1 || hidden < 1) throw UsageError("bilstm: widths must be positive");
  BiLstmParams p;
  p.hidden = hidden;
  p.layers[0][0] = init_dir(input_width, hidden, rng);
  p.layers[0][1] = init_dir(input_width, hidden, rng);
  p.layers[1][0] = init_dir(2 * hidden, hidden, rng);
  p.layers[1][1] = init_dir(2 * hidden, hidden, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  p.proj_w = Tensor(6, static_cast<std::size_t>(2 * hidden));
  p.proj_b = Tensor(1, 6);
  for (std::size_t i = 0; i < p.proj_w.size(); ++i) p.proj_w.data()[i] = dist(rng);
  return p;
}

void for_each_tensor(BiLstmParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn) {
  for (int l = 0; l < 2; ++l) {
    for (int dir = 0; dir < 2; ++dir) {
      const std::string base = "bilstm.l" + std::to_string(l) + (dir == 0 ? ".fw." : ".bw.");
      LstmDirParams& p = params.layers[static_cast<std::size_t>(l)][static_cast<std::size_t>(dir)];
      fn(base + "wx", p.wx);
      fn(base + "wh", p.wh);
      fn(base + "b", p.b);
    }
  }
  fn("bilstm.proj.weight", params.proj_w);
  fn("bilstm.proj.bias", params.proj_b);
}

Tensor bilstm_forward(const Tensor& features, const BiLstmParams& params, BiLstmCache* cache) {
  BiLstmCache local;
  BiLstmCache* c = cache ? cache : &local;
  Tensor fw0 = run_dir(features, params.layers[0][0], 0, &c->dirs[0][0]);
  Tensor bw0 = run_dir(features, params.layers[0][1], 1, &c->dirs[0][1]);
  c->concat1 = hconcat(fw0, bw0);
  Tensor fw1 = run_dir(c->concat1, params.layers[1][0], 0, &c->dirs[1][0]);
  Tensor bw1 = run_dir(c->concat1, params.layers[1][1], 1, &c->dirs[1][1]);
  c->concat2 = hconcat(fw1, bw1);
  return add_row_broadcast(matmul_nt(c->concat2, params.proj_w), params.proj_b);
}

BiLstmGrads bilstm_backward(const BiLstmCache& cache, const Tensor& d_logits,
                            const BiLstmParams& params) {
  const std::size_t d = static_cast<std::size_t>(params.hidden);
  BiLstmGrads g;
  g.tensors.hidden = params.hidden;
  g.tensors.proj_w = matmul_tn(d_logits, cache.concat2);
  g.tensors.proj_b = column_sums(d_logits);

  Tensor d_concat2 = matmul(d_logits, params.proj_w);
  DirGrads g_fw1 = backward_dir(cache.dirs[1][0], params.layers[1][0], 0, hsplit(d_concat2, 0, d));
  DirGrads g_bw1 = backward_dir(cache.dirs[1][1], params.layers[1][1], 1, hsplit(d_concat2, d, d));

  Tensor d_concat1 = g_fw1.d_input;
  add_inplace(d_concat1, g_bw1.d_input);
  DirGrads g_fw0 = backward_dir(cache.dirs[0][0], params.layers[0][0], 0, hsplit(d_concat1, 0, d));
  DirGrads g_bw0 = backward_dir(cache.dirs[0][1], params.layers[0][1], 1, hsplit(d_concat1, d, d));

  g.d_features = g_fw0.d_input;
  add_inplace(g.d_features, g_bw0.d_input);

  auto put = [](DirGrads& src, LstmDirParams& dst) {
    dst.wx = std::move(src.dwx);
    dst.wh = std::move(src.dwh);
    dst.b = std::move(src.db);
  };
  put(g_fw0, g.tensors.layers[0][0]);
  put(g_bw0, g.tensors.layers[0][1]);
  put(g_fw1, g.tensors.layers[1][0]);
  put(g_bw1, g.tensors.layers[1][1]);
  return g;
}

}  // namespace segtron
