#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "giraf/error.hpp"
#include "giraf/rng.hpp"

namespace giraf {

// Small feed-forward / recurrent classifiers with all parameters held in one
// flat vector. The flat layout keeps SGD updates, bit-exact comparisons and
// finite-difference sweeps trivial.

inline void softmax_inplace(std::vector<double>& z) {
  double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// Three weight layers with ReLU between them and a softmax readout:
// input -> h1 -> h2 -> classes.
struct MlpModel {
  int input_dim = 0;
  int h1 = 0;
  int h2 = 0;
  int classes = 0;
  std::vector<double> params;

  static MlpModel zeros(int input_dim, int h1, int h2, int classes) {
    MlpModel m;
    m.input_dim = input_dim;
    m.h1 = h1;
    m.h2 = h2;
    m.classes = classes;
    m.params.assign(m.param_count(), 0.0);
    return m;
  }

  // Glorot-uniform init, deterministic per seed.
  static MlpModel random_init(int input_dim, int h1, int h2, int classes,
                              std::uint64_t seed) {
    MlpModel m = zeros(input_dim, h1, h2, classes);
    auto rng = make_rng(seed);
    auto fill = [&rng](std::span<double> w, int fan_in, int fan_out) {
      double r = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> u(-r, r);
      for (double& v : w) v = u(rng);
    };
    fill(m.w1(), input_dim, h1);
    fill(m.w2(), h1, h2);
    fill(m.w3(), h2, classes);
    return m;
  }

  std::size_t param_count() const {
    return static_cast<std::size_t>(h1) * input_dim + h1 +
           static_cast<std::size_t>(h2) * h1 + h2 +
           static_cast<std::size_t>(classes) * h2 + classes;
  }

  // Row-major weight blocks and their biases, in layer order.
  std::span<double> w1() { return {params.data(), size_t(h1) * input_dim}; }
  std::span<double> b1() { return {params.data() + h1 * input_dim, size_t(h1)}; }
  std::span<double> w2() {
    return {params.data() + h1 * input_dim + h1, size_t(h2) * h1};
  }
  std::span<double> b2() {
    return {params.data() + h1 * input_dim + h1 + h2 * h1, size_t(h2)};
  }
  std::span<double> w3() {
    return {params.data() + h1 * input_dim + h1 + h2 * h1 + h2,
            size_t(classes) * h2};
  }
  std::span<double> b3() {
    return {params.data() + param_count() - classes, size_t(classes)};
  }
  std::span<const double> w1() const {
    return {params.data(), size_t(h1) * input_dim};
  }
  std::span<const double> b1() const {
    return {params.data() + h1 * input_dim, size_t(h1)};
  }
  std::span<const double> w2() const {
    return {params.data() + h1 * input_dim + h1, size_t(h2) * h1};
  }
  std::span<const double> b2() const {
    return {params.data() + h1 * input_dim + h1 + h2 * h1, size_t(h2)};
  }
  std::span<const double> w3() const {
    return {params.data() + h1 * input_dim + h1 + h2 * h1 + h2,
            size_t(classes) * h2};
  }
  std::span<const double> b3() const {
    return {params.data() + param_count() - classes, size_t(classes)};
  }

  bool operator==(const MlpModel& o) const {
    return input_dim == o.input_dim && h1 == o.h1 && h2 == o.h2 &&
           classes == o.classes && params == o.params;
  }
};

namespace detail {

inline void affine(std::span<const double> w, std::span<const double> b,
                   std::span<const double> x, std::vector<double>& out) {
  int rows = static_cast<int>(b.size());
  int cols = static_cast<int>(x.size());
  out.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
    double s = b[r];
    for (int c = 0; c < cols; ++c) s += wr[c] * x[c];
    out[r] = s;
  }
}

struct MlpActivations {
  std::vector<double> a1, a2, probs;  // post-ReLU / post-ReLU / softmax
};

inline MlpActivations mlp_forward_full(const MlpModel& m,
                                       std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_dim)
    throw ShapeMismatchError("mlp input has size " + std::to_string(x.size()) +
                             ", model expects " + std::to_string(m.input_dim));
  MlpActivations act;
  affine(m.w1(), m.b1(), x, act.a1);
  for (double& v : act.a1) v = std::max(0.0, v);
  affine(m.w2(), m.b2(), act.a1, act.a2);
  for (double& v : act.a2) v = std::max(0.0, v);
  affine(m.w3(), m.b3(), act.a2, act.probs);
  softmax_inplace(act.probs);
  return act;
}

}  // namespace detail

inline std::vector<double> mlp_forward(const MlpModel& m,
                                       std::span<const double> x) {
  return detail::mlp_forward_full(m, x).probs;
}

// Cross-entropy loss of one sample plus its gradient accumulated into
// `grad` (same flat layout as the model's params). Returns the loss.
inline double mlp_backward(const MlpModel& m, std::span<const double> x,
                           int label, std::vector<double>& grad) {
  auto act = detail::mlp_forward_full(m, x);
  double loss = -std::log(std::max(act.probs[label], 1e-300));

  std::vector<double> dz3 = act.probs;
  dz3[label] -= 1.0;

  MlpModel* g = nullptr;  // view helper below
  // Build spans over `grad` with the model's layout.
  MlpModel layout = m;
  layout.params.swap(grad);
  auto gw3 = layout.w3();
  auto gb3 = layout.b3();
  auto gw2 = layout.w2();
  auto gb2 = layout.b2();
  auto gw1 = layout.w1();
  auto gb1 = layout.b1();
  (void)g;

  std::vector<double> da2(m.h2, 0.0);
  for (int r = 0; r < m.classes; ++r) {
    double d = dz3[r];
    gb3[r] += d;
    const double* a2 = act.a2.data();
    double* wrow = gw3.data() + static_cast<std::size_t>(r) * m.h2;
    const double* w3row = m.w3().data() + static_cast<std::size_t>(r) * m.h2;
    for (int c = 0; c < m.h2; ++c) {
      wrow[c] += d * a2[c];
      da2[c] += d * w3row[c];
    }
  }
  std::vector<double> da1(m.h1, 0.0);
  for (int r = 0; r < m.h2; ++r) {
    double d = act.a2[r] > 0.0 ? da2[r] : 0.0;
    gb2[r] += d;
    double* wrow = gw2.data() + static_cast<std::size_t>(r) * m.h1;
    const double* w2row = m.w2().data() + static_cast<std::size_t>(r) * m.h1;
    for (int c = 0; c < m.h1; ++c) {
      wrow[c] += d * act.a1[c];
      da1[c] += d * w2row[c];
    }
  }
  for (int r = 0; r < m.h1; ++r) {
    double d = act.a1[r] > 0.0 ? da1[r] : 0.0;
    gb1[r] += d;
    double* wrow = gw1.data() + static_cast<std::size_t>(r) * m.input_dim;
    for (int c = 0; c < m.input_dim; ++c) wrow[c] += d * x[c];
  }
  layout.params.swap(grad);
  return loss;
}

// Single LSTM cell (gates fused into 4H rows, order i, f, g, o) followed by
// a linear readout of the final hidden state.
struct LstmModel {
  int input_dim = 0;
  int hidden = 0;
  int classes = 0;
  std::vector<double> params;

  static LstmModel zeros(int input_dim, int hidden, int classes) {
    LstmModel m;
    m.input_dim = input_dim;
    m.hidden = hidden;
    m.classes = classes;
    m.params.assign(m.param_count(), 0.0);
    return m;
  }

  static LstmModel random_init(int input_dim, int hidden, int classes,
                               std::uint64_t seed) {
    LstmModel m = zeros(input_dim, hidden, classes);
    auto rng = make_rng(seed);
    auto fill = [&rng](std::span<double> w, int fan_in, int fan_out) {
      double r = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> u(-r, r);
      for (double& v : w) v = u(rng);
    };
    fill(m.wx(), input_dim, hidden);
    fill(m.wh(), hidden, hidden);
    fill(m.w_out(), hidden, classes);
    // Forget-gate bias starts open.
    auto b = m.bias();
    for (int i = m.hidden; i < 2 * m.hidden; ++i) b[i] = 1.0;
    return m;
  }

  std::size_t param_count() const {
    std::size_t g = static_cast<std::size_t>(4) * hidden;
    return g * input_dim + g * hidden + g +
           static_cast<std::size_t>(classes) * hidden + classes;
  }

  std::span<double> wx() {
    return {params.data(), std::size_t(4) * hidden * input_dim};
  }
  std::span<double> wh() {
    return {params.data() + 4 * hidden * input_dim,
            std::size_t(4) * hidden * hidden};
  }
  std::span<double> bias() {
    return {params.data() + 4 * hidden * (input_dim + hidden),
            std::size_t(4) * hidden};
  }
  std::span<double> w_out() {
    return {params.data() + 4 * hidden * (input_dim + hidden + 1),
            std::size_t(classes) * hidden};
  }
  std::span<double> b_out() {
    return {params.data() + param_count() - classes, std::size_t(classes)};
  }
  std::span<const double> wx() const {
    return {params.data(), std::size_t(4) * hidden * input_dim};
  }
  std::span<const double> wh() const {
    return {params.data() + 4 * hidden * input_dim,
            std::size_t(4) * hidden * hidden};
  }
  std::span<const double> bias() const {
    return {params.data() + 4 * hidden * (input_dim + hidden),
            std::size_t(4) * hidden};
  }
  std::span<const double> w_out() const {
    return {params.data() + 4 * hidden * (input_dim + hidden + 1),
            std::size_t(classes) * hidden};
  }
  std::span<const double> b_out() const {
    return {params.data() + param_count() - classes, std::size_t(classes)};
  }

  bool operator==(const LstmModel& o) const {
    return input_dim == o.input_dim && hidden == o.hidden &&
           classes == o.classes && params == o.params;
  }
};

namespace detail {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct LstmStep {
  std::vector<double> i, f, g, o, c, tanh_c, h, x;
};

struct LstmTrace {
  std::vector<LstmStep> steps;
  std::vector<double> probs;
};

inline LstmTrace lstm_forward_full(
    const LstmModel& m, const std::vector<std::vector<double>>& frames) {
  if (frames.empty()) throw EmptySequenceError();
  const int H = m.hidden;
  LstmTrace tr;
  tr.steps.reserve(frames.size());
  std::vector<double> h(H, 0.0), c(H, 0.0), z(4 * H);
  for (const auto& x : frames) {
    if (static_cast<int>(x.size()) != m.input_dim)
      throw ShapeMismatchError("lstm frame has size " +
                               std::to_string(x.size()) + ", model expects " +
                               std::to_string(m.input_dim));
    auto wx = m.wx();
    auto wh = m.wh();
    auto b = m.bias();
    for (int r = 0; r < 4 * H; ++r) {
      const double* wxr = wx.data() + static_cast<std::size_t>(r) * m.input_dim;
      const double* whr = wh.data() + static_cast<std::size_t>(r) * H;
      double s = b[r];
      for (int k = 0; k < m.input_dim; ++k) s += wxr[k] * x[k];
      for (int k = 0; k < H; ++k) s += whr[k] * h[k];
      z[r] = s;
    }
    LstmStep st;
    st.x = x;
    st.i.resize(H);
    st.f.resize(H);
    st.g.resize(H);
    st.o.resize(H);
    st.c.resize(H);
    st.tanh_c.resize(H);
    st.h.resize(H);
    for (int k = 0; k < H; ++k) {
      st.i[k] = sigmoid(z[k]);
      st.f[k] = sigmoid(z[H + k]);
      st.g[k] = std::tanh(z[2 * H + k]);
      st.o[k] = sigmoid(z[3 * H + k]);
      st.c[k] = st.f[k] * c[k] + st.i[k] * st.g[k];
      st.tanh_c[k] = std::tanh(st.c[k]);
      st.h[k] = st.o[k] * st.tanh_c[k];
    }
    h = st.h;
    c = st.c;
    tr.steps.push_back(std::move(st));
  }
  affine(m.w_out(), m.b_out(), h, tr.probs);
  softmax_inplace(tr.probs);
  return tr;
}

}  // namespace detail

inline std::vector<double> rnn_forward(
    const LstmModel& m, const std::vector<std::vector<double>>& frames) {
  return detail::lstm_forward_full(m, frames).probs;
}

// Backpropagation through time for one labelled sequence; gradient is
// accumulated into `grad` (flat model layout). Returns the loss.
inline double lstm_backward(const LstmModel& m,
                            const std::vector<std::vector<double>>& frames,
                            int label, std::vector<double>& grad) {
  auto tr = detail::lstm_forward_full(m, frames);
  const int H = m.hidden;
  const int T = static_cast<int>(tr.steps.size());
  double loss = -std::log(std::max(tr.probs[label], 1e-300));

  LstmModel layout = m;
  layout.params.swap(grad);
  auto gwx = layout.wx();
  auto gwh = layout.wh();
  auto gb = layout.bias();
  auto gwo = layout.w_out();
  auto gbo = layout.b_out();

  std::vector<double> dlogits = tr.probs;
  dlogits[label] -= 1.0;

  std::vector<double> dh(H, 0.0), dc(H, 0.0), dz(4 * H);
  const auto& h_last = tr.steps.back().h;
  for (int r = 0; r < m.classes; ++r) {
    double d = dlogits[r];
    gbo[r] += d;
    double* gw = gwo.data() + static_cast<std::size_t>(r) * H;
    const double* wo = m.w_out().data() + static_cast<std::size_t>(r) * H;
    for (int k = 0; k < H; ++k) {
      gw[k] += d * h_last[k];
      dh[k] += d * wo[k];
    }
  }

  for (int t = T - 1; t >= 0; --t) {
    const auto& st = tr.steps[t];
    const std::vector<double>* c_prev = t > 0 ? &tr.steps[t - 1].c : nullptr;
    for (int k = 0; k < H; ++k) {
      double do_ = dh[k] * st.tanh_c[k];
      double dct = dc[k] + dh[k] * st.o[k] * (1.0 - st.tanh_c[k] * st.tanh_c[k]);
      double di = dct * st.g[k];
      double dg = dct * st.i[k];
      double df = dct * (c_prev ? (*c_prev)[k] : 0.0);
      dc[k] = dct * st.f[k];
      dz[k] = di * st.i[k] * (1.0 - st.i[k]);
      dz[H + k] = df * st.f[k] * (1.0 - st.f[k]);
      dz[2 * H + k] = dg * (1.0 - st.g[k] * st.g[k]);
      dz[3 * H + k] = do_ * st.o[k] * (1.0 - st.o[k]);
    }
    const std::vector<double>* h_prev = t > 0 ? &tr.steps[t - 1].h : nullptr;
    std::fill(dh.begin(), dh.end(), 0.0);
    auto wh = m.wh();
    for (int r = 0; r < 4 * H; ++r) {
      double d = dz[r];
      gb[r] += d;
      double* gx = gwx.data() + static_cast<std::size_t>(r) * m.input_dim;
      for (int k = 0; k < m.input_dim; ++k) gx[k] += d * st.x[k];
      double* gh = gwh.data() + static_cast<std::size_t>(r) * H;
      const double* whr = wh.data() + static_cast<std::size_t>(r) * H;
      for (int k = 0; k < H; ++k) {
        if (h_prev) gh[k] += d * (*h_prev)[k];
        dh[k] += d * whr[k];
      }
    }
  }
  layout.params.swap(grad);
  return loss;
}

struct TrainConfig {
  double lr = 1e-2;
  int epochs = 200;
  int batch = 32;
  std::uint64_t seed = 0;
};

template <typename T>
struct TrainResult {
  T model;
  std::vector<double> epoch_losses;  // mean per-sample loss by epoch
};

namespace detail {

// Shared minibatch-SGD loop; `backward(idx, grad)` accumulates one sample's
// gradient and returns its loss.
template <typename Model, typename Backward>
TrainResult<Model> sgd_train(Model model, std::size_t n_samples,
                             const TrainConfig& cfg, Backward&& backward) {
  if (n_samples == 0) throw EmptyDatasetError("training set is empty");
  TrainResult<Model> result;
  auto rng = make_rng(derive_seed(cfg.seed, 0x5d9));
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.param_count(), 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_samples;
         start += static_cast<std::size_t>(cfg.batch)) {
      std::size_t end = std::min(n_samples, start + cfg.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k)
        epoch_loss += backward(model, order[k], grad);
      double scale = cfg.lr / static_cast<double>(end - start);
      for (std::size_t p = 0; p < grad.size(); ++p)
        model.params[p] -= scale * grad[p];
    }
    result.epoch_losses.push_back(epoch_loss / n_samples);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace detail

inline TrainResult<MlpModel> mlp_train(
    MlpModel model, const std::vector<std::vector<double>>& inputs,
    const std::vector<int>& labels, const TrainConfig& cfg) {
  if (inputs.size() != labels.size())
    throw ShapeMismatchError("inputs/labels size mismatch");
  return detail::sgd_train(
      std::move(model), inputs.size(), cfg,
      [&](const MlpModel& m, std::size_t i, std::vector<double>& g) {
        return mlp_backward(m, inputs[i], labels[i], g);
      });
}

inline TrainResult<LstmModel> lstm_train(
    LstmModel model, const std::vector<std::vector<std::vector<double>>>& seqs,
    const std::vector<int>& labels, const TrainConfig& cfg) {
  if (seqs.size() != labels.size())
    throw ShapeMismatchError("sequences/labels size mismatch");
  return detail::sgd_train(
      std::move(model), seqs.size(), cfg,
      [&](const LstmModel& m, std::size_t i, std::vector<double>& g) {
        return lstm_backward(m, seqs[i], labels[i], g);
      });
}

// Max over all parameters of the relative disagreement between the analytic
// gradient and a central finite difference.
template <typename Model, typename LossFn>
double gradient_check_impl(Model model, LossFn&& loss_and_grad, double eps) {
  std::vector<double> grad(model.param_count(), 0.0);
  loss_and_grad(model, grad);
  double worst = 0.0;
  std::vector<double> dummy(model.param_count());
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    double saved = model.params[p];
    model.params[p] = saved + eps;
    std::fill(dummy.begin(), dummy.end(), 0.0);
    double up = loss_and_grad(model, dummy);
    model.params[p] = saved - eps;
    std::fill(dummy.begin(), dummy.end(), 0.0);
    double down = loss_and_grad(model, dummy);
    model.params[p] = saved;
    double fd = (up - down) / (2.0 * eps);
    double denom = std::max({std::abs(grad[p]), std::abs(fd), 1e-12});
    worst = std::max(worst, std::abs(grad[p] - fd) / denom);
  }
  return worst;
}

inline double gradient_check(const MlpModel& model,
                             const std::vector<double>& input, int label,
                             double eps = 1e-5) {
  return gradient_check_impl(
      model,
      [&](const MlpModel& m, std::vector<double>& g) {
        return mlp_backward(m, input, label, g);
      },
      eps);
}

inline double gradient_check(const LstmModel& model,
                             const std::vector<std::vector<double>>& frames,
                             int label, double eps = 1e-5) {
  return gradient_check_impl(
      model,
      [&](const LstmModel& m, std::vector<double>& g) {
        return lstm_backward(m, frames, label, g);
      },
      eps);
}

}  // namespace giraf
