#include <algorithm>
#include <cmath>
#include <string>

#include "tailrisk/nn.hpp"

namespace tailrisk::nn {

namespace {

constexpr std::size_t kMlpWidths[] = {kFeatures, 16, 4, 2, kClasses};
constexpr std::size_t kHidden1 = 16, kHidden2 = 4, kDense = 2;

struct Dense {
  std::size_t in, out, w, b;
};

struct Recurrent {
  std::size_t in, hidden, w, u, b;
};

struct MlpLayout {
  Dense layer[4];
  std::size_t size;
};

struct LstmLayout {
  Recurrent first, second;
  Dense dense, output;
  std::size_t size;
};

constexpr Dense dense_at(std::size_t& offset, std::size_t in, std::size_t out) {
  Dense d{in, out, offset, offset + in * out};
  offset += in * out + out;
  return d;
}

constexpr Recurrent recurrent_at(std::size_t& offset, std::size_t in, std::size_t hidden) {
  Recurrent r{in, hidden, offset, offset + 4 * hidden * in, offset + 4 * hidden * (in + hidden)};
  offset += 4 * hidden * (in + hidden + 1);
  return r;
}

constexpr MlpLayout make_mlp() {
  MlpLayout l{};
  std::size_t off = 0;
  for (std::size_t k = 0; k < 4; ++k) l.layer[k] = dense_at(off, kMlpWidths[k], kMlpWidths[k + 1]);
  l.size = off;
  return l;
}

constexpr LstmLayout make_lstm() {
  LstmLayout l{};
  std::size_t off = 0;
  l.first = recurrent_at(off, kFeatures, kHidden1);
  l.second = recurrent_at(off, kHidden1, kHidden2);
  l.dense = dense_at(off, kHidden2, kDense);
  l.output = dense_at(off, kDense, kClasses);
  l.size = off;
  return l;
}

constexpr MlpLayout kMlp = make_mlp();
constexpr LstmLayout kLstm = make_lstm();

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void affine(const double* p, const Dense& d, const double* x, double* y) {
  for (std::size_t o = 0; o < d.out; ++o) {
    const double* w = p + d.w + o * d.in;
    double acc = p[d.b + o];
    for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

// Accumulates parameter gradients; dx (zeroed by the caller) may be null.
void affine_back(const double* p, const Dense& d, const double* x, const double* dy, double* g, double* dx) {
  for (std::size_t o = 0; o < d.out; ++o) {
    g[d.b + o] += dy[o];
    double* gw = g + d.w + o * d.in;
    for (std::size_t i = 0; i < d.in; ++i) gw[i] += dy[o] * x[i];
    if (dx) {
      const double* w = p + d.w + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) dx[i] += w[i] * dy[o];
    }
  }
}

// Returns log-sum-exp and fills probabilities.
double softmax(const double* logits, Probabilities& prob) {
  const double m = *std::max_element(logits, logits + kClasses);
  double sum = 0.0;
  for (std::size_t k = 0; k < kClasses; ++k) {
    prob[k] = std::exp(logits[k] - m);
    sum += prob[k];
  }
  for (double& v : prob) v /= sum;
  return m + std::log(sum);
}

// Per-step activations: gates [i f g o] (4H), cell c (H), output h (H).
struct RecurrentTrace {
  std::size_t steps = 0, hidden = 0;
  std::vector<double> gates, cell, out;

  void reset(std::size_t t, std::size_t h) {
    steps = t;
    hidden = h;
    gates.assign(t * 4 * h, 0.0);
    cell.assign(t * h, 0.0);
    out.assign(t * h, 0.0);
  }
};

void recurrent_forward(const double* p, const Recurrent& r, const double* xs, std::size_t steps,
                       RecurrentTrace& tr) {
  const std::size_t H = r.hidden, I = r.in;
  tr.reset(steps, H);
  std::vector<double> z(4 * H);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* x = xs + t * I;
    const double* h_prev = t > 0 ? &tr.out[(t - 1) * H] : nullptr;
    const double* c_prev = t > 0 ? &tr.cell[(t - 1) * H] : nullptr;
    for (std::size_t row = 0; row < 4 * H; ++row) {
      double acc = p[r.b + row];
      const double* w = p + r.w + row * I;
      for (std::size_t i = 0; i < I; ++i) acc += w[i] * x[i];
      if (h_prev) {
        const double* u = p + r.u + row * H;
        for (std::size_t j = 0; j < H; ++j) acc += u[j] * h_prev[j];
      }
      z[row] = acc;
    }
    double* gate = &tr.gates[t * 4 * H];
    double* c = &tr.cell[t * H];
    double* h = &tr.out[t * H];
    for (std::size_t j = 0; j < H; ++j) {
      gate[j] = sigmoid(z[j]);
      gate[H + j] = sigmoid(z[H + j]);
      gate[2 * H + j] = std::tanh(z[2 * H + j]);
      gate[3 * H + j] = sigmoid(z[3 * H + j]);
      c[j] = gate[H + j] * (c_prev ? c_prev[j] : 0.0) + gate[j] * gate[2 * H + j];
      h[j] = gate[3 * H + j] * std::tanh(c[j]);
    }
  }
}

// dh_ext: gradient w.r.t. each step's output (steps x H). dxs (zeroed) may be null.
void recurrent_backward(const double* p, const Recurrent& r, const double* xs, const RecurrentTrace& tr,
                        const double* dh_ext, double* g, double* dxs) {
  const std::size_t H = r.hidden, I = r.in;
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H);
  for (std::size_t t = tr.steps; t-- > 0;) {
    const double* gate = &tr.gates[t * 4 * H];
    const double* c = &tr.cell[t * H];
    const double* c_prev = t > 0 ? &tr.cell[(t - 1) * H] : nullptr;
    const double* h_prev = t > 0 ? &tr.out[(t - 1) * H] : nullptr;
    for (std::size_t j = 0; j < H; ++j) {
      const double dh = dh_ext[t * H + j] + dh_next[j];
      const double i = gate[j], f = gate[H + j], cand = gate[2 * H + j], o = gate[3 * H + j];
      const double tc = std::tanh(c[j]);
      const double dc = dc_next[j] + dh * o * (1.0 - tc * tc);
      dz[j] = dc * cand * i * (1.0 - i);
      dz[H + j] = dc * (c_prev ? c_prev[j] : 0.0) * f * (1.0 - f);
      dz[2 * H + j] = dc * i * (1.0 - cand * cand);
      dz[3 * H + j] = dh * tc * o * (1.0 - o);
      dc_next[j] = dc * f;
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    const double* x = xs + t * I;
    double* dx = dxs ? dxs + t * I : nullptr;
    for (std::size_t row = 0; row < 4 * H; ++row) {
      const double d = dz[row];
      g[r.b + row] += d;
      double* gw = g + r.w + row * I;
      const double* w = p + r.w + row * I;
      for (std::size_t k = 0; k < I; ++k) {
        gw[k] += d * x[k];
        if (dx) dx[k] += w[k] * d;
      }
      if (h_prev) {
        double* gu = g + r.u + row * H;
        const double* u = p + r.u + row * H;
        for (std::size_t j = 0; j < H; ++j) {
          gu[j] += d * h_prev[j];
          dh_next[j] += u[j] * d;
        }
      }
    }
  }
}

double mask_at(std::span<const double> mask, std::size_t i) { return mask.empty() ? 1.0 : mask[i]; }

double mlp_loss(const double* p, std::span<const double> x, int label, std::span<const double> mask, double* g,
                Probabilities* out) {
  const auto& L = kMlp.layer;
  double a1[kHidden1], h1[kHidden1], a2[kHidden2], h2[kHidden2], h3[kDense], logits[kClasses];
  affine(p, L[0], x.data(), a1);
  for (std::size_t j = 0; j < kHidden1; ++j) {
    a1[j] = std::tanh(a1[j]);
    h1[j] = a1[j] * mask_at(mask, j);
  }
  affine(p, L[1], h1, a2);
  for (std::size_t j = 0; j < kHidden2; ++j) {
    a2[j] = std::tanh(a2[j]);
    h2[j] = a2[j] * mask_at(mask, kHidden1 + j);
  }
  affine(p, L[2], h2, h3);
  for (double& v : h3) v = std::tanh(v);
  affine(p, L[3], h3, logits);
  Probabilities prob;
  const double lse = softmax(logits, prob);
  if (out) *out = prob;
  if (label < 0) return 0.0;
  const double loss = lse - logits[label];
  if (!g) return loss;

  double d_logits[kClasses], dh3[kDense] = {}, dh2[kHidden2] = {}, dh1[kHidden1] = {};
  for (std::size_t k = 0; k < kClasses; ++k) d_logits[k] = prob[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
  affine_back(p, L[3], h3, d_logits, g, dh3);
  for (std::size_t j = 0; j < kDense; ++j) dh3[j] *= 1.0 - h3[j] * h3[j];
  affine_back(p, L[2], h2, dh3, g, dh2);
  for (std::size_t j = 0; j < kHidden2; ++j) dh2[j] *= mask_at(mask, kHidden1 + j) * (1.0 - a2[j] * a2[j]);
  affine_back(p, L[1], h1, dh2, g, dh1);
  for (std::size_t j = 0; j < kHidden1; ++j) dh1[j] *= mask_at(mask, j) * (1.0 - a1[j] * a1[j]);
  affine_back(p, L[0], x.data(), dh1, g, nullptr);
  return loss;
}

double lstm_loss(const double* p, std::span<const double> x, int label, std::span<const double> mask, double* g,
                 Probabilities* out) {
  const std::size_t T = kSequence;
  RecurrentTrace first, second;
  recurrent_forward(p, kLstm.first, x.data(), T, first);
  std::vector<double> h1(first.out);
  for (std::size_t i = 0; i < h1.size(); ++i) h1[i] *= mask_at(mask, i);
  recurrent_forward(p, kLstm.second, h1.data(), T, second);
  const std::size_t m2 = T * kHidden1;
  double h2[kHidden2], a[kDense], logits[kClasses];
  for (std::size_t j = 0; j < kHidden2; ++j) h2[j] = second.out[(T - 1) * kHidden2 + j] * mask_at(mask, m2 + j);
  affine(p, kLstm.dense, h2, a);
  for (double& v : a) v = std::tanh(v);
  affine(p, kLstm.output, a, logits);
  Probabilities prob;
  const double lse = softmax(logits, prob);
  if (out) *out = prob;
  if (label < 0) return 0.0;
  const double loss = lse - logits[label];
  if (!g) return loss;

  double d_logits[kClasses], da[kDense] = {}, dh2[kHidden2] = {};
  for (std::size_t k = 0; k < kClasses; ++k) d_logits[k] = prob[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
  affine_back(p, kLstm.output, a, d_logits, g, da);
  for (std::size_t j = 0; j < kDense; ++j) da[j] *= 1.0 - a[j] * a[j];
  affine_back(p, kLstm.dense, h2, da, g, dh2);
  std::vector<double> dh_second(T * kHidden2, 0.0), dh_first(T * kHidden1, 0.0);
  for (std::size_t j = 0; j < kHidden2; ++j) dh_second[(T - 1) * kHidden2 + j] = dh2[j] * mask_at(mask, m2 + j);
  recurrent_backward(p, kLstm.second, h1.data(), second, dh_second.data(), g, dh_first.data());
  for (std::size_t i = 0; i < dh_first.size(); ++i) dh_first[i] *= mask_at(mask, i);
  recurrent_backward(p, kLstm.first, x.data(), first, dh_first.data(), g, nullptr);
  return loss;
}

}  // namespace

Network::Network(Arch arch, double dropout)
    : arch_(arch), dropout_(dropout), weights_(arch == Arch::Mlp ? kMlp.size : kLstm.size, 0.0) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

Network Network::initialised(Arch arch, std::uint64_t seed, double dropout) {
  Network net(arch, dropout);
  std::mt19937_64 rng(seed);
  double* p = net.weights_.data();
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) p[offset + i] = u(rng);
  };
  if (arch == Arch::Mlp) {
    for (const Dense& d : kMlp.layer) fill(d.w, d.in * d.out, d.in);
  } else {
    for (const Recurrent* r : {&kLstm.first, &kLstm.second}) {
      fill(r->w, 4 * r->hidden * r->in, r->in);
      fill(r->u, 4 * r->hidden * r->hidden, r->hidden);
      std::fill_n(p + r->b + r->hidden, r->hidden, 1.0);
    }
    for (const Dense* d : {&kLstm.dense, &kLstm.output}) fill(d->w, d->in * d->out, d->in);
  }
  return net;
}

std::size_t Network::input_width() const noexcept { return arch_ == Arch::Mlp ? kFeatures : kFeatures * kSequence; }

std::size_t Network::mask_width() const noexcept {
  return arch_ == Arch::Mlp ? kHidden1 + kHidden2 : kSequence * kHidden1 + kHidden2;
}

void Network::check_input(std::span<const double> x) const {
  if (x.size() != input_width())
    throw DataError("network input has " + std::to_string(x.size()) + " values, expected " +
                    std::to_string(input_width()));
}

Probabilities Network::forward(std::span<const double> x) const {
  check_input(x);
  Probabilities prob;
  if (arch_ == Arch::Mlp)
    mlp_loss(weights_.data(), x, -1, {}, nullptr, &prob);
  else
    lstm_loss(weights_.data(), x, -1, {}, nullptr, &prob);
  return prob;
}

Probabilities Network::forward(std::span<const double> x, Mode mode, std::mt19937_64& dropout_rng) const {
  if (mode == Mode::Eval) return forward(x);
  check_input(x);
  const std::vector<double> mask = draw_mask(dropout_rng);
  Probabilities prob;
  if (arch_ == Arch::Mlp)
    mlp_loss(weights_.data(), x, -1, mask, nullptr, &prob);
  else
    lstm_loss(weights_.data(), x, -1, mask, nullptr, &prob);
  return prob;
}

std::vector<double> Network::draw_mask(std::mt19937_64& rng) const {
  std::vector<double> mask(mask_width());
  const double keep = 1.0 - dropout_;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& m : mask) m = u(rng) < keep ? 1.0 / keep : 0.0;
  return mask;
}

double Network::sample_loss(std::span<const double> x, int label, std::span<const double> mask,
                            std::span<double> grad) const {
  check_input(x);
  if (label < 0 || label >= static_cast<int>(kClasses)) throw DataError("label outside {0, 1, 2}");
  if (!mask.empty() && mask.size() != mask_width()) throw DataError("dropout mask has the wrong width");
  if (!grad.empty() && grad.size() != weights_.size()) throw DataError("gradient buffer has the wrong size");
  double* g = grad.empty() ? nullptr : grad.data();
  return arch_ == Arch::Mlp ? mlp_loss(weights_.data(), x, label, mask, g, nullptr)
                            : lstm_loss(weights_.data(), x, label, mask, g, nullptr);
}

}  // namespace tailrisk::nn
