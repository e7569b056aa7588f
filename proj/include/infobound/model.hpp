#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infobound/errors.hpp"
#include "infobound/rng.hpp"

namespace infobound {

using ParameterVector = std::vector<double>;

struct DataPoint {
  std::vector<double> features;
  int label = 0;
};

// Small differentiable classifiers: multinomial logistic regression, or an
// MLP with tanh hidden layers. The surrogate loss is softmax cross-entropy;
// the bounded loss is 0-1 with ties broken toward the lowest class index.
class Model {
 public:
  enum class Kind { kLogisticRegression, kMlp };

  static Model logistic_regression(std::size_t features, std::size_t classes) {
    return Model(Kind::kLogisticRegression, {features, classes});
  }

  // layer_sizes includes input and output, e.g. {2, 16, 2}.
  static Model mlp(std::vector<std::size_t> layer_sizes) {
    if (layer_sizes.size() < 2) throw validation_error("Model: mlp needs >= 2 layers");
    return Model(Kind::kMlp, std::move(layer_sizes));
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t feature_dim() const noexcept { return sizes_.front(); }
  std::size_t num_classes() const noexcept { return sizes_.back(); }
  std::size_t param_count() const noexcept { return param_count_; }

  void logits(std::span<const double> w, std::span<const double> x,
              std::span<double> out) const {
    check_dims(w, x);
    if (out.size() != num_classes())
      throw validation_error("Model: logits buffer size mismatch");
    thread_local std::vector<double> buf_a, buf_b;
    forward(w, x, out, buf_a, buf_b);
  }

  double surrogate_loss(std::span<const double> w, const DataPoint& z) const {
    check_dims(w, z.features);
    check_label(z.label);
    thread_local std::vector<double> logit_buf, buf_a, buf_b;
    logit_buf.resize(num_classes());
    forward(w, z.features, logit_buf, buf_a, buf_b);
    return cross_entropy(logit_buf, static_cast<std::size_t>(z.label));
  }

  // Analytic gradient; also returns the loss value (the forward pass is free).
  double surrogate_loss_grad(std::span<const double> w, const DataPoint& z,
                             std::span<double> grad) const {
    check_dims(w, z.features);
    check_label(z.label);
    if (grad.size() != param_count_)
      throw validation_error("Model: gradient buffer size mismatch");
    thread_local std::vector<double> logit_buf, acts, deltas;
    logit_buf.resize(num_classes());
    forward(w, z.features, logit_buf, acts, deltas);
    return backward(w, z, logit_buf, acts, grad);
  }

  double true_loss(std::span<const double> w, const DataPoint& z) const {
    check_dims(w, z.features);
    check_label(z.label);
    thread_local std::vector<double> logit_buf, buf_a, buf_b;
    logit_buf.resize(num_classes());
    forward(w, z.features, logit_buf, buf_a, buf_b);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < logit_buf.size(); ++c)
      if (logit_buf[c] > logit_buf[arg]) arg = c;  // ties keep the lowest index
    return arg == static_cast<std::size_t>(z.label) ? 0.0 : 1.0;
  }

  // W_0 convention: zeros for logistic regression; uniform(-1/sqrt(fan_in),
  // +1/sqrt(fan_in)) weights with zero biases for MLPs.
  ParameterVector initial_params(std::uint64_t seed) const {
    ParameterVector w(param_count_, 0.0);
    if (kind_ == Kind::kLogisticRegression) return w;
    SplitMix64 rng(seed);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double scale = 1.0 / std::sqrt(static_cast<double>(in));
      for (std::size_t i = 0; i < out * in; ++i)
        w[off + i] = (2.0 * rng.next_double() - 1.0) * scale;
      off += out * in + out;  // biases stay zero
    }
    return w;
  }

 private:
  Model(Kind kind, std::vector<std::size_t> sizes)
      : kind_(kind), sizes_(std::move(sizes)) {
    for (std::size_t s : sizes_)
      if (s == 0) throw validation_error("Model: zero layer size");
    param_count_ = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
      param_count_ += sizes_[l + 1] * (sizes_[l] + 1);
  }

  void check_dims(std::span<const double> w, std::span<const double> x) const {
    if (w.size() != param_count_)
      throw validation_error("Model: parameter vector has wrong dimension");
    if (x.size() != feature_dim())
      throw validation_error("Model: feature vector has wrong dimension");
  }

  void check_label(int label) const {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes())
      throw validation_error("Model: label out of range");
  }

  // Forward pass; acts records post-activation values per hidden layer
  // (needed for backprop), cur holds the running activation.
  void forward(std::span<const double> w, std::span<const double> x,
               std::span<double> out, std::vector<double>& acts,
               std::vector<double>& cur) const {
    const std::size_t layers = sizes_.size() - 1;
    acts.clear();
    cur.assign(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = sizes_[l], outn = sizes_[l + 1];
      const bool last = (l + 1 == layers);
      thread_local std::vector<double> next;
      next.resize(outn);
      for (std::size_t o = 0; o < outn; ++o) {
        double s = w[off + outn * in + o];  // bias
        const double* row = &w[off + o * in];
        for (std::size_t i = 0; i < in; ++i) s += row[i] * cur[i];
        next[o] = last ? s : std::tanh(s);
      }
      off += outn * (in + 1);
      if (last) {
        std::copy(next.begin(), next.end(), out.begin());
      } else {
        cur.assign(next.begin(), next.end());
        acts.insert(acts.end(), next.begin(), next.end());
      }
    }
  }

  double cross_entropy(std::span<const double> logit, std::size_t label) const {
    double m = logit[0];
    for (double v : logit) m = std::max(m, v);
    double lse = 0.0;
    for (double v : logit) lse += std::exp(v - m);
    lse = m + std::log(lse);
    return lse - logit[label];
  }

  double backward(std::span<const double> w, const DataPoint& z,
                  std::span<const double> logit, const std::vector<double>& acts,
                  std::span<double> grad) const {
    const std::size_t layers = sizes_.size() - 1;
    const std::size_t label = static_cast<std::size_t>(z.label);

    double m = logit[0];
    for (double v : logit) m = std::max(m, v);
    double lse = 0.0;
    for (double v : logit) lse += std::exp(v - m);
    lse = m + std::log(lse);

    thread_local std::vector<double> delta, prev_delta;
    delta.resize(num_classes());
    for (std::size_t c = 0; c < num_classes(); ++c)
      delta[c] = std::exp(logit[c] - lse) - (c == label ? 1.0 : 0.0);

    // offsets of each layer's parameter block and of its input activations
    thread_local std::vector<std::size_t> offs, act_offs;
    offs.assign(layers, 0);
    act_offs.assign(layers, 0);
    std::size_t off = 0, act_off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offs[l] = off;
      off += sizes_[l + 1] * (sizes_[l] + 1);
      act_offs[l] = act_off;
      if (l + 1 < layers) act_off += sizes_[l + 1];
    }

    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = sizes_[l], outn = sizes_[l + 1];
      const double* input =
          (l == 0) ? z.features.data() : &acts[act_offs[l - 1] + 0];
      double* gw = &grad[offs[l]];
      for (std::size_t o = 0; o < outn; ++o) {
        const double d = delta[o];
        double* row = &gw[o * in];
        for (std::size_t i = 0; i < in; ++i) row[i] = d * input[i];
        gw[outn * in + o] = d;
      }
      if (l == 0) break;
      // delta for the previous layer: (W^T delta) * (1 - act^2)
      prev_delta.assign(in, 0.0);
      const double* wl = &w[offs[l]];
      for (std::size_t o = 0; o < outn; ++o) {
        const double d = delta[o];
        const double* row = &wl[o * in];
        for (std::size_t i = 0; i < in; ++i) prev_delta[i] += row[i] * d;
      }
      const double* a = &acts[act_offs[l - 1]];
      for (std::size_t i = 0; i < in; ++i) prev_delta[i] *= (1.0 - a[i] * a[i]);
      delta.assign(prev_delta.begin(), prev_delta.end());
    }
    return lse - logit[label];
  }

  Kind kind_;
  std::vector<std::size_t> sizes_;
  std::size_t param_count_ = 0;
};

// Mean surrogate and 0-1 risks over a sample.
inline std::pair<double, double> empirical_risks(const Model& model,
                                                 std::span<const double> w,
                                                 std::span<const DataPoint> sample) {
  if (sample.empty()) throw validation_error("empirical_risks: empty sample");
  double surr = 0.0, zo = 0.0;
  for (const DataPoint& z : sample) {
    surr += model.surrogate_loss(w, z);
    zo += model.true_loss(w, z);
  }
  const double inv = 1.0 / static_cast<double>(sample.size());
  return {surr * inv, zo * inv};
}

}  // namespace infobound
