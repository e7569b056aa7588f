#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infobound/data.hpp"
#include "infobound/errors.hpp"
#include "infobound/model.hpp"
#include "infobound/rng.hpp"

namespace infobound {

struct LDSchedule {
  std::vector<double> eta;
  std::vector<double> beta;

  static LDSchedule constant(std::size_t T, double eta, double beta) {
    LDSchedule s;
    s.eta.assign(T, eta);
    s.beta.assign(T, beta);
    s.validate();
    return s;
  }

  // Geometric per-step factors; factor 1 keeps the value constant.
  static LDSchedule decayed(std::size_t T, double eta0, double eta_factor,
                            double beta0, double beta_factor) {
    LDSchedule s;
    s.eta.resize(T);
    s.beta.resize(T);
    double e = eta0, b = beta0;
    for (std::size_t t = 0; t < T; ++t) {
      s.eta[t] = e;
      s.beta[t] = b;
      e *= eta_factor;
      b *= beta_factor;
    }
    s.validate();
    return s;
  }

  std::size_t horizon() const noexcept { return eta.size(); }

  void validate() const {
    if (eta.size() != beta.size())
      throw validation_error("LDSchedule: eta/beta length mismatch");
    for (double e : eta)
      if (!(e > 0.0) || !std::isfinite(e))
        throw validation_error("LDSchedule: eta must be positive and finite");
    for (double b : beta)
      if (!(b > 0.0) || !std::isfinite(b))
        throw validation_error("LDSchedule: beta must be positive and finite");
  }
};

// The k=2 supersample with its membership indices and held-out column.
struct SuperSamplePair {
  std::array<std::vector<DataPoint>, 2> rows;  // rows[r][c], r in {0,1}
  std::vector<int> u;                          // entries in {1,2}
  std::size_t j = 0;                           // held-out column, 0-based

  std::size_t n() const noexcept { return u.size(); }

  const DataPoint& candidate(int u_value) const {
    if (u_value != 1 && u_value != 2)
      throw validation_error("SuperSamplePair: u value must be 1 or 2");
    return rows[static_cast<std::size_t>(u_value - 1)][j];
  }

  // Training set with column j's point taken from row u_j_value and every
  // other column c from row u[c].
  std::vector<DataPoint> training_set(int u_j_value) const {
    std::vector<DataPoint> s;
    s.reserve(n());
    for (std::size_t c = 0; c < n(); ++c) {
      const int r = (c == j) ? u_j_value : u[c];
      s.push_back(rows[static_cast<std::size_t>(r - 1)][c]);
    }
    return s;
  }
};

// 2 x n IID draw with U uniform on {1,2}^n and J uniform on [n], mutually
// independent sub-streams of the given seed.
inline SuperSamplePair sample_supersample(const DataSource& source, std::size_t n,
                                          std::uint64_t seed) {
  if (n < 1) throw validation_error("sample_supersample: n must be >= 1");
  SuperSamplePair ss;
  auto points = source.sample(2 * n, derive_seed(seed, stream::kData));
  ss.rows[0].assign(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(n));
  ss.rows[1].assign(points.begin() + static_cast<std::ptrdiff_t>(n), points.end());
  SplitMix64 idx_rng(derive_seed(seed, stream::kIndices));
  ss.u.resize(n);
  for (auto& ui : ss.u) ui = 1 + static_cast<int>(idx_rng.next_below(2));
  ss.j = idx_rng.next_below(n);
  return ss;
}

// One LD update: w - eta * grad(L~_S)(w) + sqrt(2 eta / beta) * noise.
inline ParameterVector ld_step(const Model& model, std::span<const double> w,
                               std::span<const DataPoint> training_set, double eta,
                               double beta, std::span<const double> noise) {
  if (!(eta > 0.0) || !(beta > 0.0))
    throw validation_error("ld_step: eta and beta must be positive");
  if (noise.size() != model.param_count())
    throw validation_error("ld_step: noise dimension mismatch");
  if (training_set.empty()) throw validation_error("ld_step: empty training set");
  ParameterVector grad(model.param_count(), 0.0);
  ParameterVector g(model.param_count());
  for (const DataPoint& z : training_set) {
    model.surrogate_loss_grad(w, z, g);
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
  }
  const double inv_n = 1.0 / static_cast<double>(training_set.size());
  const double scale = std::sqrt(2.0 * eta / beta);
  ParameterVector next(w.begin(), w.end());
  for (std::size_t i = 0; i < next.size(); ++i)
    next[i] += -eta * grad[i] * inv_n + scale * noise[i];
  return next;
}

// Per-step view handed to observers during a run. Gradients are evaluated at
// w_prev; loo_grad is the mean gradient over the n-1 shared points.
struct LDStepView {
  std::size_t t = 0;
  double eta = 0.0;
  double beta = 0.0;
  std::span<const double> w_prev;
  std::span<const double> w_next;
  std::span<const double> noise;
  std::span<const double> loo_grad;
  std::span<const double> cand_grad_1;
  std::span<const double> cand_grad_2;
  double surrogate_risk = 0.0;        // empirical surrogate risk at w_prev
  double max_point_grad_norm = 0.0;   // over the n-1 shared points and both candidates
};

struct LDRunOptions {
  bool keep_params = true;
  bool keep_noise = true;
  bool keep_grads = true;
};

struct Trajectory {
  std::vector<ParameterVector> params;        // W_0..W_T when kept
  std::vector<ParameterVector> noise;         // length T when kept
  std::vector<ParameterVector> loo_grads;     // at W_t, length T when kept
  std::vector<ParameterVector> cand_grads_1;
  std::vector<ParameterVector> cand_grads_2;
  LDSchedule schedule;
  std::uint64_t noise_seed = 0;
};

using LDObserver = std::function<void(const LDStepView&)>;

// Full-batch LD on the training set S_{u_j_value}, recording the gradient
// aggregates the hypothesis-testing prior needs. Noise for step t comes from
// an independent stream derived from (noise_seed, t), so single steps can be
// replayed. W_0 is caller-supplied so both index branches can share it.
inline Trajectory run_ld(const Model& model, const SuperSamplePair& ss, int u_j_value,
                         const LDSchedule& schedule, std::uint64_t noise_seed,
                         ParameterVector w0, const LDRunOptions& options = {},
                         const LDObserver& observer = nullptr) {
  schedule.validate();
  if (u_j_value != 1 && u_j_value != 2)
    throw validation_error("run_ld: u_j_value must be 1 or 2");
  if (w0.size() != model.param_count())
    throw validation_error("run_ld: w0 dimension mismatch");
  const std::size_t n = ss.n();
  const std::size_t d = model.param_count();
  const std::size_t T = schedule.horizon();

  const std::vector<DataPoint> shared = [&] {
    std::vector<DataPoint> pts;
    pts.reserve(n - 1);
    for (std::size_t c = 0; c < n; ++c)
      if (c != ss.j) pts.push_back(ss.rows[static_cast<std::size_t>(ss.u[c] - 1)][c]);
    return pts;
  }();
  const DataPoint& cand1 = ss.rows[0][ss.j];
  const DataPoint& cand2 = ss.rows[1][ss.j];

  Trajectory traj;
  traj.schedule = schedule;
  traj.noise_seed = noise_seed;
  if (options.keep_params) traj.params.reserve(T + 1);

  ParameterVector w = std::move(w0);
  if (options.keep_params) traj.params.push_back(w);

  ParameterVector loo(d), g1(d), g2(d), g(d), eps(d), w_next(d);
  for (std::size_t t = 0; t < T; ++t) {
    const double eta = schedule.eta[t];
    const double beta = schedule.beta[t];

    double surr = 0.0;
    double max_norm_sq = 0.0;
    std::fill(loo.begin(), loo.end(), 0.0);
    for (const DataPoint& z : shared) {
      surr += model.surrogate_loss_grad(w, z, g);
      double nsq = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        loo[i] += g[i];
        nsq += g[i] * g[i];
      }
      max_norm_sq = std::max(max_norm_sq, nsq);
    }
    if (n > 1)
      for (double& v : loo) v /= static_cast<double>(n - 1);

    double nsq1 = 0.0, nsq2 = 0.0;
    const double l1 = model.surrogate_loss_grad(w, cand1, g1);
    const double l2 = model.surrogate_loss_grad(w, cand2, g2);
    for (std::size_t i = 0; i < d; ++i) {
      nsq1 += g1[i] * g1[i];
      nsq2 += g2[i] * g2[i];
    }
    max_norm_sq = std::max({max_norm_sq, nsq1, nsq2});
    surr += (u_j_value == 1) ? l1 : l2;
    surr /= static_cast<double>(n);

    const ParameterVector& gown_ref = (u_j_value == 1) ? g1 : g2;
    // full-batch gradient of S_u: ((n-1) * loo + g_own) / n
    const double inv_n = 1.0 / static_cast<double>(n);
    const double scale = std::sqrt(2.0 * eta / beta);
    SplitMix64 noise_rng(derive_seed(noise_seed, stream::kNoise, t));
    noise_rng.fill_gaussian(eps);
    for (std::size_t i = 0; i < d; ++i) {
      const double gradi =
          (static_cast<double>(n - 1) * loo[i] + gown_ref[i]) * inv_n;
      w_next[i] = w[i] - eta * gradi + scale * eps[i];
    }

    if (observer) {
      LDStepView view;
      view.t = t;
      view.eta = eta;
      view.beta = beta;
      view.w_prev = w;
      view.w_next = w_next;
      view.noise = eps;
      view.loo_grad = loo;
      view.cand_grad_1 = g1;
      view.cand_grad_2 = g2;
      view.surrogate_risk = surr;
      view.max_point_grad_norm = std::sqrt(max_norm_sq);
      observer(view);
    }
    if (options.keep_noise) traj.noise.push_back(eps);
    if (options.keep_grads) {
      traj.loo_grads.push_back(loo);
      traj.cand_grads_1.push_back(g1);
      traj.cand_grads_2.push_back(g2);
    }
    w.swap(w_next);
    if (options.keep_params) traj.params.push_back(w);
  }
  return traj;
}

// Spec-shaped convenience overload: W_0 and the noise stream both derive from
// one seed (init stream shared across branches by construction when callers
// reuse the seed).
inline Trajectory run_ld(const Model& model, const SuperSamplePair& ss, int u_j_value,
                         const LDSchedule& schedule, std::uint64_t seed) {
  return run_ld(model, ss, u_j_value, schedule, derive_seed(seed, stream::kNoise),
                model.initial_params(derive_seed(seed, stream::kInit)));
}

// Per-iterate summary of a recorded trajectory:
// t, surrogate risk, train/test 0-1 risk, full-batch gradient norm (all at W_t).
inline std::string trajectory_summary_csv(const Model& model, const Trajectory& traj,
                                          std::span<const DataPoint> train,
                                          std::span<const DataPoint> test) {
  if (traj.params.empty())
    throw validation_error("trajectory_summary_csv: trajectory has no recorded params");
  std::string out = "t,surrogate_risk,train01,test01,grad_norm\n";
  ParameterVector grad(model.param_count()), g(model.param_count());
  char buf[160];
  for (std::size_t t = 0; t < traj.params.size(); ++t) {
    const auto& w = traj.params[t];
    double surr = 0.0, tr01 = 0.0, te01 = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const DataPoint& z : train) {
      surr += model.surrogate_loss_grad(w, z, g);
      for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
      tr01 += model.true_loss(w, z);
    }
    for (const DataPoint& z : test) te01 += model.true_loss(w, z);
    double norm = 0.0;
    for (double v : grad) norm += v * v;
    norm = std::sqrt(norm) / static_cast<double>(train.size());
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g\n", t,
                  surr / static_cast<double>(train.size()),
                  tr01 / static_cast<double>(train.size()),
                  test.empty() ? 0.0 : te01 / static_cast<double>(test.size()), norm);
    out += buf;
  }
  return out;
}

// Raw parameter dump: "IBTRAJ01", count, dim, then row-major doubles.
inline void dump_trajectory_binary(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.write("IBTRAJ01", 8);
  const std::uint64_t count = traj.params.size();
  const std::uint64_t dim = count ? traj.params.front().size() : 0;
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  for (const auto& w : traj.params)
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(w.size() * sizeof(double)));
  if (!out) throw io_error("failed writing " + path);
}

}  // namespace infobound
