#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infobound/decision.hpp"
#include "infobound/errors.hpp"
#include "infobound/model.hpp"

// The hypothesis-testing prior: running test statistics Y_{t,1}, Y_{t,2},
// belief vectors, per-step Gaussian KL increments, and their accumulation
// into the trajectory bound.

namespace infobound {

struct HypothesisTestState {
  double y1 = 0.0;
  double y2 = 0.0;
  std::size_t t = 0;

  double delta() const noexcept { return y2 - y1; }
};

// Adds one step's squared-residual increments to both statistics. The
// residual for candidate u is
//   w_next - w_prev + eta*((n-1)/n)*loo_grad + (eta/n)*cand_grad_u,
// weighted by beta/(4 eta).
inline HypothesisTestState update_y(HypothesisTestState state,
                                    std::span<const double> w_prev,
                                    std::span<const double> w_next, double eta,
                                    double beta, std::span<const double> loo_grad,
                                    std::span<const double> cand_grad_1,
                                    std::span<const double> cand_grad_2,
                                    std::size_t n) {
  if (!(eta > 0.0) || !(beta > 0.0))
    throw validation_error("update_y: eta and beta must be positive");
  if (n < 1) throw validation_error("update_y: n must be >= 1");
  const std::size_t d = w_prev.size();
  if (w_next.size() != d || loo_grad.size() != d || cand_grad_1.size() != d ||
      cand_grad_2.size() != d)
    throw validation_error("update_y: dimension mismatch");
  const double loo_coeff = eta * static_cast<double>(n - 1) / static_cast<double>(n);
  const double cand_coeff = eta / static_cast<double>(n);
  double r1 = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double base = w_next[i] - w_prev[i] + loo_coeff * loo_grad[i];
    const double a = base + cand_coeff * cand_grad_1[i];
    const double b = base + cand_coeff * cand_grad_2[i];
    r1 += a * a;
    r2 += b * b;
  }
  const double weight = beta / (4.0 * eta);
  state.y1 += weight * r1;
  state.y2 += weight * r2;
  state.t += 1;
  return state;
}

struct BeliefVector {
  double pi1 = 0.5;
  double pi2 = 0.5;
};

// pi_1 = theta(Y_2 - Y_1); large positive Delta-Y favors hypothesis U_J = 1.
inline BeliefVector belief(const DecisionFunction& theta,
                           const HypothesisTestState& state) {
  const double p = theta(state.delta());
  return {p, 1.0 - p};
}

// Exact per-step KL between the posterior and prior step laws: both are
// Gaussians with covariance (2 eta / beta) I whose means differ by
// (eta/n) (indicator - theta) zeta.
inline double step_kl(double eta, double beta, std::size_t n, double zeta_sq,
                      int indicator, double theta_val) {
  if (!(eta > 0.0) || !(beta > 0.0))
    throw validation_error("step_kl: eta and beta must be positive");
  if (n < 1) throw validation_error("step_kl: n must be >= 1");
  if (!(zeta_sq >= 0.0)) throw validation_error("step_kl: zeta_sq must be >= 0");
  if (indicator != 0 && indicator != 1)
    throw validation_error("step_kl: indicator must be 0 or 1");
  if (!(theta_val >= 0.0 && theta_val <= 1.0))
    throw validation_error("step_kl: theta value must be in [0,1]");
  const double err = static_cast<double>(indicator) - theta_val;
  return beta * eta * zeta_sq * err * err / (4.0 * static_cast<double>(n) *
                                             static_cast<double>(n));
}

inline double step_kl(double eta, double beta, std::size_t n,
                      std::span<const double> zeta, int indicator, double theta_val) {
  double zsq = 0.0;
  for (double z : zeta) zsq += z * z;
  return step_kl(eta, beta, n, zsq, indicator, theta_val);
}

// One materialized step record for a fixed theta; kl == summand / (4 n^2).
struct StepKLRecord {
  std::size_t t = 0;
  double eta = 0.0;
  double beta = 0.0;
  double zeta_sq = 0.0;
  double delta_y = 0.0;
  int indicator = 0;
  double theta_val = 0.5;
  double sq_error = 0.25;  // (indicator - theta)^2
  double summand = 0.0;    // beta * eta * zeta_sq * sq_error
  double kl = 0.0;
};

// Theta-free per-step statistics recorded during a run; everything the bound,
// the baselines, and the curves need.
struct StepStat {
  double eta = 0.0;
  double beta = 0.0;
  double zeta_sq = 0.0;
  double delta_y = 0.0;
  int indicator = 0;
  double grad_sq = 0.0;      // squared norm of the full-batch gradient
  double incoherence = 0.0;  // training-set incoherence at the held-out index
  double surrogate_risk = 0.0;
  double train01 = 0.0;
  double test01 = 0.0;
};

inline StepKLRecord make_record(std::size_t t, const StepStat& s,
                                const DecisionFunction& theta, std::size_t n) {
  StepKLRecord r;
  r.t = t;
  r.eta = s.eta;
  r.beta = s.beta;
  r.zeta_sq = s.zeta_sq;
  r.delta_y = s.delta_y;
  r.indicator = s.indicator;
  r.theta_val = theta(s.delta_y);
  const double err = static_cast<double>(s.indicator) - r.theta_val;
  r.sq_error = err * err;
  r.summand = s.beta * s.eta * s.zeta_sq * r.sq_error;
  r.kl = r.summand / (4.0 * static_cast<double>(n) * static_cast<double>(n));
  return r;
}

using StepStatSeries = std::vector<StepStat>;

// Thm-4.2 accumulation: each cell is one (supersample, U, J) conditioning
// branch; the bound is (1/(n sqrt 2)) times the mean over cells of
// sqrt(sum_t beta eta |zeta|^2 (indicator - theta(DeltaY))^2). upto_t limits
// the partial sum (npos = all steps).
inline double accumulate_bound(std::span<const StepStatSeries> cells,
                               const DecisionFunction& theta, std::size_t n,
                               std::size_t upto_t = static_cast<std::size_t>(-1)) {
  if (cells.empty()) throw validation_error("accumulate_bound: no cells");
  if (n < 1) throw validation_error("accumulate_bound: n must be >= 1");
  double mean = 0.0;
  for (const auto& cell : cells) {
    double sum = 0.0;
    for (std::size_t t = 0; t < cell.size() && t <= upto_t; ++t) {
      const double theta_val = theta(cell[t].delta_y);
      const double err = static_cast<double>(cell[t].indicator) - theta_val;
      sum += cell[t].beta * cell[t].eta * cell[t].zeta_sq * err * err;
    }
    mean += std::sqrt(sum);
  }
  mean /= static_cast<double>(cells.size());
  return mean / (static_cast<double>(n) * std::sqrt(2.0));
}

// Same accumulation from materialized records (theta already applied).
inline double accumulate_bound(std::span<const std::vector<StepKLRecord>> cells,
                               std::size_t n) {
  if (cells.empty()) throw validation_error("accumulate_bound: no cells");
  double mean = 0.0;
  for (const auto& cell : cells) {
    double sum = 0.0;
    for (const auto& rec : cell) sum += rec.summand;
    mean += std::sqrt(sum);
  }
  mean /= static_cast<double>(cells.size());
  return mean / (static_cast<double>(n) * std::sqrt(2.0));
}

// Generic KL-form bound: weighted mean of sqrt(2 KL) over conditioning cells.
inline double kl_form_bound(std::span<const double> kls,
                            std::span<const double> weights) {
  if (kls.empty() || kls.size() != weights.size())
    throw validation_error("kl_form_bound: kls/weights size mismatch");
  double total_w = 0.0, value = 0.0;
  for (std::size_t i = 0; i < kls.size(); ++i) {
    if (!(kls[i] >= 0.0)) throw validation_error("kl_form_bound: negative KL");
    if (!(weights[i] >= 0.0)) throw validation_error("kl_form_bound: negative weight");
    value += weights[i] * std::sqrt(2.0 * kls[i]);
    total_w += weights[i];
  }
  if (total_w <= 0.0) throw validation_error("kl_form_bound: zero total weight");
  return value / total_w;
}

// Per-step record export: t, |zeta|^2, DeltaY, theta, squared test error, KL.
inline std::string step_records_csv(std::span<const StepKLRecord> records) {
  std::string out = "t,zeta_sq,delta_y,theta,sq_error,kl\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.t,
                  r.zeta_sq, r.delta_y, r.theta_val, r.sq_error, r.kl);
    out += buf;
  }
  return out;
}

// Same-covariance Gaussian step law with a deterministic drift; the toys the
// chain-rule check runs on.
struct GaussianStepLaw {
  double mean_shift = 0.0;
  double variance = 1.0;
};

// For a Gaussian random-walk pair sharing per-step variances, returns
// (KL(Q_T || P_T), sum_t KL(Q_t| || P_t|)) and enforces lhs <= rhs.
inline std::pair<double, double> chain_rule_check(
    std::span<const GaussianStepLaw> q_steps, std::span<const GaussianStepLaw> p_steps,
    double tol = 1e-10) {
  if (q_steps.size() != p_steps.size() || q_steps.empty())
    throw validation_error("chain_rule_check: horizon mismatch");
  double total_var = 0.0, total_shift = 0.0, rhs = 0.0;
  for (std::size_t t = 0; t < q_steps.size(); ++t) {
    if (q_steps[t].variance != p_steps[t].variance)
      throw validation_error("chain_rule_check: step covariances must match");
    if (!(q_steps[t].variance > 0.0))
      throw validation_error("chain_rule_check: variance must be positive");
    const double diff = q_steps[t].mean_shift - p_steps[t].mean_shift;
    rhs += diff * diff / (2.0 * q_steps[t].variance);
    total_var += q_steps[t].variance;
    total_shift += diff;
  }
  const double lhs = total_shift * total_shift / (2.0 * total_var);
  if (lhs > rhs + tol)
    throw invariant_error("chain rule violated: marginal KL " + std::to_string(lhs) +
                          " > summed conditional KL " + std::to_string(rhs));
  return {lhs, rhs};
}

// Weighted version over a family of chains (weights need not be normalized).
inline std::pair<double, double> chain_rule_check(
    std::span<const std::vector<GaussianStepLaw>> q_chains,
    std::span<const std::vector<GaussianStepLaw>> p_chains,
    std::span<const double> weights, double tol = 1e-10) {
  if (q_chains.size() != p_chains.size() || q_chains.size() != weights.size() ||
      q_chains.empty())
    throw validation_error("chain_rule_check: chain/weight count mismatch");
  double total_w = 0.0, lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < q_chains.size(); ++i) {
    const auto [l, r] = chain_rule_check(
        std::span<const GaussianStepLaw>(q_chains[i]),
        std::span<const GaussianStepLaw>(p_chains[i]), tol);
    lhs += weights[i] * l;
    rhs += weights[i] * r;
    total_w += weights[i];
  }
  if (total_w <= 0.0) throw validation_error("chain_rule_check: zero total weight");
  return {lhs / total_w, rhs / total_w};
}

}  // namespace infobound
