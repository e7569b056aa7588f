#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "infobound/errors.hpp"
#include "infobound/ld.hpp"
#include "infobound/model.hpp"

// Comparison bounds for the LD algorithm as characterized in the analyzed
// framework: Lipschitz forms and their data-dependent counterparts. The free
// constants of the data-dependent forms are pinned so that the worst-case
// summand reproduces the corresponding Lipschitz formula exactly.

namespace infobound {

inline double beta_eta_sum(const LDSchedule& schedule) {
  double s = 0.0;
  for (std::size_t t = 0; t < schedule.horizon(); ++t)
    s += schedule.beta[t] * schedule.eta[t];
  return s;
}

// (sqrt(2) L / n) sqrt(sum_t beta_t eta_t)
inline double li_lipschitz_bound(double sum_beta_eta, double lipschitz,
                                 std::size_t n) {
  if (!(lipschitz >= 0.0)) throw validation_error("li_lipschitz_bound: L must be >= 0");
  if (n < 1) throw validation_error("li_lipschitz_bound: n must be >= 1");
  return std::sqrt(2.0) * lipschitz / static_cast<double>(n) * std::sqrt(sum_beta_eta);
}

inline double li_lipschitz_bound(const LDSchedule& schedule, double lipschitz,
                                 std::size_t n) {
  return li_lipschitz_bound(beta_eta_sum(schedule), lipschitz, n);
}

// (L / (2 (n-1))) sqrt(sum_t beta_t eta_t)
inline double negrea_lipschitz_bound(double sum_beta_eta, double lipschitz,
                                     std::size_t n) {
  if (!(lipschitz >= 0.0))
    throw validation_error("negrea_lipschitz_bound: L must be >= 0");
  if (n < 2) throw validation_error("negrea_lipschitz_bound: n must be >= 2");
  return lipschitz / (2.0 * static_cast<double>(n - 1)) * std::sqrt(sum_beta_eta);
}

inline double negrea_lipschitz_bound(const LDSchedule& schedule, double lipschitz,
                                     std::size_t n) {
  return negrea_lipschitz_bound(beta_eta_sum(schedule), lipschitz, n);
}

// || grad_j - mean of the other gradients ||^2 over one training set.
inline double training_set_incoherence(std::span<const ParameterVector> grads,
                                       std::size_t j) {
  const std::size_t n = grads.size();
  if (n < 2) throw validation_error("training_set_incoherence: need n >= 2");
  if (j >= n) throw validation_error("training_set_incoherence: j out of range");
  const std::size_t d = grads[j].size();
  double out = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) mean += grads[k][i];
    mean /= static_cast<double>(n - 1);
    const double diff = grads[j][i] - mean;
    out += diff * diff;
  }
  return out;
}

namespace detail {
inline double mean_sqrt(std::span<const double> cell_sums) {
  if (cell_sums.empty()) throw validation_error("baseline: no cells");
  double m = 0.0;
  for (double v : cell_sums) {
    if (!(v >= 0.0)) throw validation_error("baseline: negative summand total");
    m += std::sqrt(v);
  }
  return m / static_cast<double>(cell_sums.size());
}
}  // namespace detail

// (1 / (4 (n-1))) E sqrt(sum_t beta_t eta_t incoherence_t); the constant
// reproduces negrea_lipschitz_bound at incoherence == 4 L^2.
inline double negrea_data_dependent_bound(std::span<const double> per_cell_sums,
                                          std::size_t n) {
  if (n < 2) throw validation_error("negrea_data_dependent_bound: need n >= 2");
  return detail::mean_sqrt(per_cell_sums) / (4.0 * static_cast<double>(n - 1));
}

inline double negrea_data_dependent_bound(
    std::span<const std::vector<double>> per_cell_incoherences,
    const LDSchedule& schedule, std::size_t n) {
  std::vector<double> sums;
  sums.reserve(per_cell_incoherences.size());
  for (const auto& cell : per_cell_incoherences) {
    if (cell.size() != schedule.horizon())
      throw validation_error("negrea_data_dependent_bound: record length mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < cell.size(); ++t)
      s += schedule.beta[t] * schedule.eta[t] * cell[t];
    sums.push_back(s);
  }
  return negrea_data_dependent_bound(sums, n);
}

// (sqrt(2) / n) E sqrt(sum_t beta_t eta_t |grad L~_S(W_t)|^2); the constant
// reproduces li_lipschitz_bound at |grad|^2 == L^2.
inline double li_data_dependent_bound(std::span<const double> per_cell_sums,
                                      std::size_t n) {
  if (n < 1) throw validation_error("li_data_dependent_bound: n must be >= 1");
  return std::sqrt(2.0) / static_cast<double>(n) * detail::mean_sqrt(per_cell_sums);
}

inline double li_data_dependent_bound(
    std::span<const std::vector<double>> per_cell_grad_sq,
    const LDSchedule& schedule, std::size_t n) {
  std::vector<double> sums;
  sums.reserve(per_cell_grad_sq.size());
  for (const auto& cell : per_cell_grad_sq) {
    if (cell.size() != schedule.horizon())
      throw validation_error("li_data_dependent_bound: record length mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < cell.size(); ++t)
      s += schedule.beta[t] * schedule.eta[t] * cell[t];
    sums.push_back(s);
  }
  return li_data_dependent_bound(sums, n);
}

}  // namespace infobound
