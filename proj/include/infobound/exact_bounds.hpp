#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infobound/errors.hpp"
#include "infobound/finite_problem.hpp"
#include "infobound/info.hpp"
#include "infobound/lambert.hpp"

// Exact generalization-error bounds on finite learning problems, computed by
// full enumeration of samples, supersamples, and index vectors.

namespace infobound {

namespace detail {

inline double pow_size(double base, std::size_t exp) {
  double r = 1.0;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

// Enumerates all k x n supersamples (flat digits, entry (r,c) at r*n+c) with
// their product probabilities.
template <typename F>
inline void for_each_supersample(const FiniteLearningProblem& problem, std::size_t k,
                                 F&& f) {
  const std::size_t digits = k * problem.n();
  const std::size_t z = problem.z_card();
  std::vector<std::size_t> cell(digits, 0);
  std::size_t count = 1;
  for (std::size_t i = 0; i < digits; ++i) count *= z;
  for (std::size_t flat = 0; flat < count; ++flat) {
    double p = 1.0;
    for (std::size_t d : cell) p *= problem.data_pmf()[d];
    f(std::span<const std::size_t>(cell), p);
    for (std::size_t i = digits; i-- > 0;) {
      if (++cell[i] < z) break;
      cell[i] = 0;
    }
  }
}

// Mutual information of a table q[u][w] that sums to one, with row index u
// uniform. Rounds tiny negatives up to zero.
inline double table_mi(std::span<const double> q, std::size_t u_count,
                       std::size_t w_count) {
  const double pu = 1.0 / static_cast<double>(u_count);
  std::vector<double> pw(w_count, 0.0);
  for (std::size_t u = 0; u < u_count; ++u)
    for (std::size_t w = 0; w < w_count; ++w) pw[w] += q[u * w_count + w];
  double mi = 0.0;
  for (std::size_t u = 0; u < u_count; ++u)
    for (std::size_t w = 0; w < w_count; ++w) {
      const double quw = q[u * w_count + w];
      if (quw > 0.0) mi += quw * std::log(quw / (pu * pw[w]));
    }
  return std::max(0.0, mi);
}

}  // namespace detail

// E[R_D(W) - R_S(W)] by enumeration over samples and hypotheses.
inline double exact_ege(const FiniteLearningProblem& problem) {
  check_enumeration_budget(detail::pow_size(problem.z_card(), problem.n()) *
                           static_cast<double>(problem.w_card()));
  std::vector<double> pop_risk(problem.w_card());
  for (std::size_t w = 0; w < problem.w_card(); ++w)
    pop_risk[w] = problem.population_risk(w);
  double ege = 0.0;
  problem.for_each_sample([&](std::span<const std::size_t> zs, double p, std::size_t s) {
    if (p == 0.0) return;
    const FinitePmf& row = problem.algorithm_row(s);
    for (std::size_t w = 0; w < problem.w_card(); ++w) {
      if (row[w] == 0.0) continue;
      ege += p * row[w] * (pop_risk[w] - problem.empirical_risk(w, zs));
    }
  });
  return ege;
}

// I(W;S), the input-output mutual information.
inline double exact_iomi(const FiniteLearningProblem& problem) {
  check_enumeration_budget(detail::pow_size(problem.z_card(), problem.n()) *
                           static_cast<double>(problem.w_card()));
  const std::vector<double> pw = problem.hypothesis_marginal();
  double mi = 0.0;
  problem.for_each_sample([&](std::span<const std::size_t>, double p, std::size_t s) {
    if (p == 0.0) return;
    const FinitePmf& row = problem.algorithm_row(s);
    for (std::size_t w = 0; w < problem.w_card(); ++w)
      if (row[w] > 0.0) mi += p * row[w] * std::log(row[w] / pw[w]);
  });
  return std::max(0.0, mi);
}

struct CmiDecomposition {
  double iomi = 0.0;
  double cmi = 0.0;
  double supersample_mi = 0.0;  // I(W; supersample)
};

namespace detail {

inline void check_cmi_budget(const FiniteLearningProblem& problem, std::size_t k) {
  check_enumeration_budget(pow_size(problem.z_card(), k * problem.n()) *
                           pow_size(static_cast<double>(k), problem.n()) *
                           static_cast<double>(problem.w_card()));
}

// Single pass over supersamples computing I(W;U|Z) and I(W;Z) jointly.
inline std::pair<double, double> cmi_and_supersample_mi(
    const FiniteLearningProblem& problem, std::size_t k) {
  check_cmi_budget(problem, k);
  const std::size_t n = problem.n();
  const std::size_t wc = problem.w_card();
  std::size_t u_count = 1;
  for (std::size_t i = 0; i < n; ++i) u_count *= k;
  const double inv_u = 1.0 / static_cast<double>(u_count);
  const std::vector<double> pw = problem.hypothesis_marginal();

  std::vector<double> q(u_count * wc);
  std::vector<double> pw_given_z(wc);
  std::vector<std::size_t> s_digits(n);
  std::vector<std::size_t> u_digits(n);
  double cmi = 0.0;
  double ss_mi = 0.0;
  for_each_supersample(problem, k, [&](std::span<const std::size_t> cell, double p) {
    if (p == 0.0) return;
    std::fill(pw_given_z.begin(), pw_given_z.end(), 0.0);
    std::fill(u_digits.begin(), u_digits.end(), 0);
    for (std::size_t u = 0; u < u_count; ++u) {
      for (std::size_t c = 0; c < n; ++c) s_digits[c] = cell[u_digits[c] * n + c];
      const FinitePmf& row = problem.algorithm_row(problem.sample_index(s_digits));
      for (std::size_t w = 0; w < wc; ++w) {
        const double quw = inv_u * row[w];
        q[u * wc + w] = quw;
        pw_given_z[w] += quw;
      }
      for (std::size_t c = n; c-- > 0;) {
        if (++u_digits[c] < k) break;
        u_digits[c] = 0;
      }
    }
    cmi += p * table_mi(q, u_count, wc);
    double kl = 0.0;
    for (std::size_t w = 0; w < wc; ++w)
      if (pw_given_z[w] > 0.0) kl += pw_given_z[w] * std::log(pw_given_z[w] / pw[w]);
    ss_mi += p * std::max(0.0, kl);
  });
  return {std::max(0.0, cmi), std::max(0.0, ss_mi)};
}

}  // namespace detail

// I(W; U | supersample) for a k x n supersample.
inline double exact_cmi_k(const FiniteLearningProblem& problem, const SuperSampleSpec& spec) {
  spec.validate();
  if (spec.n != problem.n())
    throw validation_error("exact_cmi_k: spec.n must match problem n");
  return detail::cmi_and_supersample_mi(problem, spec.k).first;
}

// Checks I(W;S) = I(W;Z~) + I(W;U|Z~) and returns all three terms.
inline CmiDecomposition verify_decomposition(const FiniteLearningProblem& problem,
                                             const SuperSampleSpec& spec,
                                             double tol = 1e-10) {
  spec.validate();
  if (spec.n != problem.n())
    throw validation_error("verify_decomposition: spec.n must match problem n");
  CmiDecomposition d;
  d.iomi = exact_iomi(problem);
  auto [cmi, ss_mi] = detail::cmi_and_supersample_mi(problem, spec.k);
  d.cmi = cmi;
  d.supersample_mi = ss_mi;
  if (std::abs(d.iomi - (d.cmi + d.supersample_mi)) > tol)
    throw invariant_error("chain-rule decomposition violated: I(W;S)=" +
                          std::to_string(d.iomi) + " vs " +
                          std::to_string(d.cmi + d.supersample_mi));
  return d;
}

inline std::vector<std::pair<std::size_t, double>> cmi_limit_scan(
    const FiniteLearningProblem& problem, std::span<const std::size_t> k_list) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(k_list.size());
  for (std::size_t k : k_list)
    out.emplace_back(k, exact_cmi_k(problem, SuperSampleSpec{k, problem.n()}));
  return out;
}

struct SubsetBound {
  std::size_t m = 1;
  double rate = 0.0;          // I(W; U_J | Z~, J) / m
  double bound = 0.0;         // E_{Z~} sqrt(2 * I^{Z~}(W; U_J | J) / m)
  double jensen_bound = 0.0;  // sqrt(2 * rate), the weaker post-Jensen form
};

// Random-subset bound with |J| = m and k = 2.
inline SubsetBound subset_cmi_bound(const FiniteLearningProblem& problem, std::size_t m) {
  const std::size_t n = problem.n();
  if (m < 1 || m > n) throw validation_error("subset_cmi_bound: m out of range");
  detail::check_cmi_budget(problem, 2);
  const std::size_t wc = problem.w_card();
  const std::size_t u_count = std::size_t{1} << n;

  std::vector<std::vector<std::size_t>> subsets;
  detail::for_each_subset(n, m, [&](const std::vector<std::size_t>& s) {
    subsets.push_back(s);
  });
  const std::size_t m_count = std::size_t{1} << m;
  const double inv_subsets = 1.0 / static_cast<double>(subsets.size());

  std::vector<double> rows(u_count * wc);
  std::vector<double> qk(m_count * wc);
  std::vector<std::size_t> s_digits(n);
  double cmi_m = 0.0;
  double bound = 0.0;
  detail::for_each_supersample(problem, 2, [&](std::span<const std::size_t> cell, double p) {
    if (p == 0.0) return;
    for (std::size_t u = 0; u < u_count; ++u) {
      for (std::size_t c = 0; c < n; ++c)
        s_digits[c] = cell[((u >> (n - 1 - c)) & 1u) * n + c];
      const FinitePmf& row = problem.algorithm_row(problem.sample_index(s_digits));
      for (std::size_t w = 0; w < wc; ++w)
        rows[u * wc + w] = row[w] / static_cast<double>(u_count);
    }
    double avg_mi = 0.0;
    for (const auto& subset : subsets) {
      std::fill(qk.begin(), qk.end(), 0.0);
      for (std::size_t u = 0; u < u_count; ++u) {
        std::size_t uk = 0;
        for (std::size_t pos : subset) uk = (uk << 1) | ((u >> (n - 1 - pos)) & 1u);
        for (std::size_t w = 0; w < wc; ++w) qk[uk * wc + w] += rows[u * wc + w];
      }
      avg_mi += detail::table_mi(qk, m_count, wc);
    }
    avg_mi *= inv_subsets;
    cmi_m += p * avg_mi;
    bound += p * std::sqrt(2.0 * avg_mi / static_cast<double>(m));
  });

  SubsetBound out;
  out.m = m;
  out.rate = cmi_m / static_cast<double>(m);
  out.bound = bound;
  out.jensen_bound = std::sqrt(2.0 * out.rate);
  return out;
}

// Whether the subset-information rate is monotone between m1 < m2.
inline bool monotonicity_check(const FiniteLearningProblem& problem, std::size_t m1,
                               std::size_t m2, double tol = 1e-10) {
  if (m1 >= m2) throw validation_error("monotonicity_check: need m1 < m2");
  if (m2 > problem.n()) throw validation_error("monotonicity_check: m2 > n");
  return subset_cmi_bound(problem, m1).rate <= subset_cmi_bound(problem, m2).rate + tol;
}

// (1/n) sum_i E_{Z~} sqrt(2 * I^{Z~}(W; U_i)), k = 2.
inline double individual_sample_bound(const FiniteLearningProblem& problem) {
  detail::check_cmi_budget(problem, 2);
  const std::size_t n = problem.n();
  const std::size_t wc = problem.w_card();
  const std::size_t u_count = std::size_t{1} << n;
  std::vector<double> qi(2 * wc);
  std::vector<std::size_t> s_digits(n);
  double bound = 0.0;
  detail::for_each_supersample(problem, 2, [&](std::span<const std::size_t> cell, double p) {
    if (p == 0.0) return;
    double term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(qi.begin(), qi.end(), 0.0);
      for (std::size_t u = 0; u < u_count; ++u) {
        const std::size_t ui = (u >> (n - 1 - i)) & 1u;
        for (std::size_t c = 0; c < n; ++c)
          s_digits[c] = cell[((u >> (n - 1 - c)) & 1u) * n + c];
        const FinitePmf& row = problem.algorithm_row(problem.sample_index(s_digits));
        for (std::size_t w = 0; w < wc; ++w)
          qi[ui * wc + w] += row[w] / static_cast<double>(u_count);
      }
      term += std::sqrt(2.0 * detail::table_mi(qi, 2, wc));
    }
    bound += p * term / static_cast<double>(n);
  });
  return bound;
}

// Fano lower bound on the error of any estimator of U from (W, supersample).
// May be negative (vacuous); returned as-is.
inline double fano_lower_bound(double cmi, std::size_t n, std::size_t k) {
  if (!(cmi >= 0.0)) throw validation_error("fano_lower_bound: cmi must be >= 0");
  if (k < 2) throw validation_error("fano_lower_bound: k must be >= 2");
  if (n < 1) throw validation_error("fano_lower_bound: n must be >= 1");
  return 1.0 - (cmi + std::log(2.0)) /
                   (static_cast<double>(n) * std::log(static_cast<double>(k)));
}

namespace detail {
inline double improved_constant_coeff(double k) {
  return (k * k * k + 7.0 * k * k - 8.0 * k - 16.0) / (4.0 * (k * k * k - 2.0 * k * k));
}
}  // namespace detail

// Optimal multiplier for the refined CMI^k bound; zero-information inputs
// take the analytic lambda -> 0 limit.
inline double improved_constant_lambda(double cmi, std::size_t n, std::size_t k) {
  const double coeff = detail::improved_constant_coeff(static_cast<double>(k));
  const double nn = static_cast<double>(n);
  return nn * lambert_w0((cmi / (nn * coeff) - 1.0) * std::exp(-1.0)) + nn;
}

inline double improved_constant_bound(double cmi, std::size_t n, std::size_t k) {
  if (k <= 2) throw validation_error("improved_constant_bound: requires k > 2");
  if (!(cmi >= 0.0)) throw validation_error("improved_constant_bound: cmi must be >= 0");
  if (n < 1) throw validation_error("improved_constant_bound: n must be >= 1");
  if (cmi == 0.0) return 0.0;
  const double coeff = detail::improved_constant_coeff(static_cast<double>(k));
  const double lambda = improved_constant_lambda(cmi, n, k);
  const double x = lambda / static_cast<double>(n);
  return cmi / lambda + (std::exp(x) - x - 1.0) / x * coeff;
}

// k -> infinity variant (coefficient 1/4), applicable with IOMI in place of
// CMI^k when the hypothesis set is finite.
inline double improved_constant_bound_limit(double iomi, std::size_t n) {
  if (!(iomi >= 0.0)) throw validation_error("improved_constant_bound_limit: iomi >= 0");
  if (n < 1) throw validation_error("improved_constant_bound_limit: n must be >= 1");
  if (iomi == 0.0) return 0.0;
  const double nn = static_cast<double>(n);
  const double lambda = nn * lambert_w0((4.0 * iomi / nn - 1.0) * std::exp(-1.0)) + nn;
  const double x = lambda / nn;
  return iomi / lambda + (std::exp(x) - x - 1.0) / (4.0 * x);
}

struct ExactBoundReport {
  double ege = 0.0;
  double iomi = 0.0;
  double cmi_k = 0.0;
  std::size_t k = 2;
  double bound_thm_1_1 = 0.0;  // sqrt(IOMI / (2n))
  double bound_thm_1_3 = 0.0;  // sqrt(2 CMI^k / n)
  std::vector<SubsetBound> bound_thm_3_1;  // per m, k = 2
  double bound_thm_3_3 = 0.0;  // individual-sample bound
  double bound_thm_B1 = 0.0;   // improved-constant bound
  std::size_t b1_k = 3;        // k actually used for the B1 bound
  double fano_lower = 0.0;

  // Every implemented upper bound, for validity checks.
  std::vector<std::pair<std::string, double>> all_bounds() const {
    std::vector<std::pair<std::string, double>> v;
    v.emplace_back("thm_1_1", bound_thm_1_1);
    v.emplace_back("thm_1_3", bound_thm_1_3);
    for (const auto& sb : bound_thm_3_1)
      v.emplace_back("thm_3_1_m" + std::to_string(sb.m), sb.bound);
    v.emplace_back("thm_3_3", bound_thm_3_3);
    v.emplace_back("thm_B1", bound_thm_B1);
    return v;
  }

  void check_validity(double tol = 1e-10) const {
    for (const auto& [name, value] : all_bounds())
      if (ege > value + tol)
        throw invariant_error("validity violated: ege=" + std::to_string(ege) +
                              " exceeds " + name + "=" + std::to_string(value));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["units"] = "nats";
    j["ege"] = ege;
    j["iomi"] = iomi;
    j["k"] = k;
    j["cmi_k"] = cmi_k;
    j["bound_thm_1_1"] = bound_thm_1_1;
    j["bound_thm_1_3"] = bound_thm_1_3;
    j["bound_thm_3_1"] = nlohmann::json::array();
    for (const auto& sb : bound_thm_3_1)
      j["bound_thm_3_1"].push_back({{"m", sb.m},
                                    {"rate", sb.rate},
                                    {"bound", sb.bound},
                                    {"jensen_bound", sb.jensen_bound}});
    j["bound_thm_3_3"] = bound_thm_3_3;
    j["bound_thm_B1"] = bound_thm_B1;
    j["b1_k"] = b1_k;
    j["fano_lower"] = fano_lower;
    return j;
  }

  // Long-format CSV: metric,value per line.
  std::string to_csv() const {
    std::string s = "metric,value\n";
    const auto add = [&s](const std::string& name, double v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", v);
      s += name + "," + buf + "\n";
    };
    add("ege", ege);
    add("iomi", iomi);
    add("cmi_k", cmi_k);
    add("bound_thm_1_1", bound_thm_1_1);
    add("bound_thm_1_3", bound_thm_1_3);
    for (const auto& sb : bound_thm_3_1) {
      add("thm_3_1_rate_m" + std::to_string(sb.m), sb.rate);
      add("thm_3_1_bound_m" + std::to_string(sb.m), sb.bound);
      add("thm_3_1_jensen_m" + std::to_string(sb.m), sb.jensen_bound);
    }
    add("bound_thm_3_3", bound_thm_3_3);
    add("bound_thm_B1", bound_thm_B1);
    add("fano_lower", fano_lower);
    return s;
  }
};

// Aggregates the exact quantities and every bound. With enforce_validity the
// report is checked against EGE before being returned.
inline ExactBoundReport exact_report(const FiniteLearningProblem& problem,
                                     const SuperSampleSpec& spec,
                                     bool enforce_validity = true) {
  spec.validate();
  ExactBoundReport r;
  r.k = spec.k;
  r.ege = exact_ege(problem);
  r.iomi = exact_iomi(problem);
  r.cmi_k = exact_cmi_k(problem, spec);
  const double n = static_cast<double>(problem.n());
  r.bound_thm_1_1 = std::sqrt(r.iomi / (2.0 * n));
  r.bound_thm_1_3 = std::sqrt(2.0 * r.cmi_k / n);
  for (std::size_t m = 1; m <= problem.n(); ++m)
    r.bound_thm_3_1.push_back(subset_cmi_bound(problem, m));
  r.bound_thm_3_3 = individual_sample_bound(problem);
  r.b1_k = spec.k > 2 ? spec.k : 3;
  const double cmi_b1 =
      r.b1_k == spec.k ? r.cmi_k
                       : exact_cmi_k(problem, SuperSampleSpec{r.b1_k, problem.n()});
  r.bound_thm_B1 = improved_constant_bound(cmi_b1, problem.n(), r.b1_k);
  r.fano_lower = fano_lower_bound(r.cmi_k, problem.n(), spec.k);
  if (enforce_validity) r.check_validity();
  return r;
}

}  // namespace infobound
