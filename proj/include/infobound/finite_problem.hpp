#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infobound/errors.hpp"
#include "infobound/pmf.hpp"
#include "infobound/rng.hpp"

namespace infobound {

// Hard cap on exact-enumeration work; callers get a resource_error instead of
// a runaway loop.
inline constexpr double kEnumerationGuard = 1e7;

inline void check_enumeration_budget(double terms) {
  if (!(terms <= kEnumerationGuard))
    throw resource_error("enumeration would need " + std::to_string(terms) +
                         " terms (guard " + std::to_string(kEnumerationGuard) + ")");
}

struct SuperSampleSpec {
  std::size_t k = 2;
  std::size_t n = 1;

  void validate() const {
    if (k < 2) throw validation_error("SuperSampleSpec: k must be >= 2");
    if (n < 1) throw validation_error("SuperSampleSpec: n must be >= 1");
  }
};

// A fully enumerable learning problem: finite data alphabet, finite
// hypothesis set, [0,1]-bounded loss table, and a stochastic learning
// algorithm given as a kernel from ordered samples to hypotheses.
class FiniteLearningProblem {
 public:
  FiniteLearningProblem(FinitePmf data_pmf, std::size_t n,
                        std::vector<std::vector<double>> loss,
                        ConditionalTable algorithm)
      : data_pmf_(std::move(data_pmf)),
        n_(n),
        loss_(std::move(loss)),
        algorithm_(std::move(algorithm)) {
    if (n_ == 0) throw validation_error("FiniteLearningProblem: n must be >= 1");
    if (loss_.empty()) throw validation_error("FiniteLearningProblem: empty loss table");
    for (const auto& row : loss_) {
      if (row.size() != data_pmf_.size())
        throw validation_error("FiniteLearningProblem: loss row width != |Z|");
      for (double v : row)
        if (!(v >= 0.0 && v <= 1.0))
          throw validation_error("FiniteLearningProblem: loss values must lie in [0,1]");
    }
    if (algorithm_.target_dim() != loss_.size())
      throw validation_error("FiniteLearningProblem: algorithm target != |W|");
    if (algorithm_.given_dims() != std::vector<std::size_t>(n_, data_pmf_.size()))
      throw validation_error("FiniteLearningProblem: algorithm must condition on Z^n");
  }

  std::size_t z_card() const noexcept { return data_pmf_.size(); }
  std::size_t w_card() const noexcept { return loss_.size(); }
  std::size_t n() const noexcept { return n_; }
  const FinitePmf& data_pmf() const noexcept { return data_pmf_; }
  double loss(std::size_t w, std::size_t z) const { return loss_[w][z]; }

  std::size_t sample_count() const {
    std::size_t c = 1;
    for (std::size_t i = 0; i < n_; ++i) c *= z_card();
    return c;
  }

  // Row-major index of an ordered sample (first element outermost).
  std::size_t sample_index(std::span<const std::size_t> zs) const {
    std::size_t f = 0;
    for (std::size_t z : zs) f = f * z_card() + z;
    return f;
  }

  const FinitePmf& algorithm_row(std::size_t sample_idx) const {
    return algorithm_.row(sample_idx);
  }

  double sample_prob(std::span<const std::size_t> zs) const {
    double p = 1.0;
    for (std::size_t z : zs) p *= data_pmf_[z];
    return p;
  }

  double population_risk(std::size_t w) const {
    double r = 0.0;
    for (std::size_t z = 0; z < z_card(); ++z) r += data_pmf_[z] * loss_[w][z];
    return r;
  }

  double empirical_risk(std::size_t w, std::span<const std::size_t> zs) const {
    double r = 0.0;
    for (std::size_t z : zs) r += loss_[w][z];
    return r / static_cast<double>(zs.size());
  }

  // Marginal law of W under S ~ D^n, A(S).
  std::vector<double> hypothesis_marginal() const {
    std::vector<double> pw(w_card(), 0.0);
    for_each_sample([&](std::span<const std::size_t> zs, double p, std::size_t s) {
      const FinitePmf& row = algorithm_row(s);
      for (std::size_t w = 0; w < w_card(); ++w) pw[w] += p * row[w];
    });
    return pw;
  }

  template <typename F>
  void for_each_sample(F&& f) const {
    std::vector<std::size_t> zs(n_, 0);
    const std::size_t count = sample_count();
    for (std::size_t s = 0; s < count; ++s) {
      f(std::span<const std::size_t>(zs), sample_prob(zs), s);
      for (std::size_t i = n_; i-- > 0;) {
        if (++zs[i] < z_card()) break;
        zs[i] = 0;
      }
    }
  }

  // Schema: {"data_pmf":[...], "n":N, "loss":[[per-z] per-w],
  //          "algorithm":[[per-w] per-sample-index]}
  static FiniteLearningProblem from_json(const nlohmann::json& j) {
    for (const char* key : {"data_pmf", "n", "loss", "algorithm"})
      if (!j.contains(key))
        throw validation_error(std::string("problem JSON missing \"") + key + "\"");
    FinitePmf data(j.at("data_pmf").get<std::vector<double>>());
    const auto n = j.at("n").get<std::size_t>();
    auto loss = j.at("loss").get<std::vector<std::vector<double>>>();
    auto rows_raw = j.at("algorithm").get<std::vector<std::vector<double>>>();
    std::vector<FinitePmf> rows;
    rows.reserve(rows_raw.size());
    for (auto& r : rows_raw) rows.emplace_back(std::move(r));
    ConditionalTable table(std::vector<std::size_t>(n, data.size()), std::move(rows));
    return FiniteLearningProblem(std::move(data), n, std::move(loss), std::move(table));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["data_pmf"] = std::vector<double>(data_pmf_.probs().begin(), data_pmf_.probs().end());
    j["n"] = n_;
    j["loss"] = loss_;
    std::vector<std::vector<double>> rows;
    rows.reserve(algorithm_.rows_count());
    for (std::size_t s = 0; s < algorithm_.rows_count(); ++s) {
      const auto& r = algorithm_.row(s);
      rows.emplace_back(r.probs().begin(), r.probs().end());
    }
    j["algorithm"] = rows;
    return j;
  }

 private:
  FinitePmf data_pmf_;
  std::size_t n_;
  std::vector<std::vector<double>> loss_;  // loss_[w][z]
  ConditionalTable algorithm_;
};

namespace detail {
inline std::vector<double> dirichlet_uniform(SplitMix64& rng, std::size_t size) {
  std::vector<double> v(size);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(rng.next_double_open());
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}
}  // namespace detail

// Seeded random problem: Dirichlet(1,..,1) data pmf and algorithm rows,
// uniform [0,1] loss entries.
inline FiniteLearningProblem random_problem(SplitMix64& rng, std::size_t n,
                                            std::size_t z_card, std::size_t w_card) {
  FinitePmf data(detail::dirichlet_uniform(rng, z_card));
  std::vector<std::vector<double>> loss(w_card, std::vector<double>(z_card));
  for (auto& row : loss)
    for (double& v : row) v = rng.next_double();
  std::size_t samples = 1;
  for (std::size_t i = 0; i < n; ++i) samples *= z_card;
  std::vector<FinitePmf> rows;
  rows.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s)
    rows.emplace_back(detail::dirichlet_uniform(rng, w_card));
  ConditionalTable table(std::vector<std::size_t>(n, z_card), std::move(rows));
  return FiniteLearningProblem(std::move(data), n, std::move(loss), std::move(table));
}

}  // namespace infobound
