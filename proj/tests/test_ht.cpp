#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "infobound/decision.hpp"
#include "infobound/exact_bounds.hpp"
#include "infobound/ht.hpp"
#include "support/test_problems.hpp"

using namespace infobound;
using Catch::Approx;

namespace {

std::vector<double> random_vec(SplitMix64& rng, std::size_t d, double scale = 1.0) {
  std::vector<double> v(d);
  for (double& x : v) x = scale * (2.0 * rng.next_double() - 1.0);
  return v;
}

}  // namespace

TEST_CASE("decision functions", "[ht]") {
  const auto erf1 = DecisionFunction::erf_scaled(1.0);
  REQUIRE(erf1(0.0) == 0.5);
  REQUIRE(erf1(1.0) == Approx(0.9213503964748575).margin(1e-14));

  const auto sign = DecisionFunction::sign();
  REQUIRE(sign(3.0) == 1.0);
  REQUIRE(sign(-3.0) == 0.0);
  REQUIRE(sign(0.0) == 0.5);

  const auto half = DecisionFunction::constant_half();
  REQUIRE(half(123.0) == 0.5);

  // 1 - theta(x) == theta(-x), exactly, for every kind
  SplitMix64 rng(1);
  const std::vector<DecisionFunction> thetas{
      erf1, DecisionFunction::erf_scaled(0.07), DecisionFunction::tanh_scaled(2.5),
      sign, half};
  for (const auto& theta : thetas) {
    for (int i = 0; i < 200; ++i) {
      const double x = 20.0 * (2.0 * rng.next_double() - 1.0);
      REQUIRE(1.0 - theta(x) == theta(-x));
    }
  }
  // huge statistics saturate instead of overflowing
  REQUIRE(erf1(1e300) == 1.0);
  REQUIRE(erf1(-1e300) == 0.0);

  REQUIRE_THROWS_AS(DecisionFunction::erf_scaled(0.0), validation_error);
  REQUIRE(DecisionFunction::parse("tanh:0.25").a == Approx(0.25));
  REQUIRE(DecisionFunction::parse("constant-half").kind ==
          DecisionFunction::Kind::kConstantHalf);
  REQUIRE_THROWS_AS(DecisionFunction::parse("step"), validation_error);
  REQUIRE_THROWS_AS(DecisionFunction::parse("erf:zero"), validation_error);
}

TEST_CASE("update_y", "[ht]") {
  SECTION("identical candidates leave the statistic difference at zero") {
    SplitMix64 rng(5);
    const std::size_t d = 6, n = 8;
    HypothesisTestState y;
    for (int t = 0; t < 10; ++t) {
      const auto wp = random_vec(rng, d), wn = random_vec(rng, d);
      const auto loo = random_vec(rng, d), g = random_vec(rng, d);
      y = update_y(y, wp, wn, 0.1, 2.0, loo, g, g, n);
    }
    REQUIRE(y.t == 10);
    REQUIRE(y.y1 == y.y2);
    REQUIRE(y.delta() == 0.0);
    REQUIRE(y.y1 > 0.0);  // increments are positive for generic steps
  }

  SECTION("step matching candidate 1's drift exactly") {
    const std::size_t d = 3, n = 10;
    const double eta = 0.1, beta = 2.0;
    SplitMix64 rng(6);
    const auto wp = random_vec(rng, d);
    const auto loo = random_vec(rng, d);
    const auto g1 = random_vec(rng, d);
    const auto g2 = random_vec(rng, d);
    // w_next - w_prev = -eta((n-1)/n) loo - (eta/n) g1  => residual_1 = 0
    std::vector<double> wn(d);
    for (std::size_t i = 0; i < d; ++i)
      wn[i] = wp[i] - eta * (double(n - 1) / n) * loo[i] - (eta / n) * g1[i];
    const auto y = update_y({}, wp, wn, eta, beta, loo, g1, g2, n);
    REQUIRE(y.y1 == Approx(0.0).margin(1e-24));
    double zeta_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double z = g1[i] - g2[i];
      zeta_sq += z * z;
    }
    REQUIRE(y.y2 == Approx(beta * eta * zeta_sq / (4.0 * n * n)).margin(1e-15));
  }

  SECTION("scalar worked step") {
    // residuals 0 and 0.05 with eta=0.1, beta=2, n=10
    const double eta = 0.1, beta = 2.0;
    const std::vector<double> wp{0.0}, wn{0.0}, loo{0.0};
    const std::vector<double> g1{0.0}, g2{0.05 * 10.0 / eta};
    const auto y = update_y({}, wp, wn, eta, beta, loo, g1, g2, 10);
    REQUIRE(y.y1 == 0.0);
    REQUIRE(y.y2 == Approx(0.0125).margin(1e-15));
  }

  SECTION("monotone in t") {
    SplitMix64 rng(7);
    HypothesisTestState y;
    double prev1 = 0.0, prev2 = 0.0;
    for (int t = 0; t < 50; ++t) {
      const auto wp = random_vec(rng, 4), wn = random_vec(rng, 4);
      const auto loo = random_vec(rng, 4), g1 = random_vec(rng, 4),
                 g2 = random_vec(rng, 4);
      y = update_y(y, wp, wn, 0.05, 3.0, loo, g1, g2, 5);
      REQUIRE(y.y1 >= prev1);
      REQUIRE(y.y2 >= prev2);
      prev1 = y.y1;
      prev2 = y.y2;
    }
  }

  SECTION("dimension mismatch") {
    const std::vector<double> a{0.0, 0.0}, b{0.0};
    REQUIRE_THROWS_AS(update_y({}, a, b, 0.1, 1.0, a, a, a, 2), validation_error);
  }
}

TEST_CASE("belief vector", "[ht]") {
  HypothesisTestState y;
  const auto b0 = belief(DecisionFunction::erf_scaled(1.0), y);
  REQUIRE(b0.pi1 == 0.5);
  REQUIRE(b0.pi2 == 0.5);

  y.y2 = 1.0;  // DeltaY = 1
  const auto b1 = belief(DecisionFunction::erf_scaled(1.0), y);
  REQUIRE(b1.pi1 == Approx(0.9213503964748575).margin(1e-14));
  REQUIRE(b1.pi1 + b1.pi2 == Approx(1.0).margin(1e-15));

  const auto bs = belief(DecisionFunction::sign(), y);
  REQUIRE(bs.pi1 == 1.0);
  REQUIRE(bs.pi2 == 0.0);
}

TEST_CASE("per-step kl", "[ht]") {
  SECTION("matched means give zero") {
    REQUIRE(step_kl(0.1, 2.0, 10, 0.25, 1, 1.0) == 0.0);
    REQUIRE(step_kl(0.1, 2.0, 10, 0.25, 0, 0.0) == 0.0);
  }
  SECTION("worked value") {
    // theta such that (indicator - theta)^2 = 0.09
    REQUIRE(step_kl(0.1, 2.0, 10, 0.25, 1, 0.7) == Approx(1.125e-5).margin(1e-19));
  }
  SECTION("matches the same-covariance Gaussian KL oracle") {
    SplitMix64 rng(12);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double eta = 0.001 + rng.next_double();
      const double beta = 0.1 + 10.0 * rng.next_double();
      const std::size_t n = 1 + rng.next_below(50);
      const std::size_t d = 1 + rng.next_below(6);
      const auto zeta = random_vec(rng, d, 2.0);
      const int ind = static_cast<int>(rng.next_below(2));
      const double theta = rng.next_double();
      // direct: KL(N(mu_q, s2 I) || N(mu_p, s2 I)) = |mu_q - mu_p|^2 / (2 s2)
      const double s2 = 2.0 * eta / beta;
      double diff_sq = 0.0;
      for (double z : zeta) {
        const double dmu = (eta / double(n)) * (double(ind) - theta) * z;
        diff_sq += dmu * dmu;
      }
      const double oracle = diff_sq / (2.0 * s2);
      const double got = step_kl(eta, beta, n, zeta, ind, theta);
      worst = std::max(worst, std::abs(got - oracle));
    }
    REQUIRE(worst < 1e-12);
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(step_kl(0.0, 1.0, 1, 1.0, 1, 0.5), validation_error);
    REQUIRE_THROWS_AS(step_kl(0.1, 1.0, 1, 1.0, 1, 1.5), validation_error);
    REQUIRE_THROWS_AS(step_kl(0.1, 1.0, 1, -1.0, 1, 0.5), validation_error);
  }
}

TEST_CASE("record materialization keeps kl = summand / (4 n^2)", "[ht]") {
  SplitMix64 rng(31);
  const auto theta = DecisionFunction::tanh_scaled(0.8);
  for (int i = 0; i < 200; ++i) {
    StepStat s;
    s.eta = 0.01 + rng.next_double();
    s.beta = 0.5 + rng.next_double();
    s.zeta_sq = 4.0 * rng.next_double();
    s.delta_y = 10.0 * (2.0 * rng.next_double() - 1.0);
    s.indicator = static_cast<int>(rng.next_below(2));
    const std::size_t n = 2 + rng.next_below(20);
    const auto rec = make_record(i, s, theta, n);
    REQUIRE(rec.kl == rec.summand / (4.0 * double(n) * double(n)));
    REQUIRE(rec.kl == Approx(step_kl(s.eta, s.beta, n, s.zeta_sq, s.indicator,
                                     rec.theta_val)).margin(1e-18));
  }
}

TEST_CASE("symmetric theta reduction", "[ht]") {
  // (1{U_J=1} - theta(dY))^2 == theta((-1)^{U_J} dY)^2 when 1-theta(x)=theta(-x)
  SplitMix64 rng(44);
  const std::vector<DecisionFunction> thetas{DecisionFunction::erf_scaled(0.5),
                                             DecisionFunction::tanh_scaled(3.0),
                                             DecisionFunction::sign()};
  for (const auto& theta : thetas) {
    for (int i = 0; i < 500; ++i) {
      const double dy = 6.0 * (2.0 * rng.next_double() - 1.0);
      for (int uj : {1, 2}) {
        const int indicator = (uj == 1) ? 1 : 0;
        const double err = double(indicator) - theta(dy);
        const double reduced = theta((uj == 1 ? -1.0 : 1.0) * dy);
        REQUIRE(err * err == Approx(reduced * reduced).margin(1e-12));
      }
    }
  }
}

TEST_CASE("accumulate_bound", "[ht]") {
  SECTION("all-zero summands give zero") {
    StepStatSeries cell(5);
    for (auto& s : cell) {
      s.eta = 0.1;
      s.beta = 1.0;
      s.zeta_sq = 0.0;
    }
    std::vector<StepStatSeries> cells{cell, cell};
    REQUIRE(accumulate_bound(cells, DecisionFunction::erf_scaled(1.0), 4) == 0.0);
  }

  SECTION("constant-zeta closed form under theta = 1/2") {
    // beta=1, eta=0.01, |zeta|^2=4, T=100, n=10 -> 1/(10 sqrt 2) * sqrt(1) = 0.0707..
    StepStatSeries cell(100);
    for (auto& s : cell) {
      s.eta = 0.01;
      s.beta = 1.0;
      s.zeta_sq = 4.0;
      s.indicator = 1;
      s.delta_y = 0.37;  // irrelevant for constant-half
    }
    std::vector<StepStatSeries> cells{cell};
    REQUIRE(accumulate_bound(cells, DecisionFunction::constant_half(), 10) ==
            Approx(0.07071067811865475).margin(1e-12));
  }

  SECTION("pooled cells equal the (V1+V2)/(2 sqrt2 n) regrouping") {
    SplitMix64 rng(9);
    const std::size_t R = 3, T = 40, n = 12;
    const auto theta = DecisionFunction::erf_scaled(0.9);
    std::vector<StepStatSeries> pooled;
    double direct = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      double v_sum = 0.0;
      for (int b = 0; b < 2; ++b) {
        StepStatSeries cell(T);
        for (auto& s : cell) {
          s.eta = 0.01 + 0.01 * rng.next_double();
          s.beta = 1.0 + rng.next_double();
          s.zeta_sq = 4.0 * rng.next_double();
          s.delta_y = 3.0 * (2.0 * rng.next_double() - 1.0);
          s.indicator = (b == 0) ? 1 : 0;
        }
        double sum = 0.0;
        for (const auto& s : cell) {
          const double err = double(s.indicator) - theta(s.delta_y);
          sum += s.beta * s.eta * s.zeta_sq * err * err;
        }
        v_sum += std::sqrt(sum);
        pooled.push_back(std::move(cell));
      }
      direct += v_sum / (2.0 * std::sqrt(2.0) * double(n));
    }
    direct /= double(R);
    REQUIRE(accumulate_bound(pooled, theta, n) == Approx(direct).margin(1e-12));
  }

  SECTION("record-based overload agrees") {
    SplitMix64 rng(10);
    const auto theta = DecisionFunction::tanh_scaled(1.2);
    const std::size_t n = 7;
    std::vector<StepStatSeries> stat_cells;
    std::vector<std::vector<StepKLRecord>> rec_cells;
    for (int c = 0; c < 4; ++c) {
      StepStatSeries sc(20);
      std::vector<StepKLRecord> rc;
      for (std::size_t t = 0; t < sc.size(); ++t) {
        auto& s = sc[t];
        s.eta = 0.05;
        s.beta = 2.0;
        s.zeta_sq = rng.next_double();
        s.delta_y = 2.0 * rng.next_double() - 1.0;
        s.indicator = c % 2;
        rc.push_back(make_record(t, s, theta, n));
      }
      stat_cells.push_back(std::move(sc));
      rec_cells.push_back(std::move(rc));
    }
    REQUIRE(accumulate_bound(rec_cells, n) ==
            Approx(accumulate_bound(stat_cells, theta, n)).margin(1e-14));
  }

  SECTION("empty input") {
    REQUIRE_THROWS_AS(
        accumulate_bound(std::span<const StepStatSeries>(),
                         DecisionFunction::constant_half(), 3),
        validation_error);
  }
}

TEST_CASE("bound envelope under the worst-case decision", "[ht]") {
  // accumulated bound <= worst-case theta value <= (sqrt2 Lhat / n) sqrt(sum beta eta)
  SplitMix64 rng(90);
  const std::size_t n = 9, T = 60;
  const double lhat = 1.7;
  const auto theta = DecisionFunction::erf_scaled(0.4);
  std::vector<StepStatSeries> cells;
  double sum_beta_eta = 0.0;
  for (int c = 0; c < 6; ++c) {
    StepStatSeries cell(T);
    for (std::size_t t = 0; t < T; ++t) {
      auto& s = cell[t];
      s.eta = 0.005 + 0.005 * rng.next_double();
      s.beta = 0.5 + rng.next_double();
      const double zeta_norm = 2.0 * lhat * rng.next_double();  // |zeta| <= 2 Lhat
      s.zeta_sq = zeta_norm * zeta_norm;
      s.delta_y = 4.0 * (2.0 * rng.next_double() - 1.0);
      s.indicator = c % 2;
      if (c == 0) sum_beta_eta += s.eta * s.beta;
    }
    cells.push_back(std::move(cell));
  }
  // same schedule in every cell
  for (auto& cell : cells)
    for (std::size_t t = 0; t < T; ++t) {
      cell[t].eta = cells[0][t].eta;
      cell[t].beta = cells[0][t].beta;
    }

  const double bound = accumulate_bound(cells, theta, n);
  double worst_case = 0.0;
  for (const auto& cell : cells) {
    double sum = 0.0;
    for (const auto& s : cell) sum += s.beta * s.eta * s.zeta_sq;  // (ind-theta)^2 == 1
    worst_case += std::sqrt(sum);
  }
  worst_case /= double(cells.size()) * double(n) * std::sqrt(2.0);
  REQUIRE(bound <= worst_case + 1e-12);
  const double lipschitz_envelope =
      std::sqrt(2.0) * lhat / double(n) * std::sqrt(sum_beta_eta);
  REQUIRE(worst_case <= lipschitz_envelope + 1e-12);
}

TEST_CASE("chain rule check", "[ht]") {
  SECTION("identical laws") {
    const std::vector<GaussianStepLaw> q{{0.2, 0.5}, {0.1, 0.3}};
    const auto [lhs, rhs] = chain_rule_check(q, q);
    REQUIRE(lhs == 0.0);
    REQUIRE(rhs == 0.0);
  }
  SECTION("single step is an equality") {
    const std::vector<GaussianStepLaw> q{{0.7, 0.4}};
    const std::vector<GaussianStepLaw> p{{0.1, 0.4}};
    const auto [lhs, rhs] = chain_rule_check(q, p);
    REQUIRE(lhs == Approx(rhs).margin(1e-15));
    REQUIRE(lhs == Approx(0.6 * 0.6 / 0.8).margin(1e-15));
  }
  SECTION("two-step random walk with shifted drifts") {
    const std::vector<GaussianStepLaw> q{{0.3, 0.5}, {-0.1, 0.5}};
    const std::vector<GaussianStepLaw> p{{0.1, 0.5}, {0.1, 0.5}};
    const auto [lhs, rhs] = chain_rule_check(q, p);
    // marginal KL: ((0.2 - 0.2))^2 / (2 * 1.0) = 0; per-step: 0.04 + 0.04
    REQUIRE(lhs == Approx(0.0).margin(1e-15));
    REQUIRE(rhs == Approx(0.08).margin(1e-15));
    REQUIRE(lhs <= rhs);
  }
  SECTION("weighted chains") {
    const std::vector<std::vector<GaussianStepLaw>> q{{{0.3, 0.5}, {0.2, 0.5}},
                                                      {{0.0, 1.0}}};
    const std::vector<std::vector<GaussianStepLaw>> p{{{0.1, 0.5}, {0.0, 0.5}},
                                                      {{0.5, 1.0}}};
    const std::vector<double> w{0.25, 0.75};
    const auto [lhs, rhs] = chain_rule_check(q, p, w);
    REQUIRE(lhs <= rhs + 1e-12);
    REQUIRE(rhs > 0.0);
  }
  SECTION("mismatched horizons or covariances") {
    const std::vector<GaussianStepLaw> q{{0.1, 0.5}};
    const std::vector<GaussianStepLaw> p{{0.1, 0.5}, {0.0, 0.5}};
    REQUIRE_THROWS_AS(chain_rule_check(q, p), validation_error);
    const std::vector<GaussianStepLaw> p2{{0.1, 0.6}};
    REQUIRE_THROWS_AS(chain_rule_check(q, p2), validation_error);
  }
}

TEST_CASE("kl_form_bound", "[ht]") {
  SECTION("degenerate values") {
    const std::vector<double> zeros{0.0, 0.0};
    const std::vector<double> w{0.5, 0.5};
    REQUIRE(kl_form_bound(zeros, w) == 0.0);
    const std::vector<double> half{0.5};
    const std::vector<double> one{1.0};
    REQUIRE(kl_form_bound(half, one) == Approx(1.0).margin(1e-15));
    const std::vector<double> neg{-0.1};
    REQUIRE_THROWS_AS(kl_form_bound(neg, one), validation_error);
  }

  SECTION("the conditional-marginal prior achieves the disintegrated MI") {
    // Lemma 3.4 equality on an enumerable problem, k=2: for each supersample,
    // E_u KL(Q(.|z,u) || P(.|z)) with P the conditional marginal equals
    // I^{z}(W;U).
    SplitMix64 rng(2718);
    const auto problem = random_problem(rng, 2, 2, 3);
    const std::size_t n = problem.n();
    const std::size_t u_count = 4;
    std::vector<double> avg_kls, weights, dmis;
    detail::for_each_supersample(problem, 2, [&](std::span<const std::size_t> cell,
                                                 double pz) {
      if (pz == 0.0) return;
      std::vector<std::vector<double>> rows;
      std::vector<std::size_t> s_digits(n);
      std::vector<double> prior(problem.w_card(), 0.0);
      for (std::size_t u = 0; u < u_count; ++u) {
        for (std::size_t c = 0; c < n; ++c)
          s_digits[c] = cell[((u >> (n - 1 - c)) & 1u) * n + c];
        const auto& row = problem.algorithm_row(problem.sample_index(s_digits));
        rows.emplace_back(row.probs().begin(), row.probs().end());
        for (std::size_t w = 0; w < problem.w_card(); ++w)
          prior[w] += row[w] / double(u_count);
      }
      double avg_kl = 0.0;
      for (const auto& q : rows)
        avg_kl += kl_divergence(FinitePmf(q), FinitePmf(prior)) / double(u_count);
      // independent route: flat (u, w) table MI
      std::vector<double> table;
      for (const auto& q : rows)
        for (double v : q) table.push_back(v / double(u_count));
      const double dmi = mutual_information(FiniteJointPmf({u_count, problem.w_card()},
                                                           std::move(table)));
      avg_kls.push_back(avg_kl);
      dmis.push_back(dmi);
      weights.push_back(pz);
    });
    for (std::size_t i = 0; i < avg_kls.size(); ++i)
      REQUIRE(avg_kls[i] == Approx(dmis[i]).margin(1e-10));

    // feeding the per-cell KLs through the generic bound reproduces the
    // m = n subset bound
    std::vector<double> scaled;
    for (double v : avg_kls) scaled.push_back(v / double(n));
    const double via_kl = kl_form_bound(scaled, weights);
    const auto sb = subset_cmi_bound(problem, n);
    REQUIRE(via_kl == Approx(sb.bound).margin(1e-10));
  }
}

TEST_CASE("step records csv", "[ht]") {
  StepStat s;
  s.eta = 0.01;
  s.beta = 2.0;
  s.zeta_sq = 1.5;
  s.delta_y = -0.25;
  s.indicator = 1;
  const auto rec = make_record(3, s, DecisionFunction::erf_scaled(1.0), 5);
  const auto csv = step_records_csv(std::vector<StepKLRecord>{rec});
  REQUIRE(csv.rfind("t,zeta_sq,delta_y,theta,sq_error,kl\n3,", 0) == 0);
}
