#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "infobound/exact_bounds.hpp"
#include "infobound/finite_problem.hpp"
#include "support/test_problems.hpp"

using namespace infobound;
using namespace ib_test;
using Catch::Approx;

namespace {
// Closed form for the identity instance: CMI^k = log k - E log(1 + Bin(k-1, 1/2)).
double identity_cmi_closed_form(std::size_t k) {
  double e = 0.0;
  double total = std::pow(2.0, -static_cast<double>(k - 1));
  double c = 1.0;  // C(k-1, j)
  for (std::size_t j = 0; j < k; ++j) {
    e += c * total * std::log(1.0 + static_cast<double>(j));
    c = c * static_cast<double>(k - 1 - j) / static_cast<double>(j + 1);
  }
  return std::log(static_cast<double>(k)) - e;
}
}  // namespace

TEST_CASE("problem validation", "[finite]") {
  REQUIRE_THROWS_AS(
      FiniteLearningProblem(FinitePmf::uniform(2), 1, {{0.0, 1.5}, {1.0, 0.0}},
                            ConditionalTable({2}, {FinitePmf::point_mass(2, 0),
                                                   FinitePmf::point_mass(2, 1)})),
      validation_error);
  REQUIRE_THROWS_AS(
      FiniteLearningProblem(FinitePmf::uniform(2), 2, {{0.0, 1.0}, {1.0, 0.0}},
                            ConditionalTable({2}, {FinitePmf::point_mass(2, 0),
                                                   FinitePmf::point_mass(2, 1)})),
      validation_error);
}

TEST_CASE("resource guard", "[finite]") {
  SplitMix64 rng(1);
  const auto p = random_problem(rng, 3, 3, 3);
  REQUIRE_THROWS_AS(exact_cmi_k(p, SuperSampleSpec{8, 3}), resource_error);
}

TEST_CASE("exact ege", "[finite]") {
  REQUIRE(exact_ege(constant_problem()) == Approx(0.0).margin(1e-14));
  REQUIRE(exact_ege(identity_problem()) == Approx(0.5).margin(1e-14));
  const auto p = memorize_mixture_problem();
  REQUIRE(exact_ege(p) == Approx(oracle_ege(p)).margin(1e-12));
}

TEST_CASE("exact iomi", "[finite]") {
  REQUIRE(exact_iomi(constant_problem()) == Approx(0.0).margin(1e-14));
  REQUIRE(exact_iomi(identity_problem()) == Approx(std::log(2.0)).margin(1e-12));
  const auto rr = randomized_response_problem();
  REQUIRE(exact_iomi(rr) == Approx(oracle_iomi(rr)).margin(1e-12));
  SplitMix64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto p = random_problem(rng, 2, 2, 3);
    REQUIRE(exact_iomi(p) == Approx(oracle_iomi(p)).margin(1e-12));
  }
}

TEST_CASE("exact cmi examples", "[finite]") {
  const auto id = identity_problem();
  // half the supersamples have equal columns (contribute 0), half log 2
  REQUIRE(exact_cmi_k(id, {2, 1}) == Approx(0.34657359027997264).margin(1e-12));
  REQUIRE(exact_cmi_k(id, {4, 1}) == Approx(0.5410977650193836).margin(1e-12));
  REQUIRE(exact_cmi_k(constant_problem(), {2, 2}) == Approx(0.0).margin(1e-14));
}

TEST_CASE("exact cmi cross-checked against the generic cmi oracle", "[finite]") {
  SplitMix64 rng(42);
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 1 + rng.next_below(2);
    const auto p = random_problem(rng, n, 2, 2);
    for (std::size_t k : {2, 3})
      REQUIRE(exact_cmi_k(p, {k, n}) == Approx(oracle_cmi_k(p, k)).margin(1e-11));
  }
}

TEST_CASE("decomposition identity", "[finite]") {
  const auto c = verify_decomposition(constant_problem(), {2, 2});
  REQUIRE(c.iomi == Approx(0.0).margin(1e-13));
  REQUIRE(c.cmi == Approx(0.0).margin(1e-13));
  REQUIRE(c.supersample_mi == Approx(0.0).margin(1e-13));

  const auto d = verify_decomposition(identity_problem(), {2, 1});
  REQUIRE(d.iomi == Approx(std::log(2.0)).margin(1e-12));
  REQUIRE(d.cmi == Approx(0.34657359027997264).margin(1e-12));
  REQUIRE(d.supersample_mi == Approx(std::log(2.0) - 0.34657359027997264).margin(1e-12));

  SplitMix64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_problem(rng, 1 + rng.next_below(2), 2, 2);
    REQUIRE_NOTHROW(verify_decomposition(p, {2, p.n()}));  // throws beyond 1e-10
  }
}

TEST_CASE("cmi limit scan", "[finite]") {
  const auto id = identity_problem();
  const std::vector<std::size_t> ks{2, 4, 8};
  const auto scan = cmi_limit_scan(id, ks);
  const double iomi = exact_iomi(id);
  double prev_gap = 1e9;
  for (const auto& [k, cmi] : scan) {
    REQUIRE(cmi == Approx(identity_cmi_closed_form(k)).margin(1e-10));
    const double gap = std::abs(cmi - iomi);
    REQUIRE(gap < prev_gap);
    prev_gap = gap;
  }

  const auto zeros = cmi_limit_scan(constant_problem(), ks);
  for (const auto& [k, cmi] : zeros) REQUIRE(cmi == Approx(0.0).margin(1e-13));
}

TEST_CASE("cmi at most iomi, gap shrinking on random instances", "[finite]") {
  SplitMix64 rng(77);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_problem(rng, 1, 2 + rng.next_below(2), 2 + rng.next_below(2));
    const double iomi = exact_iomi(p);
    const double c2 = exact_cmi_k(p, {2, 1});
    const double c8 = exact_cmi_k(p, {8, 1});
    REQUIRE(c2 <= iomi + 1e-10);
    REQUIRE(c8 <= iomi + 1e-10);
    REQUIRE(std::abs(c8 - iomi) < std::abs(c2 - iomi));
  }
}

TEST_CASE("subset bound", "[finite]") {
  SECTION("m=n rate equals cmi/n") {
    const auto p = memorize_mixture_problem();
    const auto sb = subset_cmi_bound(p, p.n());
    REQUIRE(sb.rate == Approx(exact_cmi_k(p, {2, p.n()}) / double(p.n())).margin(1e-11));
    REQUIRE(sb.jensen_bound == Approx(std::sqrt(2.0 * sb.rate)).margin(1e-12));
  }
  SECTION("constant algorithm gives zero at every m") {
    const auto p = constant_problem(2);
    for (std::size_t m = 1; m <= 2; ++m) {
      const auto sb = subset_cmi_bound(p, m);
      REQUIRE(sb.rate == Approx(0.0).margin(1e-13));
      REQUIRE(sb.bound == Approx(0.0).margin(1e-13));
    }
  }
  SECTION("m out of range") {
    REQUIRE_THROWS_AS(subset_cmi_bound(identity_problem(), 2), validation_error);
    REQUIRE_THROWS_AS(subset_cmi_bound(identity_problem(), 0), validation_error);
  }
}

TEST_CASE("rate monotonicity in m", "[finite]") {
  REQUIRE_THROWS_AS(monotonicity_check(constant_problem(2), 1, 1), validation_error);
  REQUIRE(monotonicity_check(constant_problem(2), 1, 2));  // 0 = 0

  SplitMix64 rng(123);
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 2 + rng.next_below(2);
    const auto p = random_problem(rng, n, 2 + rng.next_below(2), 2 + rng.next_below(2));
    for (std::size_t m1 = 1; m1 < n; ++m1)
      for (std::size_t m2 = m1 + 1; m2 <= n; ++m2) REQUIRE(monotonicity_check(p, m1, m2));
  }
}

TEST_CASE("individual-sample bound", "[finite]") {
  REQUIRE(individual_sample_bound(constant_problem()) == Approx(0.0).margin(1e-13));
  // identity n=1: half the supersamples reveal U exactly
  REQUIRE(individual_sample_bound(identity_problem()) ==
          Approx(0.5887050112577373).margin(1e-12));

  SplitMix64 rng(321);
  for (int i = 0; i < 25; ++i) {
    const std::size_t n = 1 + rng.next_below(3);
    const auto p = random_problem(rng, n, 2, 2);
    const double isb = individual_sample_bound(p);
    const double cmi = exact_cmi_k(p, {2, n});
    REQUIRE(isb <= std::sqrt(2.0 * cmi / double(n)) + 1e-10);
  }
}

TEST_CASE("fano lower bound", "[finite]") {
  REQUIRE(fano_lower_bound(4.0 * std::log(2.0), 4, 2) < 0.0);
  REQUIRE(fano_lower_bound(0.0, 4, 2) == Approx(0.75).margin(1e-15));
  const auto id = identity_problem();
  const double fano = fano_lower_bound(exact_cmi_k(id, {2, 1}), 1, 2);
  REQUIRE(fano == Approx(-0.5).margin(1e-12));
  // the exhaustive MAP decoder cannot beat the Fano bound
  const double map_err = oracle_map_error(id, 2);
  REQUIRE(map_err == Approx(0.25).margin(1e-12));
  REQUIRE(map_err >= fano - 1e-12);

  SplitMix64 rng(55);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_problem(rng, 1 + rng.next_below(2), 2, 3);
    const double f = fano_lower_bound(exact_cmi_k(p, {2, p.n()}), p.n(), 2);
    REQUIRE(oracle_map_error(p, 2) >= f - 1e-10);
  }
}

TEST_CASE("improved-constant bound", "[finite]") {
  REQUIRE(improved_constant_bound(0.0, 10, 4) == 0.0);
  REQUIRE_THROWS_AS(improved_constant_bound(1.0, 10, 2), validation_error);

  SECTION("closed-form lambda matches golden-section minimization") {
    for (double cmi : {0.05, 1.0, 7.0}) {
      for (std::size_t n : {1u, 10u, 100u}) {
        for (std::size_t k : {3u, 10u, 64u}) {
          const double kk = static_cast<double>(k);
          const double coeff =
              (kk * kk * kk + 7 * kk * kk - 8 * kk - 16) / (4 * (kk * kk * kk - 2 * kk * kk));
          const auto objective = [&](double lam) {
            const double x = lam / static_cast<double>(n);
            return cmi / lam + (std::exp(x) - x - 1.0) / x * coeff;
          };
          // keep exp(lambda/n) finite so the objective stays unimodal in fp
          const double lam_star = golden_minimize(objective, 1e-8, 700.0 * n);
          REQUIRE(improved_constant_bound(cmi, n, k) ==
                  Approx(objective(lam_star)).margin(1e-8));
        }
      }
    }
  }

  SECTION("k -> infinity variant approaches the sqrt(cmi/(2n)) rate") {
    const double cmi = 1.0;
    double prev_ratio = 1e9;
    for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      const double ratio = improved_constant_bound_limit(cmi, static_cast<std::size_t>(n)) /
                           std::sqrt(cmi / (2.0 * n));
      REQUIRE(ratio >= 1.0 - 1e-12);
      REQUIRE(ratio < prev_ratio);
      prev_ratio = ratio;
    }
    REQUIRE(prev_ratio <= 1.05);
  }
}

TEST_CASE("exact report", "[finite]") {
  SECTION("constant algorithm") {
    const auto r = exact_report(constant_problem(), {2, 2});
    REQUIRE(r.ege == Approx(0.0).margin(1e-13));
    for (const auto& [name, v] : r.all_bounds()) {
      INFO(name);
      // sqrt amplifies ~1e-17 accumulation noise in the information terms
      REQUIRE(v == Approx(0.0).margin(1e-7));
    }
  }
  SECTION("identity instance") {
    const auto r = exact_report(identity_problem(), {2, 1});
    REQUIRE(r.ege == Approx(0.5).margin(1e-13));
    REQUIRE(r.cmi_k == Approx(0.34657359027997264).margin(1e-12));
    REQUIRE(r.bound_thm_1_3 == Approx(0.8325546111576977).margin(1e-12));
    REQUIRE(r.bound_thm_1_1 == Approx(0.5887050112577373).margin(1e-12));
    REQUIRE(r.fano_lower == Approx(-0.5).margin(1e-12));
    REQUIRE(r.b1_k == 3);
    REQUIRE_NOTHROW(r.check_validity());
    // serialization surfaces
    const auto j = r.to_json();
    REQUIRE(j.at("cmi_k").get<double>() == Approx(0.346574).margin(1e-6));
    REQUIRE(r.to_csv().find("bound_thm_1_3") != std::string::npos);
  }
  SECTION("validity on random problems") {
    SplitMix64 rng(271828);
    for (int i = 0; i < 50; ++i) {
      const std::size_t n = 1 + rng.next_below(3);
      const auto p = random_problem(rng, n, 2 + rng.next_below(2), 2 + rng.next_below(2));
      REQUIRE_NOTHROW(exact_report(p, {2, n}));  // enforce_validity throws on violation
    }
  }
}

TEST_CASE("problem json round trip", "[finite]") {
  const auto p = memorize_mixture_problem();
  const auto q = FiniteLearningProblem::from_json(p.to_json());
  REQUIRE(exact_iomi(q) == Approx(exact_iomi(p)).margin(1e-13));
  REQUIRE_THROWS_AS(FiniteLearningProblem::from_json(nlohmann::json{{"n", 1}}),
                    validation_error);
}
