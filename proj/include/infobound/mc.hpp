#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infobound/baselines.hpp"
#include "infobound/data.hpp"
#include "infobound/decision.hpp"
#include "infobound/errors.hpp"
#include "infobound/ht.hpp"
#include "infobound/ld.hpp"
#include "infobound/model.hpp"
#include "infobound/rng.hpp"

// Monte Carlo estimation of the trajectory bound: V1/V2 branch simulation,
// repetition management, theta-scale optimization with a held-out half, and
// aggregation into per-iteration curves.

namespace infobound {

struct ThetaOptConfig {
  bool enabled = true;
  std::vector<DecisionFunction::Kind> kinds = {DecisionFunction::Kind::kErf,
                                               DecisionFunction::Kind::kTanh};
  double grid_min = 1e-3;
  double grid_max = 1e3;
  std::size_t grid_points = 25;
  std::size_t golden_iters = 48;
};

// Which baseline columns to compute and emit.
struct BaselineSelect {
  bool li_dd = true;
  bool negrea_dd = true;
  bool li_lip = true;
  bool negrea_lip = true;
};

struct ExperimentConfig {
  DataSource source = DataSource::blobs(default_blobs());
  Model model = Model::logistic_regression(2, 2);
  std::size_t n = 50;
  LDSchedule schedule = LDSchedule::constant(500, 0.01, 1e4);
  std::size_t repetitions = 40;
  std::uint64_t master_seed = 1;
  DecisionFunction theta = DecisionFunction::erf_scaled(1.0);
  ThetaOptConfig theta_opt;
  bool baselines = true;
  BaselineSelect baseline_select;
  std::size_t eval_factor = 10;  // evaluation set size = eval_factor * n
  std::size_t threads = 0;       // 0 = hardware concurrency

  static BlobsSpec default_blobs() {
    BlobsSpec b;
    b.means = {{-0.6, -0.6}, {0.6, 0.6}};
    b.cov_scale = 1.0;
    b.seed = 0;
    return b;
  }

  void validate() const {
    if (repetitions < 2)
      throw validation_error("ExperimentConfig: need at least two repetitions");
    if (n < 2) throw validation_error("ExperimentConfig: n must be >= 2");
    if (eval_factor < 1) throw validation_error("ExperimentConfig: eval_factor >= 1");
    schedule.validate();
    if (source.feature_dim() != model.feature_dim())
      throw validation_error("ExperimentConfig: data/model feature dim mismatch");
    if (source.num_classes() > model.num_classes())
      throw validation_error("ExperimentConfig: more classes in data than model");
  }

  static ExperimentConfig from_json(const nlohmann::json& j);
};

namespace detail {

inline Model model_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "logreg");
  if (kind == "logreg" || kind == "logistic-regression")
    return Model::logistic_regression(j.value("features", std::size_t{2}),
                                      j.value("classes", std::size_t{2}));
  if (kind == "mlp")
    return Model::mlp(j.at("layers").get<std::vector<std::size_t>>());
  throw validation_error("unknown model kind: " + kind);
}

inline LDSchedule schedule_from_json(const nlohmann::json& j) {
  if (j.contains("eta") && j.at("eta").is_array()) {
    LDSchedule s;
    s.eta = j.at("eta").get<std::vector<double>>();
    s.beta = j.at("beta").get<std::vector<double>>();
    s.validate();
    return s;
  }
  const auto T = j.value("T", std::size_t{500});
  const double eta = j.value("eta", 0.01);
  const double beta = j.value("beta", 1e4);
  const double eta_factor = j.value("eta_factor", 1.0);
  const double beta_factor = j.value("beta_factor", 1.0);
  if (eta_factor == 1.0 && beta_factor == 1.0)
    return LDSchedule::constant(T, eta, beta);
  return LDSchedule::decayed(T, eta, eta_factor, beta, beta_factor);
}

inline std::vector<DecisionFunction::Kind> kinds_from_json(const nlohmann::json& j) {
  std::vector<DecisionFunction::Kind> kinds;
  for (const auto& name : j) {
    const std::string s = name.get<std::string>();
    if (s == "erf") kinds.push_back(DecisionFunction::Kind::kErf);
    else if (s == "tanh") kinds.push_back(DecisionFunction::Kind::kTanh);
    else if (s == "sign") kinds.push_back(DecisionFunction::Kind::kSign);
    else if (s == "constant-half") kinds.push_back(DecisionFunction::Kind::kConstantHalf);
    else throw validation_error("theta_opt: unknown kind \"" + s + "\"");
  }
  return kinds;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("data")) c.source = DataSource::from_json(j.at("data"));
  if (j.contains("model")) c.model = detail::model_from_json(j.at("model"));
  c.n = j.value("n", c.n);
  if (j.contains("schedule")) c.schedule = detail::schedule_from_json(j.at("schedule"));
  c.repetitions = j.value("repetitions", c.repetitions);
  c.master_seed = j.value("master_seed", c.master_seed);
  if (j.contains("theta")) c.theta = DecisionFunction::parse(j.at("theta").get<std::string>());
  if (j.contains("theta_opt")) {
    const auto& o = j.at("theta_opt");
    c.theta_opt.enabled = o.value("enabled", true);
    if (o.contains("kinds")) c.theta_opt.kinds = detail::kinds_from_json(o.at("kinds"));
    c.theta_opt.grid_min = o.value("grid_min", c.theta_opt.grid_min);
    c.theta_opt.grid_max = o.value("grid_max", c.theta_opt.grid_max);
    c.theta_opt.grid_points = o.value("grid_points", c.theta_opt.grid_points);
  }
  c.baselines = j.value("baselines", c.baselines);
  c.eval_factor = j.value("eval_factor", c.eval_factor);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

// Per-(repetition, branch) output: the theta-free step statistics plus the
// largest per-point gradient norm seen (the empirical Lipschitz candidate).
struct RepetitionResult {
  std::array<StepStatSeries, 2> branch_stats;
  double max_point_grad_norm = 0.0;
};

// Runs both index branches of one repetition from n+1 data points: the last
// two drawn points are column J's candidates, everything else is shared.
// Branches share W_0; noise streams are independent.
inline RepetitionResult run_repetition(const ExperimentConfig& config,
                                       std::size_t rep_index) {
  const std::size_t n = config.n;
  const std::size_t eval_count = config.eval_factor * n;
  const auto points =
      config.source.sample(n + 1 + eval_count,
                           derive_seed(config.master_seed, stream::kData, rep_index));
  SplitMix64 idx_rng(derive_seed(config.master_seed, stream::kIndices, rep_index));
  const std::size_t j = idx_rng.next_below(n);

  SuperSamplePair ss;
  ss.u.assign(n, 1);
  ss.j = j;
  ss.rows[0].resize(n);
  ss.rows[1].resize(n);
  std::size_t next_point = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (c == j) continue;
    ss.rows[0][c] = points[next_point];
    ss.rows[1][c] = points[next_point];  // unused row entry
    ++next_point;
  }
  ss.rows[0][j] = points[n - 1];
  ss.rows[1][j] = points[n];
  const std::span<const DataPoint> eval_set(points.data() + n + 1, eval_count);

  const ParameterVector w0 =
      config.model.initial_params(derive_seed(config.master_seed, stream::kInit, rep_index));

  RepetitionResult result;
  const std::size_t T = config.schedule.horizon();
  for (int u = 1; u <= 2; ++u) {
    StepStatSeries& stats = result.branch_stats[static_cast<std::size_t>(u - 1)];
    stats.reserve(T);
    const std::vector<DataPoint> training = ss.training_set(u);
    HypothesisTestState y;
    LDRunOptions options{/*keep_params=*/false, /*keep_noise=*/false,
                         /*keep_grads=*/false};
    const auto observer = [&](const LDStepView& view) {
      StepStat s;
      s.eta = view.eta;
      s.beta = view.beta;
      s.indicator = (u == 1) ? 1 : 0;
      s.delta_y = y.delta();  // statistic observable from W_0..W_t
      const std::size_t d = view.w_prev.size();
      double zsq = 0.0, gsq = 0.0, inc = 0.0;
      const auto& gown = (u == 1) ? view.cand_grad_1 : view.cand_grad_2;
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < d; ++i) {
        const double z = view.cand_grad_1[i] - view.cand_grad_2[i];
        zsq += z * z;
        const double g =
            (static_cast<double>(n - 1) * view.loo_grad[i] + gown[i]) * inv_n;
        gsq += g * g;
        const double ic = gown[i] - view.loo_grad[i];
        inc += ic * ic;
      }
      s.zeta_sq = zsq;
      s.grad_sq = gsq;
      s.incoherence = inc;
      s.surrogate_risk = view.surrogate_risk;
      // risks are evaluated at W_{t+1}: row t's bound prefix controls W_{t+1}
      double tr = 0.0;
      for (const DataPoint& z : training) tr += config.model.true_loss(view.w_next, z);
      s.train01 = tr / static_cast<double>(training.size());
      double te = 0.0;
      for (const DataPoint& z : eval_set) te += config.model.true_loss(view.w_next, z);
      s.test01 = te / static_cast<double>(eval_set.size());
      stats.push_back(s);

      y = update_y(y, view.w_prev, view.w_next, view.eta, view.beta, view.loo_grad,
                   view.cand_grad_1, view.cand_grad_2, n);
      result.max_point_grad_norm =
          std::max(result.max_point_grad_norm, view.max_point_grad_norm);
    };
    run_ld(config.model, ss, u, config.schedule,
           derive_seed(config.master_seed, stream::kNoise,
                       rep_index * 2 + static_cast<std::size_t>(u - 1)),
           w0, options, observer);
  }
  return result;
}

namespace detail {

template <typename F>
inline void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

struct ThetaOptResult {
  DecisionFunction theta = DecisionFunction::constant_half();
  double train_bound = 0.0;
  double unbiased_bound = 0.0;
  bool performed = false;
};

// Selects (kind, scale) minimizing the accumulated bound on the selection
// cells only; the reported value is computed on the held-out cells. Ties go
// to the earlier kind and the smaller scale.
inline ThetaOptResult optimize_theta(std::span<const StepStatSeries> selection_cells,
                                     std::span<const StepStatSeries> heldout_cells,
                                     const ThetaOptConfig& opt, std::size_t n) {
  if (selection_cells.size() < 2 || heldout_cells.size() < 2)
    throw validation_error("optimize_theta: need at least two cells per half");
  if (opt.kinds.empty()) throw validation_error("optimize_theta: empty theta family");
  if (!(opt.grid_min > 0.0) || !(opt.grid_max >= opt.grid_min) || opt.grid_points < 1)
    throw validation_error("optimize_theta: degenerate scale grid");

  const auto train_value = [&](const DecisionFunction& theta) {
    return accumulate_bound(selection_cells, theta, n);
  };

  DecisionFunction best = DecisionFunction::constant_half();
  double best_value = 0.0;
  bool have_best = false;

  const double log_min = std::log10(opt.grid_min);
  const double log_max = std::log10(opt.grid_max);
  const double log_step =
      opt.grid_points > 1 ? (log_max - log_min) / double(opt.grid_points - 1) : 0.0;

  for (const auto kind : opt.kinds) {
    const bool scaled = (kind == DecisionFunction::Kind::kErf ||
                         kind == DecisionFunction::Kind::kTanh);
    if (!scaled) {
      const DecisionFunction theta{kind, 1.0};
      const double v = train_value(theta);
      if (!have_best || v < best_value) {
        best = theta;
        best_value = v;
        have_best = true;
      }
      continue;
    }
    double kind_best_log_a = log_min;
    double kind_best_value = 0.0;
    bool kind_have = false;
    for (std::size_t g = 0; g < opt.grid_points; ++g) {
      const double log_a = log_min + log_step * static_cast<double>(g);
      const DecisionFunction theta{kind, std::pow(10.0, log_a)};
      const double v = train_value(theta);
      if (!kind_have || v < kind_best_value) {
        kind_best_value = v;
        kind_best_log_a = log_a;
        kind_have = true;
      }
    }
    // golden-section refinement on log10(a), accepted only on strict improvement
    if (opt.golden_iters > 0 && log_step > 0.0) {
      double lo = std::max(log_min, kind_best_log_a - log_step);
      double hi = std::min(log_max, kind_best_log_a + log_step);
      const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
      double fc = train_value({kind, std::pow(10.0, c)});
      double fd = train_value({kind, std::pow(10.0, d)});
      for (std::size_t it = 0; it < opt.golden_iters; ++it) {
        if (fc < fd) {
          hi = d; d = c; fd = fc;
          c = hi - phi * (hi - lo);
          fc = train_value({kind, std::pow(10.0, c)});
        } else {
          lo = c; c = d; fc = fd;
          d = lo + phi * (hi - lo);
          fd = train_value({kind, std::pow(10.0, d)});
        }
      }
      const double log_a = 0.5 * (lo + hi);
      const double v = train_value({kind, std::pow(10.0, log_a)});
      if (v < kind_best_value) {
        kind_best_value = v;
        kind_best_log_a = log_a;
      }
    }
    const DecisionFunction theta{kind, std::pow(10.0, kind_best_log_a)};
    if (!have_best || kind_best_value < best_value) {
      best = theta;
      best_value = kind_best_value;
      have_best = true;
    }
  }

  ThetaOptResult result;
  result.theta = best;
  result.train_bound = best_value;
  result.unbiased_bound = accumulate_bound(heldout_cells, best, n);
  result.performed = true;
  return result;
}

struct BoundCurve {
  std::vector<double> cmi_mean, cmi_stderr, cmi_opt_mean;
  std::vector<double> li_dd, negrea_dd, li_lip, negrea_lip;
  std::vector<double> test_err_sq_mean, zeta_sq_mean, incoherence_mean;
  std::vector<double> train01, test01, ege_hat;
  bool has_baselines = false;
  bool has_theta_opt = false;

  DecisionFunction report_theta = DecisionFunction::erf_scaled(1.0);
  ThetaOptResult theta_opt;
  double cmi_report_heldout = 0.0;  // report theta evaluated on the held-out half
  double empirical_lipschitz = 0.0;
  double final_ege_stderr = 0.0;
  double final_diff_stderr = 0.0;  // stderr of per-repetition (EGE - bound)
  std::size_t repetitions = 0;
  std::size_t n = 0;

  std::size_t horizon() const noexcept { return cmi_mean.size(); }

  std::string to_csv() const;
  nlohmann::json summary_json(const ExperimentConfig& config) const;
};

// Full experiment: repetitions in parallel (deterministic reduce in
// repetition order), then curve aggregation and theta optimization.
inline BoundCurve estimate_curves(const ExperimentConfig& config) {
  config.validate();
  const std::size_t R = config.repetitions;
  const std::size_t T = config.schedule.horizon();
  const std::size_t n = config.n;

  std::vector<RepetitionResult> reps(R);
  detail::parallel_for(R, config.threads,
                       [&](std::size_t r) { reps[r] = run_repetition(config, r); });

  BoundCurve curve;
  curve.report_theta = config.theta;
  curve.repetitions = R;
  curve.n = n;
  curve.has_baselines = config.baselines;
  for (const auto& rep : reps)
    curve.empirical_lipschitz =
        std::max(curve.empirical_lipschitz, rep.max_point_grad_norm);

  const std::size_t cells = 2 * R;
  const double inv_cells = 1.0 / static_cast<double>(cells);
  const double root2 = std::sqrt(2.0);

  // running per-cell prefix sums
  std::vector<double> sum_bound(cells, 0.0), sum_grad(cells, 0.0), sum_inc(cells, 0.0);
  double sum_beta_eta = 0.0;

  curve.cmi_mean.resize(T);
  curve.cmi_stderr.resize(T);
  curve.li_dd.assign(T, 0.0);
  curve.negrea_dd.assign(T, 0.0);
  curve.li_lip.assign(T, 0.0);
  curve.negrea_lip.assign(T, 0.0);
  curve.test_err_sq_mean.resize(T);
  curve.zeta_sq_mean.resize(T);
  curve.incoherence_mean.resize(T);
  curve.train01.resize(T);
  curve.test01.resize(T);
  curve.ege_hat.resize(T);

  std::vector<double> rep_bound(R, 0.0);
  std::vector<double> rep_ege(R, 0.0);

  for (std::size_t t = 0; t < T; ++t) {
    double err_sq = 0.0, zeta_sq = 0.0, inc_mean = 0.0;
    double train = 0.0, test = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      for (int b = 0; b < 2; ++b) {
        const StepStat& s = reps[r].branch_stats[static_cast<std::size_t>(b)][t];
        const std::size_t cell = r * 2 + static_cast<std::size_t>(b);
        const double theta_val = curve.report_theta(s.delta_y);
        const double err = static_cast<double>(s.indicator) - theta_val;
        sum_bound[cell] += s.beta * s.eta * s.zeta_sq * err * err;
        sum_grad[cell] += s.beta * s.eta * s.grad_sq;
        sum_inc[cell] += s.beta * s.eta * s.incoherence;
        err_sq += err * err;
        zeta_sq += s.zeta_sq;
        inc_mean += s.incoherence;
        train += s.train01;
        test += s.test01;
      }
    }
    sum_beta_eta += config.schedule.beta[t] * config.schedule.eta[t];

    double mean_b = 0.0, mean_sq = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double v = (std::sqrt(sum_bound[r * 2]) + std::sqrt(sum_bound[r * 2 + 1])) /
                       (2.0 * root2 * static_cast<double>(n));
      rep_bound[r] = v;
      mean_b += v;
      mean_sq += v * v;
    }
    mean_b /= static_cast<double>(R);
    const double var =
        std::max(0.0, mean_sq / static_cast<double>(R) - mean_b * mean_b) *
        static_cast<double>(R) / static_cast<double>(R - 1);
    curve.cmi_mean[t] = mean_b;
    curve.cmi_stderr[t] = std::sqrt(var / static_cast<double>(R));

    if (config.baselines) {
      double li = 0.0, ng = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        li += std::sqrt(sum_grad[c]);
        ng += std::sqrt(sum_inc[c]);
      }
      curve.li_dd[t] = root2 / static_cast<double>(n) * li * inv_cells;
      curve.negrea_dd[t] = ng * inv_cells / (4.0 * static_cast<double>(n - 1));
      curve.li_lip[t] =
          li_lipschitz_bound(sum_beta_eta, curve.empirical_lipschitz, n);
      curve.negrea_lip[t] =
          negrea_lipschitz_bound(sum_beta_eta, curve.empirical_lipschitz, n);
    }
    curve.test_err_sq_mean[t] = err_sq * inv_cells;
    curve.zeta_sq_mean[t] = zeta_sq * inv_cells;
    curve.incoherence_mean[t] = inc_mean * inv_cells;
    curve.train01[t] = train * inv_cells;
    curve.test01[t] = test * inv_cells;
    curve.ege_hat[t] = curve.test01[t] - curve.train01[t];
  }

  // stderr of the final EGE estimate and of the per-repetition difference
  {
    double mean_e = 0.0, mean_d = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      double e = 0.0;
      for (int b = 0; b < 2; ++b) {
        const StepStat& s = reps[r].branch_stats[static_cast<std::size_t>(b)].back();
        e += s.test01 - s.train01;
      }
      rep_ege[r] = 0.5 * e;
      mean_e += rep_ege[r];
    }
    mean_e /= static_cast<double>(R);
    double var_e = 0.0, var_d = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double de = rep_ege[r] - mean_e;
      var_e += de * de;
      const double diff = rep_ege[r] - rep_bound[r];
      mean_d += diff;
    }
    mean_d /= static_cast<double>(R);
    for (std::size_t r = 0; r < R; ++r) {
      const double dd = (rep_ege[r] - rep_bound[r]) - mean_d;
      var_d += dd * dd;
    }
    var_e /= static_cast<double>(R - 1);
    var_d /= static_cast<double>(R - 1);
    curve.final_ege_stderr = std::sqrt(var_e / static_cast<double>(R));
    curve.final_diff_stderr = std::sqrt(var_d / static_cast<double>(R));
  }

  // theta optimization on the parity split: even repetitions select, odd report
  if (config.theta_opt.enabled && R >= 4) {
    std::vector<StepStatSeries> selection, heldout;
    for (std::size_t r = 0; r < R; ++r) {
      auto& half = (r % 2 == 0) ? selection : heldout;
      half.push_back(reps[r].branch_stats[0]);
      half.push_back(reps[r].branch_stats[1]);
    }
    curve.theta_opt = optimize_theta(selection, heldout, config.theta_opt, n);
    curve.cmi_report_heldout = accumulate_bound(
        std::span<const StepStatSeries>(heldout), curve.report_theta, n);
    curve.has_theta_opt = true;
    curve.cmi_opt_mean.resize(T);
    for (std::size_t t = 0; t < T; ++t)
      curve.cmi_opt_mean[t] = accumulate_bound(std::span<const StepStatSeries>(heldout),
                                               curve.theta_opt.theta, n, t);
  }

  return curve;
}

inline std::string BoundCurve::to_csv() const {
  std::string out =
      "t,cmi_mean,cmi_stderr,cmi_opt_mean,li_dd,negrea_dd,li_lip,negrea_lip,"
      "test_err_sq_mean,zeta_sq_mean,incoherence_mean,train01,test01,ege_hat\n";
  for (std::size_t t = 0; t < horizon(); ++t) {
    out += std::to_string(t);
    const auto field = [&](double v, bool present) {
      out += ',';
      if (present) out += detail::format_value(v);
    };
    field(cmi_mean[t], true);
    field(cmi_stderr[t], true);
    field(has_theta_opt ? cmi_opt_mean[t] : 0.0, has_theta_opt);
    field(li_dd[t], has_baselines);
    field(negrea_dd[t], has_baselines);
    field(li_lip[t], has_baselines);
    field(negrea_lip[t], has_baselines);
    field(test_err_sq_mean[t], true);
    field(zeta_sq_mean[t], true);
    field(incoherence_mean[t], true);
    field(train01[t], true);
    field(test01[t], true);
    field(ege_hat[t], true);
    out += '\n';
  }
  return out;
}

inline nlohmann::json BoundCurve::summary_json(const ExperimentConfig& config) const {
  const std::size_t last = horizon() - 1;
  nlohmann::json j;
  j["n"] = n;
  j["iterations"] = horizon();
  j["repetitions"] = repetitions;
  j["master_seed"] = config.master_seed;
  j["theta"] = report_theta.to_string();
  j["train01"] = train01[last];
  j["test01"] = test01[last];
  j["generalization_error"] = {{"mean", ege_hat[last]}, {"stderr", final_ege_stderr}};
  j["cmi_bound"] = {{"mean", cmi_mean[last]},
                    {"stderr", cmi_stderr[last]},
                    {"diff_stderr", final_diff_stderr}};
  if (has_theta_opt) {
    j["cmi_opt"] = {{"theta", theta_opt.theta.to_string()},
                    {"selection_bound", theta_opt.train_bound},
                    {"unbiased_bound", theta_opt.unbiased_bound},
                    {"report_theta_heldout", cmi_report_heldout}};
  }
  if (has_baselines) {
    j["baselines"] = {{"li_data_dependent", li_dd[last]},
                      {"negrea_data_dependent", negrea_dd[last]},
                      {"li_lipschitz", li_lip[last]},
                      {"negrea_lipschitz", negrea_lip[last]},
                      {"empirical_lipschitz", empirical_lipschitz},
                      {"constants", "consistency-pinned"}};
  }
  return j;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw io_error("failed writing " + path);
}

}  // namespace infobound
