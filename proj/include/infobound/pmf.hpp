#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infobound/errors.hpp"

namespace infobound {

// Normalization tolerance used when validating distributions on construction.
inline constexpr double kPmfTolerance = 1e-12;

// Probability mass function on {0, ..., size-1}. Weights are validated on
// construction; renormalization only happens through the explicit factory.
class FinitePmf {
 public:
  explicit FinitePmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw validation_error("FinitePmf: empty support");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw validation_error("FinitePmf: negative weight");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfTolerance)
      throw validation_error("FinitePmf: weights sum to " + std::to_string(sum) +
                             ", not 1");
  }

  static FinitePmf uniform(std::size_t n) {
    return FinitePmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static FinitePmf point_mass(std::size_t n, std::size_t at) {
    std::vector<double> p(n, 0.0);
    p.at(at) = 1.0;
    return FinitePmf(std::move(p));
  }

  // Explicit renormalization of nonnegative weights.
  static FinitePmf normalized(std::vector<double> weights) {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw validation_error("FinitePmf: negative weight");
      sum += w;
    }
    if (sum <= 0.0) throw validation_error("FinitePmf: zero total weight");
    for (double& w : weights) w /= sum;
    return FinitePmf(std::move(weights));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

// Joint pmf stored as a flat row-major array: axis 0 has the largest stride.
class FiniteJointPmf {
 public:
  FiniteJointPmf(std::vector<std::size_t> dims, std::vector<double> probs)
      : dims_(std::move(dims)), probs_(std::move(probs)) {
    if (dims_.empty()) throw validation_error("FiniteJointPmf: no axes");
    std::size_t cells = 1;
    for (std::size_t d : dims_) {
      if (d == 0) throw validation_error("FiniteJointPmf: zero-size axis");
      cells *= d;
    }
    if (cells != probs_.size())
      throw validation_error("FiniteJointPmf: dims/probs size mismatch");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw validation_error("FiniteJointPmf: negative weight");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfTolerance)
      throw validation_error("FiniteJointPmf: weights sum to " +
                             std::to_string(sum) + ", not 1");
  }

  // Schema: {"dims":[...], "probs":[...]}
  static FiniteJointPmf from_json(const nlohmann::json& j) {
    if (!j.contains("dims") || !j.contains("probs"))
      throw validation_error("joint pmf JSON needs \"dims\" and \"probs\"");
    return FiniteJointPmf(j.at("dims").get<std::vector<std::size_t>>(),
                          j.at("probs").get<std::vector<double>>());
  }

  std::size_t rank() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::span<const double> probs() const noexcept { return probs_; }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) f = f * dims_[a] + idx[a];
    return f;
  }

  double at(std::span<const std::size_t> idx) const {
    return probs_[flat_index(idx)];
  }

  FinitePmf marginal(std::size_t axis) const {
    check_axis(axis);
    std::vector<double> m(dims_[axis], 0.0);
    for_each_cell([&](std::span<const std::size_t> idx, double p) {
      m[idx[axis]] += p;
    });
    return FinitePmf::normalized(std::move(m));
  }

  double axis_value_prob(std::size_t axis, std::size_t value) const {
    check_axis(axis);
    double m = 0.0;
    for_each_cell([&](std::span<const std::size_t> idx, double p) {
      if (idx[axis] == value) m += p;
    });
    return m;
  }

  // Marginal joint over the listed axes, in the listed order.
  FiniteJointPmf marginal_joint(std::span<const std::size_t> axes) const {
    std::vector<std::size_t> out_dims;
    out_dims.reserve(axes.size());
    for (std::size_t a : axes) {
      check_axis(a);
      out_dims.push_back(dims_[a]);
    }
    std::size_t cells = 1;
    for (std::size_t d : out_dims) cells *= d;
    std::vector<double> out(cells, 0.0);
    for_each_cell([&](std::span<const std::size_t> idx, double p) {
      std::size_t f = 0;
      for (std::size_t a = 0; a < axes.size(); ++a)
        f = f * out_dims[a] + idx[axes[a]];
      out[f] += p;
    });
    return FiniteJointPmf(std::move(out_dims), std::move(out));
  }

  // Collapses each group of axes into a single axis (axes omitted from every
  // group are summed out). Used for identities like I(X;Y,Z).
  FiniteJointPmf group_axes(const std::vector<std::vector<std::size_t>>& groups) const {
    std::vector<std::size_t> out_dims;
    for (const auto& g : groups) {
      std::size_t d = 1;
      for (std::size_t a : g) {
        check_axis(a);
        d *= dims_[a];
      }
      out_dims.push_back(d);
    }
    std::size_t cells = 1;
    for (std::size_t d : out_dims) cells *= d;
    std::vector<double> out(cells, 0.0);
    for_each_cell([&](std::span<const std::size_t> idx, double p) {
      std::size_t f = 0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        std::size_t gi = 0;
        for (std::size_t a : groups[g]) gi = gi * dims_[a] + idx[a];
        f = f * out_dims[g] + gi;
      }
      out[f] += p;
    });
    return FiniteJointPmf(std::move(out_dims), std::move(out));
  }

  // Conditional joint over the remaining axes given axis == value.
  FiniteJointPmf slice(std::size_t axis, std::size_t value) const {
    check_axis(axis);
    const double pz = axis_value_prob(axis, value);
    if (pz <= 0.0)
      throw validation_error("FiniteJointPmf: conditioning on zero-probability value");
    std::vector<std::size_t> out_dims;
    for (std::size_t a = 0; a < dims_.size(); ++a)
      if (a != axis) out_dims.push_back(dims_[a]);
    std::size_t cells = 1;
    for (std::size_t d : out_dims) cells *= d;
    std::vector<double> out(cells, 0.0);
    for_each_cell([&](std::span<const std::size_t> idx, double p) {
      if (idx[axis] != value) return;
      std::size_t f = 0;
      std::size_t k = 0;
      for (std::size_t a = 0; a < dims_.size(); ++a) {
        if (a == axis) continue;
        f = f * out_dims[k++] + idx[a];
      }
      out[f] += p / pz;
    });
    return FiniteJointPmf(std::move(out_dims), std::move(out));
  }

  template <typename F>
  void for_each_cell(F&& f) const {
    std::vector<std::size_t> idx(dims_.size(), 0);
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
      f(std::span<const std::size_t>(idx), probs_[flat]);
      for (std::size_t a = dims_.size(); a-- > 0;) {
        if (++idx[a] < dims_[a]) break;
        idx[a] = 0;
      }
    }
  }

 private:
  void check_axis(std::size_t axis) const {
    if (axis >= dims_.size()) throw validation_error("FiniteJointPmf: axis out of range");
  }

  std::vector<std::size_t> dims_;
  std::vector<double> probs_;
};

// Probability kernel: one row (a FinitePmf over the target) per configuration
// of the conditioning variables, indexed row-major like FiniteJointPmf.
class ConditionalTable {
 public:
  ConditionalTable(std::vector<std::size_t> given_dims, std::vector<FinitePmf> rows)
      : given_dims_(std::move(given_dims)), rows_(std::move(rows)) {
    std::size_t configs = 1;
    for (std::size_t d : given_dims_) {
      if (d == 0) throw validation_error("ConditionalTable: zero-size axis");
      configs *= d;
    }
    if (rows_.empty() || rows_.size() != configs)
      throw validation_error("ConditionalTable: row count does not match given dims");
    const std::size_t t = rows_.front().size();
    for (const auto& r : rows_)
      if (r.size() != t)
        throw validation_error("ConditionalTable: inconsistent target dims");
  }

  const std::vector<std::size_t>& given_dims() const noexcept { return given_dims_; }
  std::size_t target_dim() const noexcept { return rows_.front().size(); }
  std::size_t rows_count() const noexcept { return rows_.size(); }
  const FinitePmf& row(std::size_t flat_given_index) const {
    return rows_.at(flat_given_index);
  }

 private:
  std::vector<std::size_t> given_dims_;
  std::vector<FinitePmf> rows_;
};

}  // namespace infobound
