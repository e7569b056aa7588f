#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "infobound/errors.hpp"
#include "infobound/pmf.hpp"

// Exact information measures on finite probability spaces, by enumeration.
// Everything is in nats; 0 log 0 = 0 throughout.

namespace infobound {

inline double entropy(const FinitePmf& p) {
  double h = 0.0;
  for (double pi : p.probs())
    if (pi > 0.0) h -= pi * std::log(pi);
  return h;
}

// Entropy of a joint distribution, -sum p log p over cells.
inline double joint_entropy(const FiniteJointPmf& joint) {
  double h = 0.0;
  for (double p : joint.probs())
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// KL(q || p); returns +infinity when q puts mass where p does not.
inline double kl_divergence(const FinitePmf& q, const FinitePmf& p) {
  if (q.size() != p.size())
    throw validation_error("kl_divergence: support size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q[i];
    if (qi == 0.0) continue;
    if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += qi * std::log(qi / p[i]);
  }
  return kl;
}

// I(X;Y) for a two-axis joint: KL of the joint against the product of its
// marginals.
inline double mutual_information(const FiniteJointPmf& joint) {
  if (joint.rank() != 2)
    throw validation_error("mutual_information: expected a two-axis joint");
  const FinitePmf px = joint.marginal(0);
  const FinitePmf py = joint.marginal(1);
  double mi = 0.0;
  joint.for_each_cell([&](std::span<const std::size_t> idx, double p) {
    if (p > 0.0) mi += p * std::log(p / (px[idx[0]] * py[idx[1]]));
  });
  return mi;
}

// I(X;Y | Z=z) for a three-axis joint (Z is the last axis).
inline double disintegrated_mi(const FiniteJointPmf& joint, std::size_t z_index) {
  if (joint.rank() != 3)
    throw validation_error("disintegrated_mi: expected a three-axis joint");
  return mutual_information(joint.slice(2, z_index));
}

// I(X;Y | Z) for a three-axis joint, computed by direct summation
// (independent of the disintegrated route; the tower property ties the two).
inline double conditional_mutual_information(const FiniteJointPmf& joint) {
  if (joint.rank() != 3)
    throw validation_error("conditional_mutual_information: expected a three-axis joint");
  const FinitePmf pz = joint.marginal(2);
  const FiniteJointPmf pxz = joint.marginal_joint(std::vector<std::size_t>{0, 2});
  const FiniteJointPmf pyz = joint.marginal_joint(std::vector<std::size_t>{1, 2});
  double cmi = 0.0;
  joint.for_each_cell([&](std::span<const std::size_t> idx, double p) {
    if (p <= 0.0) return;
    const std::size_t xz[] = {idx[0], idx[2]};
    const std::size_t yz[] = {idx[1], idx[2]};
    cmi += p * std::log(p * pz[idx[2]] / (pxz.at(xz) * pyz.at(yz)));
  });
  return cmi;
}

namespace detail {
template <typename F>
inline void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> subset(k);
  for (std::size_t i = 0; i < k; ++i) subset[i] = i;
  while (true) {
    f(subset);
    std::size_t i = k;
    while (i-- > 0) {
      if (subset[i] + (k - i) < n + 0) {
        ++subset[i];
        for (std::size_t j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
        break;
      }
      if (i == 0) return;
    }
  }
}

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}
}  // namespace detail

// (1 / (k * C(n,k))) * sum over subsets T of size k of H(X_T | Y), for a joint
// over (X_1..X_n, Y) with Y on the last axis. Nonincreasing in k.
inline double averaged_subset_entropy(const FiniteJointPmf& joint, std::size_t k) {
  if (joint.rank() < 2)
    throw validation_error("averaged_subset_entropy: need at least (X_1, Y)");
  const std::size_t n = joint.rank() - 1;
  if (k < 1 || k > n)
    throw validation_error("averaged_subset_entropy: k out of range");
  const double hy = entropy(joint.marginal(n));
  double total = 0.0;
  detail::for_each_subset(n, k, [&](const std::vector<std::size_t>& subset) {
    std::vector<std::size_t> axes(subset);
    axes.push_back(n);
    total += joint_entropy(joint.marginal_joint(axes)) - hy;
  });
  return total / (static_cast<double>(k) * detail::binomial(n, k));
}

}  // namespace infobound
