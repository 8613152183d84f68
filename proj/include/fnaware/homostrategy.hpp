#pragma once

// Fully homogeneous cache selection: every cache has unit access cost and the
// same (h, fpr, fnr). A decision reduces to how many positive-indication
// caches (r1) and negative-indication caches (r0) to access.

#include <cmath>
#include <cstddef>
#include <string>

#include "fnaware/beliefs.hpp"
#include "fnaware/errors.hpp"

namespace fnaware {

struct HomoParams {
  std::size_t total_caches = 0;
  std::size_t positive_count = 0;
  double mr_pos = 1.0;
  double mr_neg = 1.0;
  double miss_penalty = 1.0;
};

struct AccessCounts {
  std::size_t r0 = 0;  // negative-indication caches accessed
  std::size_t r1 = 0;  // positive-indication caches accessed

  friend bool operator==(const AccessCounts&, const AccessCounts&) = default;
};

inline void validate(const HomoParams& params) {
  if (params.positive_count > params.total_caches) {
    throw InvalidArgument("HomoParams: positive_count exceeds total_caches");
  }
  if (!(params.miss_penalty >= 1.0)) throw InvalidArgument("HomoParams: miss_penalty must be >= 1");
}

// r0 + r1 + p * mr_neg^r0 * mr_pos^r1
inline double cost_homo(const AccessCounts& counts, const HomoParams& params) {
  validate(params);
  if (counts.r1 > params.positive_count ||
      counts.r0 > params.total_caches - params.positive_count) {
    throw InvalidArgument("cost_homo: access counts (" + std::to_string(counts.r0) + ", " +
                          std::to_string(counts.r1) + ") out of range");
  }
  return static_cast<double>(counts.r0 + counts.r1) +
         params.miss_penalty * std::pow(params.mr_neg, static_cast<double>(counts.r0)) *
             std::pow(params.mr_pos, static_cast<double>(counts.r1));
}

namespace detail {

// Largest r in [0, upper] minimizing r + scale * base^r. Exact <= keeps the
// maximal minimizer.
inline std::size_t max_argmin_geometric(std::size_t upper, double scale, double base) {
  std::size_t best_r = 0;
  double best = scale;
  for (std::size_t r = 1; r <= upper; ++r) {
    const double c = static_cast<double>(r) + scale * std::pow(base, static_cast<double>(r));
    if (c <= best) {
      best = c;
      best_r = r;
    }
  }
  return best_r;
}

}  // namespace detail

// Optimal (r0, r1) under sufficient accuracy. First choose r1 ignoring
// negative caches; then, if the residual miss cost still exceeds one access,
// add negative-indication caches.
inline AccessCounts ecm_fna(const HomoParams& params) {
  validate(params);
  AccessCounts out;
  out.r1 = detail::max_argmin_geometric(params.positive_count, params.miss_penalty, params.mr_pos);
  const double residual =
      params.miss_penalty * std::pow(params.mr_pos, static_cast<double>(out.r1));
  if (residual > 1.0) {
    out.r0 = detail::max_argmin_geometric(params.total_caches - params.positive_count, residual,
                                          params.mr_neg);
  }
  return out;
}

// Oblivious variant: never accesses a negative-indication cache.
inline AccessCounts ecm_fno(const HomoParams& params) {
  validate(params);
  return {0, detail::max_argmin_geometric(params.positive_count, params.miss_penalty,
                                          params.mr_pos)};
}

inline double binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return c;
}

// Pr(n_p = j) for N independent indications that are positive with prob q.
inline double prob_positive_count(std::size_t n, double q, std::size_t j) {
  if (j > n) throw InvalidArgument("prob_positive_count: j exceeds N");
  return binomial_coefficient(n, j) * std::pow(q, static_cast<double>(j)) *
         std::pow(1.0 - q, static_cast<double>(n - j));
}

enum class HomoPolicy { fna, fno };

inline const char* to_string(HomoPolicy p) { return p == HomoPolicy::fna ? "fna" : "fno"; }

// 1 + (p - 1) (1 - h)^N
inline double pif_cost(double h, std::size_t n, double miss_penalty) {
  return 1.0 + (miss_penalty - 1.0) * std::pow(1.0 - h, static_cast<double>(n));
}

// Expected service cost, averaging the policy's decision over the binomial
// distribution of the positive-indication count.
inline double expected_cost(HomoPolicy policy, double h, const IndicatorAccuracy& acc,
                            std::size_t n, double miss_penalty) {
  const double q = positive_prob(h, acc);
  const auto mr = exclusion_probs(h, acc);
  double total = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const HomoParams params{n, j, mr.mr_pos, mr.mr_neg, miss_penalty};
    const auto counts = policy == HomoPolicy::fna ? ecm_fna(params) : ecm_fno(params);
    total += prob_positive_count(n, q, j) * cost_homo(counts, params);
  }
  return total;
}

}  // namespace fnaware
