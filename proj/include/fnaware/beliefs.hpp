#pragma once

// Indicator probability model (positive-indication ratio, Bayes exclusion
// probabilities) and the client-side estimators that feed it.

#include <algorithm>
#include <cstddef>
#include <cstdint>

#include "fnaware/errors.hpp"

namespace fnaware {

// Clamp applied to exclusion probabilities and to h inside exclusion_probs.
inline constexpr double kEpsilon = 1e-6;

inline double clamp_prob(double x, double eps = kEpsilon) {
  return std::clamp(x, eps, 1.0 - eps);
}

struct IndicatorAccuracy {
  double fpr = 0.0;  // Pr(positive | absent)
  double fnr = 0.0;  // Pr(negative | present)
};

// h (1 - fnr) + (1 - h) fpr
inline double positive_prob(double h, const IndicatorAccuracy& acc) {
  return h * (1.0 - acc.fnr) + (1.0 - h) * acc.fpr;
}

inline bool is_sufficiently_accurate(const IndicatorAccuracy& acc) {
  return acc.fpr + acc.fnr < 1.0;
}

struct ExclusionPair {
  double mr_pos;  // Pr(absent | positive)
  double mr_neg;  // Pr(absent | negative)
};

// Bayes posteriors of absence given each indication, clamped to [eps, 1-eps].
// An indication with zero probability has a zero numerator too; its posterior
// is then reported as 1 - eps.
inline ExclusionPair exclusion_probs(double h, const IndicatorAccuracy& acc) {
  const double hc = clamp_prob(h);
  const double q = positive_prob(hc, acc);
  const double absent = 1.0 - hc;
  const double mr_pos = q > 0.0 ? acc.fpr * absent / q : 1.0;
  const double mr_neg = q < 1.0 ? (1.0 - acc.fpr) * absent / (1.0 - q) : 1.0;
  return {clamp_prob(mr_pos), clamp_prob(mr_neg)};
}

// Inverts positive_prob: q = fpr + h (1 - fpr - fnr), so
// h = (q - fpr) / (1 - fpr - fnr), clamped to [0, 1].
inline double estimate_hit_ratio(double q, const IndicatorAccuracy& acc) {
  if (!is_sufficiently_accurate(acc)) {
    throw ContractViolation("estimate_hit_ratio: fpr + fnr must be below 1");
  }
  return std::clamp((q - acc.fpr) / (1.0 - acc.fpr - acc.fnr), 0.0, 1.0);
}

// Empirical positive-indication ratio. For the first `horizon` requests q is
// the running mean; afterwards it is frozen per epoch of `horizon` requests
// and blended at each epoch boundary:
//   q <- smoothing * (positives in epoch / horizon) + (1 - smoothing) * q
class PositiveRateEstimator {
 public:
  PositiveRateEstimator(std::size_t horizon, double smoothing, double prior)
      : horizon_(horizon), smoothing_(smoothing), q_(std::clamp(prior, 0.0, 1.0)) {
    if (horizon_ == 0) throw InvalidArgument("PositiveRateEstimator: horizon must be positive");
    if (!(smoothing_ > 0.0 && smoothing_ < 1.0)) {
      throw InvalidArgument("PositiveRateEstimator: smoothing must lie in (0, 1)");
    }
  }

  double q() const noexcept { return q_; }
  std::size_t horizon() const noexcept { return horizon_; }
  double smoothing() const noexcept { return smoothing_; }
  std::size_t window_positive() const noexcept { return window_positive_; }
  std::size_t window_total() const noexcept { return window_total_; }
  std::uint64_t bootstrap_total() const noexcept { return bootstrap_total_; }
  bool bootstrapping() const noexcept { return bootstrap_total_ < horizon_; }

  void observe(bool positive) {
    if (bootstrapping()) {
      ++bootstrap_total_;
      bootstrap_positive_ += positive ? 1 : 0;
      q_ = static_cast<double>(bootstrap_positive_) / static_cast<double>(bootstrap_total_);
      return;
    }
    ++window_total_;
    window_positive_ += positive ? 1 : 0;
    if (window_total_ == horizon_) {
      const double ratio =
          static_cast<double>(window_positive_) / static_cast<double>(horizon_);
      q_ = std::clamp(smoothing_ * ratio + (1.0 - smoothing_) * q_, 0.0, 1.0);
      window_total_ = 0;
      window_positive_ = 0;
    }
  }

 private:
  std::size_t horizon_;
  double smoothing_;
  double q_;
  std::size_t window_positive_ = 0;
  std::size_t window_total_ = 0;
  std::uint64_t bootstrap_total_ = 0;
  std::uint64_t bootstrap_positive_ = 0;
};

inline void ewma_observe(PositiveRateEstimator& est, bool indication) { est.observe(indication); }

// Same posteriors, but dividing by the observed positive ratio q rather than
// the model value positive_prob(h, acc). The two agree whenever h was not
// clamped by estimate_hit_ratio. A degenerate q (0 or 1) uses the model.
inline ExclusionPair exclusion_probs_observed(double h, double q, const IndicatorAccuracy& acc) {
  const auto model = exclusion_probs(h, acc);
  const double absent = 1.0 - clamp_prob(h);
  return {q > 0.0 ? clamp_prob(acc.fpr * absent / q) : model.mr_pos,
          q < 1.0 ? clamp_prob((1.0 - acc.fpr) * absent / (1.0 - q)) : model.mr_neg};
}

struct ExclusionEstimate {
  double h = 0.0;
  double q = 0.0;
  double mr_pos = 1.0 - kEpsilon;
  double mr_neg = 1.0 - kEpsilon;
};

// Client-side belief for one cache from its reported accuracy and the
// observed positive ratio q. Callers must check sufficiency first.
inline ExclusionEstimate make_exclusion_estimate(double q, const IndicatorAccuracy& acc) {
  ExclusionEstimate est;
  est.q = q;
  est.h = estimate_hit_ratio(q, acc);
  const auto mr = exclusion_probs_observed(est.h, q, acc);
  est.mr_pos = mr.mr_pos;
  est.mr_neg = mr.mr_neg;
  return est;
}

inline double exclusion_for_indication(const ExclusionEstimate& est, bool indication) {
  return indication ? est.mr_pos : est.mr_neg;
}

}  // namespace fnaware
