#pragma once

// Heterogeneous cache selection. Any solver for the false-negative-oblivious
// problem (all candidates positive, one exclusion probability each) becomes
// a false-negative-aware policy by feeding it every cache with the exclusion
// probability that matches its indication.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fnaware/beliefs.hpp"
#include "fnaware/errors.hpp"

namespace fnaware {

struct CacheProfile {
  std::size_t cache_id = 0;
  double access_cost = 1.0;
  double exclusion = 1.0 - kEpsilon;
};

struct AccessDecision {
  std::vector<std::size_t> selected;  // ascending cache ids
  double predicted_cost = 0.0;
};

// sum_{j in D} c_j + p * prod_{j in D} rho_j, evaluated in ascending id order.
inline double service_cost(std::span<const std::size_t> selected,
                           std::span<const CacheProfile> profiles, double miss_penalty) {
  std::vector<std::size_t> ids(selected.begin(), selected.end());
  std::sort(ids.begin(), ids.end());
  double access = 0.0;
  double miss = miss_penalty;
  for (const auto id : ids) {
    const auto it = std::find_if(profiles.begin(), profiles.end(),
                                 [id](const CacheProfile& c) { return c.cache_id == id; });
    if (it == profiles.end()) {
      throw InvalidArgument("service_cost: unknown cache id " + std::to_string(id));
    }
    access += it->access_cost;
    miss *= it->exclusion;
  }
  return access + miss;
}

inline constexpr std::size_t kExhaustiveLimit = 20;

// Exact minimizer of service_cost by enumerating all 2^N subsets. Ties go to
// the smaller total access cost, then the lexicographically smallest id set.
inline AccessDecision solve_fno_exhaustive(std::span<const CacheProfile> profiles,
                                           double miss_penalty) {
  const std::size_t n = profiles.size();
  if (n > kExhaustiveLimit) {
    throw SizeLimitError("solve_fno_exhaustive: " + std::to_string(n) +
                         " candidates exceed the limit of " + std::to_string(kExhaustiveLimit) +
                         "; use solve_fno_greedy");
  }
  // Candidate order by id so subset products are evaluated like service_cost.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return profiles[a].cache_id < profiles[b].cache_id;
  });

  std::vector<std::size_t> best_ids;
  double best_cost = miss_penalty;
  double best_access = 0.0;
  std::vector<std::size_t> ids;
  ids.reserve(n);
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    ids.clear();
    double access = 0.0;
    double miss = miss_penalty;
    for (std::size_t b = 0; b < n; ++b) {
      if (!((mask >> b) & 1u)) continue;
      const auto& c = profiles[order[b]];
      ids.push_back(c.cache_id);
      access += c.access_cost;
      miss *= c.exclusion;
    }
    const double cost = access + miss;
    const bool better =
        cost < best_cost ||
        (cost == best_cost && (access < best_access || (access == best_access && ids < best_ids)));
    if (better) {
      best_cost = cost;
      best_access = access;
      best_ids = ids;
    }
  }
  return {best_ids, service_cost(best_ids, profiles, miss_penalty)};
}

// Greedy: repeatedly add the cache with the largest cost reduction
// p * prod_D(rho) * (1 - rho_j) - c_j until no addition helps.
inline AccessDecision solve_fno_greedy(std::span<const CacheProfile> profiles,
                                       double miss_penalty) {
  std::vector<bool> taken(profiles.size(), false);
  std::vector<std::size_t> ids;
  double miss = miss_penalty;
  for (;;) {
    std::size_t pick = profiles.size();
    double best_gain = 0.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if (taken[i]) continue;
      const auto& c = profiles[i];
      const double gain = miss * (1.0 - c.exclusion) - c.access_cost;
      if (gain <= 0.0) continue;
      bool better = pick == profiles.size() || gain > best_gain;
      if (!better && gain == best_gain) {
        const auto& b = profiles[pick];
        better = c.access_cost < b.access_cost ||
                 (c.access_cost == b.access_cost && c.cache_id < b.cache_id);
      }
      if (better) {
        pick = i;
        best_gain = gain;
      }
    }
    if (pick == profiles.size()) break;
    taken[pick] = true;
    ids.push_back(profiles[pick].cache_id);
    miss *= profiles[pick].exclusion;
  }
  std::sort(ids.begin(), ids.end());
  return {ids, service_cost(ids, profiles, miss_penalty)};
}

struct ExhaustiveSolver {
  AccessDecision operator()(std::span<const CacheProfile> profiles, double p) const {
    return solve_fno_exhaustive(profiles, p);
  }
};

struct GreedySolver {
  AccessDecision operator()(std::span<const CacheProfile> profiles, double p) const {
    return solve_fno_greedy(profiles, p);
  }
};

// Exhaustive while the candidate set is small enough, greedy beyond.
struct AutoSolver {
  AccessDecision operator()(std::span<const CacheProfile> profiles, double p) const {
    return profiles.size() <= kExhaustiveLimit ? solve_fno_exhaustive(profiles, p)
                                               : solve_fno_greedy(profiles, p);
  }
};

// Every cache becomes a positive candidate whose exclusion probability is the
// one matching its real indication; the decision is whatever the solver
// returns on that all-positive instance.
template <class Solver>
AccessDecision reduce_and_solve(std::span<const std::uint8_t> indications,
                                std::span<const ExclusionEstimate> estimates,
                                std::span<const double> costs, double miss_penalty,
                                Solver&& solver) {
  if (indications.size() != estimates.size() || costs.size() != estimates.size()) {
    throw InvalidArgument("reduce_and_solve: per-cache inputs differ in length");
  }
  std::vector<CacheProfile> profiles(estimates.size());
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    profiles[j] = {j, costs[j], exclusion_for_indication(estimates[j], indications[j] != 0)};
  }
  return solver(std::span<const CacheProfile>(profiles), miss_penalty);
}

// Per-request inputs of the client policy.
struct RequestContext {
  std::span<const std::uint8_t> indications;      // from stale advertised filters
  std::span<const IndicatorAccuracy> accuracy;    // latest (fpr, fnr) per cache
  std::span<const double> positive_ratio;         // EWMA q per cache
  std::span<const double> access_costs;
  double miss_penalty = 1.0;
};

struct PolicyOutcome {
  AccessDecision decision;
  std::size_t insufficiently_accurate = 0;  // caches whose fpr + fnr >= 1
};

// Beliefs for all caches; a cache with fpr + fnr >= 1 falls back to h = q
// and is counted.
inline std::vector<ExclusionEstimate> estimate_exclusions(const RequestContext& ctx,
                                                          std::size_t& insufficient) {
  const std::size_t n = ctx.indications.size();
  if (ctx.accuracy.size() != n || ctx.positive_ratio.size() != n || ctx.access_costs.size() != n) {
    throw InvalidArgument("RequestContext: per-cache inputs differ in length");
  }
  std::vector<ExclusionEstimate> est(n);
  insufficient = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& acc = ctx.accuracy[j];
    const double q = ctx.positive_ratio[j];
    if (is_sufficiently_accurate(acc)) {
      est[j] = make_exclusion_estimate(q, acc);
    } else {
      ++insufficient;
      est[j].q = q;
      est[j].h = std::clamp(q, 0.0, 1.0);
      const auto mr = exclusion_probs_observed(est[j].h, q, acc);
      est[j].mr_pos = mr.mr_pos;
      est[j].mr_neg = mr.mr_neg;
    }
  }
  return est;
}

template <class Solver>
PolicyOutcome pgm_fna_decide(const RequestContext& ctx, Solver&& solver) {
  PolicyOutcome out;
  const auto est = estimate_exclusions(ctx, out.insufficiently_accurate);
  out.decision = reduce_and_solve(ctx.indications, std::span<const ExclusionEstimate>(est),
                                  ctx.access_costs, ctx.miss_penalty, solver);
  return out;
}

// Oblivious baseline: the same beliefs, but only positive-indication caches
// are candidates (equivalently mr_neg = 1).
template <class Solver>
PolicyOutcome pgm_fno_decide(const RequestContext& ctx, Solver&& solver) {
  PolicyOutcome out;
  const auto est = estimate_exclusions(ctx, out.insufficiently_accurate);
  std::vector<CacheProfile> profiles;
  for (std::size_t j = 0; j < est.size(); ++j) {
    if (ctx.indications[j]) profiles.push_back({j, ctx.access_costs[j], est[j].mr_pos});
  }
  out.decision = solver(std::span<const CacheProfile>(profiles), ctx.miss_penalty);
  return out;
}

}  // namespace fnaware
