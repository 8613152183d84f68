#pragma once

// Trace-driven multi-cache simulation: LRU caches with counting Bloom
// filters, periodic indicator advertisement, staleness-based accuracy
// reports, client-side beliefs, and per-request policy execution.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fnaware/beliefs.hpp"
#include "fnaware/cachecore.hpp"
#include "fnaware/errors.hpp"
#include "fnaware/hash.hpp"
#include "fnaware/heterostrategy.hpp"
#include "fnaware/probfilter.hpp"
#include "fnaware/staleness.hpp"
#include "fnaware/workload.hpp"

namespace fnaware {

enum class Policy { fna, fno, fna_star, pif };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::fna: return "fna";
    case Policy::fno: return "fno";
    case Policy::fna_star: return "fna_star";
    case Policy::pif: return "pif";
  }
  return "?";
}

inline std::optional<Policy> parse_policy(std::string_view s) {
  if (s == "fna") return Policy::fna;
  if (s == "fno") return Policy::fno;
  if (s == "fna_star") return Policy::fna_star;
  if (s == "pif") return Policy::pif;
  return std::nullopt;
}

enum class SolverKind { automatic, exhaustive, greedy };

struct WorkloadSpec {
  std::string trace_path;  // empty: synthetic Zipf
  double zipf_alpha = 0.8;
  std::uint64_t universe = 1'000'000;
  std::uint64_t length = 1'000'000;
};

struct RunConfig {
  std::size_t num_caches = 3;
  std::vector<std::size_t> cache_capacities{10'000, 10'000, 10'000};
  std::vector<double> access_costs{1.0, 2.0, 3.0};
  double miss_penalty = 100.0;
  double bpe = 14.0;
  // Insertions between advertisements; unset means 0.1 * C_j for each cache.
  std::optional<std::uint64_t> update_interval;
  std::uint64_t accuracy_cadence = 50;
  std::size_t ewma_horizon = 100;
  double ewma_delta = 0.25;
  Policy policy = Policy::fna;
  SolverKind solver = SolverKind::automatic;
  std::uint64_t seed = 1;
  WorkloadSpec workload;
  std::uint64_t warmup = 0;  // leading requests excluded from the ledger
  // Test hook: the fna policy sees mr_neg = 1 - eps for every cache.
  bool force_oblivious_negatives = false;

  std::uint64_t interval_for(std::size_t cache) const {
    if (update_interval) return *update_interval;
    const auto c = static_cast<double>(cache_capacities[cache]);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(0.1 * c)));
  }
};

inline void validate(const RunConfig& c) {
  if (c.num_caches == 0) throw ConfigError("num_caches", "must be positive");
  if (c.cache_capacities.size() != c.num_caches) {
    throw ConfigError("cache_capacities", "expected " + std::to_string(c.num_caches) + " values");
  }
  if (c.access_costs.size() != c.num_caches) {
    throw ConfigError("access_costs", "expected " + std::to_string(c.num_caches) + " values");
  }
  for (auto cap : c.cache_capacities) {
    if (cap == 0) throw ConfigError("cache_capacities", "must be positive");
  }
  for (auto cost : c.access_costs) {
    if (!(cost >= 1.0) || !std::isfinite(cost)) {
      throw ConfigError("access_costs", "must be finite and >= 1");
    }
  }
  if (!(c.miss_penalty >= 1.0) || !std::isfinite(c.miss_penalty)) {
    throw ConfigError("miss_penalty", "must be finite and >= 1");
  }
  if (!(c.bpe > 0.0) || !std::isfinite(c.bpe)) throw ConfigError("bpe", "must be positive");
  if (c.update_interval && *c.update_interval == 0) {
    throw ConfigError("update_interval", "must be positive");
  }
  if (c.accuracy_cadence == 0) throw ConfigError("accuracy_cadence", "must be positive");
  if (c.ewma_horizon == 0) throw ConfigError("ewma_horizon", "must be positive");
  if (!(c.ewma_delta > 0.0 && c.ewma_delta < 1.0)) {
    throw ConfigError("ewma_delta", "must lie in (0, 1)");
  }
  if (c.solver == SolverKind::exhaustive && c.num_caches > kExhaustiveLimit) {
    throw ConfigError("solver", "exhaustive solver limited to " +
                                    std::to_string(kExhaustiveLimit) + " caches");
  }
  if (c.workload.trace_path.empty()) {
    if (!(c.workload.zipf_alpha > 0.0)) throw ConfigError("zipf_alpha", "must be positive");
    if (c.workload.universe == 0) throw ConfigError("zipf_universe", "must be positive");
    if (c.workload.length == 0) throw ConfigError("requests", "must be positive");
  }
}

inline std::vector<std::string> load_workload(const RunConfig& c) {
  if (!c.workload.trace_path.empty()) {
    auto keys = read_trace_file(c.workload.trace_path);
    if (keys.empty()) throw InputError("trace: no requests in '" + c.workload.trace_path + "'");
    return keys;
  }
  return zipf_generate(c.workload.zipf_alpha, c.workload.universe, c.workload.length,
                       splitmix64(c.seed ^ 0x776f726b6c6f6164ULL));
}

struct CostLedger {
  std::uint64_t requests = 0;
  double total_access_cost = 0.0;
  std::uint64_t miss_count = 0;
  std::uint64_t accesses = 0;
  std::uint64_t negative_accesses = 0;  // accesses to caches with indication 0
  std::uint64_t insufficiently_accurate_events = 0;
  double total_cost = 0.0;  // access + p per miss
  double mean_cost = 0.0;
  std::optional<double> normalized_cost;  // mean_cost / paired pif mean_cost

  // Oracle-side statistics, policy independent.
  std::uint64_t cached_requests = 0;   // item present in its assigned cache
  std::uint64_t false_negatives = 0;   // ... while that cache's stale filter says 0
  double shadow_pif_cost = 0.0;        // pif cost on the same per-request state
  std::uint64_t pif_dominance_violations = 0;

  double miss_rate() const { return requests ? double(miss_count) / double(requests) : 0.0; }
  double negative_access_rate() const {
    return requests ? double(negative_accesses) / double(requests) : 0.0;
  }
  double empirical_fnr() const {
    return cached_requests ? double(false_negatives) / double(cached_requests) : 0.0;
  }
};

// Per-request record, for event logs and tests.
struct RequestEvent {
  std::uint64_t index = 0;
  std::string_view key;
  std::span<const std::size_t> decision;
  std::span<const std::uint8_t> indications;
  std::span<const std::uint8_t> present;
  double access_cost = 0.0;
  bool hit = false;
  double charged_cost = 0.0;
  double pif_cost = 0.0;
};

using EventObserver = std::function<void(const RequestEvent&)>;

// Cheapest cache holding the item, or nothing. Ties go to the lower id.
inline AccessDecision pif_decide(std::span<const std::uint8_t> present,
                                 std::span<const double> costs, double miss_penalty) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < present.size(); ++j) {
    if (present[j] && (!best || costs[j] < costs[*best])) best = j;
  }
  if (!best) return {{}, miss_penalty};
  return {{*best}, costs[*best]};
}

inline AccessDecision pif_decide(std::string_view key, std::span<const LruCache* const> caches,
                                 std::span<const double> costs, double miss_penalty) {
  std::vector<std::uint8_t> present(caches.size());
  for (std::size_t j = 0; j < caches.size(); ++j) present[j] = caches[j]->contains(key) ? 1 : 0;
  return pif_decide(present, costs, miss_penalty);
}

// Indication outcomes observed since the last advertisement.
struct IndicationWindow {
  std::uint64_t positives = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t negatives = 0;
  std::uint64_t false_negatives = 0;

  void record(bool indication, bool present) {
    if (indication) {
      ++positives;
      if (!present) ++false_positives;
    } else {
      ++negatives;
      if (present) ++false_negatives;
    }
  }
  void reset() { *this = {}; }
};

// Error ratios conditioned on the indication: fpr* = FP / positives and
// fnr* = FN / negatives. A zero denominator yields the fallback value.
inline IndicatorAccuracy cache_aware_estimates(const IndicationWindow& w,
                                               const IndicatorAccuracy& fallback) {
  IndicatorAccuracy out = fallback;
  if (w.positives) out.fpr = double(w.false_positives) / double(w.positives);
  if (w.negatives) out.fnr = double(w.false_negatives) / double(w.negatives);
  return out;
}

// Exclusion probabilities straight from the window: mr_pos = fpr*,
// mr_neg = 1 - fnr*. An empty side keeps the fallback belief.
inline ExclusionEstimate cache_aware_exclusion(const IndicationWindow& w,
                                               const ExclusionEstimate& fallback) {
  ExclusionEstimate out = fallback;
  if (w.positives) out.mr_pos = clamp_prob(double(w.false_positives) / double(w.positives));
  if (w.negatives) out.mr_neg = clamp_prob(1.0 - double(w.false_negatives) / double(w.negatives));
  return out;
}

class Simulator {
 public:
  explicit Simulator(const RunConfig& config)
      : config_(config),
        filter_seed_(splitmix64(config.seed ^ 0x66696c746572ULL)),
        placement_{config.num_caches, splitmix64(config.seed ^ 0x706c61636531ULL)} {
    validate(config_);
    nodes_.reserve(config_.num_caches);
    for (std::size_t j = 0; j < config_.num_caches; ++j) {
      nodes_.push_back(std::make_unique<Node>(config_, j, filter_seed_));
    }
    const std::size_t n = config_.num_caches;
    indications_.resize(n);
    present_.resize(n);
    accuracy_.resize(n);
    q_.resize(n);
  }

  const RunConfig& config() const noexcept { return config_; }
  const CostLedger& ledger() const noexcept { return ledger_; }
  std::size_t num_caches() const noexcept { return nodes_.size(); }
  const LruCache& cache(std::size_t j) const { return nodes_[j]->cache; }
  const CountingBloomFilter& filter(std::size_t j) const { return nodes_[j]->cbf; }
  const BloomFilter& advertised(std::size_t j) const { return nodes_[j]->stale; }
  const IndicatorAccuracy& reported_accuracy(std::size_t j) const { return nodes_[j]->reported; }
  double positive_ratio(std::size_t j) const { return nodes_[j]->estimator.q(); }
  std::uint64_t advertisements(std::size_t j) const { return nodes_[j]->advertisements; }

  void step(const std::string& key, const EventObserver& observer = {}) {
    const std::size_t n = nodes_.size();
    const HashPair hp = hash_pair(key, filter_seed_);
    const std::size_t home = placement_.assign_cache(key);
    for (std::size_t j = 0; j < n; ++j) {
      auto& node = *nodes_[j];
      indications_[j] = node.stale.contains(hp) ? 1 : 0;
      present_[j] = node.cache.contains(key) ? 1 : 0;
      accuracy_[j] = node.reported;
      q_[j] = node.estimator.q();
    }

    std::size_t insufficient = 0;
    AccessDecision decision = decide(insufficient);

    double access = 0.0;
    bool hit = false;
    std::uint64_t negative = 0;
    for (const auto j : decision.selected) {
      access += config_.access_costs[j];
      hit = hit || present_[j];
      negative += indications_[j] ? 0 : 1;
    }
    const double charged = access + (hit ? 0.0 : config_.miss_penalty);
    const double pif = pif_decide(present_, config_.access_costs, config_.miss_penalty)
                           .predicted_cost;

    if (index_ >= config_.warmup) {
      auto& l = ledger_;
      ++l.requests;
      l.total_access_cost += access;
      l.miss_count += hit ? 0 : 1;
      l.accesses += decision.selected.size();
      l.negative_accesses += negative;
      l.insufficiently_accurate_events += insufficient;
      l.total_cost += charged;
      l.shadow_pif_cost += pif;
      if (pif > charged + 1e-9) ++l.pif_dominance_violations;
      if (present_[home]) {
        ++l.cached_requests;
        if (!indications_[home]) ++l.false_negatives;
      }
    }

    if (observer) {
      RequestEvent ev;
      ev.index = index_;
      ev.key = key;
      ev.decision = decision.selected;
      ev.indications = indications_;
      ev.present = present_;
      ev.access_cost = access;
      ev.hit = hit;
      ev.charged_cost = charged;
      ev.pif_cost = pif;
      observer(ev);
    }

    // Client-side bookkeeping uses what was observable for this request.
    for (std::size_t j = 0; j < n; ++j) {
      auto& node = *nodes_[j];
      node.estimator.observe(indications_[j] != 0);
      node.window.record(indications_[j] != 0, present_[j] != 0);
    }

    // A request for a cached item refreshes it whether or not it was
    // accessed; otherwise the fetched item is placed in its home cache.
    auto& home_node = *nodes_[home];
    if (present_[home]) {
      home_node.cache.on_hit(key);
    } else {
      home_node.cache.admit(key);
      home_node.after_insertion();
    }
    ++index_;
  }

  CostLedger finish() const {
    CostLedger l = ledger_;
    l.mean_cost = l.requests ? l.total_cost / double(l.requests) : 0.0;
    return l;
  }

 private:
  struct Node {
    Node(const RunConfig& cfg, std::size_t id, std::uint64_t seed)
        : params(make_filter_params(cfg.bpe, cfg.cache_capacities[id], seed)),
          cbf(params),
          stale(params),
          cache(
              cfg.cache_capacities[id], [this](const std::string& k) { cbf.insert(k); },
              [this](const std::string& k) { cbf.remove(k); }),
          estimator(cfg.ewma_horizon, cfg.ewma_delta, 0.0),
          interval(cfg.interval_for(id)),
          cadence(cfg.accuracy_cadence) {
      refresh_accuracy();
      estimator = PositiveRateEstimator(cfg.ewma_horizon, cfg.ewma_delta, reported.fpr);
    }

    void refresh_accuracy() {
      const auto ds = delta_stats(stale, cbf.compressed_view());
      reported = {estimate_fpr(ds, params.num_hashes), estimate_fnr(ds, params.num_hashes)};
    }

    void after_insertion() {
      bool advertised = false;
      if (++since_advert >= interval) {
        stale = cbf.compress();
        since_advert = 0;
        ++advertisements;
        window.reset();
        advertised = true;
      }
      if (++since_estimate >= cadence) since_estimate = 0;
      else if (!advertised) return;
      refresh_accuracy();
    }

    FilterParams params;
    CountingBloomFilter cbf;
    BloomFilter stale;
    LruCache cache;
    PositiveRateEstimator estimator;
    IndicatorAccuracy reported{};
    IndicationWindow window{};
    std::uint64_t interval;
    std::uint64_t cadence;
    std::uint64_t since_advert = 0;
    std::uint64_t since_estimate = 0;
    std::uint64_t advertisements = 0;
  };

  template <class Solver>
  AccessDecision decide_with(Solver&& solver, std::size_t& insufficient) {
    const RequestContext ctx{indications_, accuracy_, q_, config_.access_costs,
                             config_.miss_penalty};
    switch (config_.policy) {
      case Policy::fno: {
        auto out = pgm_fno_decide(ctx, solver);
        insufficient = out.insufficiently_accurate;
        return std::move(out.decision);
      }
      case Policy::fna: {
        if (!config_.force_oblivious_negatives) {
          auto out = pgm_fna_decide(ctx, solver);
          insufficient = out.insufficiently_accurate;
          return std::move(out.decision);
        }
        auto est = estimate_exclusions(ctx, insufficient);
        for (auto& e : est) e.mr_neg = 1.0 - kEpsilon;
        return reduce_and_solve(ctx.indications, std::span<const ExclusionEstimate>(est),
                                ctx.access_costs, ctx.miss_penalty, solver);
      }
      case Policy::fna_star: {
        auto est = estimate_exclusions(ctx, insufficient);
        for (std::size_t j = 0; j < est.size(); ++j) {
          est[j] = cache_aware_exclusion(nodes_[j]->window, est[j]);
        }
        return reduce_and_solve(ctx.indications, std::span<const ExclusionEstimate>(est),
                                ctx.access_costs, ctx.miss_penalty, solver);
      }
      case Policy::pif:
        break;
    }
    return pif_decide(present_, config_.access_costs, config_.miss_penalty);
  }

  AccessDecision decide(std::size_t& insufficient) {
    switch (config_.solver) {
      case SolverKind::exhaustive: return decide_with(ExhaustiveSolver{}, insufficient);
      case SolverKind::greedy: return decide_with(GreedySolver{}, insufficient);
      case SolverKind::automatic: break;
    }
    return decide_with(AutoSolver{}, insufficient);
  }

  RunConfig config_;
  std::uint64_t filter_seed_;
  PlacementPolicy placement_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::uint8_t> indications_;
  std::vector<std::uint8_t> present_;
  std::vector<IndicatorAccuracy> accuracy_;
  std::vector<double> q_;
  CostLedger ledger_;
  std::uint64_t index_ = 0;
};

inline CostLedger run_simulation(const RunConfig& config, std::span<const std::string> requests,
                                 const EventObserver& observer = {}) {
  if (requests.empty()) throw InvalidArgument("run_simulation: empty request stream");
  Simulator sim(config);
  for (const auto& key : requests) sim.step(key, observer);
  return sim.finish();
}

inline CostLedger run_simulation(const RunConfig& config, const EventObserver& observer = {}) {
  validate(config);
  const auto requests = load_workload(config);
  return run_simulation(config, requests, observer);
}

inline std::string format_fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Event log: request_index,key,decision_ids,access_cost,hit,charged_cost
// decision_ids are ';'-separated. Keys containing ',' or '"' are quoted.
class EventLogWriter {
 public:
  explicit EventLogWriter(std::ostream& out) : out_(out) {
    out_ << "request_index,key,decision_ids,access_cost,hit,charged_cost\n";
  }

  void operator()(const RequestEvent& ev) {
    out_ << ev.index << ',' << quote(ev.key) << ',';
    for (std::size_t i = 0; i < ev.decision.size(); ++i) {
      if (i) out_ << ';';
      out_ << ev.decision[i];
    }
    out_ << ',' << format_fixed(ev.access_cost) << ',' << (ev.hit ? 1 : 0) << ','
         << format_fixed(ev.charged_cost) << '\n';
  }

 private:
  static std::string quote(std::string_view key) {
    if (key.find_first_of(",\"") == std::string_view::npos) return std::string(key);
    std::string s = "\"";
    for (const char c : key) {
      if (c == '"') s += '"';
      s += c;
    }
    return s + "\"";
  }

  std::ostream& out_;
};

struct FnRatioRow {
  double bpe = 0.0;
  std::uint64_t update_interval = 0;
  std::uint64_t cached_requests = 0;
  std::uint64_t false_negatives = 0;
  double fnr = 0.0;
};

// Empirical false-negative ratio of the stale indicators per update interval:
// requests whose item sits in its home cache while the advertised filter
// says no, over all requests whose item sits in its home cache. Caching
// dynamics do not depend on the access policy, so the pif policy drives it.
inline std::vector<FnRatioRow> measure_fn_ratio(const RunConfig& base,
                                                std::span<const std::uint64_t> intervals,
                                                std::span<const std::string> requests) {
  std::vector<FnRatioRow> rows;
  for (const auto interval : intervals) {
    RunConfig cfg = base;
    cfg.policy = Policy::pif;
    cfg.update_interval = interval;
    const auto l = run_simulation(cfg, requests);
    rows.push_back({cfg.bpe, interval, l.cached_requests, l.false_negatives, l.empirical_fnr()});
  }
  return rows;
}

}  // namespace fnaware
