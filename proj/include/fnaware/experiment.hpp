#pragma once

// Experiment plans: flat key=value configuration, paired sweeps over one
// axis, CSV / table reports, and closed-form analysis grids.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "fnaware/beliefs.hpp"
#include "fnaware/errors.hpp"
#include "fnaware/homostrategy.hpp"
#include "fnaware/simkit.hpp"
#include "fnaware/workload.hpp"

namespace fnaware {

enum class SweepAxis { none, miss_penalty, update_interval, bpe, cache_size, num_caches };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::none: return "none";
    case SweepAxis::miss_penalty: return "miss_penalty";
    case SweepAxis::update_interval: return "update_interval";
    case SweepAxis::bpe: return "bpe";
    case SweepAxis::cache_size: return "cache_size";
    case SweepAxis::num_caches: return "num_caches";
  }
  return "?";
}

struct ExperimentPlan {
  RunConfig base;
  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;
  std::vector<Policy> policies{Policy::fna, Policy::fno, Policy::fna_star, Policy::pif};
  std::string output_path;     // empty: stdout
  std::string event_log_path;  // empty: no event log
  unsigned jobs = 1;
  bool access_costs_explicit = false;
};

// Ordered key=value pairs; later entries override earlier ones.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& field, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (v.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
  return out;
}

inline std::int64_t to_int(const std::string& field, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (v.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t to_positive(const std::string& field, const std::string& v) {
  const auto x = to_int(field, v);
  if (x <= 0) throw ConfigError(field, "must be positive, got " + v);
  return static_cast<std::uint64_t>(x);
}

inline std::uint64_t to_nonneg(const std::string& field, const std::string& v) {
  const auto x = to_int(field, v);
  if (x < 0) throw ConfigError(field, "must be non-negative, got " + v);
  return static_cast<std::uint64_t>(x);
}

// "a,b,c" or "start:stop:step" (inclusive, tolerant to rounding).
inline std::vector<double> to_double_list(const std::string& field, const std::string& v) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw ConfigError(field, "range must be start:stop:step");
    const double a = to_double(field, parts[0]);
    const double b = to_double(field, parts[1]);
    const double s = to_double(field, parts[2]);
    if (!(s > 0.0) || b < a) throw ConfigError(field, "range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * s);
    return out;
  }
  for (const auto& p : split(v, ',')) out.push_back(to_double(field, p));
  return out;
}

inline std::uint64_t integral_axis_value(const std::string& field, double v) {
  if (!(v >= 1.0) || std::floor(v) != v) {
    throw ConfigError(field, "sweep value must be a positive integer");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

// key=value lines; '#' starts a comment line; blank lines ignored.
inline ConfigEntries parse_config_text(std::string_view text) {
  ConfigEntries out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("line " + std::to_string(lineno), "expected key=value");
    }
    out.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return out;
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "num_caches",    "cache_capacities", "access_costs", "miss_penalty",     "bpe",
      "update_interval", "accuracy_cadence", "ewma_horizon", "ewma_delta",     "policies",
      "seed",          "trace",            "zipf_alpha",   "zipf_universe",    "requests",
      "warmup",        "solver",           "sweep_axis",   "sweep_values",     "output",
      "event_log",     "jobs"};
  return keys;
}

namespace detail {

inline void apply_entry(ExperimentPlan& plan, const std::string& key, const std::string& v,
                        bool& capacities_set) {
  auto& c = plan.base;
  if (key == "num_caches") {
    c.num_caches = to_positive(key, v);
  } else if (key == "cache_capacities") {
    c.cache_capacities.clear();
    for (const auto& s : split(v, ',')) c.cache_capacities.push_back(to_positive(key, s));
    capacities_set = true;
  } else if (key == "access_costs") {
    c.access_costs = to_double_list(key, v);
    plan.access_costs_explicit = true;
  } else if (key == "miss_penalty") {
    c.miss_penalty = to_double(key, v);
  } else if (key == "bpe") {
    c.bpe = to_double(key, v);
  } else if (key == "update_interval") {
    if (v == "auto") c.update_interval.reset();
    else c.update_interval = to_positive(key, v);
  } else if (key == "accuracy_cadence") {
    c.accuracy_cadence = to_positive(key, v);
  } else if (key == "ewma_horizon") {
    c.ewma_horizon = to_positive(key, v);
  } else if (key == "ewma_delta") {
    c.ewma_delta = to_double(key, v);
  } else if (key == "policies") {
    plan.policies.clear();
    for (const auto& s : split(v, ',')) {
      const auto p = parse_policy(s);
      if (!p) throw ConfigError(key, "unknown policy '" + s + "'");
      if (std::find(plan.policies.begin(), plan.policies.end(), *p) == plan.policies.end()) {
        plan.policies.push_back(*p);
      }
    }
    if (plan.policies.empty()) throw ConfigError(key, "must name at least one policy");
  } else if (key == "seed") {
    c.seed = to_nonneg(key, v);
  } else if (key == "trace") {
    c.workload.trace_path = v;
  } else if (key == "zipf_alpha") {
    c.workload.zipf_alpha = to_double(key, v);
  } else if (key == "zipf_universe") {
    c.workload.universe = to_positive(key, v);
  } else if (key == "requests") {
    c.workload.length = to_positive(key, v);
  } else if (key == "warmup") {
    c.warmup = to_nonneg(key, v);
  } else if (key == "solver") {
    if (v == "auto") c.solver = SolverKind::automatic;
    else if (v == "exhaustive") c.solver = SolverKind::exhaustive;
    else if (v == "greedy") c.solver = SolverKind::greedy;
    else throw ConfigError(key, "expected auto, exhaustive or greedy");
  } else if (key == "sweep_axis") {
    static const std::map<std::string, SweepAxis, std::less<>> axes{
        {"none", SweepAxis::none},
        {"miss_penalty", SweepAxis::miss_penalty},
        {"update_interval", SweepAxis::update_interval},
        {"bpe", SweepAxis::bpe},
        {"cache_size", SweepAxis::cache_size},
        {"num_caches", SweepAxis::num_caches}};
    const auto it = axes.find(v);
    if (it == axes.end()) throw ConfigError(key, "unknown axis '" + v + "'");
    plan.sweep_axis = it->second;
  } else if (key == "sweep_values") {
    plan.sweep_values = v.empty() ? std::vector<double>{} : to_double_list(key, v);
  } else if (key == "output") {
    plan.output_path = v;
  } else if (key == "event_log") {
    plan.event_log_path = v;
  } else if (key == "jobs") {
    plan.jobs = static_cast<unsigned>(to_positive(key, v));
  } else {
    throw ConfigError(key, "unknown key");
  }
}

// Per-cache lists follow num_caches: a single value (or an unset default)
// is broadcast; unset costs for N != 3 default to 2 per cache.
inline std::vector<std::size_t> broadcast_capacities(const std::vector<std::size_t>& caps,
                                                     std::size_t n) {
  if (caps.size() == n) return caps;
  if (std::all_of(caps.begin(), caps.end(), [&](auto c) { return c == caps.front(); })) {
    return std::vector<std::size_t>(n, caps.front());
  }
  throw ConfigError("cache_capacities", "expected 1 or " + std::to_string(n) + " values");
}

inline std::vector<double> broadcast_costs(const std::vector<double>& costs, std::size_t n,
                                           bool explicit_costs) {
  if (costs.size() == n) return costs;
  if (std::all_of(costs.begin(), costs.end(), [&](auto c) { return c == costs.front(); })) {
    return std::vector<double>(n, costs.front());
  }
  if (!explicit_costs) return std::vector<double>(n, 2.0);
  throw ConfigError("access_costs", "expected 1 or " + std::to_string(n) + " values");
}

}  // namespace detail

inline RunConfig derive_config(const ExperimentPlan& plan, std::optional<double> axis_value) {
  RunConfig c = plan.base;
  if (axis_value) {
    const double v = *axis_value;
    switch (plan.sweep_axis) {
      case SweepAxis::none: break;
      case SweepAxis::miss_penalty: c.miss_penalty = v; break;
      case SweepAxis::update_interval:
        c.update_interval = detail::integral_axis_value("sweep_values", v);
        break;
      case SweepAxis::bpe: c.bpe = v; break;
      case SweepAxis::cache_size:
        c.cache_capacities.assign(c.num_caches, detail::integral_axis_value("sweep_values", v));
        break;
      case SweepAxis::num_caches:
        c.num_caches = detail::integral_axis_value("sweep_values", v);
        break;
    }
  }
  c.cache_capacities = detail::broadcast_capacities(c.cache_capacities, c.num_caches);
  c.access_costs = detail::broadcast_costs(c.access_costs, c.num_caches, plan.access_costs_explicit);
  validate(c);
  return c;
}

// `file` entries first, then `overrides`; unspecified fields keep the
// baseline defaults (3 caches of 10K items, costs 1,2,3, p = 100, bpe = 14,
// 1000 insertions between advertisements).
inline ExperimentPlan parse_config(const ConfigEntries& file, const ConfigEntries& overrides = {}) {
  ExperimentPlan plan;
  bool capacities_set = false;
  for (const auto* entries : {&file, &overrides}) {
    for (const auto& [k, v] : *entries) detail::apply_entry(plan, k, v, capacities_set);
  }
  (void)capacities_set;
  if (plan.sweep_axis != SweepAxis::none && plan.sweep_values.empty()) {
    throw ConfigError("sweep_values", "must be nonempty when sweep_axis is set");
  }
  if (plan.sweep_axis == SweepAxis::none && !plan.sweep_values.empty()) {
    throw ConfigError("sweep_axis", "sweep_values given without an axis");
  }
  // Every derived configuration must be valid up front.
  if (plan.sweep_axis == SweepAxis::none) {
    plan.base = derive_config(plan, std::nullopt);
  } else {
    for (const double v : plan.sweep_values) (void)derive_config(plan, v);
  }
  return plan;
}

inline ExperimentPlan parse_config_file(const std::string& path, const ConfigEntries& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(parse_config_text(ss.str()), overrides);
}

struct ReportRow {
  double axis_value = 0.0;
  Policy policy = Policy::fna;
  CostLedger ledger;
};

struct SweepPoint {
  double axis_value = 0.0;
  std::uint64_t stream_checksum = 0;
  std::uint64_t requests = 0;
};

struct Report {
  std::uint64_t seed = 0;
  SweepAxis axis = SweepAxis::none;
  std::vector<SweepPoint> points;
  std::vector<ReportRow> rows;  // sorted by axis value, then policy name
};

namespace detail {
inline std::string event_log_name(const std::string& base, std::size_t point, Policy p,
                                  bool single) {
  if (single) return base;
  return base + "." + std::to_string(point) + "." + to_string(p) + ".csv";
}
}  // namespace detail

// Runs every policy on every sweep point. Policies at one point replay the
// same request stream; normalized_cost divides by the pif cost of that
// stream (caching dynamics are policy independent, so this is exactly the
// paired pif run).
inline Report run_plan(const ExperimentPlan& plan) {
  std::vector<std::optional<double>> axis;
  if (plan.sweep_axis == SweepAxis::none) axis.push_back(std::nullopt);
  else for (const double v : plan.sweep_values) axis.push_back(v);

  Report report;
  report.seed = plan.base.seed;
  report.axis = plan.sweep_axis;
  report.points.resize(axis.size());
  std::vector<std::vector<ReportRow>> per_point(axis.size());
  const bool single_run = axis.size() == 1 && plan.policies.size() == 1;

  auto run_point = [&](std::size_t i) {
    RunConfig cfg;
    try {
      cfg = derive_config(plan, axis[i]);
      const auto requests = load_workload(cfg);
      report.points[i] = {axis[i].value_or(0.0), stream_checksum(requests), requests.size()};
      for (const auto policy : plan.policies) {
        cfg.policy = policy;
        CostLedger ledger;
        if (!plan.event_log_path.empty()) {
          std::ofstream log(detail::event_log_name(plan.event_log_path, i, policy, single_run));
          if (!log) throw InputError("event log: cannot open for writing");
          EventLogWriter writer(log);
          ledger = run_simulation(cfg, requests, std::ref(writer));
        } else {
          ledger = run_simulation(cfg, requests);
        }
        const double pif_mean = ledger.requests ? ledger.shadow_pif_cost / double(ledger.requests) : 0.0;
        if (pif_mean > 0.0) ledger.normalized_cost = ledger.mean_cost / pif_mean;
        per_point[i].push_back({axis[i].value_or(0.0), policy, ledger});
      }
    } catch (const std::exception& e) {
      if (!axis[i]) throw;
      std::ostringstream os;
      os << "sweep point " << to_string(plan.sweep_axis) << "=" << *axis[i] << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(plan.jobs, unsigned(axis.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < axis.size(); ++i) run_point(i);
  } else {
    std::vector<std::string> errors(axis.size());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < axis.size(); i += jobs) {
          try {
            run_point(i);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (!e.empty()) throw std::runtime_error(e);
    }
  }

  for (auto& rows : per_point) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) {
                     if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
                     return std::string_view(to_string(a.policy)) < to_string(b.policy);
                   });
  std::stable_sort(report.points.begin(), report.points.end(),
                   [](const SweepPoint& a, const SweepPoint& b) {
                     return a.axis_value < b.axis_value;
                   });
  return report;
}

inline constexpr std::string_view kReportColumns =
    "axis_value,policy,mean_cost,normalized_cost,miss_rate,negative_access_rate";

// Fixed 6-decimal CSV preceded by '#' header lines (seed, axis, per-point
// stream checksums).
inline void write_csv(const Report& report, std::ostream& out) {
  out << "# seed=" << report.seed << "\n";
  out << "# sweep_axis=" << to_string(report.axis) << "\n";
  for (const auto& p : report.points) {
    out << "# point axis_value=" << format_fixed(p.axis_value) << " requests=" << p.requests
        << " stream_checksum=" << std::hex << std::setw(16) << std::setfill('0')
        << p.stream_checksum << std::dec << std::setfill(' ') << "\n";
  }
  out << kReportColumns << "\n";
  for (const auto& r : report.rows) {
    out << format_fixed(r.axis_value) << ',' << to_string(r.policy) << ','
        << format_fixed(r.ledger.mean_cost) << ','
        << (r.ledger.normalized_cost ? format_fixed(*r.ledger.normalized_cost) : "nan") << ','
        << format_fixed(r.ledger.miss_rate()) << ',' << format_fixed(r.ledger.negative_access_rate())
        << "\n";
  }
}

inline void write_table(const Report& report, std::ostream& out) {
  out << std::left << std::setw(14) << to_string(report.axis) << std::setw(10) << "policy"
      << std::right << std::setw(12) << "mean_cost" << std::setw(12) << "normalized"
      << std::setw(10) << "miss" << std::setw(10) << "neg_acc" << "\n";
  for (const auto& r : report.rows) {
    out << std::left << std::setw(14) << format_fixed(r.axis_value, 3) << std::setw(10)
        << to_string(r.policy) << std::right << std::setw(12) << format_fixed(r.ledger.mean_cost, 4)
        << std::setw(12)
        << (r.ledger.normalized_cost ? format_fixed(*r.ledger.normalized_cost, 4) : "nan")
        << std::setw(10) << format_fixed(r.ledger.miss_rate(), 4) << std::setw(10)
        << format_fixed(r.ledger.negative_access_rate(), 4) << "\n";
  }
}

struct CsvRecord {
  double axis_value = 0.0;
  std::string policy;
  double mean_cost = 0.0;
  double normalized_cost = 0.0;
  double miss_rate = 0.0;
  double negative_access_rate = 0.0;
};

// Reads the data rows of a write_csv report.
inline std::vector<CsvRecord> read_report_csv(std::istream& in) {
  std::vector<CsvRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kReportColumns) throw InputError("report: unexpected header", lineno);
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 6) throw InputError("report: expected 6 fields", lineno);
    auto num = [&](const std::string& s) {
      if (s == "nan") return std::nan("");
      try {
        return detail::to_double("report", s);
      } catch (const ConfigError&) {
        throw InputError("report: bad number '" + s + "'", lineno);
      }
    };
    out.push_back({num(f[0]), f[1], num(f[2]), num(f[3]), num(f[4]), num(f[5])});
  }
  return out;
}

struct AnalysisGrid {
  std::vector<double> h{0.5};
  std::vector<double> fpr;
  std::vector<double> fnr;
  std::size_t num_caches = 3;
  double miss_penalty = 100.0;
};

// fpr, fnr in {0, 0.005, ..., 0.045} at h = 0.5.
inline AnalysisGrid default_analysis_grid() {
  AnalysisGrid g;
  for (int i = 0; i < 10; ++i) {
    g.fpr.push_back(0.005 * i);
    g.fnr.push_back(0.005 * i);
  }
  return g;
}

struct AnalysisRow {
  double h, fpr, fnr;
  std::size_t num_caches;
  double miss_penalty;
  double cost_fna, cost_fno, cost_pif;
  double normalized_fna, normalized_fno;
  bool sufficiently_accurate;
};

inline std::vector<AnalysisRow> emit_analysis(const AnalysisGrid& grid) {
  std::vector<AnalysisRow> rows;
  for (const double h : grid.h) {
    for (const double fnr : grid.fnr) {
      for (const double fpr : grid.fpr) {
        const IndicatorAccuracy acc{fpr, fnr};
        AnalysisRow r{h, fpr, fnr, grid.num_caches, grid.miss_penalty, 0, 0, 0, 0, 0,
                      is_sufficiently_accurate(acc)};
        r.cost_fna = expected_cost(HomoPolicy::fna, h, acc, grid.num_caches, grid.miss_penalty);
        r.cost_fno = expected_cost(HomoPolicy::fno, h, acc, grid.num_caches, grid.miss_penalty);
        r.cost_pif = pif_cost(h, grid.num_caches, grid.miss_penalty);
        r.normalized_fna = r.cost_fna / r.cost_pif;
        r.normalized_fno = r.cost_fno / r.cost_pif;
        rows.push_back(r);
      }
    }
  }
  return rows;
}

inline void write_analysis_csv(const std::vector<AnalysisRow>& rows, std::ostream& out) {
  out << "h,fpr,fnr,N,p,cost_fna,cost_fno,cost_pif,normalized_fna,normalized_fno,"
         "sufficiently_accurate\n";
  for (const auto& r : rows) {
    out << format_fixed(r.h) << ',' << format_fixed(r.fpr) << ',' << format_fixed(r.fnr) << ','
        << r.num_caches << ',' << format_fixed(r.miss_penalty) << ',' << format_fixed(r.cost_fna)
        << ',' << format_fixed(r.cost_fno) << ',' << format_fixed(r.cost_pif) << ','
        << format_fixed(r.normalized_fna) << ',' << format_fixed(r.normalized_fno) << ','
        << (r.sufficiently_accurate ? 1 : 0) << "\n";
  }
}

}  // namespace fnaware
