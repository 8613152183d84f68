// fnaware: simulate / analyze / fn-ratio front end.
//
// Exit codes: 0 success, 2 configuration error, 1 runtime error.

#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fnaware/experiment.hpp"

namespace {

using namespace fnaware;

// Run-config flags, forwarded to parse_config as key=value overrides.
const std::vector<std::pair<std::string, std::string>> kRunFlags{
    {"num_caches", "number of caches N"},
    {"cache_capacities", "per-cache capacity in items (one value broadcasts)"},
    {"access_costs", "per-cache access cost (one value broadcasts)"},
    {"miss_penalty", "miss penalty p"},
    {"bpe", "indicator bits per cached element"},
    {"update_interval", "insertions between advertisements, or 'auto' (0.1 * capacity)"},
    {"accuracy_cadence", "insertions between (fpr, fnr) re-estimations"},
    {"ewma_horizon", "positive-ratio epoch length"},
    {"ewma_delta", "positive-ratio smoothing factor"},
    {"seed", "master seed"},
    {"trace", "trace file (one key per line); default is a synthetic Zipf stream"},
    {"zipf_alpha", "Zipf exponent"},
    {"zipf_universe", "Zipf universe size"},
    {"requests", "Zipf stream length"},
    {"warmup", "leading requests excluded from the ledger"},
    {"solver", "auto, exhaustive or greedy"},
};

struct Overrides {
  std::deque<std::pair<std::string, std::vector<std::string>>> raw;  // stable addresses

  void add_to(CLI::App* app) {
    for (const auto& [key, help] : kRunFlags) add(app, key, help);
  }
  void add(CLI::App* app, const std::string& key, const std::string& help) {
    raw.emplace_back(key, std::vector<std::string>{});
    std::string flag = "--" + key;
    for (auto& ch : flag) ch = ch == '_' ? '-' : ch;
    app->add_option(flag, raw.back().second, help)->expected(1)->type_size(1);
  }
  ConfigEntries entries() const {
    ConfigEntries out;
    for (const auto& [k, v] : raw) {
      if (!v.empty()) out.emplace_back(k, v.back());
    }
    return out;
  }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw InputError("output: cannot open '" + path + "' for writing");
  return file;
}

std::vector<std::uint64_t> to_u64(const std::string& field, const std::vector<double>& v) {
  std::vector<std::uint64_t> out;
  for (const double x : v) out.push_back(detail::integral_axis_value(field, x));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"False-negative-aware cache selection: simulation and cost analysis"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run policies on a request stream, optionally sweeping one axis");
  std::string sim_config;
  bool sim_table = false;
  Overrides sim_over;
  sim->add_option("-c,--config", sim_config, "key=value configuration file");
  sim_over.add_to(sim);
  sim_over.add(sim, "policies", "comma-separated subset of fna,fno,fna_star,pif");
  sim_over.add(sim, "sweep_axis",
               "none, miss_penalty, update_interval, bpe, cache_size or num_caches");
  sim_over.add(sim, "sweep_values", "comma list or start:stop:step");
  sim_over.add(sim, "output", "CSV output path (default stdout)");
  sim_over.add(sim, "event_log", "per-request CSV event log path");
  sim_over.add(sim, "jobs", "sweep points run concurrently");
  sim->add_flag("--table", sim_table, "also print an aligned summary table to stderr");

  // analyze
  auto* ana = app.add_subcommand("analyze", "closed-form homogeneous costs over an (h, fpr, fnr) grid");
  std::string h_list = "0.5", fpr_list = "0:0.045:0.005", fnr_list = "0:0.045:0.005";
  std::size_t ana_n = 3;
  double ana_p = 100.0;
  std::string ana_out;
  ana->add_option("--hit-ratio", h_list, "hit ratios: comma list or start:stop:step")->capture_default_str();
  ana->add_option("--fpr", fpr_list, "false-positive ratios")->capture_default_str();
  ana->add_option("--fnr", fnr_list, "false-negative ratios")->capture_default_str();
  ana->add_option("--num-caches", ana_n, "N")->capture_default_str();
  ana->add_option("--miss-penalty", ana_p, "p")->capture_default_str();
  ana->add_option("--output", ana_out, "CSV output path (default stdout)");

  // fn-ratio
  auto* fnr = app.add_subcommand("fn-ratio", "empirical false-negative ratio of stale indicators per update interval");
  std::string fnr_config, intervals = "16,128,1024,8192", bpes;
  std::string fnr_out;
  Overrides fnr_over;
  fnr->add_option("-c,--config", fnr_config, "key=value configuration file");
  fnr_over.add_to(fnr);
  fnr->add_option("--intervals", intervals, "update intervals")->capture_default_str();
  fnr->add_option("--bpe-values", bpes, "bpe values to compare (default: the configured bpe)");
  fnr->add_option("--output", fnr_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const auto plan = sim_config.empty() ? parse_config({}, sim_over.entries())
                                           : parse_config_file(sim_config, sim_over.entries());
      const auto report = run_plan(plan);
      std::ofstream file;
      auto& out = open_output(plan.output_path, file);
      write_csv(report, out);
      if (sim_table) write_table(report, std::cerr);
    } else if (*ana) {
      AnalysisGrid grid;
      grid.h = detail::to_double_list("h", h_list);
      grid.fpr = detail::to_double_list("fpr", fpr_list);
      grid.fnr = detail::to_double_list("fnr", fnr_list);
      grid.num_caches = ana_n;
      grid.miss_penalty = ana_p;
      for (const double h : grid.h) {
        if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("h", "must lie in [0, 1]");
      }
      for (const auto* v : {&grid.fpr, &grid.fnr}) {
        for (const double x : *v) {
          if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(v == &grid.fpr ? "fpr" : "fnr", "must lie in [0, 1]");
        }
      }
      if (ana_n == 0) throw ConfigError("num_caches", "must be positive");
      if (!(ana_p >= 1.0)) throw ConfigError("miss_penalty", "must be >= 1");
      std::ofstream file;
      auto& out = open_output(ana_out, file);
      write_analysis_csv(emit_analysis(grid), out);
    } else if (*fnr) {
      auto plan = fnr_config.empty() ? parse_config({}, fnr_over.entries())
                                     : parse_config_file(fnr_config, fnr_over.entries());
      const auto ivs = to_u64("intervals", detail::to_double_list("intervals", intervals));
      std::vector<double> bpe_values{plan.base.bpe};
      if (!bpes.empty()) bpe_values = detail::to_double_list("bpe_values", bpes);
      const auto requests = load_workload(plan.base);
      std::ofstream file;
      auto& out = open_output(fnr_out, file);
      out << "# seed=" << plan.base.seed << "\n";
      out << "bpe,update_interval,cached_requests,false_negatives,fnr\n";
      for (const double b : bpe_values) {
        RunConfig cfg = plan.base;
        cfg.bpe = b;
        validate(cfg);
        for (const auto& r : measure_fn_ratio(cfg, ivs, requests)) {
          out << format_fixed(r.bpe) << ',' << r.update_interval << ',' << r.cached_requests << ','
              << r.false_negatives << ',' << format_fixed(r.fnr) << "\n";
        }
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
