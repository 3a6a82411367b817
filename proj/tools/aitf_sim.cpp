// Scenario runner and bound calculator for the AITF filtering simulator.
//
// aitf_sim run     --scenario FILE --out DIR [--seed N] [--duration S]
//                  [--runs K] [--jobs N]
// aitf_sim analyze --Bv ... --Batt ... --Natt ... --R ... --T ...
//                  [--Ttmp ...] [--Nagw ...] [--Rmax ...] [--Tfr ...]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime invariant
// violation.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "aitf/analytics.hpp"
#include "aitf/csv.hpp"
#include "aitf/log.hpp"
#include "aitf/scenario.hpp"
#include "aitf/simnet.hpp"

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string scenario_path;
  std::string out_dir;
  long long seed = -1;
  double duration = -1;
  unsigned runs = 1;
  unsigned jobs = 1;
};

void write_outputs(const aitf::RunResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream ts(dir / "timeseries.csv", std::ios::binary);
    if (!ts) throw std::runtime_error("cannot write " +
                                      (dir / "timeseries.csv").string());
    aitf::write_timeseries(ts, result.samples);
  }
  {
    std::ofstream sm(dir / "summary.csv", std::ios::binary);
    if (!sm) throw std::runtime_error("cannot write " +
                                      (dir / "summary.csv").string());
    aitf::write_summary(sm, result.summaries);
  }
}

int cmd_run(const RunOptions& opt) {
  aitf::ScenarioConfig base;
  try {
    base = aitf::parse_scenario(opt.scenario_path);
    if (opt.seed >= 0) base.seed = static_cast<std::uint64_t>(opt.seed);
    if (opt.duration > 0) base.duration_s = opt.duration;
    base.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  std::vector<aitf::ScenarioConfig> configs;
  for (unsigned i = 0; i < opt.runs; ++i) {
    aitf::ScenarioConfig c = base;
    c.seed = base.seed + i;
    configs.push_back(c);
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> status{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size() || status.load() != 0) return;
      const aitf::ScenarioConfig& c = configs[i];
      try {
        aitf::log_info("run seed=", c.seed, " duration=", c.duration_s, "s");
        const aitf::RunResult result = aitf::run_scenario(c);
        const fs::path dir =
            configs.size() == 1
                ? fs::path(opt.out_dir)
                : fs::path(opt.out_dir) / ("seed_" + std::to_string(c.seed));
        write_outputs(result, dir);
        aitf::log_info("run seed=", c.seed, " done in ", result.wall_seconds,
                       "s wall, ", result.samples.size(), " samples");
      } catch (const aitf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        status.store(1);
      } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        status.store(2);
      }
    }
  };

  const unsigned n_threads =
      std::max(1u, std::min(opt.jobs, static_cast<unsigned>(configs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return status.load();
}

struct AnalyzeOptions {
  double Bv = 0, Batt = 0, Natt = 0, R = 0, T = 0;
  double Ttmp = 1.0, Nagw = 0, Rmax = 0, Tfr = 0;
};

int cmd_analyze(const AnalyzeOptions& o) {
  if (o.Bv <= 0 || o.R <= 0 || o.T <= 0 || o.Batt < 0 || o.Natt < 0) {
    std::cerr << "analyze: --Bv, --R, --T must be > 0; --Batt, --Natt "
                 ">= 0\n";
    return 1;
  }
  aitf::AttackProfile p;
  p.victim_bandwidth = o.Bv;
  p.attack_bandwidth = o.Batt;
  p.undesired_flows = o.Natt;
  p.request_rate = o.R;
  p.filtering_window = o.T;
  p.temp_filter_timeout = o.Ttmp;
  p.attacker_gateways = o.Nagw;
  p.max_request_rate = o.Rmax > 0 ? o.Rmax : o.R;
  p.response_time = o.Tfr;

  if (p.window_too_small())
    std::cerr << "warning: T < 10 * T_tmp; the temporary-filter economy "
                 "barely pays off\n";

  char buf[160];
  const double preserved = aitf::preserved_bandwidth(p);
  const double lost = aitf::lost_bandwidth_bound(p);
  if (p.undesired_flows <= 0) {
    std::printf("no attack: full bandwidth\n");
    std::snprintf(buf, sizeof(buf), "preserved: %g Mbps\n", preserved / 1e6);
    std::fputs(buf, stdout);
  } else if (p.request_rate * p.filtering_window >= p.undesired_flows) {
    std::snprintf(buf, sizeof(buf),
                  "preserved: %g Mbps (R*T >= N_att: every undesired flow "
                  "stays blocked)\n",
                  preserved / 1e6);
    std::fputs(buf, stdout);
  } else {
    std::snprintf(buf, sizeof(buf), "preserved: %g Mbps\n", preserved / 1e6);
    std::fputs(buf, stdout);
  }
  std::printf("lost bound: %g Mbps\n", lost / 1e6);

  const double n_agw =
      p.attacker_gateways > 0 ? p.attacker_gateways : p.undesired_flows;
  const auto [lo, hi] =
      aitf::filter_count_bounds(p.max_request_rate, p.temp_filter_timeout,
                                n_agw);
  if (n_agw > 0)
    std::printf("wire filters: between %.0f and %.0f\n", lo, hi);
  else
    std::printf("wire filters: at least %.0f (pass --Nagw for the upper "
                "bound)\n", lo);
  std::printf("shadow entries: %.0f\n",
              aitf::shadow_entry_requirement(p.max_request_rate,
                                             p.filtering_window));
  if (o.Tfr > 0 && p.undesired_flows > 0) {
    const auto loss = aitf::per_flow_consumed_bandwidth(
        p.attack_bandwidth / p.undesired_flows, o.Tfr, o.T);
    std::printf("per-flow loss: exact %.2f bits/s, approx %.2f bits/s "
                "(gap %.4f%%)\n",
                loss.exact, loss.approximate, 100.0 * loss.relative_gap);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AITF filtering protocol simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "run a scenario and write CSVs");
  run->add_option("--scenario", run_opt.scenario_path, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_opt.out_dir, "output directory")->required();
  run->add_option("--seed", run_opt.seed, "override [run] seed");
  run->add_option("--duration", run_opt.duration, "override [run] duration_s");
  run->add_option("--runs", run_opt.runs,
                  "number of runs with consecutive seeds");
  run->add_option("--jobs", run_opt.jobs, "parallel workers for --runs");

  AnalyzeOptions an;
  CLI::App* analyze =
      app.add_subcommand("analyze", "evaluate the closed-form bounds");
  analyze->add_option("--Bv", an.Bv, "victim bandwidth, bits/s")->required();
  analyze->add_option("--Batt", an.Batt, "attack bandwidth, bits/s")
      ->required();
  analyze->add_option("--Natt", an.Natt, "undesired flow count")->required();
  analyze->add_option("--R", an.R, "filtering requests per second")
      ->required();
  analyze->add_option("--T", an.T, "filtering window, seconds")->required();
  analyze->add_option("--Ttmp", an.Ttmp, "temporary filter timeout, seconds");
  analyze->add_option("--Nagw", an.Nagw, "attacker gateway count");
  analyze->add_option("--Rmax", an.Rmax, "max satisfiable request rate");
  analyze->add_option("--Tfr", an.Tfr, "per-flow response time, seconds");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(run_opt);
  return cmd_analyze(an);
}
