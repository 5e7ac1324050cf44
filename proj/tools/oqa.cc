// Command-line harness: `oqa run`, `oqa verify`, `oqa sweep`.
// Exit codes: 0 pass, 1 bound/invariant/budget failure, 2 config error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <thread>

#include "acceptance.h"
#include "oqa/harness.h"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;

int RunCommand(const oqa::RunConfig& config) {
  try {
    const oqa::GameResult result = oqa::RunGame(config);
    if (!config.summary_path) oqa::WriteSummary(std::cout, result);
    for (const std::string& w : result.warnings) {
      std::cerr << "warning: " << w << '\n';
    }
    if (config.check_bounds && !result.report.passed()) {
      for (const oqa::BoundCheck& c : result.report.checks) {
        if (c.passed || c.informational) continue;
        std::cerr << "bound failed: " << c.name << " at step "
                  << c.first_violation.value_or(0) << " (slack "
                  << c.worst_slack << ")\n";
      }
      return kFail;
    }
    return kPass;
  } catch (const oqa::BudgetViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  } catch (const oqa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
}

int VerifyCommand(bool quick) {
  const auto results = oqa::verify::RunAcceptance(
      quick ? oqa::verify::Scale::kQuick : oqa::verify::Scale::kFull,
      &std::cout);
  int failed = 0;
  for (const auto& r : results) {
    oqa::verify::PrintResult(std::cout, r);
    failed += r.passed ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? kPass : kFail;
}

int SweepCommand(const std::string& grid, std::size_t workers,
                 const std::string& out_path) {
  std::vector<oqa::RunConfig> configs;
  try {
    configs = oqa::LoadGrid(grid);
  } catch (const oqa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return kFail;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  const auto entries = oqa::RunSweep(configs, workers);
  std::size_t passed = 0;
  for (const oqa::SweepEntry& e : entries) {
    if (e.ok) {
      out << e.summary << '\n';
    } else {
      std::cerr << "run failed (" << e.config.learner << ", "
                << e.config.adversary << ", seed " << e.config.seed
                << "): " << e.error << '\n';
    }
    passed += e.ok && e.passed ? 1 : 0;
  }
  std::cerr << passed << "/" << entries.size() << " runs passed\n";
  return passed == entries.size() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online question answering with expert advice: simulator"};
  app.require_subcommand(1);

  oqa::RunConfig config;
  config.check_bounds = false;
  std::string csv, summary, oracle = "simulation";
  std::optional<std::size_t> M, N, budget;
  auto* run = app.add_subcommand("run", "Play one game");
  run->add_option("--learner", config.learner,
                  "mwu | lazy | value-lazy | full-sim | random-evict")
      ->required();
  run->add_option("--adversary", config.adversary,
                  "random:universe=U,T=T[,teach=F,seed=S] | "
                  "lowerbound:c=C,N=N[,M=M,opt=K] | stream file")
      ->required();
  run->add_option("--experts", config.experts,
                  "value-suite file or value|lastseen|firstseen|randevict|"
                  "mixed:N=n[,seed=S]");
  run->add_option("--M", M, "expert memory size");
  run->add_option("--N", N, "expected number of experts");
  run->add_option("--seed", config.seed, "random seed");
  run->add_option("--csv", csv, "per-step ledger CSV path");
  run->add_option("--summary", summary, "summary JSON path (stdout if absent)");
  run->add_flag("--check-bounds", config.check_bounds,
                "exit 1 when a bound or invariant fails");
  run->add_option("--oracle", oracle, "expert oracle backing")
      ->check(CLI::IsMember({"simulation", "threshold"}));
  run->add_option("--gamma", config.gamma, "MWU penalty in (0,1)");
  run->add_option("--budget", budget, "random-evict memory size");

  bool quick = false;
  auto* verify = app.add_subcommand("verify", "Run every acceptance check");
  verify->add_flag("--quick", quick, "reduced-scale run");

  std::string grid, sweep_out;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("--grid", grid, "JSON grid file")->required();
  sweep->add_option("--workers", workers, "parallel games");
  sweep->add_option("--out", sweep_out, "write JSON lines here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  if (*run) {
    config.M = M;
    config.N = N;
    config.budget = budget;
    config.oracle = oracle == "threshold" ? oqa::OracleBacking::kThreshold
                                          : oqa::OracleBacking::kSimulation;
    if (!csv.empty()) config.csv_path = csv;
    if (!summary.empty()) config.summary_path = summary;
    return RunCommand(config);
  }
  if (*verify) return VerifyCommand(quick);
  return SweepCommand(grid, workers, sweep_out);
}
