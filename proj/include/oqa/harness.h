// Game-loop driver: wires adversary, experts, oracle and learner together,
// records the ledger, checks memory and mistake bounds at every prefix, and
// writes CSV / summary files.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oqa/adversaries.h"
#include "oqa/core.h"
#include "oqa/experts.h"
#include "oqa/learners.h"

namespace oqa {

// Malformed configuration or inconsistent inputs (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The learner held more facts than its declared memory class (exit code 1).
class BudgetViolation : public std::runtime_error {
 public:
  BudgetViolation(std::uint64_t step, std::size_t held, std::size_t budget);
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

enum class OracleBacking { kSimulation, kThreshold };

inline constexpr std::string_view kLearnerNames[] = {
    "mwu", "lazy", "value-lazy", "full-sim", "random-evict"};

// Auxiliary entries allowed per expert.
inline constexpr std::size_t kAuxPerExpert = 4;

struct RunConfig {
  std::string learner = "lazy";
  // `random:universe=U,T=T,teach=F,seed=S`, `lowerbound:c=C,N=N,M=M,opt=K`,
  // or a stream file path.
  std::string adversary;
  // Value-suite file path, or a built-in suite: `value:N=n`, `lastseen:N=n`,
  // `firstseen:N=n`, `randevict:N=n`, `mixed:N=n` (each accepts `seed=`).
  // Ignored for lower-bound adversaries, which bring their own experts.
  std::string experts;
  // Defaults to 1, or to the lower-bound adversary's M.
  std::optional<std::size_t> M;
  // When set, must equal the expert-suite size.
  std::optional<std::size_t> N;
  std::uint64_t seed = 0;
  OracleBacking oracle = OracleBacking::kSimulation;
  double gamma = 0.5;
  // Memory of the random-evict learner; defaults to 2M (c*M against a
  // lower-bound adversary).
  std::optional<std::size_t> budget;
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> summary_path;
  bool check_bounds = true;
};

// Materialized inputs of one game.
struct GameSetup {
  std::size_t M = 1;
  Universe universe;
  ExpertSuite experts;
  std::unique_ptr<Adversary> adversary;
  std::shared_ptr<const LowerBoundInstance> lower_bound;
};

// Throws ConfigError on bad specs, unreadable files, or size mismatches.
GameSetup AssembleSetup(const RunConfig& config);

struct BoundCheck {
  std::string name;
  bool passed = true;
  // Reported only; does not affect BoundReport::passed().
  bool informational = false;
  // min over prefixes of (bound - observed); negative on violation.
  std::int64_t worst_slack = 0;
  std::optional<std::uint64_t> first_violation;
};

struct BoundReport {
  std::string learner;
  std::size_t N = 0;
  std::size_t M = 0;
  std::uint64_t T = 0;
  std::vector<BoundCheck> checks;

  bool passed() const;
  const BoundCheck* Find(std::string_view name) const;
};

struct BoundParams {
  std::string learner;
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t fact_cap = 0;
  std::optional<std::size_t> question_cap;
  std::size_t aux_cap = 0;
  bool mistake_bound = false;  // lazy-weights learners
  bool opt_bound = false;      // full-sim: L <= OPT
};

BoundParams DefaultBoundParams(std::string_view learner, std::size_t N,
                               std::size_t M, std::size_t fact_budget);

// Smallest k >= 0 with (num/den)^k >= n.
std::size_t CeilLog(std::uint64_t n, std::uint64_t num, std::uint64_t den);
// 6 (OPT + M) (ceil(log_{3/2} N) + 1)
std::uint64_t DerivedMistakeBound(std::uint64_t opt, std::size_t M,
                                  std::size_t N);
// 6 OPT ceil(log2 N) + 6 M ceil(log2 N)
std::uint64_t LiteralMistakeBound(std::uint64_t opt, std::size_t M,
                                  std::size_t N);

// Evaluates every cap and mistake bound at every prefix of the ledger.
BoundReport CheckBounds(const GameLedger& ledger, const BoundParams& params);

struct LowerBoundOutcome {
  std::uint64_t part_one_mistakes = 0;
  std::uint64_t total_mistakes = 0;
  std::vector<ExpertIndex> survivors;
  // Largest true-mistake count among surviving leaf experts.
  std::uint64_t survivor_mistakes = 0;
  std::vector<std::size_t> chosen_blocks;
  std::vector<std::size_t> stored_at_selection;
  std::size_t pigeonhole_failures = 0;
};

struct PlayOptions {
  std::string learner = "lazy";
  std::uint64_t seed = 0;
  OracleBacking oracle = OracleBacking::kSimulation;
  double gamma = 0.5;
  std::optional<std::size_t> budget;
  // When false, a budget overrun is recorded as a failed check instead of
  // aborting the game.
  bool enforce_budget = true;
};

struct GameResult {
  GameLedger ledger;
  BoundReport report;
  Universe universe;
  std::string learner;
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t sequential_violations = 0;
  std::optional<LowerBoundOutcome> lower_bound;
  std::vector<std::string> warnings;
};

// Plays the game to the end of the adversary's stream. Each step:
//   1. the adversary emits an event (seeing the learner's stored facts);
//   2. an Evaluate is charged against the memories held before the step;
//   3. the learner's weight update runs (oracle sees pre-update memories);
//   4. the experts are offered the step's fact;
//   5. the learner's memory update runs (oracle sees updated memories).
// Throws BudgetViolation if the learner exceeds its memory class, ConfigError
// for an unusable learner/suite combination.
GameResult Play(GameSetup setup, const PlayOptions& options);

// AssembleSetup + Play, then writes the requested outputs.
GameResult RunGame(const RunConfig& config);

void WriteSummary(std::ostream& out, const GameResult& result);
// Writes CSV and summary files where configured; std::runtime_error with the
// path on I/O failure.
void EmitOutputs(const GameResult& result, const RunConfig& config);

// JSON grid: {"learners": [...], "adversaries": [...], "experts": [...],
// "M": [...], "seeds": [...]} expanded as a cartesian product. Optional
// "oracle": "simulation" | "threshold".
std::vector<RunConfig> LoadGrid(const std::filesystem::path& path);

struct SweepEntry {
  RunConfig config;
  bool ok = false;
  bool passed = false;
  std::string summary;  // one-line JSON
  std::string error;
};

// One game per worker thread; results in config order.
std::vector<SweepEntry> RunSweep(const std::vector<RunConfig>& configs,
                                 std::size_t workers);

}  // namespace oqa
