#include "acceptance.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include "oqa/harness.h"
#include "oracles.h"

namespace oqa::verify {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// --- random sweep: memory, mistake and threshold audits -----------------------

struct SweepScale {
  std::vector<std::size_t> Ns;
  std::vector<std::size_t> Ms;
  std::size_t seeds;
  std::size_t length;
};

SweepScale MakeSweepScale(Scale scale) {
  if (scale == Scale::kQuick) return {{2, 8, 64}, {1, 4, 16}, 2, 10000};
  return {{2, 8, 64}, {1, 4, 16}, 12, 100000};
}

// Tally of one named check across many runs.
struct Tally {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::int64_t worst_slack = std::numeric_limits<std::int64_t>::max();
  std::string first_failure;

  void Add(const BoundCheck* check, const std::string& label) {
    ++runs;
    if (!check) {
      ++failures;
      if (first_failure.empty()) first_failure = label + ": check missing";
      return;
    }
    worst_slack = std::min(worst_slack, check->worst_slack);
    if (!check->passed) {
      ++failures;
      if (first_failure.empty()) {
        first_failure = label + " at t=" + std::to_string(*check->first_violation);
      }
    }
  }
  void Fail(const std::string& label) {
    ++runs;
    ++failures;
    if (first_failure.empty()) first_failure = label;
  }
  bool ok() const { return runs > 0 && failures == 0; }
  std::string Describe(const std::string& what) const {
    std::ostringstream out;
    out << what << ": " << runs - failures << "/" << runs << " runs hold";
    if (runs > 0 && worst_slack != std::numeric_limits<std::int64_t>::max()) {
      out << ", min slack " << worst_slack;
    }
    if (!first_failure.empty()) out << "; first failure " << first_failure;
    return out.str();
  }
};

struct SweepOutcome {
  std::size_t streams = 0;
  double seconds = 0;
  Tally lazy_facts;
  Tally value_facts;
  Tally value_questions;
  Tally derived;
  Tally literal;
  Tally threshold;
  Tally pre_threshold;
  Tally perceived;
  Tally perceived_total;
  Tally lazy_minor;
};

const char* const kLazySuites[] = {"value", "lastseen", "firstseen",
                                   "randevict", "mixed"};

SweepOutcome RunRandomSweep(Scale scale) {
  const SweepScale s = MakeSweepScale(scale);
  const auto start = Clock::now();
  SweepOutcome out;
  std::uint64_t stream_id = 0;
  for (std::size_t N : s.Ns) {
    for (std::size_t M : s.Ms) {
      const std::size_t universes[] = {2 * M + 2, 4 * M + 4, 16 * M + 16};
      for (std::size_t i = 0; i < s.seeds; ++i) {
        ++stream_id;
        ++out.streams;
        RunConfig config;
        config.M = M;
        config.seed = stream_id;
        config.adversary = "random:universe=" +
                           std::to_string(universes[i % 3]) +
                           ",T=" + std::to_string(s.length) +
                           ",teach=0.5,seed=" + std::to_string(stream_id);
        auto play = [&](const std::string& learner, const std::string& suite) {
          config.learner = learner;
          config.experts = suite + ":N=" + std::to_string(N);
          PlayOptions options;
          options.learner = learner;
          options.seed = config.seed;
          options.enforce_budget = false;
          const std::string label = learner + " " + config.experts + " M=" +
                                    std::to_string(M) + " " + config.adversary;
          try {
            return std::optional<GameResult>(
                Play(AssembleSetup(config), options));
          } catch (const std::exception& e) {
            out.lazy_facts.Fail(label + ": " + e.what());
            return std::optional<GameResult>();
          }
        };
        for (const char* suite : kLazySuites) {
          const std::string label = std::string("lazy/") + suite + " N=" +
                                    std::to_string(N) + " M=" +
                                    std::to_string(M) + " stream " +
                                    std::to_string(stream_id);
          const auto r = play("lazy", suite);
          if (!r) continue;
          out.lazy_facts.Add(r->report.Find("fact_memory"), label);
          out.derived.Add(r->report.Find("mistakes_derived"), label);
          out.literal.Add(r->report.Find("mistakes_literal"), label);
          out.lazy_minor.Add(
              r->report.Find("minor_mistakes_between_updates"), label);
        }
        const std::string label = "value-lazy N=" + std::to_string(N) +
                                  " M=" + std::to_string(M) + " stream " +
                                  std::to_string(stream_id);
        const auto r = play("value-lazy", "value");
        if (!r) continue;
        out.value_facts.Add(r->report.Find("fact_memory"), label);
        out.value_questions.Add(r->report.Find("question_memory"), label);
        out.derived.Add(r->report.Find("mistakes_derived"), label);
        out.literal.Add(r->report.Find("mistakes_literal"), label);
        out.threshold.Add(r->report.Find("threshold_soundness"), label);
        out.pre_threshold.Add(r->report.Find("pre_threshold_soundness"), label);
        out.perceived.Add(r->report.Find("perceived_errors"), label);
        out.perceived_total.Add(r->report.Find("perceived_errors_cumulative"),
                                label);
      }
    }
  }
  out.seconds = SecondsSince(start);
  return out;
}

// --- oracle equivalence and value-based semantics -----------------------------

struct OracleAudit {
  std::uint64_t streams = 0;
  std::uint64_t oracle_checks = 0;
  std::uint64_t oracle_mismatches = 0;
  std::uint64_t replay_checks = 0;
  std::uint64_t replay_mismatches = 0;
  std::string first_oracle_mismatch;
  std::string first_replay_mismatch;
  double seconds = 0;
};

struct AuditState {
  ExpertSuite experts;
  std::vector<QuestionId> offered;
  std::vector<bool> taught;
};

// Compares both oracles and the replayed top-M against the live experts for
// every (expert, question) pair of the current state.
void AuditOne(const AuditState& state, std::size_t M,
                 std::size_t num_questions, const std::string& where,
                 OracleAudit& audit) {
  const SimulationOracle simulation(state.experts);
  ThresholdOracle threshold(state.experts);
  for (QuestionId q : state.offered) threshold.NoteOffered(q);
  for (ExpertIndex e = 0; e < state.experts.size(); ++e) {
    const ValueBasedExpert& expert = state.experts.value_expert(e);
    const auto top = ReplayTopM(expert.values(), state.offered, M);
    ++audit.replay_checks;
    if (ReplayThreshold(expert.values(), state.offered, M) !=
            expert.TrueThreshold() ||
        top.size() != expert.size()) {
      ++audit.replay_mismatches;
      if (audit.first_replay_mismatch.empty()) {
        audit.first_replay_mismatch = where + " expert " + std::to_string(e);
      }
    }
    for (std::uint32_t i = 0; i < num_questions; ++i) {
      const QuestionId q{i};
      const bool live = simulation.Query(e, q);
      ++audit.oracle_checks;
      if (threshold.Query(e, q) != live) {
        ++audit.oracle_mismatches;
        if (audit.first_oracle_mismatch.empty()) {
          audit.first_oracle_mismatch = where + " expert " +
                                        std::to_string(e) + " q" +
                                        std::to_string(i);
        }
      }
      ++audit.replay_checks;
      if (std::binary_search(top.begin(), top.end(), q) != live) {
        ++audit.replay_mismatches;
        if (audit.first_replay_mismatch.empty()) {
          audit.first_replay_mismatch = where + " expert " +
                                        std::to_string(e) + " q" +
                                        std::to_string(i);
        }
      }
    }
  }
}

// Applies one event the way the game loop does: Teach reveals and offers;
// Evaluate offers only when the answer is already known.
void Apply(AuditState& state, const Event& event) {
  const std::size_t i = event.question.index;
  if (event.is_teach()) state.taught[i] = true;
  if (!state.taught[i]) return;
  state.experts.OfferAll({event.question, AnswerId{static_cast<std::uint32_t>(i)}});
  state.offered.push_back(event.question);
}

OracleAudit RunOracleAudit(Scale scale) {
  const auto start = Clock::now();
  OracleAudit audit;
  constexpr std::size_t kQuestions = 3;
  const std::size_t max_length = scale == Scale::kQuick ? 6 : 8;

  // Every ordering of values 1..3 over three questions: six experts.
  std::vector<std::uint64_t> perm = {1, 2, 3};
  ValueTable table;
  do {
    auto v = std::make_shared<ValueFunction>();
    for (std::uint32_t i = 0; i < kQuestions; ++i) v->Set({i}, perm[i]);
    table.push_back(v);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<Event> choices;
  for (std::uint32_t i = 0; i < kQuestions; ++i) {
    choices.push_back(Event::Teach({{i}, {i}}));
    choices.push_back(Event::Evaluate({i}));
  }

  for (std::size_t M = 1; M <= 5; ++M) {
    std::vector<AuditState> stack(max_length + 1);
    for (std::size_t e = 0; e < table.size(); ++e) {
      stack[0].experts.Add("e" + std::to_string(e),
                           std::make_unique<ValueBasedExpert>(M, table[e]));
    }
    stack[0].taught.assign(kQuestions, false);
    std::vector<std::size_t> path;
    std::function<void(std::size_t)> visit = [&](std::size_t depth) {
      ++audit.streams;
      std::string where;
      if (audit.oracle_mismatches + audit.replay_mismatches == 0) {
        where = "M=" + std::to_string(M) + " stream ";
        for (std::size_t c : path) {
          where += (c % 2 == 0 ? "T" : "E") + std::to_string(c / 2);
        }
      }
      AuditOne(stack[depth], M, kQuestions, where, audit);
      if (depth == max_length) return;
      for (std::size_t c = 0; c < choices.size(); ++c) {
        stack[depth + 1] = stack[depth];
        Apply(stack[depth + 1], choices[c]);
        path.push_back(c);
        visit(depth + 1);
        path.pop_back();
      }
    };
    visit(0);
  }

  // Longer random streams over larger universes.
  const std::size_t random_streams = scale == Scale::kQuick ? 1000 : 10000;
  std::mt19937_64 rng(20240601);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  for (std::size_t s = 0; s < random_streams; ++s) {
    ++audit.streams;
    const std::size_t U = uniform(1, 20);
    const std::size_t N = uniform(1, 6);
    const std::size_t M = uniform(1, 5);
    const std::size_t length = uniform(9, 60);
    const double teach = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
    AuditState state;
    state.experts = MakeRandomValueSuite(N, U, M, rng());
    state.taught.assign(U, false);
    const std::string where = "random stream " + std::to_string(s);
    for (std::size_t t = 0; t < length; ++t) {
      const QuestionId q{static_cast<std::uint32_t>(uniform(0, U - 1))};
      const bool is_teach = std::bernoulli_distribution(teach)(rng);
      Apply(state, is_teach ? Event::Teach({q, {q.index}}) : Event::Evaluate(q));
      AuditOne(state, M, U, where + " step " + std::to_string(t + 1), audit);
    }
  }
  audit.seconds = SecondsSince(start);
  return audit;
}

// --- lower bound --------------------------------------------------------------

struct LowerBoundTally {
  std::size_t runs = 0;
  std::size_t met = 0;
  std::size_t budget_violations = 0;
  std::vector<std::string> failures;
};

LowerBoundTally RunLowerBound(std::size_t c,
                              const std::vector<std::string>& learners) {
  LowerBoundTally tally;
  for (const std::string& learner : learners) {
    for (std::size_t N : {4, 8, 16}) {
      for (std::size_t M : {2, 4}) {
        for (std::size_t opt : {0, 2}) {
          ++tally.runs;
          RunConfig config;
          config.learner = learner;
          config.adversary = "lowerbound:c=" + std::to_string(c) +
                             ",N=" + std::to_string(N) + ",M=" +
                             std::to_string(M) + ",opt=" + std::to_string(opt);
          PlayOptions options;
          options.learner = learner;
          const std::string label = learner + " N=" + std::to_string(N) +
                                    " M=" + std::to_string(M) +
                                    " opt=" + std::to_string(opt);
          const std::uint64_t need =
              FloorLog(N, 2 * c) * (M / 2) + opt;
          try {
            const GameResult r = Play(AssembleSetup(config), options);
            const LowerBoundOutcome& lb = *r.lower_bound;
            if (lb.total_mistakes >= need && lb.survivor_mistakes <= opt) {
              ++tally.met;
            } else {
              tally.failures.push_back(
                  label + ": L=" + std::to_string(lb.total_mistakes) +
                  " needs " + std::to_string(need) + ", survivor " +
                  std::to_string(lb.survivor_mistakes));
            }
          } catch (const BudgetViolation& e) {
            ++tally.budget_violations;
            tally.failures.push_back(label + ": " + e.what());
          }
        }
      }
    }
  }
  return tally;
}

std::string DescribeLowerBound(const LowerBoundTally& t) {
  std::ostringstream out;
  out << t.met << "/" << t.runs << " runs meet the bound, "
      << t.budget_violations << " budget violations";
  if (!t.failures.empty()) out << "; first: " << t.failures.front();
  return out.str();
}

// --- determinism --------------------------------------------------------------

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CriterionResult RunDeterminism(Scale scale) {
  CriterionResult result{9, "determinism and output files", true, "", 0};
  const auto start = Clock::now();
  const auto dir = std::filesystem::temp_directory_path() /
                   ("oqa-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string T = scale == Scale::kQuick ? "2000" : "20000";
  std::vector<RunConfig> configs(5);
  configs[0].learner = "lazy";
  configs[0].adversary = "random:universe=40,T=" + T + ",teach=0.4,seed=5";
  configs[0].experts = "randevict:N=8";
  configs[1].learner = "value-lazy";
  configs[1].adversary = "random:universe=24,T=" + T + ",teach=0.5,seed=6";
  configs[1].experts = "value:N=16";
  configs[2].learner = "mwu";
  configs[2].adversary = "random:universe=30,T=" + T + ",teach=0.6,seed=7";
  configs[2].experts = "mixed:N=8";
  configs[3].learner = "random-evict";
  configs[3].adversary = "random:universe=30,T=" + T + ",teach=0.5,seed=8";
  configs[3].experts = "value:N=4";
  configs[4].learner = "lazy";
  configs[4].adversary = "lowerbound:c=2,N=16,M=4,opt=3";
  std::size_t checked = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunConfig& c = configs[i];
    c.M = i == 4 ? std::optional<std::size_t>() : std::optional<std::size_t>(3);
    c.seed = 42 + i;
    std::string csv[2], summary[2];
    std::uint64_t L = 0, T_run = 0;
    for (int rep = 0; rep < 2; ++rep) {
      c.csv_path = dir / ("run" + std::to_string(i) + "_" + std::to_string(rep) + ".csv");
      c.summary_path = dir / ("run" + std::to_string(i) + "_" + std::to_string(rep) + ".json");
      const GameResult r = RunGame(c);
      L = r.ledger.learner_mistakes();
      T_run = r.ledger.size();
      csv[rep] = ReadFile(*c.csv_path);
      summary[rep] = ReadFile(*c.summary_path);
    }
    auto fail = [&](const std::string& why) {
      if (result.passed) result.detail = c.learner + " " + c.adversary + ": " + why;
      result.passed = false;
    };
    if (csv[0] != csv[1]) fail("CSV differs between runs");
    if (summary[0] != summary[1]) fail("summary differs between runs");
    const auto rows = std::count(csv[0].begin(), csv[0].end(), '\n');
    if (static_cast<std::uint64_t>(rows) != T_run + 1) fail("CSV row count");
    // L column of the last row.
    const auto last = csv[0].rfind('\n', csv[0].size() - 2);
    std::stringstream row(csv[0].substr(last + 1));
    std::string field;
    for (int k = 0; k < 5; ++k) std::getline(row, field, ',');
    if (field != std::to_string(L)) fail("last CSV row L != ledger L");
    if (summary[0].find("\"L\": " + std::to_string(L) + ",") == std::string::npos) {
      fail("summary L != ledger L");
    }
    ++checked;
  }
  std::filesystem::remove_all(dir);
  if (result.passed) {
    result.detail = std::to_string(checked) +
                    " configs run twice: CSV and summary byte-identical, row "
                    "counts and L consistent";
  }
  result.seconds = SecondsSince(start);
  return result;
}

}  // namespace

void PrintResult(std::ostream& out, const CriterionResult& r) {
  out << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title
      << ": " << r.detail << " (" << std::fixed << std::setprecision(1)
      << r.seconds << "s)" << std::endl;
}

std::vector<CriterionResult> RunAcceptance(Scale scale, std::ostream* notes) {
  std::vector<CriterionResult> results;
  auto note = [&](const std::string& text) {
    if (notes) *notes << "INFO " << text << std::endl;
  };

  const SweepOutcome sweep = RunRandomSweep(scale);
  const std::string streams = std::to_string(sweep.streams) + " streams, ";
  results.push_back({1, "lazy learner fact memory <= 2M",
                     sweep.lazy_facts.ok(),
                     streams + sweep.lazy_facts.Describe("5 expert suites"),
                     sweep.seconds});
  results.push_back(
      {2, "value-lazy fact memory and minor mistakes <= 2M",
       sweep.value_facts.ok() && sweep.value_questions.ok(),
       streams + sweep.value_facts.Describe("facts") + "; " +
           sweep.value_questions.Describe("minor mistakes"),
       0});
  results.push_back({3, "mistake bound 6(OPT+M)(ceil(log1.5 N)+1)",
                     sweep.derived.ok(), sweep.derived.Describe("all prefixes"),
                     0});
  note("literal bound 6 OPT ceil(log2 N) + 6 M ceil(log2 N): " +
       sweep.literal.Describe("lazy and value-lazy"));
  note("lazy minor mistakes between active-set updates <= 2M: " +
       sweep.lazy_minor.Describe("lazy"));
  results.push_back(
      {4, "threshold soundness and perceived errors",
       sweep.threshold.ok() && sweep.pre_threshold.ok() &&
           sweep.perceived.ok() && sweep.perceived_total.ok(),
       sweep.threshold.Describe("T_e <= T_e*") + "; " +
           sweep.pre_threshold.Describe("T_e^pre <= T_e^pre*") + "; " +
           sweep.perceived.Describe("E_e <= E_e*") + "; " +
           sweep.perceived_total.Describe("cumulative increments <= E_e*"),
       0});

  const OracleAudit audit = RunOracleAudit(scale);
  results.push_back(
      {5, "threshold oracle agrees with simulation",
       audit.oracle_mismatches == 0 && audit.oracle_checks > 0,
       std::to_string(audit.streams) + " streams, " +
           std::to_string(audit.oracle_checks) + " (expert, question, step) "
           "triples, " + std::to_string(audit.oracle_mismatches) +
           " mismatches" +
           (audit.first_oracle_mismatch.empty()
                ? ""
                : "; first " + audit.first_oracle_mismatch),
       audit.seconds});

  {
    const auto start = Clock::now();
    const LowerBoundTally tally = RunLowerBound(
        1, {"mwu", "lazy", "value-lazy", "full-sim", "random-evict"});
    results.push_back({6, "lower bound at c=1",
                       tally.met == tally.runs && tally.runs > 0,
                       DescribeLowerBound(tally), SecondsSince(start)});
    const LowerBoundTally random_only = RunLowerBound(1, {"random-evict"});
    note("lower bound at c=1, random-evict with budget M: " +
         DescribeLowerBound(random_only));
    const LowerBoundTally doubled =
        RunLowerBound(2, {"mwu", "lazy", "value-lazy", "random-evict"});
    note("lower bound at c=2 (budget 2M), floor(log4 N) floor(M/2) + OPT: " +
         DescribeLowerBound(doubled));
  }

  {
    const auto start = Clock::now();
    const std::size_t instances = scale == Scale::kQuick ? 1000 : 10000;
    std::mt19937_64 rng(77);
    std::size_t oversize = 0, disagree = 0, largest = 0;
    std::string first;
    for (std::size_t i = 0; i < instances; ++i) {
      const HelperInstance inst = RandomHelperInstance(rng);
      const auto kept = MajorityKept(inst.weights, inst.support);
      largest = std::max(largest, kept.size());
      if (kept != ExactMajorityKept(inst)) {
        ++disagree;
        if (first.empty()) first = "instance " + std::to_string(i) + " disagrees";
      }
      if (kept.size() > 2 * inst.M) {
        ++oversize;
        if (first.empty()) first = "instance " + std::to_string(i) + " keeps " +
                                   std::to_string(kept.size());
      }
    }
    results.push_back(
        {7, "half-weight kept set has at most 2M facts",
         oversize == 0 && disagree == 0,
         std::to_string(instances) + " instances, " +
             std::to_string(oversize) + " oversize, " +
             std::to_string(disagree) + " disagree with exact arithmetic" +
             (first.empty() ? "" : "; " + first),
         SecondsSince(start)});
  }

  results.push_back(
      {8, "value-based experts keep the top M by value",
       audit.replay_mismatches == 0 && audit.replay_checks > 0,
       std::to_string(audit.streams) + " streams, " +
           std::to_string(audit.replay_checks) + " replay comparisons, " +
           std::to_string(audit.replay_mismatches) + " mismatches" +
           (audit.first_replay_mismatch.empty()
                ? ""
                : "; first " + audit.first_replay_mismatch),
       0});

  results.push_back(RunDeterminism(scale));
  return results;
}

}  // namespace oqa::verify
