#include "oqa/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace oqa {
namespace {

using Json = nlohmann::ordered_json;

struct Spec {
  std::string kind;
  std::map<std::string, std::string> args;
};

// `kind:key=value,...`; nullopt when the text has no recognizable kind.
std::optional<Spec> ParseSpec(const std::string& text,
                              std::initializer_list<std::string_view> kinds) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    return std::nullopt;
  }
  Spec spec{kind, {}};
  if (colon == std::string::npos) return spec;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("malformed spec item '" + item + "' in '" + text + "'");
    }
    if (!spec.args.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
      throw ConfigError("duplicate key '" + item.substr(0, eq) + "' in '" +
                        text + "'");
    }
  }
  return spec;
}

std::uint64_t ParseCount(const std::string& text, const std::string& key) {
  std::uint64_t value = 0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("'" + key + "' must be a non-negative integer, got '" +
                      text + "'");
  }
  return value;
}

class SpecReader {
 public:
  explicit SpecReader(Spec spec) : spec_(std::move(spec)) {}

  std::optional<std::uint64_t> Count(const std::string& key) {
    const auto it = spec_.args.find(key);
    if (it == spec_.args.end()) return std::nullopt;
    used_.push_back(key);
    return ParseCount(it->second, key);
  }
  std::uint64_t RequiredCount(const std::string& key) {
    const auto v = Count(key);
    if (!v) throw ConfigError(spec_.kind + " spec needs '" + key + "'");
    return *v;
  }
  std::optional<double> Fraction(const std::string& key) {
    const auto it = spec_.args.find(key);
    if (it == spec_.args.end()) return std::nullopt;
    used_.push_back(key);
    double value = 0;
    const auto& s = it->second;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end != s.data() + s.size()) {
      throw ConfigError("'" + key + "' must be a number, got '" + s + "'");
    }
    return value;
  }
  // Rejects keys that were never read.
  void Finish() const {
    for (const auto& [key, value] : spec_.args) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ConfigError("unknown key '" + key + "' in " + spec_.kind +
                          " spec");
      }
    }
  }

 private:
  Spec spec_;
  std::vector<std::string> used_;
};

std::ifstream OpenInput(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " file '" + path + "'");
  return in;
}

std::size_t ResolveM(const RunConfig& config,
                     std::optional<std::size_t> from_adversary) {
  if (config.M && from_adversary && *config.M != *from_adversary) {
    throw ConfigError("M=" + std::to_string(*config.M) +
                      " disagrees with the adversary's M=" +
                      std::to_string(*from_adversary));
  }
  const std::size_t M = config.M.value_or(from_adversary.value_or(1));
  if (M == 0) throw ConfigError("M must be >= 1");
  return M;
}

ExpertSuite BuildScripted(const std::string& kind, std::size_t n,
                          std::size_t universe_size, std::size_t M,
                          std::uint64_t seed) {
  ExpertSuite suite;
  if (kind == "value") return MakeRandomValueSuite(n, universe_size, M, seed);
  const ExpertSuite values =
      kind == "mixed" ? MakeRandomValueSuite(n, universe_size, M, seed)
                      : ExpertSuite();
  for (std::size_t e = 0; e < n; ++e) {
    std::string pick = kind;
    if (kind == "mixed") {
      static constexpr const char* kRotation[] = {"value", "lastseen",
                                                  "firstseen", "randevict"};
      pick = kRotation[e % 4];
    }
    std::unique_ptr<Expert> expert;
    if (pick == "value") {
      expert = values.at(e).Clone();
    } else if (pick == "lastseen") {
      expert = std::make_unique<ScriptedExpert>(M, MakeLastSeenPolicy());
    } else if (pick == "firstseen") {
      expert = std::make_unique<ScriptedExpert>(M, MakeFirstSeenPolicy());
    } else {
      expert = std::make_unique<ScriptedExpert>(
          M, MakeRandomEvictionPolicy(seed * 1000003 + e));
    }
    suite.Add("e" + std::to_string(e), std::move(expert));
  }
  return suite;
}

ExpertSuite BuildExperts(const RunConfig& config, Universe& universe,
                         std::size_t M) {
  if (config.experts.empty()) throw ConfigError("no expert suite given");
  const auto spec = ParseSpec(
      config.experts, {"value", "lastseen", "firstseen", "randevict", "mixed"});
  if (!spec) {
    auto in = OpenInput(config.experts, "expert-suite");
    try {
      return ReadValueSuite(in, universe, M);
    } catch (const std::exception& e) {
      throw ConfigError(config.experts + ": " + e.what());
    }
  }
  SpecReader reader(*spec);
  const std::size_t n = reader.RequiredCount("N");
  const std::uint64_t seed = reader.Count("seed").value_or(config.seed);
  reader.Finish();
  if (n == 0) throw ConfigError("expert suite needs N >= 1");
  return BuildScripted(spec->kind, n, universe.num_questions(), M, seed);
}

std::unique_ptr<Learner> MakeLearner(const PlayOptions& options,
                                     const GameSetup& setup,
                                     const ExpertSuite& experts,
                                     const ExpertOracle& oracle) {
  const std::string& name = options.learner;
  const std::size_t M = setup.M;
  if (name == "mwu") {
    return std::make_unique<MwuLearner>(M, oracle, options.gamma);
  }
  if (name == "lazy") return std::make_unique<LazyLearner>(M, oracle);
  if (name == "value-lazy") {
    if (!experts.value_based()) {
      throw ConfigError("value-lazy needs a value-based expert suite");
    }
    return std::make_unique<ValueLazyLearner>(M, experts.value_table());
  }
  if (name == "full-sim") return std::make_unique<FullSimLearner>(experts);
  if (name == "random-evict") {
    std::size_t budget = 2 * M;
    if (setup.lower_bound) budget = setup.lower_bound->params().c * M;
    return std::make_unique<RandomEvictionLearner>(
        options.budget.value_or(budget), options.seed);
  }
  throw ConfigError("unknown learner '" + name + "'");
}

// Running slack of one inequality observed <= bound over all prefixes.
class SlackTracker {
 public:
  SlackTracker(std::string name, bool informational = false) {
    check_.name = std::move(name);
    check_.informational = informational;
    check_.worst_slack = std::numeric_limits<std::int64_t>::max();
  }
  void Observe(std::uint64_t t, std::uint64_t observed, std::uint64_t bound) {
    const std::int64_t slack =
        static_cast<std::int64_t>(bound) - static_cast<std::int64_t>(observed);
    check_.worst_slack = std::min(check_.worst_slack, slack);
    if (slack < 0 && !check_.first_violation) {
      check_.first_violation = t;
      check_.passed = false;
    }
  }
  BoundCheck Finish() {
    if (check_.worst_slack == std::numeric_limits<std::int64_t>::max()) {
      check_.worst_slack = 0;
    }
    return check_;
  }

 private:
  BoundCheck check_;
};

// Ground-truth audits of the learners' internal estimates, run after every
// step of Play.
class InvariantMonitor {
 public:
  InvariantMonitor(const Learner& learner, const ExpertSuite& experts,
                   std::size_t M)
      : M_(M),
        value_lazy_(dynamic_cast<const ValueLazyLearner*>(&learner)),
        lazy_(dynamic_cast<const LazyLearner*>(&learner)) {
    if (value_lazy_) {
      const std::size_t n = experts.size();
      pre_snapshot_.assign(n, kThresholdFloor);
      reset_baseline_.assign(n, 0);
      for (ExpertIndex e = 0; e < n; ++e) {
        value_experts_.push_back(&experts.value_expert(e));
      }
    }
  }

  void AfterStep(std::uint64_t t, const GameLedger& ledger) {
    if (value_lazy_) {
      true_thresholds_.resize(value_experts_.size());
      for (ExpertIndex e = 0; e < value_experts_.size(); ++e) {
        true_thresholds_[e] = value_experts_[e]->TrueThreshold();
      }
      AuditValueLazy(t, ledger);
    }
    if (lazy_) AuditLazy(t);
  }

  void Collect(std::vector<BoundCheck>& out) {
    if (value_lazy_) {
      out.push_back(threshold_.Finish());
      out.push_back(pre_threshold_.Finish());
      out.push_back(perceived_.Finish());
      out.push_back(perceived_total_.Finish());
      out.push_back(perceived_cycle_.Finish());
    }
    if (lazy_) out.push_back(minor_.Finish());
  }

 private:
  void AuditValueLazy(std::uint64_t t, const GameLedger& ledger) {
    const ValueLazyLearner& l = *value_lazy_;
    if (l.active_updates() != seen_updates_ ||
        l.hard_resets() != seen_resets_) {
      // The active set changed during this step.
      pre_snapshot_ = true_thresholds_;
    }
    if (l.hard_resets() != seen_resets_) {
      const auto truth = ledger.expert_mistakes();
      reset_baseline_.assign(truth.begin(), truth.end());
    }
    seen_updates_ = l.active_updates();
    seen_resets_ = l.hard_resets();

    const auto truth = ledger.expert_mistakes();
    const auto perceived = l.error_counts();
    const auto total = l.perceived_increments();
    for (ExpertIndex e = 0; e < true_thresholds_.size(); ++e) {
      threshold_.Observe(t, l.threshold(e), true_thresholds_[e]);
      pre_threshold_.Observe(t, l.pre_threshold(e), pre_snapshot_[e]);
      perceived_.Observe(t, perceived[e], truth[e]);
      perceived_total_.Observe(t, total[e], truth[e]);
      perceived_cycle_.Observe(t, perceived[e], truth[e] - reset_baseline_[e]);
    }
  }

  void AuditLazy(std::uint64_t t) {
    if (lazy_->last_mistake() == MistakeKind::kMinor) ++minor_since_update_;
    minor_.Observe(t, minor_since_update_, 2 * M_);
    if (lazy_->active_updates() != seen_updates_ ||
        lazy_->hard_resets() != seen_resets_) {
      minor_since_update_ = 0;
    }
    seen_updates_ = lazy_->active_updates();
    seen_resets_ = lazy_->hard_resets();
  }

  std::size_t M_;
  const ValueLazyLearner* value_lazy_;
  const LazyLearner* lazy_;
  std::uint64_t seen_updates_ = 0;
  std::uint64_t seen_resets_ = 0;

  std::vector<const ValueBasedExpert*> value_experts_;
  std::vector<std::uint64_t> true_thresholds_;
  std::vector<std::uint64_t> pre_snapshot_;
  std::vector<std::uint64_t> reset_baseline_;
  SlackTracker threshold_{"threshold_soundness"};
  SlackTracker pre_threshold_{"pre_threshold_soundness"};
  SlackTracker perceived_{"perceived_errors"};
  SlackTracker perceived_total_{"perceived_errors_cumulative"};
  // Parked questions can outlive a hard reset, so E_e may exceed the true
  // mistakes made since that reset.
  SlackTracker perceived_cycle_{"perceived_errors_since_reset", true};

  std::uint64_t minor_since_update_ = 0;
  SlackTracker minor_{"minor_mistakes_between_updates", true};
};

Json CheckToJson(const BoundCheck& c) {
  Json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["informational"] = c.informational;
  j["worst_slack"] = c.worst_slack;
  j["first_violation"] =
      c.first_violation ? Json(*c.first_violation) : Json(nullptr);
  return j;
}

Json SummaryJson(const GameResult& r) {
  std::size_t max_fact = 0, max_question = 0, max_aux = 0;
  for (const LedgerRow& row : r.ledger.rows()) {
    max_fact = std::max(max_fact, row.memory.facts);
    max_question = std::max(max_question, row.memory.questions);
    max_aux = std::max(max_aux, row.memory.aux_state);
  }
  Json j;
  j["learner"] = r.learner;
  j["N"] = r.N;
  j["M"] = r.M;
  j["T"] = r.ledger.size();
  j["L"] = r.ledger.learner_mistakes();
  j["OPT"] = r.ledger.opt();
  j["max_fact_mem"] = max_fact;
  j["max_question_mem"] = max_question;
  j["max_aux"] = max_aux;
  j["bounds_passed"] = r.report.passed();
  Json checks = Json::array();
  for (const BoundCheck& c : r.report.checks) checks.push_back(CheckToJson(c));
  j["bounds"] = std::move(checks);
  if (r.lower_bound) {
    const LowerBoundOutcome& lb = *r.lower_bound;
    Json o;
    o["part_one_mistakes"] = lb.part_one_mistakes;
    o["total_mistakes"] = lb.total_mistakes;
    o["survivors"] = lb.survivors;
    o["survivor_mistakes"] = lb.survivor_mistakes;
    o["chosen_blocks"] = lb.chosen_blocks;
    o["stored_at_selection"] = lb.stored_at_selection;
    o["pigeonhole_failures"] = lb.pigeonhole_failures;
    j["lower_bound"] = std::move(o);
  }
  j["sequential_violations"] = r.sequential_violations;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

BudgetViolation::BudgetViolation(std::uint64_t step, std::size_t held,
                                 std::size_t budget)
    : std::runtime_error("budget violation at step " + std::to_string(step) +
                         ": learner holds " + std::to_string(held) +
                         " facts, budget is " + std::to_string(budget)),
      step_(step) {}

bool BoundReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) {
    return c.informational || c.passed;
  });
}

const BoundCheck* BoundReport::Find(std::string_view name) const {
  for (const BoundCheck& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

GameSetup AssembleSetup(const RunConfig& config) {
  GameSetup setup;
  if (config.adversary.empty()) throw ConfigError("no adversary given");
  const auto spec = ParseSpec(config.adversary, {"random", "lowerbound"});

  if (spec && spec->kind == "lowerbound") {
    SpecReader reader(*spec);
    LowerBoundParams p;
    p.c = reader.Count("c").value_or(1);
    p.N = reader.RequiredCount("N");
    const auto m = reader.Count("M");
    p.opt = reader.Count("opt").value_or(0);
    reader.Finish();
    setup.M = ResolveM(config, m);
    p.M = setup.M;
    try {
      setup.lower_bound = std::make_shared<const LowerBoundInstance>(
          LowerBoundInstance::Build(p, setup.universe));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("lowerbound: ") + e.what());
    }
    setup.experts = setup.lower_bound->MakeExperts();
    setup.adversary = std::make_unique<LowerBoundAdversary>(setup.lower_bound);
  } else {
    setup.M = ResolveM(config, std::nullopt);
    if (spec) {
      SpecReader reader(*spec);
      const std::size_t u = reader.RequiredCount("universe");
      const std::size_t length = reader.RequiredCount("T");
      const double teach = reader.Fraction("teach").value_or(0.5);
      const std::uint64_t seed = reader.Count("seed").value_or(config.seed);
      reader.Finish();
      try {
        setup.adversary = std::make_unique<StreamAdversary>(
            RandomStream(setup.universe, u, length, teach, seed));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("random: ") + e.what());
      }
    } else {
      auto in = OpenInput(config.adversary, "stream");
      try {
        setup.adversary = std::make_unique<StreamAdversary>(
            ReadStream(in, setup.universe));
      } catch (const std::exception& e) {
        throw ConfigError(config.adversary + ": " + e.what());
      }
    }
    setup.experts = BuildExperts(config, setup.universe, setup.M);
  }
  if (config.N && *config.N != setup.experts.size()) {
    throw ConfigError("N=" + std::to_string(*config.N) +
                      " but the expert suite has " +
                      std::to_string(setup.experts.size()) + " experts");
  }
  return setup;
}

BoundParams DefaultBoundParams(std::string_view learner, std::size_t N,
                               std::size_t M, std::size_t fact_budget) {
  BoundParams p;
  p.learner = std::string(learner);
  p.N = N;
  p.M = M;
  p.fact_cap = fact_budget;
  p.aux_cap = kAuxPerExpert * N;
  if (learner == "mwu" || learner == "lazy" || learner == "value-lazy") {
    p.fact_cap = 2 * M;
  }
  if (learner == "value-lazy") p.question_cap = 2 * M;
  p.mistake_bound = learner == "lazy" || learner == "value-lazy";
  p.opt_bound = learner == "full-sim";
  return p;
}

std::size_t CeilLog(std::uint64_t n, std::uint64_t num, std::uint64_t den) {
  if (num <= den || den == 0) throw std::invalid_argument("CeilLog base <= 1");
  if (n == 0) throw std::invalid_argument("CeilLog of 0");
  unsigned __int128 power = 1, scale = 1;
  std::size_t k = 0;
  while (power < static_cast<unsigned __int128>(n) * scale) {
    power *= num;
    scale *= den;
    ++k;
  }
  return k;
}

std::uint64_t DerivedMistakeBound(std::uint64_t opt, std::size_t M,
                                  std::size_t N) {
  return 6 * (opt + M) * (CeilLog(N, 3, 2) + 1);
}

std::uint64_t LiteralMistakeBound(std::uint64_t opt, std::size_t M,
                                  std::size_t N) {
  const std::uint64_t lg = CeilLog(N, 2, 1);
  return 6 * opt * lg + 6 * M * lg;
}

BoundReport CheckBounds(const GameLedger& ledger, const BoundParams& params) {
  BoundReport report;
  report.learner = params.learner;
  report.N = params.N;
  report.M = params.M;
  report.T = ledger.size();

  SlackTracker facts("fact_memory");
  SlackTracker questions("question_memory");
  SlackTracker aux("aux_state");
  SlackTracker derived("mistakes_derived");
  SlackTracker literal("mistakes_literal", true);
  SlackTracker opt("mistakes_opt");
  for (const LedgerRow& row : ledger.rows()) {
    facts.Observe(row.t, row.memory.facts, params.fact_cap);
    if (params.question_cap) {
      questions.Observe(row.t, row.memory.questions, *params.question_cap);
    }
    aux.Observe(row.t, row.memory.aux_state, params.aux_cap);
    if (params.mistake_bound) {
      derived.Observe(row.t, row.learner_mistakes,
                      DerivedMistakeBound(row.opt, params.M, params.N));
      literal.Observe(row.t, row.learner_mistakes,
                      LiteralMistakeBound(row.opt, params.M, params.N));
    }
    if (params.opt_bound) opt.Observe(row.t, row.learner_mistakes, row.opt);
  }
  report.checks.push_back(facts.Finish());
  if (params.question_cap) report.checks.push_back(questions.Finish());
  report.checks.push_back(aux.Finish());
  if (params.mistake_bound) {
    report.checks.push_back(derived.Finish());
    report.checks.push_back(literal.Finish());
  }
  if (params.opt_bound) report.checks.push_back(opt.Finish());
  return report;
}

GameResult Play(GameSetup setup, const PlayOptions& options) {
  if (!setup.adversary) throw ConfigError("no adversary");
  if (setup.experts.empty()) throw ConfigError("empty expert suite");
  ExpertSuite& experts = setup.experts;
  const std::size_t N = experts.size();

  std::unique_ptr<ThresholdOracle> threshold_oracle;
  std::unique_ptr<ExpertOracle> oracle;
  if (options.oracle == OracleBacking::kThreshold) {
    if (!experts.value_based()) {
      throw ConfigError("threshold oracle needs a value-based expert suite");
    }
    threshold_oracle = std::make_unique<ThresholdOracle>(experts);
  } else {
    oracle = std::make_unique<SimulationOracle>(experts);
  }
  const ExpertOracle& active_oracle =
      threshold_oracle ? static_cast<const ExpertOracle&>(*threshold_oracle)
                       : *oracle;
  std::unique_ptr<Learner> learner =
      MakeLearner(options, setup, experts, active_oracle);

  GameResult result;
  result.ledger = GameLedger(N);
  result.learner = options.learner;
  result.N = N;
  result.M = setup.M;
  if (options.learner == "value-lazy" && !setup.adversary->sequential()) {
    result.warnings.push_back(
        "adversary is not declared sequential; value-lazy estimates may be "
        "unsound");
  }

  const std::size_t budget =
      setup.lower_bound ? setup.lower_bound->params().c * setup.M
                        : learner->fact_budget();
  SlackTracker budget_check("fact_budget");
  InvariantMonitor monitor(*learner, experts, setup.M);
  AnswerKey key;
  std::vector<Event> history;
  std::vector<std::uint8_t> expert_costs(N);

  while (auto next = setup.adversary->Next(history, learner->memory())) {
    Event event = *next;
    const std::uint64_t t = result.ledger.size() + 1;
    int cost = 0;
    std::fill(expert_costs.begin(), expert_costs.end(), 0);
    if (event.is_teach()) {
      key.Reveal(*event.fact());
    } else {
      event.answer = key.Lookup(event.question);
      if (!event.answer) {
        ++result.sequential_violations;
        cost = 1;
      } else {
        cost = StepCost(learner->memory(), *event.fact());
      }
      expert_costs = TrueMistakes(experts, event.question);
    }

    learner->UpdateWeights(event);
    if (const auto fact = event.fact()) {
      experts.OfferAll(*fact);
      if (threshold_oracle) threshold_oracle->NoteOffered(fact->question);
    }
    learner->UpdateMemory(event);

    const std::size_t held = learner->memory().size();
    result.ledger.RecordStep(
        event, cost, expert_costs,
        {held, learner->question_memory(), learner->aux_state(),
         learner->active_experts()});
    monitor.AfterStep(t, result.ledger);
    budget_check.Observe(t, held, budget);
    if (held > budget && options.enforce_budget) {
      throw BudgetViolation(t, held, budget);
    }
    history.push_back(event);
  }

  result.report = CheckBounds(
      result.ledger,
      DefaultBoundParams(options.learner, N, setup.M, learner->fact_budget()));
  if (setup.lower_bound) result.report.checks.push_back(budget_check.Finish());
  monitor.Collect(result.report.checks);
  if (result.sequential_violations > 0) {
    result.warnings.push_back(std::to_string(result.sequential_violations) +
                              " evaluate(s) on untaught questions");
  }

  if (setup.lower_bound) {
    const auto* adversary =
        dynamic_cast<const LowerBoundAdversary*>(setup.adversary.get());
    LowerBoundOutcome lb;
    lb.total_mistakes = result.ledger.learner_mistakes();
    const std::size_t cut =
        std::min(adversary->part_one_length(), result.ledger.size());
    if (cut > 0) lb.part_one_mistakes = result.ledger.rows()[cut - 1].learner_mistakes;
    lb.survivors = adversary->survivors();
    for (ExpertIndex e : lb.survivors) {
      lb.survivor_mistakes =
          std::max(lb.survivor_mistakes, result.ledger.expert_mistakes()[e]);
    }
    lb.chosen_blocks.assign(adversary->chosen_blocks().begin(),
                            adversary->chosen_blocks().end());
    lb.stored_at_selection.assign(adversary->stored_at_selection().begin(),
                                  adversary->stored_at_selection().end());
    lb.pigeonhole_failures = adversary->pigeonhole_failures();
    result.lower_bound = std::move(lb);
  }
  result.universe = std::move(setup.universe);
  return result;
}

GameResult RunGame(const RunConfig& config) {
  if (std::find(std::begin(kLearnerNames), std::end(kLearnerNames),
                config.learner) == std::end(kLearnerNames)) {
    throw ConfigError("unknown learner '" + config.learner + "'");
  }
  PlayOptions options;
  options.learner = config.learner;
  options.seed = config.seed;
  options.oracle = config.oracle;
  options.gamma = config.gamma;
  options.budget = config.budget;
  GameResult result = Play(AssembleSetup(config), options);
  EmitOutputs(result, config);
  return result;
}

void WriteSummary(std::ostream& out, const GameResult& result) {
  out << SummaryJson(result).dump(2) << '\n';
}

void EmitOutputs(const GameResult& result, const RunConfig& config) {
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
  };
  if (config.csv_path) {
    auto out = open(*config.csv_path);
    WriteLedgerCsv(out, result.ledger, result.universe);
    if (!out.flush()) {
      throw std::runtime_error("write failed: '" + config.csv_path->string() +
                               "'");
    }
  }
  if (config.summary_path) {
    auto out = open(*config.summary_path);
    WriteSummary(out, result);
    if (!out.flush()) {
      throw std::runtime_error("write failed: '" +
                               config.summary_path->string() + "'");
    }
  }
}

std::vector<RunConfig> LoadGrid(const std::filesystem::path& path) {
  auto in = OpenInput(path.string(), "grid");
  Json grid;
  try {
    grid = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!grid.is_object()) throw ConfigError("grid must be a JSON object");
  auto list = [&](const char* key, Json fallback) {
    Json v = grid.contains(key) ? grid[key] : fallback;
    if (!v.is_array() || v.empty()) {
      throw ConfigError(std::string("grid '") + key +
                        "' must be a non-empty array");
    }
    return v;
  };
  std::vector<RunConfig> configs;
  try {
    const Json learners = list("learners", Json());
    const Json adversaries = list("adversaries", Json());
    const Json experts = list("experts", Json::array({""}));
    const Json ms = list("M", Json::array({nullptr}));
    const Json seeds = list("seeds", Json::array({0}));
    OracleBacking oracle = OracleBacking::kSimulation;
    if (grid.contains("oracle")) {
      const std::string o = grid["oracle"].get<std::string>();
      if (o == "threshold") {
        oracle = OracleBacking::kThreshold;
      } else if (o != "simulation") {
        throw ConfigError("unknown oracle '" + o + "'");
      }
    }
    for (const auto& l : learners) {
      for (const auto& a : adversaries) {
        for (const auto& x : experts) {
          for (const auto& m : ms) {
            for (const auto& s : seeds) {
              RunConfig c;
              c.learner = l.get<std::string>();
              c.adversary = a.get<std::string>();
              c.experts = x.get<std::string>();
              if (!m.is_null()) c.M = m.get<std::size_t>();
              c.seed = s.get<std::uint64_t>();
              c.oracle = oracle;
              configs.push_back(std::move(c));
            }
          }
        }
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return configs;
}

std::vector<SweepEntry> RunSweep(const std::vector<RunConfig>& configs,
                                 std::size_t workers) {
  std::vector<SweepEntry> entries(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SweepEntry& entry = entries[i];
      entry.config = configs[i];
      try {
        const GameResult result = RunGame(configs[i]);
        entry.ok = true;
        entry.passed = result.report.passed();
        entry.summary = SummaryJson(result).dump();
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, configs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  return entries;
}

}  // namespace oqa
