#include "oqa/experts.h"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace oqa {

void ValueFunction::Set(QuestionId q, std::uint64_t value) {
  if (value == 0) {
    throw std::invalid_argument("question values must be >= 1");
  }
  if (q.index >= values_.size()) values_.resize(q.index + 1, 0);
  values_[q.index] = value;
}

void ValueFunction::ThrowUndefined(QuestionId q) {
  throw std::out_of_range("value undefined for question #" +
                          std::to_string(q.index));
}

std::size_t ValueFunction::num_defined() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(),
                    [](std::uint64_t v) { return v != 0; }));
}

bool ValueFunction::IsInjective() const {
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t v : values_) {
    if (v != 0 && !seen.insert(v).second) return false;
  }
  return true;
}

ValueBasedExpert::ValueBasedExpert(std::size_t capacity,
                                   std::shared_ptr<const ValueFunction> values)
    : capacity_(capacity), values_(std::move(values)) {
  if (capacity_ == 0) throw std::invalid_argument("expert capacity must be >= 1");
  if (!values_) throw std::invalid_argument("missing value function");
}

void ValueBasedExpert::Offer(const Fact& fact) {
  const QuestionId q = fact.question;
  const std::uint64_t value = (*values_)(q);
  if (Knows(q)) {
    if (*stored_[q.index] != fact.answer) {
      throw std::invalid_argument("expert already stores a different answer");
    }
    return;
  }
  if (top_.size() == capacity_) {
    auto lowest = top_.begin();
    // A previously evicted question sits below the current minimum, so it
    // is rejected here as well.
    if (value <= lowest->first) return;
    stored_[lowest->second.index].reset();
    top_.erase(lowest);
  }
  top_.emplace(value, q);
  if (q.index >= stored_.size()) stored_.resize(q.index + 1);
  stored_[q.index] = fact.answer;
}

std::vector<Fact> ValueBasedExpert::Memory() const {
  std::vector<Fact> out;
  out.reserve(top_.size());
  for (auto it = top_.rbegin(); it != top_.rend(); ++it) {
    out.push_back({it->second, *stored_[it->second.index]});
  }
  return out;
}

std::uint64_t ValueBasedExpert::TrueThreshold() const {
  if (top_.size() < capacity_) return kThresholdFloor;
  return top_.begin()->first;
}

namespace {

class LastSeenPolicy final : public RetentionPolicy {
 public:
  RetentionOutcome Offer(std::vector<Fact>& memory, const Fact& fact,
                         std::size_t capacity) override {
    RetentionOutcome out{true, std::nullopt};
    std::erase(memory, fact);
    memory.push_back(fact);
    if (memory.size() > capacity) {
      out.evicted = memory.front();
      memory.erase(memory.begin());
    }
    return out;
  }
  std::unique_ptr<RetentionPolicy> Clone() const override {
    return std::make_unique<LastSeenPolicy>(*this);
  }
};

class FirstSeenPolicy final : public RetentionPolicy {
 public:
  RetentionOutcome Offer(std::vector<Fact>& memory, const Fact& fact,
                         std::size_t capacity) override {
    if (std::find(memory.begin(), memory.end(), fact) != memory.end()) {
      return {true, std::nullopt};
    }
    if (memory.size() >= capacity) return {false, std::nullopt};
    memory.push_back(fact);
    return {true, std::nullopt};
  }
  std::unique_ptr<RetentionPolicy> Clone() const override {
    return std::make_unique<FirstSeenPolicy>(*this);
  }
};

class RandomEvictionPolicy final : public RetentionPolicy {
 public:
  explicit RandomEvictionPolicy(std::uint64_t seed) : rng_(seed) {}
  RetentionOutcome Offer(std::vector<Fact>& memory, const Fact& fact,
                         std::size_t capacity) override {
    RetentionOutcome out{true, std::nullopt};
    if (std::find(memory.begin(), memory.end(), fact) != memory.end()) {
      return out;
    }
    if (memory.size() >= capacity) {
      std::uniform_int_distribution<std::size_t> pick(0, memory.size() - 1);
      const auto victim =
          memory.begin() + static_cast<std::ptrdiff_t>(pick(rng_));
      out.evicted = *victim;
      memory.erase(victim);
    }
    memory.push_back(fact);
    return out;
  }
  std::unique_ptr<RetentionPolicy> Clone() const override {
    return std::make_unique<RandomEvictionPolicy>(*this);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

std::unique_ptr<RetentionPolicy> MakeLastSeenPolicy() {
  return std::make_unique<LastSeenPolicy>();
}
std::unique_ptr<RetentionPolicy> MakeFirstSeenPolicy() {
  return std::make_unique<FirstSeenPolicy>();
}
std::unique_ptr<RetentionPolicy> MakeRandomEvictionPolicy(std::uint64_t seed) {
  return std::make_unique<RandomEvictionPolicy>(seed);
}

ScriptedExpert::ScriptedExpert(std::size_t capacity,
                               std::unique_ptr<RetentionPolicy> policy)
    : capacity_(capacity), policy_(std::move(policy)) {
  if (capacity_ == 0) throw std::invalid_argument("expert capacity must be >= 1");
  if (!policy_) throw std::invalid_argument("missing retention policy");
}

ScriptedExpert::ScriptedExpert(const ScriptedExpert& other)
    : capacity_(other.capacity_),
      policy_(other.policy_->Clone()),
      memory_(other.memory_),
      known_(other.known_) {}

void ScriptedExpert::Offer(const Fact& fact) {
  const RetentionOutcome out = policy_->Offer(memory_, fact, capacity_);
  if (memory_.size() > capacity_) {
    throw std::logic_error("scripted expert exceeded its capacity");
  }
  if (out.evicted) known_[out.evicted->question.index] = 0;
  if (out.stored) {
    if (fact.question.index >= known_.size()) {
      known_.resize(fact.question.index + 1);
    }
    known_[fact.question.index] = 1;
  }
}

ExpertSuite::ExpertSuite(const ExpertSuite& other) : names_(other.names_) {
  experts_.reserve(other.experts_.size());
  for (const auto& e : other.experts_) experts_.push_back(e->Clone());
}

ExpertSuite& ExpertSuite::operator=(const ExpertSuite& other) {
  if (this != &other) *this = ExpertSuite(other);
  return *this;
}

ExpertIndex ExpertSuite::Add(std::string name, std::unique_ptr<Expert> expert) {
  if (!expert) throw std::invalid_argument("null expert");
  if (Find(name)) throw std::invalid_argument("duplicate expert id " + name);
  experts_.push_back(std::move(expert));
  names_.push_back(std::move(name));
  return experts_.size() - 1;
}

void ExpertSuite::ThrowUnknown(ExpertIndex e) {
  throw std::out_of_range("unknown expert index " + std::to_string(e));
}

std::optional<ExpertIndex> ExpertSuite::Find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<ExpertIndex>(it - names_.begin());
}

bool ExpertSuite::value_based() const {
  return std::all_of(experts_.begin(), experts_.end(), [](const auto& e) {
    return dynamic_cast<const ValueBasedExpert*>(e.get()) != nullptr;
  });
}

const ValueBasedExpert& ExpertSuite::value_expert(ExpertIndex e) const {
  const auto* v = dynamic_cast<const ValueBasedExpert*>(&at(e));
  if (v == nullptr) {
    throw std::logic_error("expert " + names_[e] + " is not value-based");
  }
  return *v;
}

ValueTable ExpertSuite::value_table() const {
  ValueTable table;
  table.reserve(size());
  for (ExpertIndex e = 0; e < size(); ++e) {
    table.push_back(value_expert(e).shared_values());
  }
  return table;
}

void ExpertSuite::OfferAll(const Fact& fact) {
  for (auto& e : experts_) e->Offer(fact);
}

std::vector<std::uint8_t> TrueMistakes(const ExpertSuite& experts,
                                       QuestionId q) {
  std::vector<std::uint8_t> costs(experts.size());
  for (ExpertIndex e = 0; e < experts.size(); ++e) {
    costs[e] = experts.at(e).Knows(q) ? 0 : 1;
  }
  return costs;
}

bool SimulationOracle::Query(ExpertIndex e, QuestionId q) const {
  return experts_->at(e).Knows(q);
}

ThresholdOracle::ThresholdOracle(const ExpertSuite& experts)
    : experts_(&experts) {
  if (!experts.value_based()) {
    throw std::invalid_argument(
        "threshold-backed oracle needs a value-based expert suite");
  }
}

bool ThresholdOracle::Query(ExpertIndex e, QuestionId q) const {
  const ValueBasedExpert& expert = experts_->value_expert(e);
  const std::uint64_t value = expert.values()(q);
  const bool offered = q.index < offered_.size() && offered_[q.index];
  return offered && value >= expert.TrueThreshold();
}

void ThresholdOracle::NoteOffered(QuestionId q) {
  if (q.index >= offered_.size()) offered_.resize(q.index + 1);
  offered_[q.index] = true;
}

ExpertSuite ReadValueSuite(std::istream& in, Universe& universe,
                           std::size_t capacity) {
  std::map<std::string, ValueFunction> by_expert;
  std::vector<std::string> order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tag, id, kw, qid, extra;
    long long value = 0;
    if (!(fields >> tag)) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("expert suite line " + std::to_string(line_no) +
                               ": " + why);
    };
    if (tag != "expert" || !(fields >> id >> kw >> qid >> value) ||
        kw != "value" || (fields >> extra)) {
      fail("expected `expert <id> value <qid> <natural>`");
    }
    if (value < 1) fail("values must be naturals >= 1");
    auto [it, inserted] = by_expert.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.Set(universe.InternQuestion(qid),
                   static_cast<std::uint64_t>(value));
  }
  ExpertSuite suite;
  for (const std::string& id : order) {
    const ValueFunction& values = by_expert.at(id);
    if (!values.IsInjective()) {
      throw std::runtime_error("expert " + id + " has a non-injective value function");
    }
    suite.Add(id, std::make_unique<ValueBasedExpert>(
                      capacity, std::make_shared<ValueFunction>(values)));
  }
  return suite;
}

void WriteValueSuite(std::ostream& out, const ExpertSuite& experts,
                     const Universe& universe) {
  for (ExpertIndex e = 0; e < experts.size(); ++e) {
    const ValueFunction& values = experts.value_expert(e).values();
    for (std::uint32_t i = 0; i < universe.num_questions(); ++i) {
      const QuestionId q{i};
      if (!values.Defined(q)) continue;
      out << "expert " << experts.name(e) << " value "
          << universe.QuestionName(q) << ' ' << values(q) << '\n';
    }
  }
}

ExpertSuite MakeRandomValueSuite(std::size_t num_experts,
                                 std::size_t universe_size,
                                 std::size_t capacity, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ExpertSuite suite;
  std::vector<std::uint64_t> ranks(universe_size);
  for (std::size_t e = 0; e < num_experts; ++e) {
    std::iota(ranks.begin(), ranks.end(), 1);
    std::shuffle(ranks.begin(), ranks.end(), rng);
    auto values = std::make_shared<ValueFunction>();
    for (std::size_t i = 0; i < universe_size; ++i) {
      values->Set({static_cast<std::uint32_t>(i)}, ranks[i]);
    }
    suite.Add("e" + std::to_string(e),
              std::make_unique<ValueBasedExpert>(capacity, std::move(values)));
  }
  return suite;
}

}  // namespace oqa
