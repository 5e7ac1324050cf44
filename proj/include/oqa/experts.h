// Memory-bounded experts, the ground-truth mistake vector, and the expert
// access oracle (simulation- or threshold-backed).

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oqa/core.h"

namespace oqa {

using ExpertIndex = std::size_t;

// Threshold reported while fewer than M questions have been seen. Legal
// values are >= 1, so the floor never excludes anything.
inline constexpr std::uint64_t kThresholdFloor = 0;

// Injective map from questions to naturals >= 1 over a declared universe.
class ValueFunction {
 public:
  // Throws std::invalid_argument for value 0.
  void Set(QuestionId q, std::uint64_t value);
  bool Defined(QuestionId q) const {
    return q.index < values_.size() && values_[q.index] != 0;
  }
  // Throws std::out_of_range if q is outside the declared universe.
  std::uint64_t operator()(QuestionId q) const {
    if (!Defined(q)) ThrowUndefined(q);
    return values_[q.index];
  }
  std::size_t num_defined() const;
  bool IsInjective() const;

 private:
  [[noreturn]] static void ThrowUndefined(QuestionId q);

  std::vector<std::uint64_t> values_;
};

using ValueTable = std::vector<std::shared_ptr<const ValueFunction>>;

// An expert with a bounded fact memory. Knows() reflects the memory as of the
// last Offer(); the harness calls Offer() once per step.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual bool Knows(QuestionId q) const = 0;
  virtual void Offer(const Fact& fact) = 0;
  virtual std::size_t capacity() const = 0;
  virtual std::size_t size() const = 0;
  virtual std::vector<Fact> Memory() const = 0;
  virtual std::unique_ptr<Expert> Clone() const = 0;
};

// Keeps the `capacity` highest-valued facts among everything offered so far.
class ValueBasedExpert final : public Expert {
 public:
  ValueBasedExpert(std::size_t capacity,
                   std::shared_ptr<const ValueFunction> values);

  bool Knows(QuestionId q) const override {
    return q.index < stored_.size() && stored_[q.index].has_value();
  }
  // Throws std::invalid_argument when the question is stored with another
  // answer, std::out_of_range when its value is undefined.
  void Offer(const Fact& fact) override;
  std::size_t capacity() const override { return capacity_; }
  std::size_t size() const override { return top_.size(); }
  std::vector<Fact> Memory() const override;
  std::unique_ptr<Expert> Clone() const override {
    return std::make_unique<ValueBasedExpert>(*this);
  }

  // M-th largest value seen, or kThresholdFloor while under-full.
  std::uint64_t TrueThreshold() const;
  const ValueFunction& values() const { return *values_; }
  const std::shared_ptr<const ValueFunction>& shared_values() const {
    return values_;
  }

 private:
  std::size_t capacity_;
  std::shared_ptr<const ValueFunction> values_;
  std::set<std::pair<std::uint64_t, QuestionId>> top_;
  std::vector<std::optional<AnswerId>> stored_;
};

// What one offer changed: whether the offered fact is stored afterwards, and
// the fact evicted to make room, if any.
struct RetentionOutcome {
  bool stored = false;
  std::optional<Fact> evicted;
};

// Deterministic retention rule for a scripted expert. Mutates `memory` in
// place when offered a fact, evicting at most one; must leave at most
// `capacity` facts.
class RetentionPolicy {
 public:
  virtual ~RetentionPolicy() = default;
  virtual RetentionOutcome Offer(std::vector<Fact>& memory, const Fact& fact,
                                 std::size_t capacity) = 0;
  virtual std::unique_ptr<RetentionPolicy> Clone() const = 0;
};

// Most recently offered facts (a re-offer refreshes recency).
std::unique_ptr<RetentionPolicy> MakeLastSeenPolicy();
// First facts offered; later ones are ignored once full.
std::unique_ptr<RetentionPolicy> MakeFirstSeenPolicy();
// Stores every new fact, evicting a uniformly random one when full.
std::unique_ptr<RetentionPolicy> MakeRandomEvictionPolicy(std::uint64_t seed);

class ScriptedExpert final : public Expert {
 public:
  ScriptedExpert(std::size_t capacity, std::unique_ptr<RetentionPolicy> policy);
  ScriptedExpert(const ScriptedExpert& other);

  bool Knows(QuestionId q) const override {
    return q.index < known_.size() && known_[q.index];
  }
  // Throws std::logic_error if the policy leaves more than `capacity` facts.
  void Offer(const Fact& fact) override;
  std::size_t capacity() const override { return capacity_; }
  std::size_t size() const override { return memory_.size(); }
  std::vector<Fact> Memory() const override { return memory_; }
  std::unique_ptr<Expert> Clone() const override {
    return std::make_unique<ScriptedExpert>(*this);
  }

 private:
  std::size_t capacity_;
  std::unique_ptr<RetentionPolicy> policy_;
  std::vector<Fact> memory_;
  std::vector<std::uint8_t> known_;
};

class ExpertSuite {
 public:
  ExpertSuite() = default;
  ExpertSuite(const ExpertSuite& other);
  ExpertSuite& operator=(const ExpertSuite& other);
  ExpertSuite(ExpertSuite&&) = default;
  ExpertSuite& operator=(ExpertSuite&&) = default;

  ExpertIndex Add(std::string name, std::unique_ptr<Expert> expert);

  std::size_t size() const { return experts_.size(); }
  bool empty() const { return experts_.empty(); }
  // Throws std::out_of_range for an unknown index.
  const Expert& at(ExpertIndex e) const {
    if (e >= experts_.size()) ThrowUnknown(e);
    return *experts_[e];
  }
  Expert& at(ExpertIndex e) {
    if (e >= experts_.size()) ThrowUnknown(e);
    return *experts_[e];
  }
  const std::string& name(ExpertIndex e) const { return names_.at(e); }
  std::optional<ExpertIndex> Find(const std::string& name) const;

  // True when every expert is a ValueBasedExpert.
  bool value_based() const;
  // Throws std::logic_error unless value_based().
  const ValueBasedExpert& value_expert(ExpertIndex e) const;
  ValueTable value_table() const;

  // Offers the step's fact to every expert.
  void OfferAll(const Fact& fact);

 private:
  [[noreturn]] static void ThrowUnknown(ExpertIndex e);

  std::vector<std::unique_ptr<Expert>> experts_;
  std::vector<std::string> names_;
};

// c_e = 1 iff expert e lacks the question's fact. Ground truth for the ledger.
std::vector<std::uint8_t> TrueMistakes(const ExpertSuite& experts,
                                       QuestionId q);

// Answers "does expert e currently store the fact for q".
class ExpertOracle {
 public:
  virtual ~ExpertOracle() = default;
  virtual std::size_t num_experts() const = 0;
  // Throws std::out_of_range for an unknown expert.
  virtual bool Query(ExpertIndex e, QuestionId q) const = 0;
};

class SimulationOracle final : public ExpertOracle {
 public:
  explicit SimulationOracle(const ExpertSuite& experts) : experts_(&experts) {}
  std::size_t num_experts() const override { return experts_->size(); }
  bool Query(ExpertIndex e, QuestionId q) const override;

 private:
  const ExpertSuite* experts_;
};

// Value-based experts only: q is stored iff it has been offered and
// v_e(q) >= T_e*. The set of offered questions is fed by NoteOffered().
class ThresholdOracle final : public ExpertOracle {
 public:
  // Throws std::invalid_argument unless the suite is value-based.
  explicit ThresholdOracle(const ExpertSuite& experts);
  std::size_t num_experts() const override { return experts_->size(); }
  bool Query(ExpertIndex e, QuestionId q) const override;
  void NoteOffered(QuestionId q);

 private:
  const ExpertSuite* experts_;
  std::vector<bool> offered_;
};

// Expert-suite text format: lines `expert <id> value <qid> <natural>`.
// Every expert gets a ValueBasedExpert of the given capacity. Throws
// std::runtime_error on malformed lines, zero values, or non-injective
// value functions.
ExpertSuite ReadValueSuite(std::istream& in, Universe& universe,
                           std::size_t capacity);
void WriteValueSuite(std::ostream& out, const ExpertSuite& experts,
                     const Universe& universe);

// Random injective value functions over questions [0, universe_size).
ExpertSuite MakeRandomValueSuite(std::size_t num_experts,
                                 std::size_t universe_size,
                                 std::size_t capacity, std::uint64_t seed);

}  // namespace oqa
