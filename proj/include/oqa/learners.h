// Learner algorithms: the multiplicative-weights baseline, lazy weights with
// an expert oracle, value-based lazy weights (no oracle), a full simulation
// baseline, and a random-eviction strawman.
//
// A learner step is split in two phases around the experts' own memory
// update:
//
//   UpdateWeights(event)   oracle answers reflect expert memories before
//                          this step's update
//   <experts update>
//   UpdateMemory(event)    oracle answers reflect the updated memories
//
// `event` always carries the question; its answer is present whenever the
// fact has been revealed (every Teach, and any Evaluate on a taught question).

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "oqa/core.h"
#include "oqa/experts.h"

namespace oqa {

class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string_view name() const = 0;
  virtual void UpdateWeights(const Event& event) = 0;
  virtual void UpdateMemory(const Event& event) = 0;

  virtual const FactMemory& memory() const = 0;
  // Bare questions held in addition to facts (counted toward memory).
  virtual std::size_t question_memory() const { return 0; }
  // Numeric bookkeeping entries: counters, thresholds, flags.
  virtual std::size_t aux_state() const = 0;
  virtual std::size_t active_experts() const = 0;
  // Fact capacity of the learner's memory class.
  virtual std::size_t fact_budget() const = 0;
};

// True iff the supported weight is at least half the total weight.
inline bool MajoritySupports(double supported, double total) {
  return !(supported < 0.5 * total);
}

// Indices of facts f with sum_e w(e) * support[e][f] >= total / 2.
std::vector<std::size_t> MajorityKept(
    std::span<const double> weights,
    const std::vector<std::vector<bool>>& support);

// M-th largest value of `pool` under `values`, as the attaining question.
// nullopt (the threshold floor) when the pool has fewer than m questions.
std::optional<QuestionId> MthLargest(const ValueFunction& values,
                                     std::span<const QuestionId> pool,
                                     std::size_t m);

class MwuLearner final : public Learner {
 public:
  MwuLearner(std::size_t memory_size, const ExpertOracle& oracle,
             double gamma = 0.5);

  std::string_view name() const override { return "mwu"; }
  void UpdateWeights(const Event& event) override;
  void UpdateMemory(const Event& event) override;
  const FactMemory& memory() const override { return memory_; }
  std::size_t aux_state() const override { return 2 * error_counts_.size(); }
  std::size_t active_experts() const override { return error_counts_.size(); }
  std::size_t fact_budget() const override { return 2 * memory_size_; }

  std::span<const std::uint64_t> error_counts() const { return error_counts_; }
  double gamma() const { return gamma_; }
  // (1 - gamma)^E_e, rescaled by the largest weight (that of the expert
  // with fewest errors). Only ratios enter the memory rule.
  std::vector<double> NormalizedWeights() const;

 private:
  std::size_t memory_size_;
  const ExpertOracle* oracle_;
  double gamma_;
  std::vector<std::uint64_t> error_counts_;
  FactMemory memory_;
};

enum class MistakeKind { kNone, kMinor, kMajor };

class LazyLearner final : public Learner {
 public:
  LazyLearner(std::size_t memory_size, const ExpertOracle& oracle);

  std::string_view name() const override { return "lazy"; }
  void UpdateWeights(const Event& event) override;
  void UpdateMemory(const Event& event) override;
  const FactMemory& memory() const override { return memory_; }
  std::size_t aux_state() const override { return 2 * error_counts_.size(); }
  std::size_t active_experts() const override { return num_active_; }
  std::size_t fact_budget() const override { return 2 * memory_size_; }

  std::span<const std::uint64_t> error_counts() const { return error_counts_; }
  bool active(ExpertIndex e) const { return active_.at(e); }
  // Steps at which BadExperts were removed from the active set.
  std::uint64_t active_updates() const { return active_updates_; }
  std::uint64_t hard_resets() const { return hard_resets_; }
  // Classification of this step's learner mistake against the active set
  // before the step.
  MistakeKind last_mistake() const { return last_mistake_; }

 private:
  std::size_t memory_size_;
  const ExpertOracle* oracle_;
  std::vector<std::uint64_t> error_counts_;
  std::vector<bool> active_;
  std::size_t num_active_;
  std::vector<ExpertIndex> active_list_;
  std::uint64_t active_updates_ = 0;
  std::uint64_t hard_resets_ = 0;
  MistakeKind last_mistake_ = MistakeKind::kNone;
  FactMemory memory_;
};

// Simulates the oracle from per-expert threshold estimates T_e (current) and
// T_e^pre (as of the last active-set change), both stored as the attaining
// question. Minor mistakes are parked as bare questions until the
// pre-threshold shows that a majority of active experts missed them.
class ValueLazyLearner final : public Learner {
 public:
  ValueLazyLearner(std::size_t memory_size, ValueTable values);

  std::string_view name() const override { return "value-lazy"; }
  // The whole step only reads value functions, so it runs here.
  void UpdateWeights(const Event& event) override;
  void UpdateMemory(const Event&) override {}
  const FactMemory& memory() const override { return memory_; }
  std::size_t question_memory() const override { return minor_.size(); }
  // E_e, T_e, T_e^pre and the active flag per expert.
  std::size_t aux_state() const override { return 4 * values_.size(); }
  std::size_t active_experts() const override { return num_active_; }
  std::size_t fact_budget() const override { return 2 * memory_size_; }

  // For every active expert, raise T_e to the M-th largest value over
  // memory plus minor mistakes, when that pool holds at least M questions.
  void UpdateThreshold();
  // Parks q as a minor mistake, raises T_e^pre for active experts, then
  // converts parked questions that at least half of the active experts miss
  // per T_e^pre into counted mistakes.
  void UpdatePreThreshold(QuestionId q);

  std::uint64_t threshold(ExpertIndex e) const;
  std::uint64_t pre_threshold(ExpertIndex e) const;
  std::span<const std::uint64_t> error_counts() const { return error_counts_; }
  // Total increments of E_e since the start, unaffected by hard resets.
  std::span<const std::uint64_t> perceived_increments() const {
    return increments_;
  }
  bool active(ExpertIndex e) const { return active_.at(e); }
  std::span<const QuestionId> minor_mistakes() const { return minor_; }
  std::uint64_t active_updates() const { return active_updates_; }
  std::uint64_t hard_resets() const { return hard_resets_; }

 private:
  std::uint64_t Value(ExpertIndex e, QuestionId q) const {
    return (*values_[e])(q);
  }
  std::uint64_t ValueOf(ExpertIndex e,
                        const std::optional<QuestionId>& q) const {
    return q ? Value(e, *q) : kThresholdFloor;
  }
  void RaiseTo(ExpertIndex e, std::optional<QuestionId>& slot,
               std::uint64_t& value,
               const std::optional<QuestionId>& candidate) const;
  void CountError(ExpertIndex e);
  void UpdateActiveSet();

  std::size_t memory_size_;
  ValueTable values_;
  std::vector<std::uint64_t> error_counts_;
  std::vector<std::uint64_t> increments_;
  std::vector<std::optional<QuestionId>> thresholds_;
  std::vector<std::optional<QuestionId>> pre_thresholds_;
  // v_e of the attaining question, kept alongside for the hot loops.
  std::vector<std::uint64_t> threshold_values_;
  std::vector<std::uint64_t> pre_threshold_values_;
  std::vector<bool> active_;
  std::size_t num_active_;
  std::vector<ExpertIndex> active_list_;
  std::uint64_t active_updates_ = 0;
  std::uint64_t hard_resets_ = 0;
  std::vector<QuestionId> minor_;
  FactMemory memory_;
  std::vector<std::pair<std::uint64_t, QuestionId>> scratch_;
};

// Holds the union of all expert memories.
class FullSimLearner final : public Learner {
 public:
  explicit FullSimLearner(const ExpertSuite& experts) : experts_(&experts) {}

  std::string_view name() const override { return "full-sim"; }
  void UpdateWeights(const Event&) override {}
  void UpdateMemory(const Event& event) override;
  const FactMemory& memory() const override { return memory_; }
  std::size_t aux_state() const override { return 0; }
  std::size_t active_experts() const override { return experts_->size(); }
  std::size_t fact_budget() const override;

 private:
  const ExpertSuite* experts_;
  FactMemory memory_;
};

// Stores every revealed fact, evicting uniformly at random when full.
class RandomEvictionLearner final : public Learner {
 public:
  RandomEvictionLearner(std::size_t budget, std::uint64_t seed);

  std::string_view name() const override { return "random-evict"; }
  void UpdateWeights(const Event&) override {}
  void UpdateMemory(const Event& event) override;
  const FactMemory& memory() const override { return memory_; }
  std::size_t aux_state() const override { return 0; }
  std::size_t active_experts() const override { return 0; }
  std::size_t fact_budget() const override { return budget_; }

 private:
  std::size_t budget_;
  std::mt19937_64 rng_;
  FactMemory memory_;
};

}  // namespace oqa
