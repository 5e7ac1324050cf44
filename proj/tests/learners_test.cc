#include "oqa/learners.h"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.h"

namespace oqa {
namespace {

Fact F(std::uint32_t q) { return {{q}, {q}}; }

// Answers from an explicit table of known questions per expert.
class TableOracle final : public ExpertOracle {
 public:
  explicit TableOracle(std::size_t n) : known_(n) {}
  std::size_t num_experts() const override { return known_.size(); }
  bool Query(ExpertIndex e, QuestionId q) const override {
    return known_.at(e).contains(q.index);
  }
  void Set(ExpertIndex e, std::set<std::uint32_t> qs) { known_.at(e) = qs; }

 private:
  std::vector<std::set<std::uint32_t>> known_;
};

std::shared_ptr<const ValueFunction> Values(
    std::initializer_list<std::pair<std::uint32_t, std::uint64_t>> pairs) {
  auto v = std::make_shared<ValueFunction>();
  for (auto [q, value] : pairs) v->Set({q}, value);
  return v;
}

// Question i has value i (questions 1..n).
std::shared_ptr<const ValueFunction> Identity(std::uint32_t n) {
  auto v = std::make_shared<ValueFunction>();
  for (std::uint32_t i = 1; i <= n; ++i) v->Set({i}, i);
  return v;
}

void Step(Learner& learner, const Event& ev) {
  learner.UpdateWeights(ev);
  learner.UpdateMemory(ev);
}

TEST(MajorityKept, TieCountsAsMajority) {
  const double w[] = {1, 1};
  const std::vector<std::vector<bool>> support = {{true}, {false}};
  EXPECT_EQ(MajorityKept(w, support), (std::vector<std::size_t>{0}));
  EXPECT_TRUE(MajoritySupports(0.5, 1.0));
  EXPECT_FALSE(MajoritySupports(0.49, 1.0));
}

TEST(MajorityKept, AgreesWithExactArithmetic) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 3000; ++trial) {
    const verify::HelperInstance inst = verify::RandomHelperInstance(rng);
    const auto kept = MajorityKept(inst.weights, inst.support);
    ASSERT_EQ(kept, verify::ExactMajorityKept(inst));
    // At most 2M facts survive.
    ASSERT_LE(kept.size(), 2 * inst.M);
  }
}

TEST(MthLargest, PicksAttainingQuestion) {
  const auto v = Values({{1, 7}, {2, 5}, {3, 3}});
  const QuestionId pool[] = {{1}, {2}, {3}};
  EXPECT_EQ(MthLargest(*v, pool, 2), QuestionId{2});
  EXPECT_EQ(MthLargest(*v, pool, 1), QuestionId{1});
  EXPECT_FALSE(MthLargest(*v, std::span(pool, 1), 2).has_value());
}

TEST(MwuLearner, HalvesWeightPerMistake) {
  TableOracle oracle(2);
  oracle.Set(0, {1});
  MwuLearner learner(1, oracle, 0.5);
  learner.UpdateWeights(Event::Evaluate({1}));
  EXPECT_EQ(learner.error_counts()[0], 0u);
  EXPECT_EQ(learner.error_counts()[1], 1u);
  const auto w = learner.NormalizedWeights();
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
  EXPECT_THROW(MwuLearner(1, oracle, 1.0), std::invalid_argument);
  EXPECT_THROW(MwuLearner(0, oracle), std::invalid_argument);
}

TEST(MwuLearner, KeepsFactsWithHalfTheWeight) {
  TableOracle oracle(2);
  oracle.Set(0, {1});
  MwuLearner learner(1, oracle);
  Step(learner, Event::Teach(F(1)));
  EXPECT_TRUE(learner.memory().ContainsQuestion({1}));
  Step(learner, Event::Teach(F(2)));
  EXPECT_FALSE(learner.memory().ContainsQuestion({2}));
  Step(learner, Event::Evaluate({1}));  // expert 1 drops to weight 1/2
  EXPECT_TRUE(learner.memory().ContainsQuestion({1}));
  oracle.Set(1, {3});
  Step(learner, Event::Teach(F(3)));
  EXPECT_FALSE(learner.memory().ContainsQuestion({3}));
}

TEST(LazyLearner, RemovesBadExpertsWhenAThirdAreBad) {
  TableOracle oracle(3);
  oracle.Set(1, {1});
  oracle.Set(2, {1});
  LazyLearner learner(1, oracle);
  learner.UpdateWeights(Event::Evaluate({1}));
  EXPECT_FALSE(learner.active(0));
  EXPECT_EQ(learner.active_experts(), 2u);
  EXPECT_EQ(learner.active_updates(), 1u);
  EXPECT_EQ(learner.last_mistake(), MistakeKind::kMinor);
}

TEST(LazyLearner, KeepsBadExpertWhenFewerThanAThird) {
  TableOracle oracle(4);
  for (ExpertIndex e = 1; e < 4; ++e) oracle.Set(e, {1});
  LazyLearner learner(1, oracle);
  learner.UpdateWeights(Event::Evaluate({1}));
  EXPECT_TRUE(learner.active(0));
  EXPECT_EQ(learner.active_experts(), 4u);
  EXPECT_EQ(learner.error_counts()[0], 1u);
  EXPECT_EQ(learner.active_updates(), 0u);
}

TEST(LazyLearner, HardResetWhenNoActiveExpertLeft) {
  TableOracle oracle(2);
  LazyLearner learner(1, oracle);
  learner.UpdateWeights(Event::Evaluate({1}));
  EXPECT_EQ(learner.last_mistake(), MistakeKind::kMajor);
  EXPECT_EQ(learner.hard_resets(), 1u);
  EXPECT_EQ(learner.active_experts(), 2u);
  EXPECT_EQ(learner.error_counts()[0], 0u);
}

TEST(LazyLearner, StoresFactsKnownToHalfTheActiveSet) {
  TableOracle oracle(2);
  oracle.Set(0, {1, 2});
  oracle.Set(1, {2});
  LazyLearner learner(2, oracle);
  Step(learner, Event::Teach(F(1)));
  Step(learner, Event::Teach(F(2)));
  Step(learner, Event::Teach(F(3)));
  EXPECT_TRUE(learner.memory().ContainsQuestion({1}));
  EXPECT_TRUE(learner.memory().ContainsQuestion({2}));
  EXPECT_FALSE(learner.memory().ContainsQuestion({3}));
  EXPECT_LE(learner.memory().size(), learner.fact_budget());
}

TEST(ValueLazyLearner, ThresholdIsMthLargestOfMemory) {
  ValueLazyLearner learner(2, {Identity(10)});
  learner.UpdateWeights(Event::Teach(F(7)));
  EXPECT_EQ(learner.threshold(0), kThresholdFloor);
  learner.UpdateWeights(Event::Teach(F(5)));
  EXPECT_EQ(learner.threshold(0), 5u);
  learner.UpdateWeights(Event::Teach(F(3)));
  EXPECT_EQ(learner.threshold(0), 5u);
  EXPECT_FALSE(learner.memory().ContainsQuestion({3}));
  EXPECT_EQ(learner.memory().size(), 2u);
}

TEST(ValueLazyLearner, ThresholdsNeverDecrease) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 3;
    const std::uint32_t u = 12;
    ExpertSuite suite = MakeRandomValueSuite(n, u, m, rng());
    ValueLazyLearner learner(m, suite.value_table());
    std::vector<std::uint64_t> last(n, 0), last_pre(n, 0);
    for (int step = 0; step < 60; ++step) {
      const QuestionId q{static_cast<std::uint32_t>(rng() % u)};
      const Event ev = rng() % 2 ? Event::Teach({q, {q.index}})
                                 : Event{EventKind::kEvaluate, q, AnswerId{q.index}};
      learner.UpdateWeights(ev);
      for (ExpertIndex e = 0; e < n; ++e) {
        ASSERT_GE(learner.threshold(e), last[e]);
        ASSERT_GE(learner.pre_threshold(e), last_pre[e]);
        last[e] = learner.threshold(e);
        last_pre[e] = learner.pre_threshold(e);
      }
      ASSERT_LE(learner.memory().size(), 2 * m);
      ASSERT_LE(learner.question_memory(), 2 * m);
    }
  }
}

TEST(ValueLazyLearner, EvaluateOnStoredQuestionIsNotAMistake) {
  ValueLazyLearner learner(1, {Identity(4), Identity(4)});
  learner.UpdateWeights(Event::Teach(F(3)));
  learner.UpdateWeights({EventKind::kEvaluate, {3}, AnswerId{3}});
  EXPECT_TRUE(learner.minor_mistakes().empty());
  EXPECT_EQ(learner.error_counts()[0], 0u);
  EXPECT_EQ(learner.error_counts()[1], 0u);
}

TEST(ValueLazyLearner, MinorMistakeIsParked) {
  // Both experts rank q4 highest; neither is known to have dropped it.
  ValueLazyLearner learner(1, {Identity(4), Identity(4)});
  learner.UpdateWeights(Event::Evaluate({4}));
  ASSERT_EQ(learner.minor_mistakes().size(), 1u);
  EXPECT_EQ(learner.minor_mistakes()[0], QuestionId{4});
  EXPECT_EQ(learner.error_counts()[0], 0u);
  EXPECT_EQ(learner.pre_threshold(0), 4u);
}

TEST(ValueLazyLearner, PreThresholdConvertsParkedQuestions) {
  ValueLazyLearner learner(1, {Identity(4), Identity(4)});
  learner.UpdatePreThreshold({2});
  EXPECT_EQ(learner.minor_mistakes().size(), 1u);
  EXPECT_EQ(learner.pre_threshold(1), 2u);
  learner.UpdatePreThreshold({3});
  // q2 now sits below both pre-thresholds: counted for both, then dropped.
  ASSERT_EQ(learner.minor_mistakes().size(), 1u);
  EXPECT_EQ(learner.minor_mistakes()[0], QuestionId{3});
  EXPECT_EQ(learner.error_counts()[0], 1u);
  EXPECT_EQ(learner.error_counts()[1], 1u);
  EXPECT_EQ(learner.perceived_increments()[0], 1u);
}

TEST(ValueLazyLearner, PreThresholdStaysAtFloorWhileUnderFull) {
  ValueLazyLearner learner(2, {Identity(4)});
  learner.UpdatePreThreshold({2});
  EXPECT_EQ(learner.pre_threshold(0), kThresholdFloor);
  EXPECT_EQ(learner.error_counts()[0], 0u);
}

TEST(ValueLazyLearner, MajorMistakeCountsFailedExperts) {
  ValueLazyLearner learner(1, {Identity(4), Identity(4)});
  learner.UpdateWeights(Event::Teach(F(4)));
  EXPECT_EQ(learner.threshold(0), 4u);
  learner.UpdateWeights(Event::Evaluate({1}));
  EXPECT_TRUE(learner.minor_mistakes().empty());
  EXPECT_EQ(learner.perceived_increments()[0], 1u);
  EXPECT_EQ(learner.perceived_increments()[1], 1u);
}

TEST(FullSimLearner, HoldsUnionOfExpertMemories) {
  ExpertSuite suite;
  suite.Add("a", std::make_unique<ScriptedExpert>(2, MakeFirstSeenPolicy()));
  suite.Add("b", std::make_unique<ScriptedExpert>(2, MakeFirstSeenPolicy()));
  FullSimLearner learner(suite);
  suite.at(0).Offer(F(1));
  suite.at(0).Offer(F(2));
  suite.at(1).Offer(F(3));
  suite.at(1).Offer(F(4));
  learner.UpdateMemory(Event::Teach(F(4)));
  EXPECT_EQ(learner.memory().size(), 4u);
  EXPECT_EQ(learner.fact_budget(), 4u);

  ExpertSuite same;
  same.Add("a", std::make_unique<ScriptedExpert>(2, MakeLastSeenPolicy()));
  same.Add("b", std::make_unique<ScriptedExpert>(2, MakeLastSeenPolicy()));
  FullSimLearner twin(same);
  for (std::uint32_t q = 1; q <= 5; ++q) {
    same.OfferAll(F(q));
    twin.UpdateMemory(Event::Teach(F(q)));
  }
  EXPECT_EQ(twin.memory().size(), 2u);
  EXPECT_TRUE(twin.memory().ContainsQuestion({5}));
  EXPECT_FALSE(twin.memory().ContainsQuestion({1}));
}

TEST(RandomEvictionLearner, StaysWithinBudget) {
  RandomEvictionLearner learner(3, 42);
  for (std::uint32_t q = 0; q < 50; ++q) {
    Step(learner, Event::Teach(F(q)));
    ASSERT_TRUE(learner.memory().ContainsQuestion({q}));
    ASSERT_LE(learner.memory().size(), 3u);
  }
  Step(learner, Event::Evaluate({99}));
  EXPECT_EQ(learner.memory().size(), 3u);
  EXPECT_THROW(RandomEvictionLearner(0, 1), std::invalid_argument);
}

}  // namespace
}  // namespace oqa
