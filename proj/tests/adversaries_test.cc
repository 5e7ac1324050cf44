#include "oqa/adversaries.h"

#include <gtest/gtest.h>

#include <set>

namespace oqa {
namespace {

std::shared_ptr<const LowerBoundInstance> Instance(LowerBoundParams p,
                                                   Universe& u) {
  return std::make_shared<const LowerBoundInstance>(
      LowerBoundInstance::Build(p, u));
}

TEST(FloorLog, SmallValues) {
  EXPECT_EQ(FloorLog(1, 2), 0u);
  EXPECT_EQ(FloorLog(4, 2), 2u);
  EXPECT_EQ(FloorLog(7, 2), 2u);
  EXPECT_EQ(FloorLog(64, 4), 3u);
  EXPECT_EQ(FloorLog(63, 4), 2u);
  EXPECT_THROW(FloorLog(4, 1), std::invalid_argument);
}

TEST(LowerBoundInstance, CollectionsAndBlocks) {
  Universe u;
  const auto inst = Instance({1, 4, 2, 0}, u);
  EXPECT_EQ(inst->num_collections(), 2u);
  EXPECT_EQ(inst->collection(1).size(), 4u);
  EXPECT_EQ(inst->block(2, 2).size(), 2u);
  EXPECT_EQ(inst->num_placed_experts(), 4u);
  EXPECT_EQ(inst->universe_size(), 8u);
  EXPECT_THROW(inst->collection(3), std::out_of_range);

  Universe u2;
  const auto small = Instance({1, 2, 1, 0}, u2);
  EXPECT_EQ(small->num_collections(), 1u);
  EXPECT_EQ(small->collection(1).size(), 2u);
}

TEST(LowerBoundInstance, RoundsHoldCmPlusOneFacts) {
  Universe u;
  const auto inst = Instance({2, 4, 3, 2}, u);
  EXPECT_EQ(inst->round(0).size(), 7u);
  EXPECT_EQ(inst->round(1).size(), 7u);
  EXPECT_THROW(inst->round(2), std::out_of_range);
  const ExpertIndex e = 0;
  EXPECT_EQ(inst->level(e, inst->round(1)[0].question),
            inst->num_collections() + 1);
}

TEST(LowerBoundInstance, ThrownOutExpertsRankEverythingAtLevelZero) {
  Universe u;
  const auto inst = Instance({1, 5, 1, 0}, u);
  EXPECT_EQ(inst->num_placed_experts(), 4u);
  EXPECT_FALSE(inst->leaf_path(4).has_value());
  for (std::size_t k = 1; k <= inst->num_collections(); ++k) {
    for (const Fact& f : inst->collection(k)) {
      EXPECT_EQ(inst->level(4, f.question), 0u);
    }
  }
  // Values stay injective and respect levels.
  for (const auto& v : inst->values()) EXPECT_TRUE(v->IsInjective());
  const auto path = *inst->leaf_path(0);
  const Fact mine = inst->block(1, path[0])[0];
  const Fact other = inst->block(1, 3 - path[0])[0];
  EXPECT_GT((*inst->values()[0])(mine.question),
            (*inst->values()[0])(other.question));
}

TEST(LowerBoundInstance, RejectsTooFewExperts) {
  Universe u;
  EXPECT_THROW(LowerBoundInstance::Build({2, 3, 1, 0}, u),
               std::invalid_argument);
  EXPECT_THROW(LowerBoundInstance::Build({1, 2, 0, 0}, u),
               std::invalid_argument);
}

// Drives the adversary through part one with a fixed learner memory.
std::vector<Event> Drain(LowerBoundAdversary& adv, const FactMemory& memory) {
  std::vector<Event> out;
  while (auto ev = adv.Next(out, memory)) out.push_back(*ev);
  return out;
}

TEST(LowerBoundAdversary, EmptyLearnerGetsFirstBlock) {
  Universe u;
  const auto inst = Instance({1, 4, 2, 0}, u);
  LowerBoundAdversary adv(inst);
  const auto events = Drain(adv, FactMemory{});
  EXPECT_EQ(events.size(), adv.total_length());
  EXPECT_EQ(adv.chosen_blocks().size(), 2u);
  EXPECT_EQ(adv.chosen_blocks()[0], 1u);
  EXPECT_EQ(adv.pigeonhole_failures(), 0u);
  // Teach 4, evaluate 2, per collection.
  EXPECT_TRUE(events[3].is_teach());
  EXPECT_TRUE(events[4].is_evaluate());
  EXPECT_EQ(events[4].question, inst->block(1, 1)[0].question);
}

TEST(LowerBoundAdversary, AvoidsBlocksTheLearnerStored) {
  Universe u;
  const auto inst = Instance({1, 4, 2, 0}, u);
  FactMemory memory;
  for (const Fact& f : inst->block(1, 1)) memory.Insert(f);
  LowerBoundAdversary adv(inst);
  Drain(adv, memory);
  EXPECT_EQ(adv.chosen_blocks()[0], 2u);
  EXPECT_EQ(adv.stored_at_selection()[0], 0u);
}

TEST(LowerBoundAdversary, ReportsPigeonholeFailure) {
  Universe u;
  const auto inst = Instance({1, 2, 1, 0}, u);
  FactMemory memory;
  for (const Fact& f : inst->collection(1)) memory.Insert(f);
  LowerBoundAdversary adv(inst);
  Drain(adv, memory);
  EXPECT_EQ(adv.pigeonhole_failures(), 1u);
}

TEST(LowerBoundAdversary, SurvivorsKnowEveryEvaluatedPartOneFact) {
  Universe u;
  const auto inst = Instance({1, 8, 2, 1}, u);
  ExpertSuite experts = inst->MakeExperts();
  LowerBoundAdversary adv(inst);
  std::vector<Event> history;
  std::vector<std::size_t> mistakes(experts.size(), 0);
  const FactMemory empty;
  while (history.size() < adv.part_one_length()) {
    const auto ev = adv.Next(history, empty);
    ASSERT_TRUE(ev.has_value());
    if (ev->is_evaluate()) {
      for (ExpertIndex e = 0; e < experts.size(); ++e) {
        mistakes[e] += experts.at(e).Knows(ev->question) ? 0 : 1;
      }
    } else {
      experts.OfferAll(*ev->fact());
    }
    history.push_back(*ev);
  }
  const auto survivors = adv.survivors();
  EXPECT_EQ(survivors.size(), inst->leaf_group_size());
  for (ExpertIndex e : survivors) EXPECT_EQ(mistakes[e], 0u);
}

TEST(LowerBoundAdversary, NeedsAnInstance) {
  EXPECT_THROW(LowerBoundAdversary(nullptr), std::invalid_argument);
}

TEST(RandomStream, AlwaysTeachingMeansNoEvaluates) {
  Universe u;
  const Stream s = RandomStream(u, 5, 100, 1.0, 3);
  for (const Event& e : s.events) EXPECT_TRUE(e.is_teach());
}

TEST(RandomStream, SequentialAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Universe u1, u2;
    const Stream a = RandomStream(u1, 6, 300, 0.3, seed);
    const Stream b = RandomStream(u2, 6, 300, 0.3, seed);
    EXPECT_EQ(a.events, b.events);
    EXPECT_TRUE(a.sequential);
    EXPECT_TRUE(ValidateSequential(a).ok);
  }
  Universe u;
  EXPECT_THROW(RandomStream(u, 3, 10, 1.5, 0), std::invalid_argument);
}

TEST(StreamAdversary, ReplaysThenStops) {
  Universe u;
  const auto facts = InternNumberedFacts(u, 2);
  Stream s;
  s.events = {Event::Teach(facts[0]), Event::Evaluate(facts[0].question)};
  StreamAdversary adv(s);
  std::vector<Event> history;
  const FactMemory memory;
  while (auto ev = adv.Next(history, memory)) history.push_back(*ev);
  EXPECT_EQ(history, s.events);
  EXPECT_FALSE(adv.sequential());
  EXPECT_EQ(u.QuestionName(facts[1].question), "q1");
}

}  // namespace
}  // namespace oqa
