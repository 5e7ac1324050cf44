#include "oqa/experts.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.h"

namespace oqa {
namespace {

Fact F(std::uint32_t q) { return {{q}, {q}}; }

// Question i has value i (questions 1..n).
std::shared_ptr<ValueFunction> Identity(std::uint32_t n) {
  auto v = std::make_shared<ValueFunction>();
  for (std::uint32_t i = 1; i <= n; ++i) v->Set({i}, i);
  return v;
}

std::vector<std::uint32_t> Stored(const Expert& e) {
  std::vector<std::uint32_t> out;
  for (const Fact& f : e.Memory()) out.push_back(f.question.index);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(ValueBasedExpert, KeepsTopMAndThreshold) {
  ValueBasedExpert e(2, Identity(10));
  for (std::uint32_t q : {5u, 3u, 7u}) e.Offer(F(q));
  EXPECT_EQ(Stored(e), (std::vector<std::uint32_t>{5, 7}));
  EXPECT_EQ(e.TrueThreshold(), 5u);
  EXPECT_TRUE(e.Knows({7}));
  EXPECT_FALSE(e.Knows({3}));
}

TEST(ValueBasedExpert, ReofferDoesNotDuplicate) {
  ValueBasedExpert e(1, Identity(10));
  e.Offer(F(4));
  e.Offer(F(4));
  EXPECT_EQ(e.size(), 1u);
  EXPECT_EQ(e.TrueThreshold(), 4u);
}

TEST(ValueBasedExpert, ThresholdFloorWhileUnderFull) {
  ValueBasedExpert three(3, Identity(10));
  three.Offer(F(9));
  three.Offer(F(2));
  EXPECT_EQ(three.TrueThreshold(), kThresholdFloor);
  ValueBasedExpert two(2, Identity(10));
  two.Offer(F(9));
  EXPECT_EQ(two.TrueThreshold(), 0u);
  ValueBasedExpert one(1, Identity(10));
  one.Offer(F(4));
  EXPECT_EQ(one.TrueThreshold(), 4u);
}

TEST(ValueBasedExpert, EvictedQuestionIsNotReadmitted) {
  ValueBasedExpert e(1, Identity(10));
  e.Offer(F(3));
  e.Offer(F(6));
  e.Offer(F(3));
  EXPECT_EQ(Stored(e), (std::vector<std::uint32_t>{6}));
}

TEST(ValueBasedExpert, Errors) {
  EXPECT_THROW(ValueBasedExpert(0, Identity(2)), std::invalid_argument);
  ValueBasedExpert e(2, Identity(2));
  EXPECT_THROW(e.Offer(F(9)), std::out_of_range);
  e.Offer(F(1));
  EXPECT_THROW(e.Offer({{1}, {5}}), std::invalid_argument);
  ValueFunction v;
  EXPECT_THROW(v.Set({0}, 0), std::invalid_argument);
}

TEST(ValueBasedExpert, MatchesReplayOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint32_t u = 1 + static_cast<std::uint32_t>(rng() % 12);
    const std::size_t m = 1 + rng() % 4;
    ExpertSuite suite = MakeRandomValueSuite(1, u, m, rng());
    const ValueBasedExpert& e = suite.value_expert(0);
    std::vector<QuestionId> offered;
    for (int step = 0; step < 25; ++step) {
      const QuestionId q{static_cast<std::uint32_t>(rng() % u)};
      offered.push_back(q);
      suite.OfferAll({q, {q.index}});
      const auto top = verify::ReplayTopM(e.values(), offered, m);
      std::vector<std::uint32_t> want;
      for (QuestionId t : top) want.push_back(t.index);
      ASSERT_EQ(Stored(e), want);
      ASSERT_EQ(e.TrueThreshold(),
                verify::ReplayThreshold(e.values(), offered, m));
    }
  }
}

TEST(ScriptedExpert, LastSeenRefreshesRecency) {
  ScriptedExpert e(2, MakeLastSeenPolicy());
  e.Offer(F(1));
  e.Offer(F(2));
  e.Offer(F(1));
  e.Offer(F(3));
  EXPECT_EQ(Stored(e), (std::vector<std::uint32_t>{1, 3}));
  EXPECT_FALSE(e.Knows({2}));
}

TEST(ScriptedExpert, FirstSeenIgnoresLaterFacts) {
  ScriptedExpert e(2, MakeFirstSeenPolicy());
  for (std::uint32_t q : {4u, 8u, 1u, 4u}) e.Offer(F(q));
  EXPECT_EQ(Stored(e), (std::vector<std::uint32_t>{4, 8}));
  EXPECT_FALSE(e.Knows({1}));
}

TEST(ScriptedExpert, KnowsAgreesWithMemory) {
  std::mt19937_64 rng(5);
  for (int policy = 0; policy < 3; ++policy) {
    auto make = [&]() -> std::unique_ptr<RetentionPolicy> {
      if (policy == 0) return MakeLastSeenPolicy();
      if (policy == 1) return MakeFirstSeenPolicy();
      return MakeRandomEvictionPolicy(17);
    };
    ScriptedExpert e(3, make());
    for (int step = 0; step < 400; ++step) {
      e.Offer(F(static_cast<std::uint32_t>(rng() % 9)));
      ASSERT_LE(e.size(), 3u);
      const auto stored = Stored(e);
      for (std::uint32_t q = 0; q < 9; ++q) {
        const bool in = std::binary_search(stored.begin(), stored.end(), q);
        ASSERT_EQ(e.Knows({q}), in) << "policy " << policy;
      }
    }
  }
}

TEST(ScriptedExpert, CloneIsIndependentAndDeterministic) {
  ScriptedExpert a(2, MakeRandomEvictionPolicy(9));
  for (std::uint32_t q = 0; q < 5; ++q) a.Offer(F(q));
  auto b = a.Clone();
  for (std::uint32_t q = 5; q < 20; ++q) {
    a.Offer(F(q));
    b->Offer(F(q));
  }
  EXPECT_EQ(Stored(a), Stored(*b));
}

TEST(TrueMistakes, OnePerExpertLackingTheFact) {
  ExpertSuite suite;
  for (int i = 0; i < 3; ++i) {
    suite.Add("e" + std::to_string(i),
              std::make_unique<ScriptedExpert>(1, MakeFirstSeenPolicy()));
  }
  suite.at(1).Offer(F(7));
  EXPECT_EQ(TrueMistakes(suite, {7}), (std::vector<std::uint8_t>{1, 0, 1}));
  suite.at(0).Offer(F(7));
  suite.at(2).Offer(F(7));
  EXPECT_EQ(TrueMistakes(suite, {7}), (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(ExpertSuite, NamesAndErrors) {
  ExpertSuite suite;
  suite.Add("a", std::make_unique<ValueBasedExpert>(1, Identity(3)));
  EXPECT_THROW(suite.Add("a", std::make_unique<ValueBasedExpert>(1, Identity(3))),
               std::invalid_argument);
  EXPECT_THROW(suite.at(4), std::out_of_range);
  EXPECT_EQ(suite.Find("a"), ExpertIndex{0});
  EXPECT_TRUE(suite.value_based());
  suite.Add("s", std::make_unique<ScriptedExpert>(1, MakeLastSeenPolicy()));
  EXPECT_FALSE(suite.value_based());
  EXPECT_THROW(suite.value_expert(1), std::logic_error);
}

TEST(Oracles, SimulationAndThresholdAgree) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t u = 2 + static_cast<std::uint32_t>(rng() % 10);
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 3;
    ExpertSuite suite = MakeRandomValueSuite(n, u, m, rng());
    SimulationOracle sim(suite);
    ThresholdOracle thr(suite);
    EXPECT_EQ(sim.num_experts(), n);
    for (int step = 0; step < 20; ++step) {
      const QuestionId q{static_cast<std::uint32_t>(rng() % u)};
      suite.OfferAll({q, {0}});
      thr.NoteOffered(q);
      for (ExpertIndex e = 0; e < n; ++e) {
        for (std::uint32_t p = 0; p < u; ++p) {
          ASSERT_EQ(sim.Query(e, {p}), thr.Query(e, {p}));
        }
      }
    }
    EXPECT_THROW(sim.Query(n, {0}), std::out_of_range);
  }
}

TEST(Oracles, ThresholdNeedsValueSuite) {
  ExpertSuite suite;
  suite.Add("s", std::make_unique<ScriptedExpert>(1, MakeLastSeenPolicy()));
  EXPECT_THROW(ThresholdOracle{suite}, std::invalid_argument);
}

TEST(ValueSuiteIo, RoundTripAndErrors) {
  Universe u;
  std::istringstream in(
      "expert x value q1 3\nexpert x value q2 1\n\nexpert y value q1 2\n");
  ExpertSuite suite = ReadValueSuite(in, u, 1);
  ASSERT_EQ(suite.size(), 2u);
  EXPECT_EQ(suite.name(0), "x");
  EXPECT_EQ(suite.value_expert(0).values()(*u.FindQuestion("q1")), 3u);

  std::ostringstream out;
  WriteValueSuite(out, suite, u);
  Universe u2;
  std::istringstream back(out.str());
  ExpertSuite again = ReadValueSuite(back, u2, 1);
  EXPECT_EQ(again.size(), 2u);
  EXPECT_EQ(again.value_expert(1).values()(*u2.FindQuestion("q1")), 2u);

  auto fails = [](const std::string& text) {
    Universe v;
    std::istringstream s(text);
    try {
      ReadValueSuite(s, v, 1);
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(fails("expert x value q1 0\n").find("line 1"), std::string::npos);
  EXPECT_NE(fails("expert x value q1 1\nexpert x val q2 2\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(fails("expert x value q1 4\nexpert x value q2 4\n")
                .find("non-injective"),
            std::string::npos);
}

}  // namespace
}  // namespace oqa
