#include "oracles.h"

#include <algorithm>
#include <map>

namespace oqa::verify {

std::vector<QuestionId> ReplayTopM(const ValueFunction& values,
                                   std::span<const QuestionId> offered,
                                   std::size_t m) {
  std::vector<QuestionId> distinct(offered.begin(), offered.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::sort(distinct.begin(), distinct.end(),
            [&](QuestionId a, QuestionId b) { return values(a) > values(b); });
  if (distinct.size() > m) distinct.resize(m);
  std::sort(distinct.begin(), distinct.end());
  return distinct;
}

std::uint64_t ReplayThreshold(const ValueFunction& values,
                              std::span<const QuestionId> offered,
                              std::size_t m) {
  const std::vector<QuestionId> top = ReplayTopM(values, offered, m);
  if (top.size() < m) return 0;
  std::uint64_t lowest = values(top.front());
  for (QuestionId q : top) lowest = std::min(lowest, values(q));
  return lowest;
}

bool NaiveSequential(const Stream& stream) {
  for (std::size_t t = 0; t < stream.events.size(); ++t) {
    const Event& ev = stream.events[t];
    if (!ev.is_evaluate()) continue;
    bool taught = false;
    for (std::size_t s = 0; s < t; ++s) {
      taught = taught || (stream.events[s].is_teach() &&
                          stream.events[s].question == ev.question);
    }
    if (!taught) return false;
  }
  return true;
}

std::vector<std::uint64_t> ReplayExpertMistakes(const ValueTable& values,
                                                std::size_t m,
                                                const Stream& stream) {
  std::vector<std::uint64_t> mistakes(values.size(), 0);
  std::vector<QuestionId> offered;
  std::map<QuestionId, bool> known_answer;
  for (const Event& ev : stream.events) {
    if (ev.is_evaluate()) {
      for (std::size_t e = 0; e < values.size(); ++e) {
        const auto top = ReplayTopM(*values[e], offered, m);
        if (!std::binary_search(top.begin(), top.end(), ev.question)) {
          ++mistakes[e];
        }
      }
    }
    if (ev.is_teach()) known_answer[ev.question] = true;
    if (known_answer.count(ev.question)) offered.push_back(ev.question);
  }
  return mistakes;
}

HelperInstance RandomHelperInstance(std::mt19937_64& rng) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  HelperInstance inst;
  inst.M = uniform(1, 6);
  const std::size_t n = uniform(1, 12);
  const std::size_t d = uniform(1, 30);
  const int style = static_cast<int>(uniform(0, 3));
  for (std::size_t e = 0; e < n; ++e) {
    double w = 0;
    switch (style) {
      case 0: w = 1; break;                                        // lazy
      case 1: w = static_cast<double>(uniform(0, 1)); break;       // active set
      case 2: w = static_cast<double>(1ULL << uniform(0, 40)); break;  // MWU
      default: w = static_cast<double>(uniform(0, 1000)); break;
    }
    inst.weights.push_back(w);
  }
  if (std::all_of(inst.weights.begin(), inst.weights.end(),
                  [](double w) { return w == 0; })) {
    inst.weights[uniform(0, n - 1)] = 1;
  }
  for (std::size_t e = 0; e < n; ++e) {
    std::vector<bool> row(d, false);
    std::vector<std::size_t> facts(d);
    for (std::size_t f = 0; f < d; ++f) facts[f] = f;
    std::shuffle(facts.begin(), facts.end(), rng);
    const std::size_t ones = uniform(0, std::min(inst.M, d));
    for (std::size_t i = 0; i < ones; ++i) row[facts[i]] = true;
    inst.support.push_back(std::move(row));
  }
  return inst;
}

std::vector<std::size_t> ExactMajorityKept(const HelperInstance& instance) {
  unsigned __int128 total = 0;
  for (double w : instance.weights) total += static_cast<std::uint64_t>(w);
  const std::size_t d =
      instance.support.empty() ? 0 : instance.support.front().size();
  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < d; ++f) {
    unsigned __int128 saved = 0;
    for (std::size_t e = 0; e < instance.weights.size(); ++e) {
      if (instance.support[e][f]) {
        saved += static_cast<std::uint64_t>(instance.weights[e]);
      }
    }
    if (2 * saved >= total) kept.push_back(f);
  }
  return kept;
}

}  // namespace oqa::verify
