// Reference computations used only by tests and the acceptance checks. Each
// one recomputes a quantity from first principles, without the data
// structures of the library under test.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "oqa/core.h"
#include "oqa/experts.h"

namespace oqa::verify {

// Questions a value-based expert of capacity m holds after seeing `offered`
// (duplicates allowed): the m distinct questions of largest value, sorted by
// id.
std::vector<QuestionId> ReplayTopM(const ValueFunction& values,
                                   std::span<const QuestionId> offered,
                                   std::size_t m);

// m-th largest value among the distinct offered questions, 0 when fewer
// than m were offered.
std::uint64_t ReplayThreshold(const ValueFunction& values,
                              std::span<const QuestionId> offered,
                              std::size_t m);

// Quadratic check: every Evaluate has an earlier Teach of its question.
bool NaiveSequential(const Stream& stream);

// True mistakes per expert for a value-based suite of capacity m on a
// stream, by replaying each expert's memory from scratch at every Evaluate.
// Every event whose answer is known by then is offered to the experts.
std::vector<std::uint64_t> ReplayExpertMistakes(const ValueTable& values,
                                                std::size_t m,
                                                const Stream& stream);

// Instance of the majority-kept helper statement: N weights, D facts,
// b[e][f] in {0,1} with every row summing to at most M. Weights are
// non-negative integers (exact in double).
struct HelperInstance {
  std::size_t M = 1;
  std::vector<double> weights;
  std::vector<std::vector<bool>> support;
};

HelperInstance RandomHelperInstance(std::mt19937_64& rng);

// Facts f with 2 * sum_e w_e b[e][f] >= sum_e w_e, in exact integer
// arithmetic.
std::vector<std::size_t> ExactMajorityKept(const HelperInstance& instance);

}  // namespace oqa::verify
