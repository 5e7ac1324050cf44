// Stream generators: fixed streams, seeded random sequential streams, and the
// adaptive adversary that realizes the Omega(OPT + M log N) lower bound.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oqa/core.h"
#include "oqa/experts.h"

namespace oqa {

// Produces the next event given the history so far and a read-only view of
// the learner's stored facts. Fixed streams ignore the view.
class Adversary {
 public:
  virtual ~Adversary() = default;
  // nullopt once the stream is exhausted.
  virtual std::optional<Event> Next(std::span<const Event> history,
                                    const FactMemory& learner_memory) = 0;
  virtual bool sequential() const = 0;
};

class StreamAdversary final : public Adversary {
 public:
  explicit StreamAdversary(Stream stream) : stream_(std::move(stream)) {}
  std::optional<Event> Next(std::span<const Event> history,
                            const FactMemory& learner_memory) override;
  bool sequential() const override { return stream_.sequential; }

 private:
  Stream stream_;
  std::size_t next_ = 0;
};

// Questions `q<i>` with answers `a<i>` for i in [0, universe_size). Interned
// in index order, so question i has QuestionId{i} in a fresh universe.
std::vector<Fact> InternNumberedFacts(Universe& universe,
                                      std::size_t universe_size);

// Sequential stream of `length` events: each step teaches a uniformly random
// question with probability `teach_fraction` (always, until something has
// been taught) and otherwise evaluates a uniformly random taught question.
// Deterministic in `seed`.
Stream RandomStream(Universe& universe, std::size_t universe_size,
                    std::size_t length, double teach_fraction,
                    std::uint64_t seed);

struct LowerBoundParams {
  std::size_t c = 1;    // learner memory multiplier: budget c * M facts
  std::size_t N = 2;    // experts
  std::size_t M = 1;    // expert memory
  std::size_t opt = 0;  // rounds of the second part
};

// floor(log_base(n)) for base >= 2, n >= 1.
std::size_t FloorLog(std::size_t n, std::size_t base);

// The expert tree and fact collections of the lower-bound construction.
//
// Part one uses K = floor(log_{2c} N) collections C_1..C_K of 2cM facts, each
// split into 2c blocks of M. Experts are grouped into a 2c-ary tree of depth
// K; an expert on leaf path (i_1, ..., i_K) ranks the facts of block i_k of
// C_k at level k and every other part-one fact at level 0. Part two holds
// `opt` rounds of cM + 1 fresh facts, ranked at level K + 1 for all experts.
//
// Value functions refine levels into injective naturals: a fact with global
// index g and level L gets L * (U + 1) + g + 1, where U is the number of
// facts. Ordering by value agrees with ordering by level.
class LowerBoundInstance {
 public:
  // Throws std::invalid_argument unless c, N, M >= 1 and N >= 2c.
  static LowerBoundInstance Build(const LowerBoundParams& params,
                                  Universe& universe);

  const LowerBoundParams& params() const { return params_; }
  std::size_t num_collections() const { return num_collections_; }
  std::size_t num_blocks() const { return 2 * params_.c; }
  std::size_t leaf_group_size() const { return leaf_group_size_; }
  // Experts placed in the tree; the rest are thrown out.
  std::size_t num_placed_experts() const;

  // k in [1, K]; 2cM facts, block b (1-based) is positions [(b-1)M, bM).
  std::span<const Fact> collection(std::size_t k) const;
  std::span<const Fact> block(std::size_t k, std::size_t b) const;
  // r in [0, opt); cM + 1 facts.
  std::span<const Fact> round(std::size_t r) const;

  // Leaf path (i_1..i_K), 1-based, or nullopt for a thrown-out expert.
  std::optional<std::vector<std::size_t>> leaf_path(ExpertIndex e) const;
  // Level of q for expert e: k on the expert's block of C_k, K + 1 for
  // part-two facts, 0 otherwise.
  std::size_t level(ExpertIndex e, QuestionId q) const;

  const ValueTable& values() const { return values_; }
  ExpertSuite MakeExperts() const;
  std::size_t universe_size() const { return facts_.size(); }

 private:
  LowerBoundParams params_;
  std::size_t num_collections_ = 0;
  std::size_t leaf_group_size_ = 0;
  std::vector<Fact> facts_;  // part one then part two, by global index
  std::uint32_t first_index_ = 0;
  ValueTable values_;
};

// White-box adaptive adversary for LowerBoundInstance. Part one teaches C_k,
// then picks the block with the fewest facts in learner memory (preferring
// the lowest block index with at most floor(M/2) - 1 stored, then at most
// floor(M/2)) and evaluates its M questions. Part two teaches cM + 1 fresh
// facts per round, then evaluates the first one the learner lacks.
class LowerBoundAdversary final : public Adversary {
 public:
  explicit LowerBoundAdversary(
      std::shared_ptr<const LowerBoundInstance> instance);

  std::optional<Event> Next(std::span<const Event> history,
                            const FactMemory& learner_memory) override;
  bool sequential() const override { return true; }

  std::size_t part_one_length() const;
  std::size_t total_length() const;
  // Chosen block i_k per collection, 1-based, in order of selection.
  std::span<const std::size_t> chosen_blocks() const { return chosen_; }
  // Learner-stored facts of the chosen block at selection time.
  std::span<const std::size_t> stored_at_selection() const {
    return stored_at_selection_;
  }
  // Selections or part-two evaluations where the pigeonhole guarantee did
  // not hold (the learner kept more than its c*M budget would allow).
  std::size_t pigeonhole_failures() const { return pigeonhole_failures_; }
  // Placed experts whose leaf path matches every block chosen so far.
  std::vector<ExpertIndex> survivors() const;

 private:
  std::size_t SelectBlock(std::size_t k, const FactMemory& memory);

  std::shared_ptr<const LowerBoundInstance> instance_;
  std::size_t step_ = 0;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> stored_at_selection_;
  std::size_t pigeonhole_failures_ = 0;
};

}  // namespace oqa
