#include "oqa/adversaries.h"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace oqa {

std::optional<Event> StreamAdversary::Next(std::span<const Event>,
                                           const FactMemory&) {
  if (next_ >= stream_.events.size()) return std::nullopt;
  return stream_.events[next_++];
}

std::vector<Fact> InternNumberedFacts(Universe& universe,
                                      std::size_t universe_size) {
  std::vector<Fact> facts;
  facts.reserve(universe_size);
  for (std::size_t i = 0; i < universe_size; ++i) {
    const std::string n = std::to_string(i);
    facts.push_back({universe.InternQuestion("q" + n),
                     universe.InternAnswer("a" + n)});
  }
  return facts;
}

Stream RandomStream(Universe& universe, std::size_t universe_size,
                    std::size_t length, double teach_fraction,
                    std::uint64_t seed) {
  if (!(teach_fraction >= 0.0 && teach_fraction <= 1.0)) {
    throw std::invalid_argument("teach fraction must lie in [0, 1]");
  }
  if (universe_size == 0 && length > 0) {
    throw std::invalid_argument("universe must be non-empty");
  }
  const std::vector<Fact> facts = InternNumberedFacts(universe, universe_size);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution teach(teach_fraction);
  std::uniform_int_distribution<std::size_t> any(
      0, universe_size == 0 ? 0 : universe_size - 1);

  Stream stream;
  stream.sequential = true;
  stream.events.reserve(length);
  std::vector<std::size_t> taught;
  std::vector<bool> was_taught(universe_size, false);
  for (std::size_t t = 0; t < length; ++t) {
    if (taught.empty() || teach(rng)) {
      const std::size_t i = any(rng);
      if (!was_taught[i]) {
        was_taught[i] = true;
        taught.push_back(i);
      }
      stream.events.push_back(Event::Teach(facts[i]));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, taught.size() - 1);
      stream.events.push_back(Event::Evaluate(facts[taught[pick(rng)]].question));
    }
  }
  return stream;
}

std::size_t FloorLog(std::size_t n, std::size_t base) {
  if (base < 2 || n == 0) throw std::invalid_argument("FloorLog domain");
  std::size_t k = 0;
  for (std::size_t p = base; p <= n; p *= base) {
    ++k;
    if (p > n / base) break;
  }
  return k;
}

namespace {

std::size_t Power(std::size_t base, std::size_t exp) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < exp; ++i) p *= base;
  return p;
}

}  // namespace

LowerBoundInstance LowerBoundInstance::Build(const LowerBoundParams& params,
                                             Universe& universe) {
  const auto [c, N, M, opt] = params;
  if (c == 0 || N == 0 || M == 0) {
    throw std::invalid_argument("lower bound needs c, N, M >= 1");
  }
  if (N < 2 * c) {
    throw std::invalid_argument("lower bound needs N >= 2c");
  }
  LowerBoundInstance inst;
  inst.params_ = params;
  inst.num_collections_ = FloorLog(N, 2 * c);
  inst.leaf_group_size_ = N / Power(2 * c, inst.num_collections_);

  inst.first_index_ = static_cast<std::uint32_t>(universe.num_questions());
  auto add = [&](const std::string& name) {
    const QuestionId q = universe.InternQuestion(name);
    if (q.index != inst.first_index_ + inst.facts_.size()) {
      throw std::invalid_argument("question " + name + " already interned");
    }
    inst.facts_.push_back({q, universe.InternAnswer("ans-" + name)});
  };
  for (std::size_t k = 1; k <= inst.num_collections_; ++k) {
    for (std::size_t j = 1; j <= 2 * c * M; ++j) {
      add("c" + std::to_string(k) + "." + std::to_string(j));
    }
  }
  for (std::size_t r = 1; r <= opt; ++r) {
    for (std::size_t i = 1; i <= c * M + 1; ++i) {
      add("r" + std::to_string(r) + "." + std::to_string(i));
    }
  }

  const std::uint64_t stride = inst.facts_.size() + 1;
  for (ExpertIndex e = 0; e < N; ++e) {
    auto values = std::make_shared<ValueFunction>();
    for (std::size_t g = 0; g < inst.facts_.size(); ++g) {
      const QuestionId q = inst.facts_[g].question;
      values->Set(q, inst.level(e, q) * stride + g + 1);
    }
    inst.values_.push_back(std::move(values));
  }
  return inst;
}

std::size_t LowerBoundInstance::num_placed_experts() const {
  return Power(num_blocks(), num_collections_) * leaf_group_size_;
}

std::span<const Fact> LowerBoundInstance::collection(std::size_t k) const {
  if (k == 0 || k > num_collections_) {
    throw std::out_of_range("collection index out of range");
  }
  const std::size_t size = 2 * params_.c * params_.M;
  return std::span<const Fact>(facts_).subspan((k - 1) * size, size);
}

std::span<const Fact> LowerBoundInstance::block(std::size_t k,
                                                std::size_t b) const {
  if (b == 0 || b > num_blocks()) throw std::out_of_range("block out of range");
  return collection(k).subspan((b - 1) * params_.M, params_.M);
}

std::span<const Fact> LowerBoundInstance::round(std::size_t r) const {
  if (r >= params_.opt) throw std::out_of_range("round index out of range");
  const std::size_t size = params_.c * params_.M + 1;
  const std::size_t offset = num_collections_ * 2 * params_.c * params_.M;
  return std::span<const Fact>(facts_).subspan(offset + r * size, size);
}

std::optional<std::vector<std::size_t>> LowerBoundInstance::leaf_path(
    ExpertIndex e) const {
  if (e >= params_.N) throw std::out_of_range("unknown expert index");
  if (e >= num_placed_experts()) return std::nullopt;
  std::size_t leaf = e / leaf_group_size_;
  std::vector<std::size_t> path(num_collections_);
  for (std::size_t k = num_collections_; k-- > 0;) {
    path[k] = leaf % num_blocks() + 1;
    leaf /= num_blocks();
  }
  return path;
}

std::size_t LowerBoundInstance::level(ExpertIndex e, QuestionId q) const {
  if (q.index < first_index_ || q.index - first_index_ >= facts_.size()) {
    throw std::out_of_range("question outside the lower-bound universe");
  }
  const std::size_t g = q.index - first_index_;
  const std::size_t collection_size = 2 * params_.c * params_.M;
  if (g >= num_collections_ * collection_size) return num_collections_ + 1;
  const std::size_t k = g / collection_size + 1;
  const std::size_t b = (g % collection_size) / params_.M + 1;
  const auto path = leaf_path(e);
  return path && (*path)[k - 1] == b ? k : 0;
}

ExpertSuite LowerBoundInstance::MakeExperts() const {
  ExpertSuite suite;
  for (ExpertIndex e = 0; e < values_.size(); ++e) {
    suite.Add("e" + std::to_string(e),
              std::make_unique<ValueBasedExpert>(params_.M, values_[e]));
  }
  return suite;
}

LowerBoundAdversary::LowerBoundAdversary(
    std::shared_ptr<const LowerBoundInstance> instance)
    : instance_(std::move(instance)) {
  if (!instance_) throw std::invalid_argument("missing lower-bound instance");
}

std::size_t LowerBoundAdversary::part_one_length() const {
  const auto& p = instance_->params();
  return instance_->num_collections() * (2 * p.c * p.M + p.M);
}

std::size_t LowerBoundAdversary::total_length() const {
  const auto& p = instance_->params();
  return part_one_length() + p.opt * (p.c * p.M + 2);
}

std::size_t LowerBoundAdversary::SelectBlock(std::size_t k,
                                             const FactMemory& memory) {
  const std::size_t half = instance_->params().M / 2;
  std::vector<std::size_t> stored(instance_->num_blocks() + 1, 0);
  for (std::size_t b = 1; b <= instance_->num_blocks(); ++b) {
    for (const Fact& f : instance_->block(k, b)) stored[b] += memory.Contains(f);
  }
  auto first_with_at_most = [&](std::size_t limit) -> std::optional<std::size_t> {
    for (std::size_t b = 1; b < stored.size(); ++b) {
      if (stored[b] <= limit) return b;
    }
    return std::nullopt;
  };
  std::optional<std::size_t> chosen;
  if (half >= 1) chosen = first_with_at_most(half - 1);
  if (!chosen) chosen = first_with_at_most(half);
  if (!chosen) {
    ++pigeonhole_failures_;
    chosen = static_cast<std::size_t>(
        std::min_element(stored.begin() + 1, stored.end()) - stored.begin());
  }
  stored_at_selection_.push_back(stored[*chosen]);
  return *chosen;
}

std::optional<Event> LowerBoundAdversary::Next(std::span<const Event>,
                                               const FactMemory& memory) {
  const auto& p = instance_->params();
  const std::size_t s = step_;
  if (s >= total_length()) return std::nullopt;
  ++step_;

  if (s < part_one_length()) {
    const std::size_t segment = 2 * p.c * p.M + p.M;
    const std::size_t k = s / segment + 1;
    const std::size_t pos = s % segment;
    if (pos < 2 * p.c * p.M) {
      return Event::Teach(instance_->collection(k)[pos]);
    }
    if (pos == 2 * p.c * p.M) chosen_.push_back(SelectBlock(k, memory));
    const Fact& f = instance_->block(k, chosen_[k - 1])[pos - 2 * p.c * p.M];
    return Event::Evaluate(f.question);
  }

  const std::size_t segment = p.c * p.M + 2;
  const std::size_t r = (s - part_one_length()) / segment;
  const std::size_t pos = (s - part_one_length()) % segment;
  const auto facts = instance_->round(r);
  if (pos < facts.size()) return Event::Teach(facts[pos]);
  for (const Fact& f : facts) {
    if (!memory.Contains(f)) return Event::Evaluate(f.question);
  }
  ++pigeonhole_failures_;
  return Event::Evaluate(facts.front().question);
}

std::vector<ExpertIndex> LowerBoundAdversary::survivors() const {
  std::vector<ExpertIndex> out;
  for (ExpertIndex e = 0; e < instance_->num_placed_experts(); ++e) {
    const auto path = instance_->leaf_path(e);
    bool match = true;
    for (std::size_t k = 0; k < chosen_.size(); ++k) {
      match = match && (*path)[k] == chosen_[k];
    }
    if (match) out.push_back(e);
  }
  return out;
}

}  // namespace oqa
