#include "oqa/learners.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace oqa {
namespace {

bool LearnerMissed(const FactMemory& memory, const Event& event) {
  const auto fact = event.fact();
  return !fact || StepCost(memory, *fact) == 1;
}

// 2 * |{e in experts : holds(e)}| >= |experts|, stopping once decided.
template <class Pred>
bool AtLeastHalf(std::span<const ExpertIndex> experts, Pred holds) {
  const std::size_t need = (experts.size() + 1) / 2;
  std::size_t yes = 0;
  std::size_t left = experts.size();
  for (ExpertIndex e : experts) {
    if (yes >= need) return true;
    if (yes + left < need) return false;
    yes += holds(e) ? 1 : 0;
    --left;
  }
  return yes >= need;
}

std::vector<ExpertIndex> ActiveList(const std::vector<bool>& active) {
  std::vector<ExpertIndex> list;
  for (ExpertIndex e = 0; e < active.size(); ++e) {
    if (active[e]) list.push_back(e);
  }
  return list;
}

void RequireMemorySize(std::size_t m) {
  if (m == 0) throw std::invalid_argument("memory size M must be >= 1");
}

}  // namespace

std::vector<std::size_t> MajorityKept(
    std::span<const double> weights,
    const std::vector<std::vector<bool>>& support) {
  if (support.size() != weights.size()) {
    throw std::invalid_argument("support matrix needs one row per expert");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const std::size_t num_facts = support.empty() ? 0 : support.front().size();
  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < num_facts; ++f) {
    double supported = 0.0;
    for (std::size_t e = 0; e < weights.size(); ++e) {
      if (support[e][f]) supported += weights[e];
    }
    if (MajoritySupports(supported, total)) kept.push_back(f);
  }
  return kept;
}

namespace {

std::optional<QuestionId> MthLargestWith(
    const ValueFunction& values, std::span<const QuestionId> pool,
    std::size_t m, std::vector<std::pair<std::uint64_t, QuestionId>>& ranked) {
  if (m == 0 || pool.size() < m) return std::nullopt;
  ranked.clear();
  for (QuestionId q : pool) ranked.emplace_back(values(q), q);
  auto nth = ranked.begin() + static_cast<std::ptrdiff_t>(m - 1);
  std::nth_element(ranked.begin(), nth, ranked.end(), std::greater<>());
  return nth->second;
}

}  // namespace

std::optional<QuestionId> MthLargest(const ValueFunction& values,
                                     std::span<const QuestionId> pool,
                                     std::size_t m) {
  std::vector<std::pair<std::uint64_t, QuestionId>> ranked;
  ranked.reserve(pool.size());
  return MthLargestWith(values, pool, m, ranked);
}

// --- MwuLearner --------------------------------------------------------------

MwuLearner::MwuLearner(std::size_t memory_size, const ExpertOracle& oracle,
                       double gamma)
    : memory_size_(memory_size),
      oracle_(&oracle),
      gamma_(gamma),
      error_counts_(oracle.num_experts(), 0) {
  RequireMemorySize(memory_size);
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
}

void MwuLearner::UpdateWeights(const Event& event) {
  if (!event.is_evaluate()) return;
  for (ExpertIndex e = 0; e < error_counts_.size(); ++e) {
    if (!oracle_->Query(e, event.question)) ++error_counts_[e];
  }
}

std::vector<double> MwuLearner::NormalizedWeights() const {
  std::vector<double> w(error_counts_.size());
  if (w.empty()) return w;
  const std::uint64_t fewest =
      *std::min_element(error_counts_.begin(), error_counts_.end());
  const double base = std::log1p(-gamma_);
  for (std::size_t e = 0; e < w.size(); ++e) {
    w[e] = std::exp(base * static_cast<double>(error_counts_[e] - fewest));
  }
  return w;
}

void MwuLearner::UpdateMemory(const Event& event) {
  if (auto fact = event.fact()) memory_.Insert(*fact);
  const std::vector<double> w = NormalizedWeights();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  memory_.RemoveIf([&](const Fact& f) {
    double saved = 0.0;
    for (ExpertIndex e = 0; e < w.size(); ++e) {
      if (oracle_->Query(e, f.question)) saved += w[e];
    }
    return !MajoritySupports(saved, total);
  });
}

// --- LazyLearner -------------------------------------------------------------

LazyLearner::LazyLearner(std::size_t memory_size, const ExpertOracle& oracle)
    : memory_size_(memory_size),
      oracle_(&oracle),
      error_counts_(oracle.num_experts(), 0),
      active_(oracle.num_experts(), true),
      num_active_(oracle.num_experts()),
      active_list_(ActiveList(active_)) {
  RequireMemorySize(memory_size);
  if (num_active_ == 0) throw std::invalid_argument("no experts");
}

void LazyLearner::UpdateWeights(const Event& event) {
  last_mistake_ = MistakeKind::kNone;
  if (!event.is_evaluate()) return;
  const QuestionId q = event.question;

  std::size_t active_failed = 0;
  for (ExpertIndex e = 0; e < error_counts_.size(); ++e) {
    if (oracle_->Query(e, q)) continue;
    ++error_counts_[e];
    if (active_[e]) ++active_failed;
  }
  if (LearnerMissed(memory_, event)) {
    last_mistake_ = 2 * active_failed < num_active_ ? MistakeKind::kMinor
                                                    : MistakeKind::kMajor;
  }

  std::vector<ExpertIndex> bad;
  for (ExpertIndex e = 0; e < error_counts_.size(); ++e) {
    if (active_[e] && error_counts_[e] >= memory_size_) bad.push_back(e);
  }
  if (!bad.empty() && num_active_ <= 3 * bad.size()) {
    for (ExpertIndex e : bad) active_[e] = false;
    num_active_ -= bad.size();
    ++active_updates_;
  }
  if (num_active_ == 0) {
    std::fill(error_counts_.begin(), error_counts_.end(), 0);
    std::fill(active_.begin(), active_.end(), true);
    num_active_ = active_.size();
    ++hard_resets_;
  }
  active_list_ = ActiveList(active_);
}

void LazyLearner::UpdateMemory(const Event& event) {
  if (auto fact = event.fact()) memory_.Insert(*fact);
  memory_.RemoveIf([&](const Fact& f) {
    return !AtLeastHalf(active_list_, [&](ExpertIndex e) {
      return oracle_->Query(e, f.question);
    });
  });
}

// --- ValueLazyLearner --------------------------------------------------------

ValueLazyLearner::ValueLazyLearner(std::size_t memory_size, ValueTable values)
    : memory_size_(memory_size),
      values_(std::move(values)),
      error_counts_(values_.size(), 0),
      increments_(values_.size(), 0),
      thresholds_(values_.size()),
      pre_thresholds_(values_.size()),
      threshold_values_(values_.size(), kThresholdFloor),
      pre_threshold_values_(values_.size(), kThresholdFloor),
      active_(values_.size(), true),
      num_active_(values_.size()),
      active_list_(ActiveList(active_)) {
  RequireMemorySize(memory_size);
  if (values_.empty()) throw std::invalid_argument("no experts");
  for (const auto& v : values_) {
    if (!v) throw std::invalid_argument("missing value function");
  }
}

std::uint64_t ValueLazyLearner::threshold(ExpertIndex e) const {
  return threshold_values_.at(e);
}

std::uint64_t ValueLazyLearner::pre_threshold(ExpertIndex e) const {
  return pre_threshold_values_.at(e);
}

void ValueLazyLearner::RaiseTo(ExpertIndex e, std::optional<QuestionId>& slot,
                               std::uint64_t& value,
                               const std::optional<QuestionId>& candidate) const {
  const std::uint64_t v = ValueOf(e, candidate);
  if (v > value) {
    slot = candidate;
    value = v;
  }
}

void ValueLazyLearner::CountError(ExpertIndex e) {
  ++error_counts_[e];
  ++increments_[e];
}

void ValueLazyLearner::UpdateActiveSet() {
  std::vector<ExpertIndex> bad;
  for (ExpertIndex e = 0; e < active_.size(); ++e) {
    if (active_[e] && error_counts_[e] >= memory_size_) bad.push_back(e);
  }
  if (!bad.empty() && num_active_ <= 3 * bad.size()) {
    for (ExpertIndex e : bad) active_[e] = false;
    num_active_ -= bad.size();
    ++active_updates_;
  }
  if (num_active_ == 0) {
    // Thresholds survive the reset; they remain lower bounds.
    std::fill(error_counts_.begin(), error_counts_.end(), 0);
    std::fill(active_.begin(), active_.end(), true);
    num_active_ = active_.size();
    ++hard_resets_;
  }
  active_list_ = ActiveList(active_);
}

void ValueLazyLearner::UpdateThreshold() {
  std::vector<QuestionId> pool;
  pool.reserve(memory_.size() + minor_.size());
  for (const Fact& f : memory_.facts()) pool.push_back(f.question);
  for (QuestionId q : minor_) {
    if (!memory_.ContainsQuestion(q)) pool.push_back(q);
  }
  if (pool.size() < memory_size_) return;
  for (ExpertIndex e = 0; e < active_.size(); ++e) {
    if (!active_[e]) continue;
    RaiseTo(e, thresholds_[e], threshold_values_[e],
            MthLargestWith(*values_[e], pool, memory_size_, scratch_));
  }
}

void ValueLazyLearner::UpdatePreThreshold(QuestionId q) {
  if (std::find(minor_.begin(), minor_.end(), q) == minor_.end()) {
    minor_.push_back(q);
  }
  for (ExpertIndex e = 0; e < active_.size(); ++e) {
    if (!active_[e]) continue;
    RaiseTo(e, pre_thresholds_[e], pre_threshold_values_[e],
            MthLargestWith(*values_[e], minor_, memory_size_, scratch_));
  }
  // Iterate over a snapshot; removals take effect on the live set.
  const std::vector<QuestionId> parked = minor_;
  std::vector<ExpertIndex> missing;
  for (QuestionId p : parked) {
    missing.clear();
    for (ExpertIndex e = 0; e < active_.size(); ++e) {
      if (active_[e] && Value(e, p) < pre_threshold_values_[e]) {
        missing.push_back(e);
      }
    }
    if (2 * missing.size() < num_active_) continue;
    for (ExpertIndex e : missing) CountError(e);
    std::erase(minor_, p);
  }
}

void ValueLazyLearner::UpdateWeights(const Event& event) {
  const QuestionId q = event.question;
  if (event.is_evaluate() && LearnerMissed(memory_, event)) {
    std::vector<ExpertIndex> failed;
    for (ExpertIndex e = 0; e < active_.size(); ++e) {
      if (active_[e] && Value(e, q) < threshold_values_[e]) failed.push_back(e);
    }
    if (2 * failed.size() < num_active_) {
      UpdatePreThreshold(q);
    } else {
      for (ExpertIndex e : failed) CountError(e);
    }
    UpdateActiveSet();
  }

  // The step fact joins memory before the threshold update so that at most
  // M stored facts clear each T_e.
  if (auto fact = event.fact()) memory_.Insert(*fact);
  UpdateThreshold();
  memory_.RemoveIf([&](const Fact& f) {
    return !AtLeastHalf(active_list_, [&](ExpertIndex e) {
      return Value(e, f.question) >= threshold_values_[e];
    });
  });
}

// --- FullSimLearner ----------------------------------------------------------

void FullSimLearner::UpdateMemory(const Event&) {
  memory_.RemoveIf([&](const Fact& f) {
    for (ExpertIndex e = 0; e < experts_->size(); ++e) {
      if (experts_->at(e).Knows(f.question)) return false;
    }
    return true;
  });
  for (ExpertIndex e = 0; e < experts_->size(); ++e) {
    for (const Fact& f : experts_->at(e).Memory()) memory_.Insert(f);
  }
}

std::size_t FullSimLearner::fact_budget() const {
  std::size_t total = 0;
  for (ExpertIndex e = 0; e < experts_->size(); ++e) {
    total += experts_->at(e).capacity();
  }
  return total;
}

// --- RandomEvictionLearner ---------------------------------------------------

RandomEvictionLearner::RandomEvictionLearner(std::size_t budget,
                                             std::uint64_t seed)
    : budget_(budget), rng_(seed) {
  if (budget == 0) throw std::invalid_argument("budget must be >= 1");
}

void RandomEvictionLearner::UpdateMemory(const Event& event) {
  const auto fact = event.fact();
  if (!fact || memory_.Contains(*fact)) return;
  if (memory_.size() >= budget_) {
    std::uniform_int_distribution<std::size_t> pick(0, memory_.size() - 1);
    memory_.Erase(memory_.facts()[pick(rng_)].question);
  }
  memory_.Insert(*fact);
}

}  // namespace oqa
