#include "oqa/core.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace oqa {

std::uint32_t SymbolTable::Intern(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(token);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> SymbolTable::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& SymbolTable::Name(std::uint32_t index) const {
  if (index >= names_.size()) {
    throw std::out_of_range("unknown symbol index " + std::to_string(index));
  }
  return names_[index];
}

std::optional<QuestionId> Universe::FindQuestion(std::string_view token) const {
  if (auto id = questions_.Find(token)) return QuestionId{*id};
  return std::nullopt;
}

void AnswerKey::Reveal(const Fact& fact) {
  const auto i = fact.question.index;
  if (i >= answers_.size()) answers_.resize(i + 1);
  if (answers_[i] && *answers_[i] != fact.answer) {
    throw std::invalid_argument("conflicting answers for question #" +
                                std::to_string(i));
  }
  answers_[i] = fact.answer;
}

std::optional<AnswerId> AnswerKey::Lookup(QuestionId q) const {
  if (q.index >= answers_.size()) return std::nullopt;
  return answers_[q.index];
}

bool FactMemory::Contains(const Fact& fact) const {
  auto it = index_.find(fact.question);
  return it != index_.end() && it->second == fact.answer;
}

bool FactMemory::Insert(const Fact& fact) {
  auto [it, inserted] = index_.emplace(fact.question, fact.answer);
  if (!inserted) {
    if (it->second != fact.answer) {
      throw std::invalid_argument("memory already holds a different answer");
    }
    return false;
  }
  facts_.push_back(fact);
  return true;
}

bool FactMemory::Erase(QuestionId q) {
  if (index_.erase(q) == 0) return false;
  std::erase_if(facts_, [q](const Fact& f) { return f.question == q; });
  return true;
}

std::size_t FactMemory::RemoveIf(const std::function<bool(const Fact&)>& pred) {
  std::vector<bool> drop(facts_.size());
  for (std::size_t i = 0; i < facts_.size(); ++i) drop[i] = pred(facts_[i]);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    if (drop[i]) {
      index_.erase(facts_[i].question);
    } else {
      facts_[kept++] = facts_[i];
    }
  }
  const std::size_t removed = facts_.size() - kept;
  facts_.resize(kept);
  return removed;
}

void FactMemory::Clear() {
  facts_.clear();
  index_.clear();
}

int StepCost(const FactMemory& memory, const Fact& asked) {
  return memory.Contains(asked) ? 0 : 1;
}

SequentialCheck ValidateSequential(const Stream& stream) {
  std::unordered_set<QuestionId> taught;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    if (e.is_teach()) {
      taught.insert(e.question);
    } else if (!taught.contains(e.question)) {
      return {false, i};
    }
  }
  return {};
}

GameLedger::GameLedger(std::size_t num_experts)
    : expert_mistakes_(num_experts, 0) {}

void GameLedger::RecordStep(const Event& event, int cost,
                            std::span<const std::uint8_t> expert_costs,
                            const MemoryCounts& memory) {
  if (cost != 0 && cost != 1) {
    throw std::invalid_argument("step cost must be 0 or 1, got " +
                                std::to_string(cost));
  }
  if (expert_costs.size() != expert_mistakes_.size()) {
    throw std::invalid_argument("expert cost vector has wrong length");
  }
  for (std::uint8_t c : expert_costs) {
    if (c > 1) throw std::invalid_argument("expert cost must be 0 or 1");
  }
  for (std::size_t e = 0; e < expert_costs.size(); ++e) {
    expert_mistakes_[e] += expert_costs[e];
  }
  learner_mistakes_ += static_cast<std::uint64_t>(cost);
  if (!expert_mistakes_.empty()) {
    opt_ = *std::min_element(expert_mistakes_.begin(), expert_mistakes_.end());
  }
  rows_.push_back({rows_.size() + 1, event.kind, event.question, cost,
                   learner_mistakes_, opt_, memory});
}

Stream ReadStream(std::istream& in, Universe& universe) {
  Stream stream;
  AnswerKey key;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string kind, qid, answer, extra;
    if (!(fields >> kind)) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("stream line " + std::to_string(line_no) +
                               ": " + why);
    };
    if (kind == "T") {
      if (!(fields >> qid >> answer) || (fields >> extra)) {
        fail("expected `T <qid> <answer>`");
      }
      const Fact fact{universe.InternQuestion(qid),
                      universe.InternAnswer(answer)};
      try {
        key.Reveal(fact);
      } catch (const std::invalid_argument&) {
        fail("question " + qid + " taught with conflicting answers");
      }
      stream.events.push_back(Event::Teach(fact));
    } else if (kind == "E") {
      if (!(fields >> qid) || (fields >> extra)) fail("expected `E <qid>`");
      stream.events.push_back(Event::Evaluate(universe.InternQuestion(qid)));
    } else {
      fail("unknown event kind `" + kind + "`");
    }
  }
  stream.sequential = ValidateSequential(stream).ok;
  return stream;
}

void WriteStream(std::ostream& out, const Stream& stream,
                 const Universe& universe) {
  for (const Event& e : stream.events) {
    if (e.is_teach()) {
      out << "T " << universe.QuestionName(e.question) << ' '
          << universe.AnswerName(*e.answer) << '\n';
    } else {
      out << "E " << universe.QuestionName(e.question) << '\n';
    }
  }
}

void WriteLedgerCsv(std::ostream& out, const GameLedger& ledger,
                    const Universe& universe) {
  out << kLedgerCsvHeader << '\n';
  for (const LedgerRow& r : ledger.rows()) {
    out << r.t << ',' << static_cast<char>(r.kind) << ','
        << universe.QuestionName(r.question) << ',' << r.cost << ','
        << r.learner_mistakes << ',' << r.opt << ',' << r.memory.facts << ','
        << r.memory.questions << ',' << r.memory.aux_state << ','
        << r.memory.active_experts << '\n';
  }
}

}  // namespace oqa
