// Shared vocabulary for the online question-answering game: questions,
// facts, teach/evaluate streams, learner memory and the per-step ledger.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace oqa {

// Dense handle for an element of the question universe. Tokens are interned
// by a Universe; the handle itself carries no meaning beyond identity.
struct QuestionId {
  std::uint32_t index = 0;
  friend auto operator<=>(const QuestionId&, const QuestionId&) = default;
};

// Opaque answer payload. Only identity matters.
struct AnswerId {
  std::uint32_t index = 0;
  friend auto operator<=>(const AnswerId&, const AnswerId&) = default;
};

}  // namespace oqa

template <>
struct std::hash<oqa::QuestionId> {
  std::size_t operator()(oqa::QuestionId q) const noexcept {
    return std::hash<std::uint32_t>{}(q.index);
  }
};

namespace oqa {

struct Fact {
  QuestionId question;
  AnswerId answer;
  friend bool operator==(const Fact&, const Fact&) = default;
};

enum class EventKind : char { kTeach = 'T', kEvaluate = 'E' };

// One adversary move. Teach events always carry the answer. Inside the
// harness, Evaluate events get their answer filled in from the answer key
// when the question has been revealed before.
struct Event {
  EventKind kind = EventKind::kTeach;
  QuestionId question;
  std::optional<AnswerId> answer;

  static Event Teach(const Fact& fact) {
    return {EventKind::kTeach, fact.question, fact.answer};
  }
  static Event Evaluate(QuestionId q) { return {EventKind::kEvaluate, q, {}}; }

  bool is_teach() const { return kind == EventKind::kTeach; }
  bool is_evaluate() const { return kind == EventKind::kEvaluate; }
  std::optional<Fact> fact() const {
    if (!answer) return std::nullopt;
    return Fact{question, *answer};
  }
  friend bool operator==(const Event&, const Event&) = default;
};

struct Stream {
  std::vector<Event> events;
  // Claim that every Evaluate is preceded by a Teach of the same question.
  bool sequential = false;
};

// Bidirectional token <-> index map.
class SymbolTable {
 public:
  std::uint32_t Intern(std::string_view token);
  std::optional<std::uint32_t> Find(std::string_view token) const;
  const std::string& Name(std::uint32_t index) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// The instance's declared question set plus the answer tokens seen so far.
class Universe {
 public:
  QuestionId InternQuestion(std::string_view token) {
    return {questions_.Intern(token)};
  }
  AnswerId InternAnswer(std::string_view token) {
    return {answers_.Intern(token)};
  }
  std::optional<QuestionId> FindQuestion(std::string_view token) const;
  const std::string& QuestionName(QuestionId q) const {
    return questions_.Name(q.index);
  }
  const std::string& AnswerName(AnswerId a) const {
    return answers_.Name(a.index);
  }
  std::size_t num_questions() const { return questions_.size(); }

 private:
  SymbolTable questions_;
  SymbolTable answers_;
};

// The ground-truth map from questions to answers, learned as facts are
// revealed. A second, different answer for the same question is an error.
class AnswerKey {
 public:
  void Reveal(const Fact& fact);
  std::optional<AnswerId> Lookup(QuestionId q) const;
  bool Revealed(QuestionId q) const { return Lookup(q).has_value(); }

 private:
  std::vector<std::optional<AnswerId>> answers_;
};

// Insertion-ordered set of facts with O(1) membership.
class FactMemory {
 public:
  bool Contains(const Fact& fact) const;
  bool ContainsQuestion(QuestionId q) const { return index_.contains(q); }

  // Returns false if the fact was already stored. Throws std::invalid_argument
  // if the question is stored with a different answer.
  bool Insert(const Fact& fact);
  bool Erase(QuestionId q);

  // Removes every fact for which `pred` holds. The predicate is evaluated on
  // each fact of the memory as it was before the call.
  std::size_t RemoveIf(const std::function<bool(const Fact&)>& pred);

  void Clear();
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }
  std::span<const Fact> facts() const { return facts_; }

 private:
  std::vector<Fact> facts_;
  std::unordered_map<QuestionId, AnswerId> index_;
};

// 1 iff `asked` is absent from `memory`.
int StepCost(const FactMemory& memory, const Fact& asked);

struct SequentialCheck {
  bool ok = true;
  std::optional<std::size_t> first_violation;
};

// Single forward scan: every Evaluate must follow a Teach of its question.
SequentialCheck ValidateSequential(const Stream& stream);

struct MemoryCounts {
  std::size_t facts = 0;
  std::size_t questions = 0;
  std::size_t aux_state = 0;
  std::size_t active_experts = 0;
};

struct LedgerRow {
  std::uint64_t t = 0;
  EventKind kind = EventKind::kTeach;
  QuestionId question;
  int cost = 0;
  std::uint64_t learner_mistakes = 0;
  std::uint64_t opt = 0;
  MemoryCounts memory;
};

// Per-step costs and running aggregates of one game.
class GameLedger {
 public:
  explicit GameLedger(std::size_t num_experts = 0);

  // Appends step t = size() + 1. Costs must be 0 or 1 (std::invalid_argument
  // otherwise) and expert_costs must have one entry per expert.
  void RecordStep(const Event& event, int cost,
                  std::span<const std::uint8_t> expert_costs,
                  const MemoryCounts& memory);

  std::span<const LedgerRow> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t num_experts() const { return expert_mistakes_.size(); }
  std::uint64_t learner_mistakes() const { return learner_mistakes_; }
  std::uint64_t opt() const { return opt_; }
  std::span<const std::uint64_t> expert_mistakes() const {
    return expert_mistakes_;
  }

 private:
  std::vector<LedgerRow> rows_;
  std::vector<std::uint64_t> expert_mistakes_;
  std::uint64_t learner_mistakes_ = 0;
  std::uint64_t opt_ = 0;
};

// Stream text format: one event per line, `T <qid> <answer>` or `E <qid>`.
// Blank lines are skipped. Throws std::runtime_error with the line number on
// malformed input or on a Teach that contradicts an earlier answer.
Stream ReadStream(std::istream& in, Universe& universe);
void WriteStream(std::ostream& out, const Stream& stream,
                 const Universe& universe);

inline constexpr std::string_view kLedgerCsvHeader =
    "t,kind,qid,cost,L,opt,fact_mem,question_mem,aux_state,active_experts";

void WriteLedgerCsv(std::ostream& out, const GameLedger& ledger,
                    const Universe& universe);

}  // namespace oqa
