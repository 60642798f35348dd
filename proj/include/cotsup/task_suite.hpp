#pragma once

// Seeded instance generation for the ten tasks, instance-file IO, the
// candidate-answer space of each instance, and the documented worked
// examples.

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "cotsup/core.hpp"
#include "cotsup/instance.hpp"
#include "cotsup/oracle.hpp"

namespace cotsup {

struct LengthRange {
  int lo = 10;
  int hi = 20;
};

inline constexpr LengthRange kDefaultLengths{10, 20};
inline constexpr int kMaxExprDepth = 3;

namespace detail {

template <std::size_t N>
std::string pick(Rng& rng, const std::array<std::string_view, N>& alphabet) {
  return std::string(alphabet[uniform_below(rng, N)]);
}

inline std::string random_operand(Rng& rng, int digits) {
  std::string s;
  s.push_back(static_cast<char>('0' + uniform_int(rng, 1, 9)));
  for (int i = 1; i < digits; ++i) s.push_back(static_cast<char>('0' + uniform_int(rng, 0, 9)));
  return s;
}

inline constexpr int kMaxInitialStack = 4;

}  // namespace detail

inline Payload generate_payload(TaskId id, int n, Rng& rng) {
  switch (id) {
    case TaskId::ModArithSimple: {
      ModArithSimplePayload p;
      for (int i = 0; i < n; ++i) {
        p.operands.push_back(uniform_int(rng, 0, 9));
        if (i > 0) p.ops.push_back(uniform_below(rng, 2) == 0 ? '+' : '-');
      }
      return p;
    }
    case TaskId::ParityCheck: {
      ItemListPayload p;
      for (int i = 0; i < n; ++i) p.items.push_back(detail::pick(rng, kParityWords));
      return p;
    }
    case TaskId::CycleNavigation: {
      ItemListPayload p;
      for (int i = 0; i < n; ++i) p.items.push_back(detail::pick(rng, kMoves));
      return p;
    }
    case TaskId::StackManipulation: {
      StackPayload p;
      const int initial = uniform_int(rng, 0, detail::kMaxInitialStack);
      for (int i = 0; i < initial; ++i) p.initial.push_back(detail::pick(rng, kFruits));
      std::vector<std::string> stack = p.initial;
      for (int i = 0; i < n; ++i) {
        if (!stack.empty() && uniform_below(rng, 2) == 0) {
          p.ops.push_back({StackOp::Kind::Pop, stack.back()});
          stack.pop_back();
        } else {
          std::string item = detail::pick(rng, kFruits);
          p.ops.push_back({StackOp::Kind::Push, item});
          stack.push_back(std::move(item));
        }
      }
      return p;
    }
    case TaskId::ReverseList: {
      ItemListPayload p;
      for (int i = 0; i < n; ++i) p.items.push_back(detail::pick(rng, kVegetables));
      return p;
    }
    case TaskId::ModArithComplex:
      return ExpressionPayload{random_expr(rng, static_cast<std::size_t>(n), kMaxExprDepth)};
    case TaskId::OddsFirst: {
      ItemListPayload p;
      for (int i = 0; i < n; ++i) p.items.push_back(detail::pick(rng, kAnimals));
      return p;
    }
    case TaskId::Addition:
    case TaskId::Multiplication:
      return OperandPairPayload{detail::random_operand(rng, n), detail::random_operand(rng, n)};
    case TaskId::Sorting: {
      IntListPayload p;
      for (int i = 0; i < n; ++i) p.values.push_back(uniform_int(rng, 0, 99));
      return p;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown task");
}

inline TaskInstance generate_instance(TaskId id, int length_n, std::uint64_t seed) {
  if (length_n < min_length(id)) {
    throw Error(ErrorCode::UnsupportedLength, std::string(to_string(id)) + " needs length_n >= " +
                                                  std::to_string(min_length(id)) + ", got " + std::to_string(length_n));
  }
  Rng rng(derive_seed(derive_seed(seed, to_string(id)), static_cast<std::uint64_t>(length_n)));
  TaskInstance inst;
  inst.task_id = id;
  inst.seed = seed;
  inst.length_n = length_n;
  inst.payload = generate_payload(id, length_n, rng);
  inst.canonical_answer = oracle_solve(inst).answer;
  return inst;
}

// Length drawn uniformly from `range`, itself a function of the seed.
inline int draw_length(std::uint64_t seed, LengthRange range) {
  if (range.lo < 1 || range.hi < range.lo) throw Error(ErrorCode::ConfigError, "bad length range");
  Rng rng(derive_seed(seed, "length"));
  return uniform_int(rng, range.lo, range.hi);
}

inline TaskInstance generate_instance(TaskId id, std::uint64_t seed, LengthRange range = kDefaultLengths) {
  const int n = std::max(draw_length(seed, range), min_length(id));
  return generate_instance(id, n, seed);
}

// Per-instance seed for the index-th instance of a task under a master seed.
// Keyed by task name so adding tasks never changes existing instances.
inline std::uint64_t instance_seed(std::uint64_t master_seed, TaskId id, std::uint64_t index) {
  return derive_seed(derive_seed(master_seed, to_string(id)), index);
}

// ---------------------------------------------------------------------------
// Validation and instance files

// Checks the payload against the task's length law and alphabet.
inline void validate_instance(const TaskInstance& inst) {
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::MalformedPayload, std::string(to_string(inst.task_id)) + ": " + why);
  };
  const auto n = static_cast<std::size_t>(inst.length_n);
  if (inst.length_n < min_length(inst.task_id)) bad("length_n below task minimum");
  switch (inst.task_id) {
    case TaskId::ModArithSimple: {
      const auto& p = payload_as<ModArithSimplePayload>(inst);
      if (p.operands.size() != n) bad("operand count differs from length_n");
      for (int v : p.operands) {
        if (v < 0 || v > 9) bad("operand out of range");
      }
      detail::check_simple(p);
      break;
    }
    case TaskId::ParityCheck:
    case TaskId::CycleNavigation:
    case TaskId::ReverseList:
    case TaskId::OddsFirst: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      if (items.size() != n) bad("item count differs from length_n");
      for (const auto& it : items) {
        const bool ok = inst.task_id == TaskId::ParityCheck       ? in_alphabet(kParityWords, it)
                        : inst.task_id == TaskId::CycleNavigation ? in_alphabet(kMoves, it)
                        : inst.task_id == TaskId::ReverseList     ? in_alphabet(kVegetables, it)
                                                                  : in_alphabet(kAnimals, it);
        if (!ok) bad("item '" + it + "' outside the task alphabet");
      }
      break;
    }
    case TaskId::StackManipulation: {
      const auto& p = payload_as<StackPayload>(inst);
      if (p.ops.size() != n) bad("operation count differs from length_n");
      for (const auto& it : p.initial) {
        if (!in_alphabet(kFruits, it)) bad("item '" + it + "' outside the fruit registry");
      }
      for (const auto& op : p.ops) {
        if (op.kind == StackOp::Kind::Push && !in_alphabet(kFruits, op.value)) bad("pushed item outside registry");
      }
      break;
    }
    case TaskId::ModArithComplex: {
      const auto& e = payload_as<ExpressionPayload>(inst).expr;
      if (leaf_count(e) != n) bad("operand count differs from length_n");
      if (nesting_depth(e) > kMaxExprDepth) bad("nesting deeper than " + std::to_string(kMaxExprDepth));
      break;
    }
    case TaskId::Addition:
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      for (const auto* s : {&p.lhs, &p.rhs}) {
        if (!decimal::is_digits(*s) || s->size() != n) bad("operand must have length_n digits");
        if (s->size() > 1 && (*s)[0] == '0') bad("operand has a leading zero");
      }
      break;
    }
    case TaskId::Sorting: {
      const auto& v = payload_as<IntListPayload>(inst).values;
      if (v.size() != n) bad("value count differs from length_n");
      for (int x : v) {
        if (x < 0 || x > 99) bad("value out of range 0-99");
      }
      break;
    }
  }
  (void)oracle_solve(inst);  // structural errors such as pop on empty stack
}

// Parses, validates and checks the stored canonical answer against the oracle.
inline TaskInstance load_instance(const nlohmann::ordered_json& j) {
  TaskInstance inst = instance_from_json(j);
  validate_instance(inst);
  const std::string solved = oracle_solve(inst).answer;
  if (!inst.canonical_answer.empty() && inst.canonical_answer != solved) {
    throw Error(ErrorCode::MalformedPayload, "stored canonical_answer '" + inst.canonical_answer +
                                                 "' disagrees with oracle '" + solved + "'");
  }
  inst.canonical_answer = solved;
  return inst;
}

inline std::vector<TaskInstance> read_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<TaskInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(load_instance(nlohmann::ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedPayload, e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candidate answers: the enumerable set a blind guesser draws from.
//   booleans; residues 0-4; cycle states 1-5; distinct arrangements of the
//   instance's items (list tasks); stacks of the correct height over the
//   instance's fruit vocabulary; digit strings of the correct length.

using boost::multiprecision::cpp_int;

namespace detail {

inline cpp_int factorial(std::size_t n) {
  cpp_int f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

template <typename T>
cpp_int distinct_arrangements(const std::vector<T>& items) {
  std::map<T, std::size_t> counts;
  for (const auto& it : items) ++counts[it];
  cpp_int total = factorial(items.size());
  for (const auto& [_, c] : counts) total /= factorial(c);
  return total;
}

inline std::vector<std::string> stack_vocabulary(const StackPayload& p) {
  std::vector<std::string> vocab = p.initial;
  for (const auto& op : p.ops) {
    if (op.kind == StackOp::Kind::Push) vocab.push_back(op.value);
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

inline std::size_t final_stack_height(const StackPayload& p) {
  std::size_t h = p.initial.size();
  for (const auto& op : p.ops) h = op.kind == StackOp::Kind::Push ? h + 1 : h - 1;
  return h;
}

inline std::vector<std::string> list_items_for_answer(const TaskInstance& inst) {
  if (inst.task_id == TaskId::Sorting) {
    std::vector<std::string> out;
    for (int v : payload_as<IntListPayload>(inst).values) out.push_back(std::to_string(v));
    return out;
  }
  return payload_as<ItemListPayload>(inst).items;
}

}  // namespace detail

inline cpp_int candidate_answer_count(const TaskInstance& inst) {
  switch (inst.task_id) {
    case TaskId::ParityCheck: return 2;
    case TaskId::ModArithSimple:
    case TaskId::ModArithComplex: return kModulus;
    case TaskId::CycleNavigation: return kCycleStates;
    case TaskId::ReverseList:
    case TaskId::OddsFirst: return detail::distinct_arrangements(payload_as<ItemListPayload>(inst).items);
    case TaskId::Sorting: return detail::distinct_arrangements(payload_as<IntListPayload>(inst).values);
    case TaskId::StackManipulation: {
      const auto& p = payload_as<StackPayload>(inst);
      cpp_int v = detail::stack_vocabulary(p).size();
      cpp_int total = 1;
      for (std::size_t i = 0; i < detail::final_stack_height(p); ++i) total *= v;
      return total;
    }
    case TaskId::Addition:
    case TaskId::Multiplication: {
      const std::size_t len = oracle_solve(inst).answer.size();
      if (len == 1) return 10;
      cpp_int total = 9;
      for (std::size_t i = 1; i < len; ++i) total *= 10;
      return total;
    }
  }
  return 1;
}

inline std::string sample_candidate_answer(const TaskInstance& inst, Rng& rng) {
  const TaskId id = inst.task_id;
  switch (id) {
    case TaskId::ParityCheck: return canonicalize_answer(id, uniform_below(rng, 2) == 0);
    case TaskId::ModArithSimple:
    case TaskId::ModArithComplex:
      return canonicalize_answer(id, static_cast<std::int64_t>(uniform_below(rng, kModulus)));
    case TaskId::CycleNavigation: return canonicalize_answer(id, CycleState{uniform_int(rng, 1, kCycleStates)});
    case TaskId::ReverseList:
    case TaskId::OddsFirst:
    case TaskId::Sorting: {
      std::vector<std::string> items = detail::list_items_for_answer(inst);
      for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_below(rng, i)]);
      return format_list(items);
    }
    case TaskId::StackManipulation: {
      const auto& p = payload_as<StackPayload>(inst);
      const auto vocab = detail::stack_vocabulary(p);
      std::vector<std::string> stack;
      for (std::size_t i = 0; i < detail::final_stack_height(p); ++i) {
        stack.push_back(vocab[uniform_below(rng, vocab.size())]);
      }
      return format_list(stack);
    }
    case TaskId::Addition:
    case TaskId::Multiplication: {
      const std::size_t len = oracle_solve(inst).answer.size();
      std::string s;
      s.push_back(static_cast<char>('0' + (len == 1 ? uniform_int(rng, 0, 9) : uniform_int(rng, 1, 9))));
      for (std::size_t i = 1; i < len; ++i) s.push_back(static_cast<char>('0' + uniform_int(rng, 0, 9)));
      return s;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Worked examples from the task descriptions, with the answers printed there.

struct WorkedExample {
  TaskInstance instance;
  std::string published_answer;  // as printed, before canonicalization
};

namespace detail {

inline TaskInstance manual_instance(TaskId id, int n, Payload payload) {
  TaskInstance inst;
  inst.task_id = id;
  inst.seed = 0;
  inst.length_n = n;
  inst.payload = std::move(payload);
  inst.canonical_answer = oracle_solve(inst).answer;
  return inst;
}

}  // namespace detail

inline std::vector<WorkedExample> worked_examples() {
  using detail::manual_instance;
  return {
      {manual_instance(TaskId::ModArithSimple, 3, ModArithSimplePayload{{4, 2, 3}, {'+', '-'}}), "3"},
      {manual_instance(TaskId::ParityCheck, 3, ItemListPayload{{"banana", "apple", "banana"}}), "True"},
      {manual_instance(TaskId::CycleNavigation, 3, ItemListPayload{{"forward", "stay", "backward"}}), "state 1"},
      {manual_instance(TaskId::ReverseList, 3, ItemListPayload{{"carrot", "potato", "onion"}}),
       "(\"onion\", \"potato\", \"carrot\")"},
      {manual_instance(TaskId::OddsFirst, 4, ItemListPayload{{"dog", "cat", "elephant", "tiger"}}),
       "(\"dog\", \"elephant\", \"cat\", \"tiger\")"},
      {manual_instance(TaskId::Addition, 6, OperandPairPayload{"123456", "987654"}), "1,111,110"},
      {manual_instance(TaskId::Multiplication, 3, OperandPairPayload{"345", "567"}), "195,615"},
      {manual_instance(TaskId::Sorting, 4, IntListPayload{{8, 3, 5, 1}}), "(1, 3, 5, 8)"},
  };
}

// Published examples whose printed result disagrees with the task rules.
inline std::vector<Erratum> known_errata() {
  using detail::manual_instance;
  const auto expr = manual_instance(TaskId::ModArithComplex, 4, ExpressionPayload{parse_expr("((2 + 4) * (3 - 1))")});
  const auto stack = manual_instance(
      TaskId::StackManipulation, 2,
      StackPayload{{"apple", "banana", "grape"}, {{StackOp::Kind::Pop, "banana"}, {StackOp::Kind::Push, "orange"}}});
  return {
      {TaskId::ModArithComplex, render_expr(payload_as<ExpressionPayload>(expr).expr) + " mod 5", "0",
       expr.canonical_answer, "(2 + 4) * (3 - 1) = 12 and 12 mod 5 = 2; the printed 0 is an erratum."},
      {TaskId::StackManipulation, "(pop \"banana\", push \"orange\") on (\"apple\", \"banana\", \"grape\")",
       "(apple, orange, grape)", stack.canonical_answer,
       "No uniform stack discipline yields the printed result; pop removes the top item (\"grape\") and push "
       "appends at the top."},
  };
}

inline std::string erratum_note(const Erratum& e) {
  return "erratum [" + std::string(to_string(e.task_id)) + "] " + e.input + ": published " + e.published +
         ", computed " + e.computed + ". " + e.note;
}

}  // namespace cotsup
