#pragma once

// Task instances: payload types, alphabets, canonical answer text, prompt
// rendering and the JSON Lines instance schema.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotsup/core.hpp"
#include "cotsup/decimal.hpp"
#include "cotsup/expr.hpp"

namespace cotsup {

// ---------------------------------------------------------------------------
// Alphabets

inline constexpr std::array<std::string_view, 2> kParityWords = {"apple", "banana"};
inline constexpr std::string_view kParityTarget = "banana";
inline constexpr std::array<std::string_view, 3> kMoves = {"forward", "backward", "stay"};
inline constexpr int kCycleStates = 5;
inline constexpr int kModulus = 5;

inline constexpr std::array<std::string_view, 16> kFruits = {
    "apple", "banana", "grape", "orange", "pear",  "peach", "plum",   "cherry",
    "lemon", "mango",  "kiwi",  "melon",  "lime",  "fig",   "papaya", "apricot",
};

inline constexpr std::array<std::string_view, 16> kVegetables = {
    "carrot", "potato", "onion", "cabbage", "pepper", "tomato", "celery", "spinach",
    "lettuce", "garlic", "pea",  "corn",    "bean",   "radish", "turnip", "leek",
};

inline constexpr std::array<std::string_view, 16> kAnimals = {
    "dog",   "cat",    "elephant", "tiger", "lion", "horse", "rabbit", "mouse",
    "zebra", "monkey", "sheep",    "goat",  "wolf", "bear",  "fox",    "deer",
};

template <std::size_t N>
bool in_alphabet(const std::array<std::string_view, N>& alphabet, std::string_view word) {
  return std::find(alphabet.begin(), alphabet.end(), word) != alphabet.end();
}

// ---------------------------------------------------------------------------
// Payloads

struct ModArithSimplePayload {
  std::vector<int> operands;
  std::vector<char> ops;  // '+' or '-', size() == operands.size() - 1
  friend bool operator==(const ModArithSimplePayload&, const ModArithSimplePayload&) = default;
};

// Parity words, cycle moves, reverse-list vegetables, odds-first animals.
struct ItemListPayload {
  std::vector<std::string> items;
  friend bool operator==(const ItemListPayload&, const ItemListPayload&) = default;
};

struct StackOp {
  enum class Kind { Push, Pop };
  Kind kind = Kind::Push;
  std::string value;  // pushed item, or the item a pop removes (display only)
  friend bool operator==(const StackOp&, const StackOp&) = default;
};

struct StackPayload {
  std::vector<std::string> initial;  // bottom -> top
  std::vector<StackOp> ops;
  friend bool operator==(const StackPayload&, const StackPayload&) = default;
};

struct ExpressionPayload {
  Expr expr;
  friend bool operator==(const ExpressionPayload&, const ExpressionPayload&) = default;
};

struct OperandPairPayload {
  std::string lhs;
  std::string rhs;
  friend bool operator==(const OperandPairPayload&, const OperandPairPayload&) = default;
};

struct IntListPayload {
  std::vector<int> values;
  friend bool operator==(const IntListPayload&, const IntListPayload&) = default;
};

using Payload = std::variant<ModArithSimplePayload, ItemListPayload, StackPayload, ExpressionPayload,
                             OperandPairPayload, IntListPayload>;

struct TaskInstance {
  TaskId task_id = TaskId::ParityCheck;
  std::uint64_t seed = 0;
  int length_n = 1;
  Payload payload;
  std::string canonical_answer;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

template <typename T>
const T& payload_as(const TaskInstance& inst) {
  if (const T* p = std::get_if<T>(&inst.payload)) return *p;
  throw Error(ErrorCode::MalformedPayload,
              "payload shape does not match task " + std::string(to_string(inst.task_id)));
}

// Minimum length_n accepted by each task.
inline int min_length(TaskId id) { return id == TaskId::ModArithComplex ? 2 : 1; }

// ---------------------------------------------------------------------------
// Canonical answer text

struct CycleState {
  int index = 1;
};

struct DecimalDigits {
  std::string digits;
};

using AnswerValue = std::variant<bool, std::int64_t, DecimalDigits, CycleState, std::vector<std::string>,
                                 std::vector<std::int64_t>, std::string>;

inline std::string format_list(const std::vector<std::string>& items) {
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  out += ")";
  return out;
}

inline std::string format_list(const std::vector<std::int64_t>& values) {
  std::vector<std::string> items;
  items.reserve(values.size());
  for (auto v : values) items.push_back(std::to_string(v));
  return format_list(items);
}

inline std::string format_list(const std::vector<int>& values) {
  return format_list(std::vector<std::int64_t>(values.begin(), values.end()));
}

namespace detail {

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Strips wrapping markup a model might add around an answer: surrounding
// quotes/backticks/asterisks and one trailing period.
inline std::string strip_decoration(std::string s) {
  s = trim(s);
  bool changed = true;
  while (changed && s.size() >= 2) {
    changed = false;
    if (s.back() == '.') {
      s = trim(s.substr(0, s.size() - 1));
      changed = true;
      continue;
    }
    if (s.size() >= 4 && s.rfind("**", 0) == 0 && s.compare(s.size() - 2, 2, "**") == 0) {
      s = trim(s.substr(2, s.size() - 4));
      changed = true;
      continue;
    }
    const char f = s.front();
    const char b = s.back();
    if ((f == '"' || f == '\'' || f == '`') && b == f) {
      s = trim(s.substr(1, s.size() - 2));
      changed = true;
    }
  }
  if (!s.empty() && s.back() == '.') s = trim(s.substr(0, s.size() - 1));
  return s;
}

inline std::vector<std::string> split_list_items(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '(' && s.back() == ')') || (s.front() == '[' && s.back() == ']'))) {
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> items;
  if (trim(s).empty()) return items;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) items.push_back(strip_decoration(cur));
  return items;
}

inline bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  return i < s.size() && std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string canonical_integer_text(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '_'; }), s.end());
  s = trim(s);
  if (!is_integer_text(s)) return s;
  bool negative = s[0] == '-';
  if (s[0] == '-' || s[0] == '+') s = s.substr(1);
  s = decimal::strip_leading_zeros(s);
  if (negative && s != "0") s = "-" + s;
  return s;
}

}  // namespace detail

enum class AnswerShape { Boolean, Residue, Cycle, WordList, IntList, Integer };

inline AnswerShape answer_shape(TaskId id) {
  switch (id) {
    case TaskId::ParityCheck: return AnswerShape::Boolean;
    case TaskId::ModArithSimple:
    case TaskId::ModArithComplex: return AnswerShape::Residue;
    case TaskId::CycleNavigation: return AnswerShape::Cycle;
    case TaskId::StackManipulation:
    case TaskId::ReverseList:
    case TaskId::OddsFirst: return AnswerShape::WordList;
    case TaskId::Sorting: return AnswerShape::IntList;
    case TaskId::Addition:
    case TaskId::Multiplication: return AnswerShape::Integer;
  }
  return AnswerShape::Integer;
}

// Normalizes free answer text into the task's canonical form: booleans are
// case-folded, thousands separators and wrapping quotes are stripped, list
// spacing becomes "(a, b, c)". Text that cannot be normalized is returned
// trimmed, so it simply fails to compare equal.
inline std::string normalize_answer_text(TaskId id, std::string_view raw) {
  std::string s = detail::strip_decoration(std::string(raw));
  switch (answer_shape(id)) {
    case AnswerShape::Boolean: {
      const std::string l = detail::lower(s);
      if (l == "true") return "True";
      if (l == "false") return "False";
      return s;
    }
    case AnswerShape::Residue:
    case AnswerShape::Integer:
      return detail::canonical_integer_text(s);
    case AnswerShape::Cycle: {
      std::string l = detail::lower(s);
      if (l.rfind("state", 0) == 0) l = detail::trim(l.substr(5));
      if (detail::is_integer_text(l)) return "state " + detail::canonical_integer_text(l);
      return s;
    }
    case AnswerShape::WordList: {
      auto items = detail::split_list_items(s);
      for (auto& item : items) item = detail::lower(item);
      return format_list(items);
    }
    case AnswerShape::IntList: {
      auto items = detail::split_list_items(s);
      for (auto& item : items) item = detail::canonical_integer_text(item);
      return format_list(items);
    }
  }
  return s;
}

inline std::string canonicalize_answer(TaskId id, const AnswerValue& raw) {
  const AnswerShape shape = answer_shape(id);
  auto mismatch = [&](const char* what) -> std::string {
    throw Error(ErrorCode::TypeMismatch,
                std::string(what) + " is not an answer for task " + std::string(to_string(id)));
  };
  return std::visit(
      [&](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::string>) {
          return normalize_answer_text(id, v);
        } else if constexpr (std::is_same_v<V, bool>) {
          if (shape != AnswerShape::Boolean) return mismatch("boolean");
          return v ? "True" : "False";
        } else if constexpr (std::is_same_v<V, std::int64_t>) {
          if (shape != AnswerShape::Residue && shape != AnswerShape::Integer) return mismatch("integer");
          return std::to_string(v);
        } else if constexpr (std::is_same_v<V, DecimalDigits>) {
          if (shape != AnswerShape::Integer || !decimal::is_digits(v.digits)) return mismatch("digit string");
          return decimal::strip_leading_zeros(v.digits);
        } else if constexpr (std::is_same_v<V, CycleState>) {
          if (shape != AnswerShape::Cycle) return mismatch("cycle state");
          return "state " + std::to_string(v.index);
        } else if constexpr (std::is_same_v<V, std::vector<std::string>>) {
          if (shape != AnswerShape::WordList) return mismatch("word list");
          return format_list(v);
        } else {
          if (shape != AnswerShape::IntList) return mismatch("integer list");
          return format_list(v);
        }
      },
      raw);
}

// ---------------------------------------------------------------------------
// Prompt-facing problem statement

namespace detail {

inline std::string quoted_list(const std::vector<std::string>& items) {
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += "\"" + items[i] + "\"";
  }
  return out + ")";
}

inline std::string render_simple_expression(const ModArithSimplePayload& p) {
  std::string out = std::to_string(p.operands.at(0));
  for (std::size_t i = 1; i < p.operands.size(); ++i) {
    out += ' ';
    out += p.ops.at(i - 1);
    out += ' ';
    out += std::to_string(p.operands[i]);
  }
  return out;
}

inline std::string render_stack_ops(const std::vector<StackOp>& ops) {
  std::string out = "(";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i > 0) out += ", ";
    out += ops[i].kind == StackOp::Kind::Push ? "push" : "pop";
    out += " \"" + ops[i].value + "\"";
  }
  return out + ")";
}

}  // namespace detail

inline std::string render_instance(const TaskInstance& inst) {
  std::ostringstream os;
  switch (inst.task_id) {
    case TaskId::ModArithSimple: {
      const auto& p = payload_as<ModArithSimplePayload>(inst);
      os << "Compute the value of the expression " << detail::render_simple_expression(p)
         << ", evaluated from left to right, and give the result modulo 5 as an integer from 0 to 4.";
      break;
    }
    case TaskId::ParityCheck: {
      const auto& p = payload_as<ItemListPayload>(inst);
      os << "The list " << detail::quoted_list(p.items)
         << " contains the words \"apple\" and \"banana\". Determine whether \"banana\" appears an even "
            "number of times. Answer True if the count is even and False if it is odd.";
      break;
    }
    case TaskId::CycleNavigation: {
      const auto& p = payload_as<ItemListPayload>(inst);
      os << "A cycle has 5 states numbered 1 to 5. You start in state 1. \"forward\" moves from state k "
            "to state k+1 (state 5 wraps to state 1), \"backward\" moves from state k to state k-1 (state 1 "
            "wraps to state 5), and \"stay\" keeps the current state. Apply the actions "
         << detail::quoted_list(p.items) << " in order. Which state do you end in? Answer as \"state k\".";
      break;
    }
    case TaskId::StackManipulation: {
      const auto& p = payload_as<StackPayload>(inst);
      os << "A stack of fruits is written from bottom to top as " << detail::quoted_list(p.initial)
         << ". Apply the operations " << detail::render_stack_ops(p.ops)
         << " in order. \"push X\" places X on top of the stack; \"pop\" removes the top item (the item it "
            "removes is shown next to it). Give the final stack from bottom to top in the form (a, b, c).";
      break;
    }
    case TaskId::ReverseList: {
      const auto& p = payload_as<ItemListPayload>(inst);
      os << "Reverse the list of vegetables " << detail::quoted_list(p.items)
         << ". Give the reversed list in the form (a, b, c).";
      break;
    }
    case TaskId::ModArithComplex: {
      const auto& p = payload_as<ExpressionPayload>(inst);
      os << "Compute the value of the expression " << render_expr(p.expr)
         << " and give the result modulo 5 as an integer from 0 to 4.";
      break;
    }
    case TaskId::OddsFirst: {
      const auto& p = payload_as<ItemListPayload>(inst);
      os << "From the list of animals " << detail::quoted_list(p.items)
         << ", write the items at odd positions (1st, 3rd, 5th, ...) followed by the items at even "
            "positions (2nd, 4th, ...), keeping their order. Give the result in the form (a, b, c).";
      break;
    }
    case TaskId::Addition: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      os << "Compute " << p.lhs << " + " << p.rhs << ". Give the sum as an integer.";
      break;
    }
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      os << "Compute " << p.lhs << " * " << p.rhs << ". Give the product as an integer.";
      break;
    }
    case TaskId::Sorting: {
      const auto& p = payload_as<IntListPayload>(inst);
      os << "Sort the list " << format_list(p.values)
         << " in non-decreasing order using insertion sort. Give the sorted list in the form (a, b, c).";
      break;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json payload_to_json(const TaskInstance& inst) {
  nlohmann::ordered_json j;
  switch (inst.task_id) {
    case TaskId::ModArithSimple: {
      const auto& p = payload_as<ModArithSimplePayload>(inst);
      j["operands"] = p.operands;
      std::vector<std::string> ops;
      for (char c : p.ops) ops.emplace_back(1, c);
      j["ops"] = ops;
      break;
    }
    case TaskId::ParityCheck:
    case TaskId::CycleNavigation:
    case TaskId::ReverseList:
    case TaskId::OddsFirst:
      j["items"] = payload_as<ItemListPayload>(inst).items;
      break;
    case TaskId::StackManipulation: {
      const auto& p = payload_as<StackPayload>(inst);
      j["initial"] = p.initial;
      j["ops"] = nlohmann::ordered_json::array();
      for (const auto& op : p.ops) {
        j["ops"].push_back({{"op", op.kind == StackOp::Kind::Push ? "push" : "pop"}, {"value", op.value}});
      }
      break;
    }
    case TaskId::ModArithComplex:
      j["expr"] = render_expr(payload_as<ExpressionPayload>(inst).expr);
      break;
    case TaskId::Addition:
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      j["lhs"] = p.lhs;
      j["rhs"] = p.rhs;
      break;
    }
    case TaskId::Sorting:
      j["values"] = payload_as<IntListPayload>(inst).values;
      break;
  }
  return j;
}

inline Payload payload_from_json(TaskId id, const nlohmann::ordered_json& j) {
  try {
    switch (id) {
      case TaskId::ModArithSimple: {
        ModArithSimplePayload p;
        p.operands = j.at("operands").get<std::vector<int>>();
        for (const auto& s : j.at("ops").get<std::vector<std::string>>()) {
          if (s != "+" && s != "-") throw Error(ErrorCode::MalformedPayload, "operator '" + s + "'");
          p.ops.push_back(s[0]);
        }
        return p;
      }
      case TaskId::ParityCheck:
      case TaskId::CycleNavigation:
      case TaskId::ReverseList:
      case TaskId::OddsFirst:
        return ItemListPayload{j.at("items").get<std::vector<std::string>>()};
      case TaskId::StackManipulation: {
        StackPayload p;
        p.initial = j.at("initial").get<std::vector<std::string>>();
        for (const auto& o : j.at("ops")) {
          const auto kind = o.at("op").get<std::string>();
          if (kind != "push" && kind != "pop") throw Error(ErrorCode::MalformedPayload, "stack op '" + kind + "'");
          p.ops.push_back({kind == "push" ? StackOp::Kind::Push : StackOp::Kind::Pop,
                           o.value("value", std::string{})});
        }
        return p;
      }
      case TaskId::ModArithComplex:
        return ExpressionPayload{parse_expr(j.at("expr").get<std::string>())};
      case TaskId::Addition:
      case TaskId::Multiplication:
        return OperandPairPayload{j.at("lhs").get<std::string>(), j.at("rhs").get<std::string>()};
      case TaskId::Sorting:
        return IntListPayload{j.at("values").get<std::vector<int>>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedPayload, e.what());
  }
  throw Error(ErrorCode::MalformedPayload, "unknown task");
}

inline nlohmann::ordered_json instance_to_json(const TaskInstance& inst) {
  nlohmann::ordered_json j;
  j["task_id"] = std::string(to_string(inst.task_id));
  j["seed"] = inst.seed;
  j["length_n"] = inst.length_n;
  j["payload"] = payload_to_json(inst);
  j["canonical_answer"] = inst.canonical_answer;
  return j;
}

// Parses without re-solving; see load_instance() in task_suite.hpp for the
// validating variant.
inline TaskInstance instance_from_json(const nlohmann::ordered_json& j) {
  try {
    TaskInstance inst;
    inst.task_id = parse_task_id(j.at("task_id").get<std::string>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.length_n = j.at("length_n").get<int>();
    inst.payload = payload_from_json(inst.task_id, j.at("payload"));
    inst.canonical_answer = j.value("canonical_answer", std::string{});
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedPayload, e.what());
  }
}

// "(task_id, seed, length_n)" reference used by prompt and run-record files.
inline nlohmann::ordered_json instance_ref(const TaskInstance& inst) {
  return {{"task_id", std::string(to_string(inst.task_id))}, {"seed", inst.seed}, {"length_n", inst.length_n}};
}

}  // namespace cotsup
