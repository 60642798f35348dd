#pragma once

// Step-template registry.
//
// A step template says which state to write down at every step of a chain of
// thought. Each registered template carries executable rules:
//   initial   - state before the first element (from the problem statement)
//   step      - next emitted state from (previous emitted state, next element)
//   finalize  - read the answer off the last emitted state, when possible
//   render / parse - the one-line text form of a state
//   perturb   - a plausible but wrong emission, for noisy agents
//
// `step` sees only its two arguments, so every emission chain built from it
// obeys the working-window constraint. Whether a template's emissions carry
// enough information to answer is decided empirically by check_sufficiency().

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotsup/core.hpp"
#include "cotsup/decimal.hpp"
#include "cotsup/instance.hpp"
#include "cotsup/oracle.hpp"
#include "cotsup/task_suite.hpp"

namespace cotsup {

enum class SupervisionKind { Correct, Incorrect, Unsupervised };

inline std::string_view to_string(SupervisionKind kind) {
  switch (kind) {
    case SupervisionKind::Correct: return "Correct";
    case SupervisionKind::Incorrect: return "Incorrect";
    case SupervisionKind::Unsupervised: return "Unsupervised";
  }
  return "?";
}

inline SupervisionKind parse_supervision_kind(std::string_view text) {
  if (text == "Correct" || text == "cr") return SupervisionKind::Correct;
  if (text == "Incorrect" || text == "in") return SupervisionKind::Incorrect;
  if (text == "Unsupervised" || text == "un") return SupervisionKind::Unsupervised;
  throw Error(ErrorCode::ConfigError, "unknown supervision kind '" + std::string(text) + "'");
}

using StateValues = std::vector<std::string>;

struct StepState {
  StateValues values;
  std::string rendered_text;

  friend bool operator==(const StepState& a, const StepState& b) { return a.values == b.values; }
};

struct StepTemplate {
  TaskId task_id = TaskId::ParityCheck;
  SupervisionKind kind = SupervisionKind::Unsupervised;
  std::string instruction_text;
  std::vector<std::string> state_schema;
  std::string state_format;  // line shape shown in supervised prompts
  bool transition_defined = false;

  friend bool operator==(const StepTemplate&, const StepTemplate&) = default;
};

inline constexpr std::string_view kUnsupervisedInstruction = "Think step by step.";

// Input elements one template step consumes, in processing order:
//   mod-arith-simple  signed operands "+4", "+2", "-3"
//   stack-manipulation "push orange" / "pop"
//   reverse-list      items from the back of the list
//   mod-arith-complex post-order tokens "2", "4", "+", ...
//   addition          digit columns "6+4", least significant first
//   multiplication    "345x7@2": multiplicand, multiplier digit, place
//   everything else   the payload items in order
inline std::vector<std::string> element_stream(const TaskInstance& inst) {
  std::vector<std::string> out;
  switch (inst.task_id) {
    case TaskId::ModArithSimple: {
      const auto& p = payload_as<ModArithSimplePayload>(inst);
      for (std::size_t i = 0; i < p.operands.size(); ++i) {
        const char sign = i == 0 ? '+' : p.ops.at(i - 1);
        out.push_back(std::string(1, sign) + std::to_string(p.operands[i]));
      }
      break;
    }
    case TaskId::ParityCheck:
    case TaskId::CycleNavigation:
    case TaskId::OddsFirst:
      out = payload_as<ItemListPayload>(inst).items;
      break;
    case TaskId::ReverseList: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      out.assign(items.rbegin(), items.rend());
      break;
    }
    case TaskId::StackManipulation:
      for (const auto& op : payload_as<StackPayload>(inst).ops) {
        out.push_back(op.kind == StackOp::Kind::Push ? "push " + op.value : std::string("pop"));
      }
      break;
    case TaskId::ModArithComplex:
      out = to_postfix(payload_as<ExpressionPayload>(inst).expr);
      break;
    case TaskId::Addition: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      const std::size_t width = std::max(p.lhs.size(), p.rhs.size());
      for (std::size_t k = 0; k < width; ++k) {
        const char a = k < p.lhs.size() ? p.lhs[p.lhs.size() - 1 - k] : '0';
        const char b = k < p.rhs.size() ? p.rhs[p.rhs.size() - 1 - k] : '0';
        out.push_back(std::string{a, '+', b});
      }
      break;
    }
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      for (std::size_t k = 0; k < p.rhs.size(); ++k) {
        out.push_back(p.lhs + "x" + p.rhs[p.rhs.size() - 1 - k] + "@" + std::to_string(k));
      }
      break;
    }
    case TaskId::Sorting:
      for (int v : payload_as<IntListPayload>(inst).values) out.push_back(std::to_string(v));
      break;
  }
  return out;
}

namespace detail {

enum class FieldKind { Integer, Word, WordList, IntList, Digits };

struct TemplateRules {
  StepTemplate info;
  std::vector<FieldKind> fields;
  std::regex pattern;  // one capture group per field, matched against the whole line
  std::function<StateValues(const TaskInstance&)> initial;
  std::function<StateValues(const StateValues&, const std::string&)> step;
  std::function<std::optional<std::string>(const StateValues&)> finalize;
  std::function<std::string(const StateValues&)> render;
  // Returns an emission different from `correct`.
  std::function<StateValues(const StateValues& correct, const std::string& element, Rng&)> perturb;
};

inline std::vector<std::string> list_items(const std::string& value) { return split_list_items(value); }

inline int to_int(const std::string& s) { return std::stoi(s); }

template <std::size_t N>
std::string other_word(const std::array<std::string_view, N>& alphabet, const std::string& avoid, Rng& rng) {
  for (;;) {
    std::string w(alphabet[uniform_below(rng, N)]);
    if (w != avoid) return w;
  }
}

inline std::string other_residue(const std::string& v, int modulus, int offset, Rng& rng) {
  const int cur = to_int(v) - offset;
  return std::to_string((cur + 1 + static_cast<int>(uniform_below(rng, modulus - 1))) % modulus + offset);
}

inline std::string bump_integer(const std::string& v, Rng& rng) {
  const int cur = to_int(v);
  if (cur <= 0 || uniform_below(rng, 2) == 0) return std::to_string(cur + 1);
  return std::to_string(cur - 1);
}

inline std::string other_digit_string(const std::string& digits, Rng& rng) {
  std::string out = digits;
  const std::size_t pos = uniform_below(rng, out.size());
  const int cur = out[pos] - '0';
  out[pos] = static_cast<char>('0' + (cur + 1 + static_cast<int>(uniform_below(rng, 9))) % 10);
  return out;
}

inline std::regex line_regex(const std::string& body) {
  return std::regex(body, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
}

struct MultiplicationElement {
  std::string multiplicand;
  int digit = 0;
  int place = 0;
};

inline MultiplicationElement parse_multiplication_element(const std::string& e) {
  const auto x = e.find('x');
  const auto at = e.find('@');
  if (x == std::string::npos || at == std::string::npos) {
    throw Error(ErrorCode::MalformedPayload, "multiplication element '" + e + "'");
  }
  return {e.substr(0, x), e[x + 1] - '0', std::stoi(e.substr(at + 1))};
}

inline std::vector<TemplateRules> build_rules() {
  using SK = SupervisionKind;
  using FK = FieldKind;
  std::vector<TemplateRules> r;

  auto info = [](TaskId t, SK k, std::string text, std::vector<std::string> schema, std::string format) {
    return StepTemplate{t, k, std::move(text), std::move(schema), std::move(format), k == SK::Correct};
  };
  auto none = [](const StateValues&) -> std::optional<std::string> { return std::nullopt; };

  // --- mod-arith-simple ----------------------------------------------------
  r.push_back({info(TaskId::ModArithSimple, SK::Correct, "Write down partial sums after each step", {"partial_sum"},
                    "partial sum: <value modulo 5>"),
               {FK::Integer},
               line_regex(R"(partial sum:\s*(-?\d+))"),
               [](const TaskInstance&) { return StateValues{"0"}; },
               [](const StateValues& s, const std::string& e) {
                 return StateValues{std::to_string(machines::mod_sum_delta(to_int(s[0]), to_int(e)))};
               },
               [](const StateValues& s) -> std::optional<std::string> { return s[0]; },
               [](const StateValues& s) { return "partial sum: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{other_residue(c[0], kModulus, 0, rng)};
               }});
  r.push_back({info(TaskId::ModArithSimple, SK::Incorrect, "Write down paired sums of each two values at each step",
                    {"paired_sum", "value"}, "paired sum: <previous value + current value>, value: <current value>"),
               {FK::Integer, FK::Integer},
               line_regex(R"(paired sum:\s*(-?\d+),\s*value:\s*(-?\d+))"),
               [](const TaskInstance&) { return StateValues{"0", "0"}; },
               [](const StateValues& s, const std::string& e) {
                 const int v = to_int(e);
                 return StateValues{std::to_string(to_int(s[1]) + v), std::to_string(v)};
               },
               none,
               [](const StateValues& s) { return "paired sum: " + s[0] + ", value: " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{bump_integer(c[0], rng), c[1]};
               }});

  // --- parity-check ----------------------------------------------------------
  r.push_back({info(TaskId::ParityCheck, SK::Correct,
                    "Write down “even” or “odd” counter after each word in each step", {"counter"},
                    "counter: <even|odd>"),
               {FK::Word},
               line_regex(R"(counter:\s*(even|odd))"),
               [](const TaskInstance&) { return StateValues{"even"}; },
               [](const StateValues& s, const std::string& e) {
                 return StateValues{machines::parity_delta(s[0] == "even", e) ? "even" : "odd"};
               },
               [](const StateValues& s) -> std::optional<std::string> { return s[0] == "even" ? "True" : "False"; },
               [](const StateValues& s) { return "counter: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng&) {
                 return StateValues{c[0] == "even" ? "odd" : "even"};
               }});
  r.push_back({info(TaskId::ParityCheck, SK::Incorrect, "Write down whether the word is a target word at each step",
                    {"is_target"}, "target word: <yes|no>"),
               {FK::Word},
               line_regex(R"(target word:\s*(yes|no))"),
               [](const TaskInstance&) { return StateValues{"no"}; },
               [](const StateValues&, const std::string& e) {
                 return StateValues{e == kParityTarget ? "yes" : "no"};
               },
               none,
               [](const StateValues& s) { return "target word: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng&) { return StateValues{c[0] == "yes" ? "no" : "yes"}; }});

  // --- cycle-navigation ------------------------------------------------------
  r.push_back({info(TaskId::CycleNavigation, SK::Correct, "Write down which state you are in at each step", {"state"},
                    "state <1-5>"),
               {FK::Integer},
               line_regex(R"(state\s*(\d+))"),
               [](const TaskInstance&) { return StateValues{"1"}; },
               [](const StateValues& s, const std::string& e) {
                 return StateValues{std::to_string(machines::cycle_delta(to_int(s[0]), e))};
               },
               [](const StateValues& s) -> std::optional<std::string> { return "state " + s[0]; },
               [](const StateValues& s) { return "state " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{other_residue(c[0], kCycleStates, 1, rng)};
               }});
  r.push_back({info(TaskId::CycleNavigation, SK::Incorrect,
                    "Write down the total number of “forward” at each step", {"forward_count"},
                    "forward count: <number>"),
               {FK::Integer},
               line_regex(R"(forward count:\s*(\d+))"),
               [](const TaskInstance&) { return StateValues{"0"}; },
               [](const StateValues& s, const std::string& e) {
                 return StateValues{std::to_string(to_int(s[0]) + (e == "forward" ? 1 : 0))};
               },
               none,
               [](const StateValues& s) { return "forward count: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) { return StateValues{bump_integer(c[0], rng)}; }});

  // --- stack-manipulation ----------------------------------------------------
  r.push_back({info(TaskId::StackManipulation, SK::Correct, "Write down the resulting stack at each step", {"stack"},
                    "stack: (<bottom>, ..., <top>)"),
               {FK::WordList},
               line_regex(R"(stack:\s*(\(.*\)))"),
               [](const TaskInstance& inst) { return StateValues{format_list(payload_as<StackPayload>(inst).initial)}; },
               [](const StateValues& s, const std::string& e) {
                 auto items = list_items(s[0]);
                 if (e.rfind("push ", 0) == 0) {
                   items.push_back(e.substr(5));
                 } else if (!items.empty()) {
                   items.pop_back();
                 }
                 return StateValues{format_list(items)};
               },
               [](const StateValues& s) -> std::optional<std::string> { return s[0]; },
               [](const StateValues& s) { return "stack: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 auto items = list_items(c[0]);
                 if (items.empty()) {
                   items.emplace_back(kFruits[uniform_below(rng, kFruits.size())]);
                 } else {
                   items.back() = other_word(kFruits, items.back(), rng);
                 }
                 return StateValues{format_list(items)};
               }});
  r.push_back({info(TaskId::StackManipulation, SK::Incorrect,
                    "Write down the number of operations performed up to that step", {"operations"},
                    "operations performed: <number>"),
               {FK::Integer},
               line_regex(R"(operations performed:\s*(\d+))"),
               [](const TaskInstance&) { return StateValues{"0"}; },
               [](const StateValues& s, const std::string&) { return StateValues{std::to_string(to_int(s[0]) + 1)}; },
               none,
               [](const StateValues& s) { return "operations performed: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) { return StateValues{bump_integer(c[0], rng)}; }});

  // --- reverse-list ----------------------------------------------------------
  r.push_back({info(TaskId::ReverseList, SK::Correct, "Write down the partially reversed list after each step from the back",
                    {"reversed"}, "reversed so far: (<items taken from the back>)"),
               {FK::WordList},
               line_regex(R"(reversed so far:\s*(\(.*\)))"),
               [](const TaskInstance&) { return StateValues{"()"}; },
               [](const StateValues& s, const std::string& e) {
                 auto items = list_items(s[0]);
                 items.push_back(e);
                 return StateValues{format_list(items)};
               },
               [](const StateValues& s) -> std::optional<std::string> { return s[0]; },
               [](const StateValues& s) { return "reversed so far: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 auto items = list_items(c[0]);
                 items.back() = other_word(kVegetables, items.back(), rng);
                 return StateValues{format_list(items)};
               }});
  r.push_back({info(TaskId::ReverseList, SK::Incorrect,
                    "Write down the value to be added to the reversed list and the remaining original list",
                    {"value", "remaining"}, "add <item>, remaining: (<items still in the original list>)"),
               {FK::Word, FK::WordList},
               line_regex(R"(add\s+([a-z]+),\s*remaining:\s*(\(.*\)))"),
               [](const TaskInstance& inst) {
                 return StateValues{"none", format_list(payload_as<ItemListPayload>(inst).items)};
               },
               [](const StateValues& s, const std::string& e) {
                 auto rest = list_items(s[1]);
                 if (!rest.empty()) rest.pop_back();
                 return StateValues{e, format_list(rest)};
               },
               none,
               [](const StateValues& s) { return "add " + s[0] + ", remaining: " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{other_word(kVegetables, c[0], rng), c[1]};
               }});

  // --- mod-arith-complex -----------------------------------------------------
  r.push_back({info(TaskId::ModArithComplex, SK::Correct,
                    "Write down the formula with reduced values in the performed operations at each step", {"reduced"},
                    "reduced values: (<values of the reduced sub-expressions, left to right>)"),
               {FK::IntList},
               line_regex(R"(reduced values:\s*(\(.*\)))"),
               [](const TaskInstance&) { return StateValues{"()"}; },
               [](const StateValues& s, const std::string& e) {
                 machines::OperandStack stack;
                 for (const auto& v : list_items(s[0])) stack.push_back(to_int(v));
                 return StateValues{format_list(machines::expr_delta(stack, e))};
               },
               [](const StateValues& s) -> std::optional<std::string> {
                 const auto items = list_items(s[0]);
                 if (items.size() != 1) return std::nullopt;
                 return items[0];
               },
               [](const StateValues& s) { return "reduced values: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 auto items = list_items(c[0]);
                 items.back() = other_residue(items.back(), kModulus, 0, rng);
                 return StateValues{format_list(items)};
               }});
  r.push_back({info(TaskId::ModArithComplex, SK::Incorrect,
                    "Write down the result of each performed operation at each step", {"result", "operand"},
                    "operation result: <value>, operand: <latest number>"),
               {FK::Integer, FK::Integer},
               line_regex(R"(operation result:\s*(-?\d+),\s*operand:\s*(-?\d+))"),
               [](const TaskInstance&) { return StateValues{"0", "0"}; },
               [](const StateValues& s, const std::string& e) {
                 if (e.size() == 1 && e[0] >= '0' && e[0] <= '9') return StateValues{s[0], e};
                 const int lhs = to_int(s[0]);
                 const int rhs = to_int(s[1]);
                 const int v = e == "+" ? lhs + rhs : e == "-" ? lhs - rhs : lhs * rhs;
                 return StateValues{std::to_string(machines::positive_mod(v, kModulus)), s[1]};
               },
               none,
               [](const StateValues& s) { return "operation result: " + s[0] + ", operand: " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{other_residue(c[0], kModulus, 0, rng), c[1]};
               }});

  // --- odds-first ------------------------------------------------------------
  r.push_back({info(TaskId::OddsFirst, SK::Correct,
                    "Write down the odd-position list and the even-position list after each element", {"odd", "even"},
                    "odd: (<odd-position items>) even: (<even-position items>)"),
               {FK::WordList, FK::WordList},
               line_regex(R"(odd:\s*(\(.*?\))\s*even:\s*(\(.*\)))"),
               [](const TaskInstance&) { return StateValues{"()", "()"}; },
               [](const StateValues& s, const std::string& e) {
                 auto odd = list_items(s[0]);
                 auto even = list_items(s[1]);
                 (odd.size() == even.size() ? odd : even).push_back(e);
                 return StateValues{format_list(odd), format_list(even)};
               },
               [](const StateValues& s) -> std::optional<std::string> {
                 auto odd = list_items(s[0]);
                 const auto even = list_items(s[1]);
                 odd.insert(odd.end(), even.begin(), even.end());
                 return format_list(odd);
               },
               [](const StateValues& s) { return "odd: " + s[0] + " even: " + s[1]; },
               [](const StateValues& c, const std::string& e, Rng& rng) {
                 auto odd = list_items(c[0]);
                 auto even = list_items(c[1]);
                 auto& grown = odd.size() > even.size() ? odd : even;
                 grown.back() = other_word(kAnimals, e, rng);
                 return StateValues{format_list(odd), format_list(even)};
               }});
  r.push_back({info(TaskId::OddsFirst, SK::Incorrect, "Write down each element at next position", {"element", "position"},
                    "place <item> at position <number>"),
               {FK::Word, FK::Integer},
               line_regex(R"(place\s+([a-z]+)\s+at position\s+(\d+))"),
               [](const TaskInstance&) { return StateValues{"none", "0"}; },
               [](const StateValues& s, const std::string& e) { return StateValues{e, std::to_string(to_int(s[1]) + 1)}; },
               none,
               [](const StateValues& s) { return "place " + s[0] + " at position " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{c[0], std::to_string(to_int(c[1]) + 1 + static_cast<int>(uniform_below(rng, 2)))};
               }});

  // --- addition --------------------------------------------------------------
  r.push_back({info(TaskId::Addition, SK::Correct,
                    "Write down the current digit sum and the carry at each step, keeping the sum digits computed so far",
                    {"sum_digits", "carry"}, "sum digits: <digits computed so far>, carry: <0|1>"),
               {FK::Digits, FK::Integer},
               line_regex(R"(sum digits:\s*(\d+),\s*carry:\s*([01]))"),
               [](const TaskInstance&) { return StateValues{"", "0"}; },
               [](const StateValues& s, const std::string& e) {
                 const int sum = (e[0] - '0') + (e[2] - '0') + to_int(s[1]);
                 return StateValues{std::string(1, static_cast<char>('0' + sum % 10)) + s[0], std::to_string(sum / 10)};
               },
               [](const StateValues& s) -> std::optional<std::string> {
                 return decimal::strip_leading_zeros((s[1] == "1" ? "1" : "") + s[0]);
               },
               [](const StateValues& s) { return "sum digits: " + s[0] + ", carry: " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 if (uniform_below(rng, 4) == 0) return StateValues{c[0], c[1] == "1" ? "0" : "1"};
                 return StateValues{other_digit_string(c[0], rng), c[1]};
               }});
  r.push_back({info(TaskId::Addition, SK::Incorrect, "Write down both operand digits being added at each step",
                    {"lhs_digit", "rhs_digit"}, "digits: <digit> and <digit>"),
               {FK::Integer, FK::Integer},
               line_regex(R"(digits:\s*(\d)\s+and\s+(\d))"),
               [](const TaskInstance&) { return StateValues{"0", "0"}; },
               [](const StateValues&, const std::string& e) {
                 return StateValues{std::string(1, e[0]), std::string(1, e[2])};
               },
               none,
               [](const StateValues& s) { return "digits: " + s[0] + " and " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{other_residue(c[0], 10, 0, rng), c[1]};
               }});

  // --- multiplication --------------------------------------------------------
  r.push_back({info(TaskId::Multiplication, SK::Correct, "Write down the running partial-product sum after each digit",
                    {"running_sum"}, "running sum: <value>"),
               {FK::Digits},
               line_regex(R"(running sum:\s*(\d+))"),
               [](const TaskInstance&) { return StateValues{"0"}; },
               [](const StateValues& s, const std::string& e) {
                 const auto m = parse_multiplication_element(e);
                 return StateValues{decimal::add(s[0], decimal::shift(decimal::multiply_digit(m.multiplicand, m.digit), m.place))};
               },
               [](const StateValues& s) -> std::optional<std::string> { return decimal::strip_leading_zeros(s[0]); },
               [](const StateValues& s) { return "running sum: " + s[0]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 std::string v = other_digit_string(c[0], rng);
                 return StateValues{v.size() > 1 ? decimal::strip_leading_zeros(v) : v};
               }});
  r.push_back({info(TaskId::Multiplication, SK::Incorrect, "Write down the pair of numbers being multiplied at each step",
                    {"multiplicand", "digit"}, "multiply <number> by <digit>"),
               {FK::Digits, FK::Integer},
               line_regex(R"(multiply\s+(\d+)\s+by\s+(\d))"),
               [](const TaskInstance&) { return StateValues{"0", "0"}; },
               [](const StateValues&, const std::string& e) {
                 const auto m = parse_multiplication_element(e);
                 return StateValues{m.multiplicand, std::to_string(m.digit)};
               },
               none,
               [](const StateValues& s) { return "multiply " + s[0] + " by " + s[1]; },
               [](const StateValues& c, const std::string&, Rng& rng) {
                 return StateValues{c[0], other_residue(c[1], 10, 0, rng)};
               }});

  // --- sorting ---------------------------------------------------------------
  r.push_back({info(TaskId::Sorting, SK::Correct, "Write down the partially sorted list after inserting each element",
                    {"sorted"}, "sorted so far: (<sorted prefix>)"),
               {FK::IntList},
               line_regex(R"(sorted so far:\s*(\(.*\)))"),
               [](const TaskInstance&) { return StateValues{"()"}; },
               [](const StateValues& s, const std::string& e) {
                 std::vector<std::int64_t> v;
                 for (const auto& x : list_items(s[0])) v.push_back(std::stoll(x));
                 const std::int64_t x = std::stoll(e);
                 v.insert(std::upper_bound(v.begin(), v.end(), x), x);
                 return StateValues{format_list(v)};
               },
               [](const StateValues& s) -> std::optional<std::string> { return s[0]; },
               [](const StateValues& s) { return "sorted so far: " + s[0]; },
               [](const StateValues& c, const std::string& e, Rng& rng) {
                 auto items = list_items(c[0]);
                 const auto pos = std::find(items.begin(), items.end(), e) - items.begin();
                 std::vector<std::string> alt;
                 for (std::size_t k = 0; k < items.size(); ++k) {
                   auto moved = items;
                   moved.erase(moved.begin() + pos);
                   moved.insert(moved.begin() + static_cast<std::ptrdiff_t>(k), e);
                   if (moved != items) alt.push_back(format_list(moved));
                 }
                 if (!alt.empty()) return StateValues{alt[uniform_below(rng, alt.size())]};
                 items[static_cast<std::size_t>(pos)] = std::to_string(std::stoll(e) + 1);
                 return StateValues{format_list(items)};
               }});
  r.push_back({info(TaskId::Sorting, SK::Incorrect, "Write down whether to swap at each step in bubble sort",
                    {"carried", "swap"}, "compare <carried value>, swap: <yes|no>"),
               {FK::Integer, FK::Word},
               line_regex(R"(compare\s+(-?\d+),\s*swap:\s*(yes|no))"),
               [](const TaskInstance&) { return StateValues{"-1", "no"}; },
               [](const StateValues& s, const std::string& e) {
                 const int carried = to_int(s[0]);
                 const int x = to_int(e);
                 if (carried < 0) return StateValues{e, "no"};
                 return StateValues{std::to_string(std::max(carried, x)), carried > x ? "yes" : "no"};
               },
               none,
               [](const StateValues& s) { return "compare " + s[0] + ", swap: " + s[1]; },
               [](const StateValues& c, const std::string&, Rng&) {
                 return StateValues{c[0], c[1] == "yes" ? "no" : "yes"};
               }});

  return r;
}

inline const std::vector<TemplateRules>& rules_table() {
  static const std::vector<TemplateRules> table = build_rules();
  return table;
}

inline const TemplateRules* find_rules(TaskId id, SupervisionKind kind) {
  for (const auto& r : rules_table()) {
    if (r.info.task_id == id && r.info.kind == kind) return &r;
  }
  return nullptr;
}

inline const TemplateRules& rules_for(const StepTemplate& t) {
  const TemplateRules* r = find_rules(t.task_id, t.kind);
  if (r == nullptr) {
    throw Error(ErrorCode::NotRegistered, std::string(to_string(t.task_id)) + "/" + std::string(to_string(t.kind)) +
                                              " has no step rules");
  }
  return *r;
}

inline const std::vector<StepTemplate>& unsupervised_table() {
  static const std::vector<StepTemplate> table = [] {
    std::vector<StepTemplate> out;
    for (TaskId id : kAllTasks) {
      out.push_back({id, SupervisionKind::Unsupervised, std::string(kUnsupervisedInstruction), {}, {}, false});
    }
    return out;
  }();
  return table;
}

inline std::string canonical_field(FieldKind kind, const std::string& raw) {
  switch (kind) {
    case FieldKind::Integer: return canonical_integer_text(raw);
    case FieldKind::Word: return lower(trim(raw));
    case FieldKind::Digits: return trim(raw);
    case FieldKind::WordList: {
      auto items = split_list_items(raw);
      for (auto& it : items) it = lower(it);
      return format_list(items);
    }
    case FieldKind::IntList: {
      auto items = split_list_items(raw);
      for (auto& it : items) it = canonical_integer_text(it);
      return format_list(items);
    }
  }
  return raw;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Registry access

inline const StepTemplate& get_template(TaskId id, SupervisionKind kind) {
  if (kind == SupervisionKind::Unsupervised) {
    for (const auto& t : detail::unsupervised_table()) {
      if (t.task_id == id) return t;
    }
  } else if (const auto* r = detail::find_rules(id, kind)) {
    return r->info;
  }
  throw Error(ErrorCode::NotRegistered,
              std::string(to_string(id)) + "/" + std::string(to_string(kind)) + " is not registered");
}

inline std::vector<StepTemplate> all_templates() {
  std::vector<StepTemplate> out;
  for (TaskId id : kAllTasks) {
    for (auto kind : {SupervisionKind::Correct, SupervisionKind::Incorrect, SupervisionKind::Unsupervised}) {
      out.push_back(get_template(id, kind));
    }
  }
  return out;
}

inline bool has_schema(const StepTemplate& t) { return t.kind != SupervisionKind::Unsupervised; }

inline StepState make_state(const StepTemplate& t, StateValues values) {
  const auto& r = detail::rules_for(t);
  std::string text = r.render(values);
  return StepState{std::move(values), std::move(text)};
}

inline StepState initial_state(const StepTemplate& t, const TaskInstance& inst) {
  if (inst.task_id != t.task_id) throw Error(ErrorCode::InvalidCondition, "template and instance tasks differ");
  return make_state(t, detail::rules_for(t).initial(inst));
}

// The template's own emission rule: what a follower of this template writes
// next given only its previous line and the next element. Defined for every
// Correct and Incorrect template.
inline StepState schema_step(const StepTemplate& t, const StepState& prev, const std::string& element) {
  return make_state(t, detail::rules_for(t).step(prev.values, element));
}

// Next-state function of templates whose emissions carry the task state.
inline StepState transition(const StepTemplate& t, const StepState& prev, const std::string& element) {
  if (!t.transition_defined) {
    throw Error(ErrorCode::InsufficientState, std::string(to_string(t.task_id)) + "/" + std::string(to_string(t.kind)) +
                                                  " emissions do not carry the task state");
  }
  return schema_step(t, prev, element);
}

inline std::optional<std::string> finalize(const StepTemplate& t, const StepState& last) {
  if (!has_schema(t)) return std::nullopt;
  return detail::rules_for(t).finalize(last.values);
}

inline StepState perturb_state(const StepTemplate& t, const StepState& correct, const std::string& element, Rng& rng) {
  return make_state(t, detail::rules_for(t).perturb(correct.values, element, rng));
}

// Parses one state line (step label already removed). Returns nullopt when
// the text does not have the template's shape.
inline std::optional<StepState> parse_state(const StepTemplate& t, std::string_view text) {
  if (!has_schema(t)) return std::nullopt;
  const auto& r = detail::rules_for(t);
  const std::string line = detail::trim(text);
  std::smatch m;
  if (!std::regex_match(line, m, r.pattern)) return std::nullopt;
  StateValues values;
  for (std::size_t i = 0; i < r.fields.size(); ++i) values.push_back(detail::canonical_field(r.fields[i], m[i + 1].str()));
  try {
    return make_state(t, std::move(values));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Emission chain of a template over an instance (no noise).
inline std::vector<StepState> run_template(const StepTemplate& t, const TaskInstance& inst) {
  std::vector<StepState> out;
  StepState s = initial_state(t, inst);
  for (const auto& e : element_stream(inst)) {
    s = schema_step(t, s, e);
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sufficiency

enum class Verdict { Sufficient, Insufficient };

inline std::string_view to_string(Verdict v) { return v == Verdict::Sufficient ? "Sufficient" : "Insufficient"; }

// Two inputs whose final emitted states coincide although their correct
// answers differ: no read-out of that state can answer both.
struct SufficiencyWitness {
  TaskInstance first;
  TaskInstance second;
  std::string shared_state;
  std::string first_answer;
  std::string second_answer;
};

struct SufficiencyResult {
  Verdict verdict = Verdict::Sufficient;
  std::optional<SufficiencyWitness> witness;
  std::uint64_t inputs_checked = 0;
};

inline constexpr int kSufficiencyMaxLength = 8;
inline constexpr int kAuditLength = 6;
// Inputs per length beyond which numeric operand alphabets are reduced.
inline constexpr std::uint64_t kEnumerationBudget = 1'000'000;

namespace detail {

// Calls `digit(i)` for every index vector in [0, base)^len, in odometer order.
template <typename Visit>
void odometer(std::size_t len, std::size_t base, Visit&& visit) {
  std::vector<std::size_t> idx(len, 0);
  for (;;) {
    visit(idx);
    std::size_t k = 0;
    while (k < len && ++idx[k] == base) idx[k++] = 0;
    if (k == len) return;
  }
}

// All group trees (with operators, operand values zero) with `leaves` leaves
// and depth <= max_depth.
inline std::vector<Expr> expression_shapes(std::size_t leaves, int max_depth) {
  if (leaves == 1) return {make_leaf(0)};
  if (max_depth == 0) return {};
  std::vector<Expr> out;
  // Compositions of `leaves` into >= 2 parts.
  std::vector<std::size_t> parts;
  std::function<void(std::size_t)> compose = [&](std::size_t rem) {
    if (rem == 0) {
      if (parts.size() < 2) return;
      std::vector<std::vector<Expr>> child_options;
      for (std::size_t p : parts) child_options.push_back(expression_shapes(p, max_depth - 1));
      for (const auto& opts : child_options) {
        if (opts.empty()) return;
      }
      std::vector<std::size_t> pick(parts.size(), 0);
      for (;;) {
        std::vector<Expr> children;
        for (std::size_t i = 0; i < parts.size(); ++i) children.push_back(child_options[i][pick[i]]);
        // (+|-)^(k-1) assignments, then the all-multiplicative group.
        const std::size_t k = parts.size() - 1;
        for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
          std::vector<char> ops;
          for (std::size_t b = 0; b < k; ++b) ops.push_back((mask >> b) & 1 ? '-' : '+');
          out.push_back(make_group(children, ops));
        }
        out.push_back(make_group(children, std::vector<char>(k, '*')));
        std::size_t i = 0;
        while (i < parts.size() && ++pick[i] == child_options[i].size()) pick[i++] = 0;
        if (i == parts.size()) break;
      }
      return;
    }
    for (std::size_t p = 1; p <= rem; ++p) {
      parts.push_back(p);
      compose(rem - p);
      parts.pop_back();
    }
  };
  compose(leaves);
  return out;
}

inline void assign_operands(Expr& e, const std::vector<int>& values, std::size_t& next) {
  if (e.is_leaf()) {
    e.value = values[next++];
    return;
  }
  for (auto& c : e.children) assign_operands(c, values, next);
}

inline TaskInstance bare_instance(TaskId id, int n, Payload p) {
  TaskInstance inst;
  inst.task_id = id;
  inst.length_n = n;
  inst.payload = std::move(p);
  return inst;
}

inline std::size_t pow_size(std::size_t base, std::size_t exp) {
  std::size_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) v *= base;
  return v;
}

// Largest prefix of `ordered` whose size^n * multiplier stays within budget
// (at least two symbols).
inline std::vector<int> budget_alphabet(const std::vector<int>& ordered, std::size_t n, std::size_t multiplier) {
  std::size_t k = ordered.size();
  while (k > 2 && pow_size(k, n) * multiplier > kEnumerationBudget) --k;
  return {ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(k)};
}

}  // namespace detail

// Visits every instance of length n in the enumeration domain used by the
// sufficiency checker. Word alphabets hold min(max_len, 6) symbols so all
// arrangements of up to six distinct items occur; numeric operands use
// residues 0-4 (modular tasks) or digits {0, 5, 9} (arithmetic tasks, which
// exercises both carry and no-carry columns); stacks start from heights 0-2
// over {apple, banana}. Modular operand alphabets shrink at lengths where the
// full domain exceeds kEnumerationBudget; shapes and operators stay
// exhaustive.
inline void enumerate_domain(TaskId id, int n, int max_len, const std::function<void(const TaskInstance&)>& visit) {
  using detail::bare_instance;
  const auto len = static_cast<std::size_t>(n);
  const std::size_t word_count = static_cast<std::size_t>(std::min(max_len, 6));
  auto word_lists = [&](auto alphabet, std::size_t size) {
    detail::odometer(len, size, [&](const std::vector<std::size_t>& idx) {
      ItemListPayload p;
      for (auto i : idx) p.items.emplace_back(alphabet[i]);
      visit(bare_instance(id, n, p));
    });
  };
  switch (id) {
    case TaskId::ParityCheck: word_lists(kParityWords, kParityWords.size()); break;
    case TaskId::CycleNavigation: word_lists(kMoves, kMoves.size()); break;
    case TaskId::ReverseList: word_lists(kVegetables, word_count); break;
    case TaskId::OddsFirst: word_lists(kAnimals, word_count); break;
    case TaskId::ModArithSimple: {
      const auto operands = detail::budget_alphabet({1, 2, 0, 3, 4}, len, std::size_t{1} << (len - 1));
      detail::odometer(len, operands.size(), [&](const std::vector<std::size_t>& idx) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << (len - 1)); ++mask) {
          ModArithSimplePayload p;
          for (std::size_t i = 0; i < len; ++i) {
            p.operands.push_back(operands[idx[i]]);
            if (i > 0) p.ops.push_back((mask >> (i - 1)) & 1 ? '-' : '+');
          }
          visit(bare_instance(id, n, p));
        }
      });
      break;
    }
    case TaskId::ModArithComplex: {
      if (n < 2) return;
      const auto shapes = detail::expression_shapes(len, kMaxExprDepth);
      const auto operands = detail::budget_alphabet({1, 2, 0, 3, 4}, len, shapes.size());
      for (const auto& shape : shapes) {
        detail::odometer(len, operands.size(), [&](const std::vector<std::size_t>& idx) {
          std::vector<int> values;
          for (auto i : idx) values.push_back(operands[i]);
          Expr e = shape;
          std::size_t next = 0;
          detail::assign_operands(e, values, next);
          visit(bare_instance(id, n, ExpressionPayload{std::move(e)}));
        });
      }
      break;
    }
    case TaskId::StackManipulation: {
      const std::array<std::string_view, 2> fruits = {"apple", "banana"};
      std::vector<std::vector<std::string>> starts = {{}};
      for (const auto& a : fruits) {
        starts.push_back({std::string(a)});
        for (const auto& b : fruits) starts.push_back({std::string(a), std::string(b)});
      }
      for (const auto& start : starts) {
        detail::odometer(len, 3, [&](const std::vector<std::size_t>& idx) {
          StackPayload p{start, {}};
          std::size_t height = start.size();
          std::vector<std::string> stack = start;
          for (auto i : idx) {
            if (i == 2) {
              if (stack.empty()) return;
              p.ops.push_back({StackOp::Kind::Pop, stack.back()});
              stack.pop_back();
            } else {
              p.ops.push_back({StackOp::Kind::Push, std::string(fruits[i])});
              stack.emplace_back(fruits[i]);
            }
          }
          (void)height;
          visit(bare_instance(id, n, p));
        });
      }
      break;
    }
    case TaskId::Addition:
    case TaskId::Multiplication: {
      const std::array<char, 3> digits = {'0', '5', '9'};
      std::vector<std::string> operands;
      detail::odometer(len, digits.size(), [&](const std::vector<std::size_t>& idx) {
        std::string s;
        for (auto i : idx) s.push_back(digits[i]);
        if (s.size() == 1 || s[0] != '0') operands.push_back(s);
      });
      for (const auto& a : operands) {
        for (const auto& b : operands) visit(bare_instance(id, n, OperandPairPayload{a, b}));
      }
      break;
    }
    case TaskId::Sorting: {
      detail::odometer(len, word_count, [&](const std::vector<std::size_t>& idx) {
        IntListPayload p;
        for (auto i : idx) p.values.push_back(static_cast<int>(i));
        visit(bare_instance(id, n, p));
      });
      break;
    }
  }
}

inline std::string final_state_text(const StepTemplate& t, const TaskInstance& inst) {
  StepState s = initial_state(t, inst);
  for (const auto& e : element_stream(inst)) s = schema_step(t, s, e);
  return s.rendered_text;
}

// Enumerates every input of length 1..max_len in the domain and decides
// whether the final emitted state determines the correct answer. Because
// emissions are produced by `schema_step`, the next state is a function of
// (state, element) by construction; what can fail is the read-out. For
// templates with a read-out (`finalize`), a wrong read-out is a registry
// defect and raises std::logic_error.
inline SufficiencyResult check_sufficiency(const StepTemplate& t, int max_len) {
  if (!has_schema(t)) throw Error(ErrorCode::InvalidParams, "unsupervised template has no state schema");
  if (max_len < 1) throw Error(ErrorCode::InvalidParams, "max_len must be >= 1");
  if (max_len > kSufficiencyMaxLength) {
    throw Error(ErrorCode::TooLarge, "max_len above enumeration guard " + std::to_string(kSufficiencyMaxLength));
  }
  SufficiencyResult result;
  std::map<std::string, std::pair<std::string, TaskInstance>> seen;
  bool done = false;
  for (int n = 1; n <= max_len && !done; ++n) {
    enumerate_domain(t.task_id, n, max_len, [&](const TaskInstance& inst) {
      if (done) return;
      ++result.inputs_checked;
      const std::string answer = oracle_solve(inst).answer;
      StepState s = initial_state(t, inst);
      for (const auto& e : element_stream(inst)) s = schema_step(t, s, e);
      if (auto readout = finalize(t, s); readout && *readout != answer) {
        throw std::logic_error("template " + std::string(to_string(t.task_id)) + " reads '" + *readout +
                               "' but the answer is '" + answer + "'");
      }
      auto [it, inserted] = seen.try_emplace(s.rendered_text, answer, inst);
      if (!inserted && it->second.first != answer) {
        TaskInstance first = it->second.second;
        TaskInstance second = inst;
        first.canonical_answer = it->second.first;
        second.canonical_answer = answer;
        result.verdict = Verdict::Insufficient;
        result.witness = SufficiencyWitness{first, second, s.rendered_text, it->second.first, answer};
        done = true;
      }
    });
  }
  return result;
}

// Re-derives both chains and answers; true iff the witness still proves
// insufficiency.
inline bool verify_witness(const StepTemplate& t, const SufficiencyWitness& w) {
  if (w.first.task_id != t.task_id || w.second.task_id != t.task_id) return false;
  const std::string a = final_state_text(t, w.first);
  const std::string b = final_state_text(t, w.second);
  const std::string ans_a = oracle_solve(w.first).answer;
  const std::string ans_b = oracle_solve(w.second).answer;
  return a == b && a == w.shared_state && ans_a != ans_b && ans_a == w.first_answer && ans_b == w.second_answer;
}

// Verdict at kAuditLength, computed once per template per process.
inline Verdict audit_verdict(const StepTemplate& t) {
  if (!has_schema(t)) return Verdict::Insufficient;
  static std::mutex mu;
  static std::map<std::pair<TaskId, SupervisionKind>, Verdict> cache;
  std::lock_guard lock(mu);
  const auto key = std::pair{t.task_id, t.kind};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const Verdict v = check_sufficiency(t, kAuditLength).verdict;
  cache.emplace(key, v);
  return v;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json template_to_json(const StepTemplate& t) {
  return {{"task_id", std::string(to_string(t.task_id))},
          {"kind", std::string(to_string(t.kind))},
          {"instruction_text", t.instruction_text},
          {"state_schema", t.state_schema},
          {"state_format", t.state_format},
          {"transition_defined", t.transition_defined}};
}

inline nlohmann::ordered_json registry_to_json() {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& t : all_templates()) out.push_back(template_to_json(t));
  return out;
}

inline nlohmann::ordered_json witness_to_json(const StepTemplate& t, const SufficiencyWitness& w) {
  return {{"task_id", std::string(to_string(t.task_id))},
          {"kind", std::string(to_string(t.kind))},
          {"first", instance_to_json(w.first)},
          {"second", instance_to_json(w.second)},
          {"shared_state", w.shared_state},
          {"first_answer", w.first_answer},
          {"second_answer", w.second_answer}};
}

inline std::pair<StepTemplate, SufficiencyWitness> witness_from_json(const nlohmann::ordered_json& j) {
  const auto& t = get_template(parse_task_id(j.at("task_id").get<std::string>()),
                               parse_supervision_kind(j.at("kind").get<std::string>()));
  SufficiencyWitness w{instance_from_json(j.at("first")), instance_from_json(j.at("second")),
                       j.at("shared_state").get<std::string>(), j.at("first_answer").get<std::string>(),
                       j.at("second_answer").get<std::string>()};
  return {t, w};
}

}  // namespace cotsup
