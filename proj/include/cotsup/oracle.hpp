#pragma once

// Ground-truth solvers.
//
// Each task is solved by an explicit machine whose state is updated one input
// element at a time through a pure transition function; the machine counts
// transition applications (the sequential depth the instance needed).
//   R  tasks: finite-state machines
//   CF tasks: stack machines
//   CS tasks: bounded-tape machines
//
// brute_force_solve() recomputes every answer by a structurally different,
// naive route and exists only to cross-check the machines.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cotsup/core.hpp"
#include "cotsup/instance.hpp"

namespace cotsup {

struct DepthReport {
  std::uint64_t sequential_updates = 0;
};

struct OracleResult {
  std::string answer;
  DepthReport depth;
};

// Wraps a machine state and counts how many transitions were applied to it.
// The transition is any callable (const State&, const Input&) -> State, so
// it cannot observe anything but the current state and the next element.
template <typename State>
class CountingMachine {
 public:
  explicit CountingMachine(State initial) : state_(std::move(initial)) {}

  template <typename Input, typename Transition>
  void feed(const Input& input, Transition&& delta) {
    state_ = delta(static_cast<const State&>(state_), input);
    ++updates_;
  }

  const State& state() const { return state_; }
  std::uint64_t updates() const { return updates_; }

 private:
  State state_;
  std::uint64_t updates_ = 0;
};

namespace machines {

inline int positive_mod(std::int64_t v, int m) { return static_cast<int>(((v % m) + m) % m); }

// --- R: finite-state -------------------------------------------------------

inline int mod_sum_delta(int residue, int signed_operand) {
  return positive_mod(residue + signed_operand, kModulus);
}

inline bool parity_delta(bool even, const std::string& word) {
  return word == kParityTarget ? !even : even;
}

inline int cycle_delta(int state, const std::string& move) {
  if (move == "forward") return state % kCycleStates + 1;
  if (move == "backward") return (state + kCycleStates - 2) % kCycleStates + 1;
  if (move == "stay") return state;
  throw Error(ErrorCode::MalformedPayload, "unknown move '" + move + "'");
}

// --- CF: stack --------------------------------------------------------------

using Stack = std::vector<std::string>;

inline Stack stack_delta(const Stack& stack, const StackOp& op) {
  Stack next = stack;
  if (op.kind == StackOp::Kind::Push) {
    next.push_back(op.value);
  } else {
    if (next.empty()) throw Error(ErrorCode::MalformedPayload, "pop on empty stack");
    next.pop_back();
  }
  return next;
}

// Reverse-list runs a stack machine in two phases: push every item, then pop
// every item onto the output tape.
struct ReverseState {
  Stack stack;
  std::vector<std::string> output;
};

struct ReverseInput {
  bool push = true;
  std::string item;
};

inline ReverseState reverse_delta(const ReverseState& s, const ReverseInput& in) {
  ReverseState next = s;
  if (in.push) {
    next.stack.push_back(in.item);
  } else {
    if (next.stack.empty()) throw Error(ErrorCode::MalformedPayload, "reverse pop on empty stack");
    next.output.push_back(next.stack.back());
    next.stack.pop_back();
  }
  return next;
}

// Operand stack over a post-order token stream.
using OperandStack = std::vector<int>;

inline OperandStack expr_delta(const OperandStack& stack, const std::string& token) {
  OperandStack next = stack;
  if (token.size() == 1 && token[0] >= '0' && token[0] <= '9') {
    next.push_back(token[0] - '0');
    return next;
  }
  if (next.size() < 2) throw Error(ErrorCode::MalformedPayload, "operator '" + token + "' lacks operands");
  const int rhs = next.back();
  next.pop_back();
  const int lhs = next.back();
  next.pop_back();
  int v = 0;
  if (token == "+") v = lhs + rhs;
  else if (token == "-") v = lhs - rhs;
  else if (token == "*") v = lhs * rhs;
  else throw Error(ErrorCode::MalformedPayload, "unknown operator '" + token + "'");
  next.push_back(positive_mod(v, kModulus));
  return next;
}

// --- CS: bounded tape --------------------------------------------------------

// Odds-first scans the input tape twice; the first pass copies odd positions,
// the second copies even positions.
struct OddsFirstState {
  std::size_t head = 0;
  int pass = 0;
  std::vector<std::string> output;
};

inline OddsFirstState odds_first_delta(const OddsFirstState& s, const std::vector<std::string>& tape) {
  OddsFirstState next = s;
  if (next.head % 2 == static_cast<std::size_t>(next.pass)) next.output.push_back(tape.at(next.head));
  ++next.head;
  if (next.head == tape.size() && next.pass == 0) {
    next.head = 0;
    next.pass = 1;
  }
  return next;
}

// Column-wise addition, least significant column first. Output digits are
// written least significant first.
struct AdditionState {
  int carry = 0;
  std::string digits_lsb_first;
};

inline AdditionState addition_delta(const AdditionState& s, const std::pair<int, int>& column) {
  const int sum = column.first + column.second + s.carry;
  AdditionState next = s;
  next.digits_lsb_first.push_back(static_cast<char>('0' + sum % 10));
  next.carry = sum / 10;
  return next;
}

// Digit-pair multiplication into a result tape (least significant cell
// first). Each transition adds one partial product a_i * b_j at cell i+j and
// propagates the carry.
struct ProductTape {
  std::vector<int> cells;
};

struct DigitProduct {
  int a = 0;
  int b = 0;
  std::size_t place = 0;
};

inline ProductTape product_delta(const ProductTape& tape, const DigitProduct& p) {
  ProductTape next = tape;
  int carry = p.a * p.b;
  std::size_t k = p.place;
  while (carry != 0) {
    if (k >= next.cells.size()) next.cells.resize(k + 1, 0);
    const int v = next.cells[k] + carry;
    next.cells[k] = v % 10;
    carry = v / 10;
    ++k;
  }
  return next;
}

// Insertion sort with a data-independent schedule: each new element is
// written at the end of the sorted prefix, then compared against every prefix
// position (compare-and-swap, no early exit).
struct SortTape {
  std::vector<int> cells;
};

struct SortAction {
  bool write = false;
  int value = 0;       // for writes
  std::size_t at = 0;  // for compare-and-swap of cells [at-1, at]
};

inline SortTape sort_delta(const SortTape& tape, const SortAction& action) {
  SortTape next = tape;
  if (action.write) {
    next.cells.push_back(action.value);
  } else if (next.cells.at(action.at - 1) > next.cells.at(action.at)) {
    std::swap(next.cells[action.at - 1], next.cells[action.at]);
  }
  return next;
}

}  // namespace machines

// ---------------------------------------------------------------------------

inline std::uint64_t required_depth(TaskId id, int length_n) {
  if (length_n < 1) throw Error(ErrorCode::UnsupportedLength, "length_n must be >= 1");
  const auto n = static_cast<std::uint64_t>(length_n);
  switch (id) {
    case TaskId::Multiplication: return n * n;
    case TaskId::Sorting: return n * (n + 1) / 2;
    default: return n;
  }
}

namespace detail {

inline void require_digits(const std::string& s, const char* which) {
  if (!decimal::is_digits(s)) {
    throw Error(ErrorCode::MalformedPayload, std::string(which) + " operand '" + s + "' is not a digit string");
  }
}

inline void check_simple(const ModArithSimplePayload& p) {
  if (p.operands.empty() || p.ops.size() + 1 != p.operands.size()) {
    throw Error(ErrorCode::MalformedPayload, "operator count must be operand count - 1");
  }
}

}  // namespace detail

inline OracleResult oracle_solve(const TaskInstance& inst) {
  using namespace machines;
  switch (inst.task_id) {
    case TaskId::ModArithSimple: {
      const auto& p = payload_as<ModArithSimplePayload>(inst);
      detail::check_simple(p);
      CountingMachine<int> m(0);
      for (std::size_t i = 0; i < p.operands.size(); ++i) {
        const int sign = (i == 0 || p.ops[i - 1] == '+') ? 1 : -1;
        m.feed(sign * p.operands[i], mod_sum_delta);
      }
      return {canonicalize_answer(inst.task_id, std::int64_t{m.state()}), {m.updates()}};
    }
    case TaskId::ParityCheck: {
      CountingMachine<bool> m(true);
      for (const auto& w : payload_as<ItemListPayload>(inst).items) m.feed(w, parity_delta);
      return {canonicalize_answer(inst.task_id, m.state()), {m.updates()}};
    }
    case TaskId::CycleNavigation: {
      CountingMachine<int> m(1);
      for (const auto& mv : payload_as<ItemListPayload>(inst).items) m.feed(mv, cycle_delta);
      return {canonicalize_answer(inst.task_id, CycleState{m.state()}), {m.updates()}};
    }
    case TaskId::StackManipulation: {
      const auto& p = payload_as<StackPayload>(inst);
      CountingMachine<Stack> m(p.initial);
      for (const auto& op : p.ops) m.feed(op, stack_delta);
      return {canonicalize_answer(inst.task_id, m.state()), {m.updates()}};
    }
    case TaskId::ReverseList: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      CountingMachine<ReverseState> m(ReverseState{});
      for (const auto& it : items) m.feed(ReverseInput{true, it}, reverse_delta);
      for (std::size_t i = 0; i < items.size(); ++i) m.feed(ReverseInput{false, {}}, reverse_delta);
      return {canonicalize_answer(inst.task_id, m.state().output), {m.updates()}};
    }
    case TaskId::ModArithComplex: {
      CountingMachine<OperandStack> m(OperandStack{});
      for (const auto& tok : to_postfix(payload_as<ExpressionPayload>(inst).expr)) m.feed(tok, expr_delta);
      if (m.state().size() != 1) throw Error(ErrorCode::MalformedPayload, "expression did not reduce to one value");
      return {canonicalize_answer(inst.task_id, std::int64_t{m.state().back()}), {m.updates()}};
    }
    case TaskId::OddsFirst: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      CountingMachine<OddsFirstState> m(OddsFirstState{});
      for (std::size_t i = 0; i < 2 * items.size(); ++i) m.feed(items, odds_first_delta);
      return {canonicalize_answer(inst.task_id, m.state().output), {m.updates()}};
    }
    case TaskId::Addition: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      detail::require_digits(p.lhs, "left");
      detail::require_digits(p.rhs, "right");
      const std::size_t width = std::max(p.lhs.size(), p.rhs.size());
      CountingMachine<AdditionState> m(AdditionState{});
      for (std::size_t k = 0; k < width; ++k) {
        const int a = k < p.lhs.size() ? p.lhs[p.lhs.size() - 1 - k] - '0' : 0;
        const int b = k < p.rhs.size() ? p.rhs[p.rhs.size() - 1 - k] - '0' : 0;
        m.feed(std::pair{a, b}, addition_delta);
      }
      std::string digits = m.state().digits_lsb_first;
      if (m.state().carry != 0) digits.push_back('1');
      std::reverse(digits.begin(), digits.end());
      return {canonicalize_answer(inst.task_id, DecimalDigits{digits}), {m.updates()}};
    }
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      detail::require_digits(p.lhs, "left");
      detail::require_digits(p.rhs, "right");
      CountingMachine<ProductTape> m(ProductTape{});
      for (std::size_t j = 0; j < p.rhs.size(); ++j) {
        for (std::size_t i = 0; i < p.lhs.size(); ++i) {
          const int a = p.lhs[p.lhs.size() - 1 - i] - '0';
          const int b = p.rhs[p.rhs.size() - 1 - j] - '0';
          m.feed(DigitProduct{a, b, i + j}, product_delta);
        }
      }
      std::string digits;
      for (auto it = m.state().cells.rbegin(); it != m.state().cells.rend(); ++it) {
        digits.push_back(static_cast<char>('0' + *it));
      }
      if (digits.empty()) digits = "0";
      return {canonicalize_answer(inst.task_id, DecimalDigits{digits}), {m.updates()}};
    }
    case TaskId::Sorting: {
      CountingMachine<SortTape> m(SortTape{});
      std::size_t written = 0;
      for (int v : payload_as<IntListPayload>(inst).values) {
        m.feed(SortAction{true, v, 0}, sort_delta);
        for (std::size_t at = written; at >= 1; --at) m.feed(SortAction{false, 0, at}, sort_delta);
        ++written;
      }
      std::vector<std::int64_t> out(m.state().cells.begin(), m.state().cells.end());
      return {canonicalize_answer(inst.task_id, out), {m.updates()}};
    }
  }
  throw Error(ErrorCode::MalformedPayload, "unknown task");
}

// ---------------------------------------------------------------------------
// Naive cross-check solvers.

inline constexpr int kBruteForceMaxLength = 12;

namespace detail {

using boost::multiprecision::cpp_int;

// Precedence-climbing evaluator over the expression text, exact integers.
class TextEvaluator {
 public:
  explicit TextEvaluator(const std::string& text) : text_(text) {}

  cpp_int run() {
    cpp_int v = sum();
    skip();
    if (pos_ != text_.size()) throw Error(ErrorCode::MalformedPayload, "trailing text in expression");
    return v;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }
  cpp_int sum() {
    cpp_int v = product();
    for (skip(); pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'); skip()) {
      const char op = text_[pos_++];
      cpp_int rhs = product();
      v = op == '+' ? cpp_int(v + rhs) : cpp_int(v - rhs);
    }
    return v;
  }
  cpp_int product() {
    cpp_int v = atom();
    for (skip(); pos_ < text_.size() && text_[pos_] == '*'; skip()) {
      ++pos_;
      v *= atom();
    }
    return v;
  }
  cpp_int atom() {
    skip();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      cpp_int v = sum();
      skip();
      if (pos_ >= text_.size() || text_[pos_] != ')') throw Error(ErrorCode::MalformedPayload, "missing ')'");
      ++pos_;
      return v;
    }
    cpp_int v = 0;
    bool any = false;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
      v = v * 10 + (text_[pos_++] - '0');
      any = true;
    }
    if (!any) throw Error(ErrorCode::MalformedPayload, "expected number");
    return v;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

// Base-10^4 limbs, least significant limb first.
using Limbs = std::vector<std::uint32_t>;
inline constexpr std::uint32_t kLimbBase = 10000;

inline Limbs to_limbs(const std::string& digits) {
  Limbs out;
  for (std::size_t end = digits.size(); end > 0;) {
    const std::size_t begin = end >= 4 ? end - 4 : 0;
    out.push_back(static_cast<std::uint32_t>(std::stoul(digits.substr(begin, end - begin))));
    end = begin;
  }
  return out;
}

inline std::string from_limbs(Limbs limbs) {
  while (limbs.size() > 1 && limbs.back() == 0) limbs.pop_back();
  if (limbs.empty()) return "0";
  std::string out = std::to_string(limbs.back());
  for (std::size_t i = limbs.size() - 1; i-- > 0;) {
    std::string chunk = std::to_string(limbs[i]);
    out += std::string(4 - chunk.size(), '0') + chunk;
  }
  return out;
}

inline std::string limb_add(const std::string& a, const std::string& b) {
  const Limbs x = to_limbs(a);
  const Limbs y = to_limbs(b);
  Limbs out(std::max(x.size(), y.size()) + 1, 0);
  std::uint32_t carry = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t v = carry;
    if (i < x.size()) v += x[i];
    if (i < y.size()) v += y[i];
    out[i] = v % kLimbBase;
    carry = v / kLimbBase;
  }
  return from_limbs(out);
}

inline std::string limb_multiply(const std::string& a, const std::string& b) {
  const Limbs x = to_limbs(a);
  const Limbs y = to_limbs(b);
  std::vector<std::uint64_t> acc(x.size() + y.size() + 1, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) acc[i + j] += std::uint64_t{x[i]} * y[j];
  }
  Limbs out(acc.size(), 0);
  std::uint64_t carry = 0;
  for (std::size_t k = 0; k < acc.size(); ++k) {
    const std::uint64_t v = acc[k] + carry;
    out[k] = static_cast<std::uint32_t>(v % kLimbBase);
    carry = v / kLimbBase;
  }
  return from_limbs(out);
}

}  // namespace detail

inline std::string brute_force_solve(const TaskInstance& inst) {
  if (inst.length_n > kBruteForceMaxLength) {
    throw Error(ErrorCode::TooLarge, "brute force is limited to length_n <= " + std::to_string(kBruteForceMaxLength));
  }
  const TaskId id = inst.task_id;
  switch (id) {
    case TaskId::ModArithSimple: {
      const auto& p = payload_as<ModArithSimplePayload>(inst);
      detail::check_simple(p);
      long long total = p.operands[0];
      for (std::size_t i = 1; i < p.operands.size(); ++i) total += (p.ops[i - 1] == '+' ? 1 : -1) * p.operands[i];
      return canonicalize_answer(id, std::int64_t{machines::positive_mod(total, kModulus)});
    }
    case TaskId::ParityCheck: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      const auto count = std::count(items.begin(), items.end(), std::string(kParityTarget));
      return canonicalize_answer(id, count % 2 == 0);
    }
    case TaskId::CycleNavigation: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      const auto net = std::count(items.begin(), items.end(), "forward") - std::count(items.begin(), items.end(), "backward");
      return canonicalize_answer(id, CycleState{machines::positive_mod(net, kCycleStates) + 1});
    }
    case TaskId::StackManipulation: {
      // Replays every prefix from scratch and keeps the last; the stack is
      // held top-first.
      const auto& p = payload_as<StackPayload>(inst);
      std::vector<std::string> top_first(p.initial.rbegin(), p.initial.rend());
      for (std::size_t upto = 0; upto <= p.ops.size(); ++upto) {
        top_first.assign(p.initial.rbegin(), p.initial.rend());
        for (std::size_t k = 0; k < upto; ++k) {
          if (p.ops[k].kind == StackOp::Kind::Push) {
            top_first.insert(top_first.begin(), p.ops[k].value);
          } else {
            if (top_first.empty()) throw Error(ErrorCode::MalformedPayload, "pop on empty stack");
            top_first.erase(top_first.begin());
          }
        }
      }
      return canonicalize_answer(id, std::vector<std::string>(top_first.rbegin(), top_first.rend()));
    }
    case TaskId::ReverseList: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      std::vector<std::string> out(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) out[i] = items[items.size() - 1 - i];
      return canonicalize_answer(id, out);
    }
    case TaskId::ModArithComplex: {
      const std::string text = render_expr(payload_as<ExpressionPayload>(inst).expr);
      const detail::cpp_int v = detail::TextEvaluator(text).run();
      detail::cpp_int r = v % kModulus;
      if (r < 0) r += kModulus;
      return canonicalize_answer(id, std::int64_t{r.convert_to<std::int64_t>()});
    }
    case TaskId::OddsFirst: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      std::vector<std::string> odd;
      std::vector<std::string> even;
      for (std::size_t i = 0; i < items.size(); ++i) ((i + 1) % 2 == 1 ? odd : even).push_back(items[i]);
      odd.insert(odd.end(), even.begin(), even.end());
      return canonicalize_answer(id, odd);
    }
    case TaskId::Addition: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      detail::require_digits(p.lhs, "left");
      detail::require_digits(p.rhs, "right");
      return canonicalize_answer(id, DecimalDigits{detail::limb_add(p.lhs, p.rhs)});
    }
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      detail::require_digits(p.lhs, "left");
      detail::require_digits(p.rhs, "right");
      return canonicalize_answer(id, DecimalDigits{detail::limb_multiply(p.lhs, p.rhs)});
    }
    case TaskId::Sorting: {
      std::vector<std::int64_t> v(payload_as<IntListPayload>(inst).values.begin(),
                                  payload_as<IntListPayload>(inst).values.end());
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t best = i;
        for (std::size_t j = i + 1; j < v.size(); ++j) {
          if (v[j] < v[best]) best = j;
        }
        std::swap(v[i], v[best]);
      }
      return canonicalize_answer(id, v);
    }
  }
  throw Error(ErrorCode::MalformedPayload, "unknown task");
}

// ---------------------------------------------------------------------------
// Known inconsistencies in the published worked examples.

struct Erratum {
  TaskId task_id;
  std::string input;
  std::string published;
  std::string computed;
  std::string note;
};

}  // namespace cotsup
