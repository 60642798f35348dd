#pragma once

// Prompt-space size and answer-space ratio.

#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cotsup/core.hpp"
#include "cotsup/oracle.hpp"
#include "cotsup/task_suite.hpp"
#include "cotsup/templates.hpp"

namespace cotsup {

using boost::multiprecision::cpp_int;

// C(m, s): number of ways to extract s of the m bits held in the hidden state.
inline cpp_int template_count(std::uint64_t m, std::uint64_t s) {
  if (s > m) throw Error(ErrorCode::InvalidParams, "s must not exceed m");
  if (s > m - s) s = m - s;
  cpp_int c = 1;
  // After step i, c == C(m - s + i, i), always an integer.
  for (std::uint64_t i = 1; i <= s; ++i) {
    c *= m - s + i;
    c /= i;
  }
  return c;
}

struct AnswerSpaceEstimate {
  cpp_int solution_count;
  cpp_int space_count;
  SupervisionKind template_kind = SupervisionKind::Unsupervised;
  bool guided = false;  // ratio forced to 1 by a Sufficient template

  // Ratio as "num/den" in lowest terms.
  std::string ratio_text() const {
    if (guided) return "1";
    const cpp_int g = boost::multiprecision::gcd(solution_count, space_count);
    const cpp_int num = solution_count / g;
    const cpp_int den = space_count / g;
    return den == 1 ? num.str() : num.str() + "/" + den.str();
  }

  double ratio() const {
    if (guided) return 1.0;
    return solution_count.convert_to<double>() / space_count.convert_to<double>();
  }
};

inline constexpr int kAnswerSpaceMaxLength = 8;

// Instance of length n with the largest answer space for the task: distinct
// items, distinct sort keys, a stack built only by pushes, all-ones operands.
inline TaskInstance representative_instance(TaskId id, int n) {
  const auto len = static_cast<std::size_t>(n);
  TaskInstance inst;
  inst.task_id = id;
  inst.length_n = n;
  auto names = [&](const auto& alphabet) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < len; ++i) out.emplace_back(alphabet[i % alphabet.size()]);
    return out;
  };
  switch (id) {
    case TaskId::ModArithSimple:
      inst.payload = ModArithSimplePayload{std::vector<int>(len, 1), std::vector<char>(len - 1, '+')};
      break;
    case TaskId::ParityCheck: inst.payload = ItemListPayload{names(kParityWords)}; break;
    case TaskId::CycleNavigation: inst.payload = ItemListPayload{std::vector<std::string>(len, "forward")}; break;
    case TaskId::ReverseList: inst.payload = ItemListPayload{names(kVegetables)}; break;
    case TaskId::OddsFirst: inst.payload = ItemListPayload{names(kAnimals)}; break;
    case TaskId::StackManipulation: {
      StackPayload p;
      for (const auto& f : names(kFruits)) p.ops.push_back({StackOp::Kind::Push, f});
      inst.payload = p;
      break;
    }
    case TaskId::ModArithComplex: {
      if (n < 2) throw Error(ErrorCode::UnsupportedLength, "mod-arith-complex needs at least two operands");
      std::vector<Expr> leaves(len, make_leaf(1));
      inst.payload = ExpressionPayload{make_group(leaves, std::vector<char>(len - 1, '+'))};
      break;
    }
    case TaskId::Addition:
    case TaskId::Multiplication:
      inst.payload = OperandPairPayload{std::string(len, '1'), std::string(len, '1')};
      break;
    case TaskId::Sorting: {
      IntListPayload p;
      for (std::size_t i = 0; i < len; ++i) p.values.push_back(static_cast<int>(len - i));
      inst.payload = p;
      break;
    }
  }
  inst.canonical_answer = oracle_solve(inst).answer;
  return inst;
}

// Ratio |CR| / |S| over the final-answer candidate set. A
// template that passes the sufficiency audit leads to the answer (ratio 1);
// otherwise the search is blind.
inline AnswerSpaceEstimate answer_space_ratio(TaskId id, int length_n, const StepTemplate& t) {
  if (length_n < 1) throw Error(ErrorCode::UnsupportedLength, "length must be >= 1");
  if (length_n > kAnswerSpaceMaxLength) {
    throw Error(ErrorCode::TooLarge, "length above enumeration guard " + std::to_string(kAnswerSpaceMaxLength));
  }
  if (t.task_id != id) throw Error(ErrorCode::InvalidCondition, "template belongs to another task");
  const TaskInstance inst = representative_instance(id, length_n);
  AnswerSpaceEstimate est;
  est.solution_count = 1;
  est.space_count = candidate_answer_count(inst);
  est.template_kind = t.kind;
  est.guided = has_schema(t) && audit_verdict(t) == Verdict::Sufficient;
  return est;
}

inline std::vector<std::pair<int, std::uint64_t>> depth_profile(TaskId id, int n_from, int n_to) {
  if (n_from < 1 || n_from > n_to || n_to > 20) {
    throw Error(ErrorCode::InvalidParams, "depth profile needs 1 <= from <= to <= 20");
  }
  std::vector<std::pair<int, std::uint64_t>> rows;
  for (int n = n_from; n <= n_to; ++n) rows.emplace_back(n, required_depth(id, n));
  return rows;
}

}  // namespace cotsup
