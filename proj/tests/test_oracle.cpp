#include <gtest/gtest.h>

#include "cotsup/task_suite.hpp"

using namespace cotsup;

TEST(Oracle, AgreesWithBruteForceOnSeededInstances) {
  for (TaskId id : kAllTasks) {
    for (int n = min_length(id); n <= 12; ++n) {
      for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto inst = generate_instance(id, n, seed);
        ASSERT_EQ(oracle_solve(inst).answer, brute_force_solve(inst)) << instance_to_json(inst).dump();
      }
    }
  }
}

TEST(Oracle, BruteForceRefusesLongInputs) {
  const auto inst = generate_instance(TaskId::Sorting, 13, 1);
  EXPECT_THROW(brute_force_solve(inst), Error);
}

TEST(Oracle, ReproducesPublishedWorkedExamples) {
  const auto examples = worked_examples();
  ASSERT_EQ(examples.size(), 8u);
  for (const auto& ex : examples) {
    EXPECT_EQ(oracle_solve(ex.instance).answer, normalize_answer_text(ex.instance.task_id, ex.published_answer))
        << to_string(ex.instance.task_id);
  }
}

TEST(Oracle, ComplexArithmeticErratumEvaluatesToTwo) {
  const auto errata = known_errata();
  const auto it = std::find_if(errata.begin(), errata.end(),
                               [](const Erratum& e) { return e.task_id == TaskId::ModArithComplex; });
  ASSERT_NE(it, errata.end());
  EXPECT_EQ(it->published, "0");
  EXPECT_EQ(it->computed, "2");  // (6 * 2) mod 5
  EXPECT_NE(erratum_note(*it).find("erratum"), std::string::npos);
}

TEST(Oracle, DepthMatchesTheMachineModel) {
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(oracle_solve(generate_instance(TaskId::ParityCheck, n, 1)).depth.sequential_updates, std::uint64_t(n));
    EXPECT_EQ(required_depth(TaskId::Multiplication, n), std::uint64_t(n * n));
    EXPECT_EQ(required_depth(TaskId::Sorting, n), std::uint64_t(n * (n + 1) / 2));
  }
  // 2x2 digits: four digit products on the tape machine.
  EXPECT_EQ(oracle_solve(detail::manual_instance(TaskId::Multiplication, 2, OperandPairPayload{"12", "34"}))
                .depth.sequential_updates,
            4u);
  EXPECT_THROW(required_depth(TaskId::ParityCheck, 0), Error);
}

TEST(Oracle, RejectsMalformedPayloads) {
  TaskInstance inst;
  inst.task_id = TaskId::StackManipulation;
  inst.payload = StackPayload{{}, {{StackOp::Kind::Pop, "apple"}}};
  EXPECT_THROW(oracle_solve(inst), Error);
  inst.task_id = TaskId::Addition;
  inst.length_n = 2;
  inst.payload = OperandPairPayload{"1a", "22"};
  EXPECT_THROW(oracle_solve(inst), Error);
  inst.task_id = TaskId::Sorting;
  EXPECT_THROW(oracle_solve(inst), Error);
}

TEST(Expressions, ParserAndRendererRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Expr e = random_expr(rng, 2 + i % 9, kMaxExprDepth);
    EXPECT_EQ(parse_expr(render_expr(e)), e);
    EXPECT_LE(nesting_depth(e), kMaxExprDepth);
  }
  EXPECT_EQ(parse_expr("((2 + 4) × (3 − 1))"), parse_expr("((2 + 4) * (3 - 1))"));
  EXPECT_THROW(parse_expr("(1 + 2 * 3)"), Error);
  EXPECT_THROW(parse_expr("(12 + 3)"), Error);
}

TEST(Expressions, ArithmeticAgreesWithAnIndependentEvaluator) {
  // Left-to-right evaluation of homogeneous groups, done directly on the tree.
  std::function<long long(const Expr&)> eval = [&](const Expr& e) -> long long {
    if (e.is_leaf()) return e.value;
    long long v = eval(e.children[0]);
    for (std::size_t i = 1; i < e.children.size(); ++i) {
      const long long r = eval(e.children[i]);
      v = e.ops[i - 1] == '+' ? v + r : e.ops[i - 1] == '-' ? v - r : v * r;
    }
    return v;
  };
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto inst = generate_instance(TaskId::ModArithComplex, 2 + static_cast<int>(seed % 10), seed);
    const long long v = eval(payload_as<ExpressionPayload>(inst).expr);
    EXPECT_EQ(inst.canonical_answer, std::to_string(((v % 5) + 5) % 5));
  }
}
