#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cotsup/templates.hpp"

using namespace cotsup;

namespace {

const std::array<SupervisionKind, 2> kSchemaKinds = {SupervisionKind::Correct, SupervisionKind::Incorrect};

TaskInstance prefix_of(const TaskInstance& inst, std::size_t t) {
  TaskInstance p = inst;
  p.length_n = static_cast<int>(t);
  std::visit(
      [&](auto& payload) {
        using P = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<P, ItemListPayload>) {
          payload.items.resize(t);
        } else if constexpr (std::is_same_v<P, ModArithSimplePayload>) {
          payload.operands.resize(t);
          payload.ops.resize(t - 1);
        } else if constexpr (std::is_same_v<P, StackPayload>) {
          payload.ops.resize(t);
        } else if constexpr (std::is_same_v<P, IntListPayload>) {
          payload.values.resize(t);
        }
      },
      p.payload);
  return p;
}

// What the Correct template should show after t elements, computed directly.
std::string expected_correct_state(const TaskInstance& inst, std::size_t t) {
  switch (inst.task_id) {
    case TaskId::ModArithSimple:
      return "partial sum: " + oracle_solve(prefix_of(inst, t)).answer;
    case TaskId::ParityCheck:
      return std::string("counter: ") + (oracle_solve(prefix_of(inst, t)).answer == "True" ? "even" : "odd");
    case TaskId::CycleNavigation:
      return oracle_solve(prefix_of(inst, t)).answer;
    case TaskId::StackManipulation:
      return "stack: " + oracle_solve(prefix_of(inst, t)).answer;
    case TaskId::ReverseList: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      std::vector<std::string> tail(items.rbegin(), items.rbegin() + static_cast<std::ptrdiff_t>(t));
      return "reversed so far: " + format_list(tail);
    }
    case TaskId::OddsFirst: {
      const auto& items = payload_as<ItemListPayload>(inst).items;
      std::vector<std::string> odd, even;
      for (std::size_t i = 0; i < t; ++i) (i % 2 == 0 ? odd : even).push_back(items[i]);
      return "odd: " + format_list(odd) + " even: " + format_list(even);
    }
    case TaskId::Addition: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      const unsigned long long a = std::stoull(p.lhs), b = std::stoull(p.rhs);
      unsigned long long mod = 1;
      for (std::size_t i = 0; i < t; ++i) mod *= 10;
      const unsigned long long low = a % mod + b % mod;
      std::string digits = std::to_string(low % mod);
      digits.insert(0, t - digits.size(), '0');
      return "sum digits: " + digits + ", carry: " + std::to_string(low / mod);
    }
    case TaskId::Multiplication: {
      const auto& p = payload_as<OperandPairPayload>(inst);
      unsigned long long mod = 1;
      for (std::size_t i = 0; i < t; ++i) mod *= 10;
      return "running sum: " + std::to_string(std::stoull(p.lhs) * (std::stoull(p.rhs) % mod));
    }
    case TaskId::Sorting: {
      auto v = payload_as<IntListPayload>(inst).values;
      v.resize(t);
      std::sort(v.begin(), v.end());
      return "sorted so far: " + format_list(v);
    }
    case TaskId::ModArithComplex: {
      // Residues of the operand stack after t post-order tokens.
      std::vector<long long> stack;
      const auto tokens = to_postfix(payload_as<ExpressionPayload>(inst).expr);
      for (std::size_t i = 0; i < t; ++i) {
        const auto& tok = tokens[i];
        if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
          stack.push_back(std::stoll(tok));
          continue;
        }
        const long long r = stack.back();
        stack.pop_back();
        long long& l = stack.back();
        l = tok == "+" ? l + r : tok == "-" ? l - r : l * r;
        l = ((l % 5) + 5) % 5;
      }
      return "reduced values: " + format_list(std::vector<std::int64_t>(stack.begin(), stack.end()));
    }
  }
  return {};
}

}  // namespace

TEST(Registry, HoldsThreeTemplatesPerTask) {
  const auto all = all_templates();
  EXPECT_EQ(all.size(), 30u);
  for (TaskId id : kAllTasks) {
    EXPECT_TRUE(get_template(id, SupervisionKind::Correct).transition_defined);
    EXPECT_FALSE(get_template(id, SupervisionKind::Incorrect).transition_defined);
    EXPECT_TRUE(get_template(id, SupervisionKind::Unsupervised).state_schema.empty());
  }
  EXPECT_THROW(parse_supervision_kind("maybe"), Error);
}

TEST(Registry, UsesThePublishedInstructionTexts) {
  EXPECT_EQ(get_template(TaskId::ModArithSimple, SupervisionKind::Correct).instruction_text,
            "Write down partial sums after each step");
  EXPECT_EQ(get_template(TaskId::ParityCheck, SupervisionKind::Correct).instruction_text,
            "Write down “even” or “odd” counter after each word in each step");
  EXPECT_EQ(get_template(TaskId::CycleNavigation, SupervisionKind::Incorrect).instruction_text,
            "Write down the total number of “forward” at each step");
  EXPECT_EQ(get_template(TaskId::StackManipulation, SupervisionKind::Incorrect).instruction_text,
            "Write down the number of operations performed up to that step");
  EXPECT_EQ(get_template(TaskId::ReverseList, SupervisionKind::Incorrect).instruction_text,
            "Write down the value to be added to the reversed list and the remaining original list");
  EXPECT_EQ(get_template(TaskId::ModArithComplex, SupervisionKind::Correct).instruction_text,
            "Write down the formula with reduced values in the performed operations at each step");
}

TEST(Transition, IsRefusedForTemplatesThatDropTheState) {
  const auto inst = generate_instance(TaskId::ParityCheck, 3, 1);
  const auto& t = get_template(TaskId::ParityCheck, SupervisionKind::Incorrect);
  const auto s0 = initial_state(t, inst);
  try {
    transition(t, s0, "banana");
    FAIL() << "expected InsufficientState";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientState);
  }
  EXPECT_EQ(schema_step(t, s0, "banana").rendered_text, "target word: yes");
}

TEST(Transition, CorrectStatesProjectTheTrueMachineState) {
  for (TaskId id : kAllTasks) {
    const auto& t = get_template(id, SupervisionKind::Correct);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const int n = id == TaskId::Addition || id == TaskId::Multiplication ? 8 : 12;
      const auto inst = generate_instance(id, n, seed);
      const auto chain = run_template(t, inst);
      ASSERT_EQ(chain.size(), element_stream(inst).size());
      for (std::size_t i = 0; i < chain.size(); ++i) {
        ASSERT_EQ(chain[i].rendered_text, expected_correct_state(inst, i + 1)) << to_string(id) << " step " << i + 1;
      }
      EXPECT_EQ(finalize(t, chain.back()), std::optional(inst.canonical_answer));
      StepState s = initial_state(t, inst);
      for (const auto& e : element_stream(inst)) s = transition(t, s, e);
      EXPECT_EQ(s, chain.back());
    }
  }
}

TEST(Transition, StepCountEqualsLengthExceptForPostOrderExpressions) {
  for (TaskId id : kAllTasks) {
    const auto inst = generate_instance(id, 7, 3);
    const std::size_t expected = id == TaskId::ModArithComplex ? 13 : 7;
    EXPECT_EQ(element_stream(inst).size(), expected) << to_string(id);
  }
}

TEST(States, RenderAndParseRoundTrip) {
  for (TaskId id : kAllTasks) {
    for (auto kind : kSchemaKinds) {
      const auto& t = get_template(id, kind);
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = generate_instance(id, 6, seed);
        for (const auto& s : run_template(t, inst)) {
          const auto parsed = parse_state(t, s.rendered_text);
          ASSERT_TRUE(parsed.has_value()) << s.rendered_text;
          EXPECT_EQ(*parsed, s);
        }
      }
    }
  }
}

TEST(States, ParsingToleratesCaseAndSpacing) {
  const auto& t = get_template(TaskId::StackManipulation, SupervisionKind::Correct);
  const auto s = parse_state(t, "  Stack:   (Apple,banana ,  ORANGE) ");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->rendered_text, "stack: (apple, banana, orange)");
  EXPECT_FALSE(parse_state(t, "operations performed: 3"));
  EXPECT_FALSE(parse_state(get_template(TaskId::ParityCheck, SupervisionKind::Unsupervised), "counter: odd"));
}

TEST(States, PerturbationAlwaysChangesTheState) {
  Rng rng(4);
  for (TaskId id : kAllTasks) {
    for (auto kind : kSchemaKinds) {
      const auto& t = get_template(id, kind);
      const auto inst = generate_instance(id, 6, 2);
      StepState prev = initial_state(t, inst);
      for (const auto& e : element_stream(inst)) {
        const StepState next = schema_step(t, prev, e);
        for (int k = 0; k < 5; ++k) {
          const StepState bad = perturb_state(t, next, e, rng);
          EXPECT_FALSE(bad == next) << to_string(id) << " " << next.rendered_text;
          EXPECT_TRUE(parse_state(t, bad.rendered_text).has_value()) << bad.rendered_text;
        }
        prev = next;
      }
    }
  }
}

TEST(Sufficiency, VerdictsAtSmallLengths) {
  for (TaskId id : kAllTasks) {
    const auto good = check_sufficiency(get_template(id, SupervisionKind::Correct), 4);
    EXPECT_EQ(good.verdict, Verdict::Sufficient) << to_string(id);
    EXPECT_FALSE(good.witness.has_value());
    const auto& bad_t = get_template(id, SupervisionKind::Incorrect);
    const auto bad = check_sufficiency(bad_t, 4);
    EXPECT_EQ(bad.verdict, Verdict::Insufficient) << to_string(id);
    ASSERT_TRUE(bad.witness.has_value());
    EXPECT_TRUE(verify_witness(bad_t, *bad.witness));
  }
}

TEST(Sufficiency, GuardsAndPreconditions) {
  const auto& t = get_template(TaskId::ParityCheck, SupervisionKind::Correct);
  try {
    check_sufficiency(t, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
  EXPECT_THROW(check_sufficiency(get_template(TaskId::ParityCheck, SupervisionKind::Unsupervised), 3), Error);
  EXPECT_THROW(check_sufficiency(t, 0), Error);
}

TEST(Sufficiency, EnumerationCoversTheWholeSmallDomain) {
  std::size_t count = 0;
  enumerate_domain(TaskId::CycleNavigation, 3, 6, [&](const TaskInstance&) { ++count; });
  EXPECT_EQ(count, 27u);
  count = 0;
  enumerate_domain(TaskId::ModArithComplex, 3, 6, [&](const TaskInstance& inst) {
    EXPECT_NO_THROW(validate_instance(inst));
    ++count;
  });
  // 23 operator trees with three leaves, operands 0-4 each.
  EXPECT_EQ(count, 23u * 125u);
}

TEST(Witness, HandBuiltCycleWitnessHolds) {
  // Both inputs contain one "forward", so the forward counter cannot tell
  // them apart, yet they end in different states.
  const auto& t = get_template(TaskId::CycleNavigation, SupervisionKind::Incorrect);
  auto make = [](std::vector<std::string> moves) {
    TaskInstance inst;
    inst.task_id = TaskId::CycleNavigation;
    inst.length_n = static_cast<int>(moves.size());
    inst.payload = ItemListPayload{std::move(moves)};
    inst.canonical_answer = oracle_solve(inst).answer;
    return inst;
  };
  SufficiencyWitness w{make({"forward", "backward"}), make({"forward", "stay"}), "forward count: 1", "state 1",
                       "state 2"};
  EXPECT_TRUE(verify_witness(t, w));
  w.second_answer = "state 3";
  EXPECT_FALSE(verify_witness(t, w));
}

TEST(Witness, StoredWitnessFilesStillVerify) {
  const std::filesystem::path dir = std::filesystem::path(COTSUP_FIXTURES) / "witnesses";
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::ifstream in(entry.path());
    const auto j = nlohmann::ordered_json::parse(in);
    const auto [t, w] = witness_from_json(j);
    EXPECT_EQ(t.kind, SupervisionKind::Incorrect);
    EXPECT_TRUE(verify_witness(t, w)) << entry.path();
    auto tampered = w;
    tampered.shared_state += "x";
    EXPECT_FALSE(verify_witness(t, tampered));
    ++files;
  }
  EXPECT_EQ(files, 10u);
}
