#include <gtest/gtest.h>

#include <fstream>

#include "cotsup/task_suite.hpp"

using namespace cotsup;

namespace {

std::vector<nlohmann::ordered_json> golden_lines() {
  std::ifstream in(std::string(COTSUP_FIXTURES) + "/golden_instances.jsonl");
  std::vector<nlohmann::ordered_json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::ordered_json::parse(line));
  }
  return out;
}

}  // namespace

TEST(Generation, IsAPureFunctionOfTaskLengthAndSeed) {
  for (TaskId id : kAllTasks) {
    for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
      EXPECT_EQ(generate_instance(id, 6, seed), generate_instance(id, 6, seed));
    }
  }
}

TEST(Generation, MatchesFrozenGoldenFile) {
  const auto lines = golden_lines();
  ASSERT_EQ(lines.size(), 11u);
  for (const auto& j : lines) {
    const auto stored = instance_from_json(j);
    const auto fresh = generate_instance(stored.task_id, stored.length_n, stored.seed);
    EXPECT_EQ(instance_to_json(fresh).dump(), j.dump()) << j.dump();
  }
}

TEST(Generation, GoldenAnswersAreHandChecked) {
  // Answers worked out by hand from the frozen payloads.
  const std::vector<std::string> expected = {
      "0",                             // 5 - 0 + 1 + 4 = 10
      "False",                         // three bananas
      "state 5",                       // 1 -> 2 -> 2 -> 1 -> 5
      "(apple, pear)",                 // three pushes, one pop
      "(leek, onion, tomato, turnip)",
      "2",                             // 3 + 5 - 6 - 5 = -3
      "(horse, monkey, cat, dog)",
      "10763",                         // 8858 + 1905
      "45735700",                      // 4700 * 9731
      "(5, 36, 44, 78)",
      "True",                          // no banana at all
  };
  const auto lines = golden_lines();
  ASSERT_EQ(lines.size(), expected.size());
  for (std::size_t i = 0; i < lines.size(); ++i) EXPECT_EQ(load_instance(lines[i]).canonical_answer, expected[i]);
}

TEST(Generation, RespectsLengthLawAndAlphabets) {
  for (TaskId id : kAllTasks) {
    for (int n = min_length(id); n <= 12; ++n) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = generate_instance(id, n, seed);
        EXPECT_NO_THROW(validate_instance(inst)) << to_string(id) << " n=" << n;
        EXPECT_EQ(inst.length_n, n);
      }
    }
  }
}

TEST(Generation, RejectsLengthsBelowTheTaskMinimum) {
  EXPECT_THROW(generate_instance(TaskId::ParityCheck, 0, 1), Error);
  EXPECT_THROW(generate_instance(TaskId::ModArithComplex, 1, 1), Error);
  try {
    generate_instance(TaskId::ModArithComplex, 1, 1);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedLength);
  }
}

TEST(Generation, LengthDrawsCoverTheRange) {
  std::set<int> seen;
  for (std::uint64_t i = 0; i < 400; ++i) {
    const auto inst = generate_instance(TaskId::Sorting, instance_seed(42, TaskId::Sorting, i), LengthRange{10, 20});
    seen.insert(inst.length_n);
  }
  EXPECT_EQ(seen.size(), 11u);
  EXPECT_EQ(*seen.begin(), 10);
  EXPECT_EQ(*seen.rbegin(), 20);
}

TEST(Generation, AddingTasksDoesNotMoveExistingSeeds) {
  // Seeds are keyed by task name, not by position in the task list.
  EXPECT_EQ(instance_seed(5, TaskId::Addition, 3),
            derive_seed(derive_seed(5, std::string_view("addition")), std::uint64_t{3}));
}

TEST(Json, RoundTripsEveryTask) {
  for (TaskId id : kAllTasks) {
    const auto inst = generate_instance(id, 7, 99);
    const auto back = instance_from_json(nlohmann::ordered_json::parse(instance_to_json(inst).dump()));
    EXPECT_EQ(back, inst) << to_string(id);
  }
}

TEST(Json, LoadRejectsTamperedAnswersAndAlphabets) {
  auto j = instance_to_json(generate_instance(TaskId::ParityCheck, 5, 1));
  j["canonical_answer"] = j["canonical_answer"] == "True" ? "False" : "True";
  EXPECT_THROW(load_instance(j), Error);

  auto k = instance_to_json(generate_instance(TaskId::ReverseList, 3, 1));
  k["payload"]["items"][0] = "granite";
  EXPECT_THROW(load_instance(k), Error);

  auto s = instance_to_json(generate_instance(TaskId::StackManipulation, 3, 1));
  s["payload"]["initial"] = nlohmann::ordered_json::array();
  s["payload"]["ops"] = nlohmann::ordered_json::array({{{"op", "pop"}, {"value", "apple"}},
                                                       {{"op", "push"}, {"value", "apple"}},
                                                       {{"op", "push"}, {"value", "apple"}}});
  EXPECT_THROW(load_instance(s), Error);
}

TEST(Render, ShowsTheProblemStatementInPlainText) {
  const auto simple = detail::manual_instance(TaskId::ModArithSimple, 3, ModArithSimplePayload{{4, 2, 3}, {'+', '-'}});
  EXPECT_NE(render_instance(simple).find("4 + 2 - 3"), std::string::npos);
  EXPECT_NE(render_instance(simple).find("modulo 5"), std::string::npos);
  const auto cyc = generate_instance(TaskId::CycleNavigation, 4, 2);
  EXPECT_NE(render_instance(cyc).find("5 states"), std::string::npos);
  EXPECT_NE(render_instance(cyc).find("state 1"), std::string::npos);
  const auto mul = generate_instance(TaskId::Multiplication, 3, 2);
  EXPECT_NE(render_instance(mul).find(" * "), std::string::npos);
}

TEST(Answers, NormalizationFoldsSurfaceVariation) {
  EXPECT_EQ(normalize_answer_text(TaskId::ParityCheck, "true"), "True");
  EXPECT_EQ(normalize_answer_text(TaskId::ParityCheck, " **FALSE**."), "False");
  EXPECT_EQ(normalize_answer_text(TaskId::Addition, "1,111,110"), "1111110");
  EXPECT_EQ(normalize_answer_text(TaskId::ReverseList, "(\"Onion\",potato, carrot)"), "(onion, potato, carrot)");
  EXPECT_EQ(normalize_answer_text(TaskId::CycleNavigation, "State 3"), "state 3");
  EXPECT_EQ(normalize_answer_text(TaskId::CycleNavigation, "3"), "state 3");
  EXPECT_EQ(normalize_answer_text(TaskId::Sorting, "(01, 3,5 , 8)"), "(1, 3, 5, 8)");
}

TEST(Answers, CanonicalizationIsIdempotentAndTypeChecked) {
  for (TaskId id : kAllTasks) {
    const auto inst = generate_instance(id, 5, 3);
    const auto once = canonicalize_answer(id, inst.canonical_answer);
    EXPECT_EQ(canonicalize_answer(id, once), once);
  }
  EXPECT_THROW(canonicalize_answer(TaskId::ParityCheck, std::int64_t{3}), Error);
  EXPECT_EQ(canonicalize_answer(TaskId::Sorting, std::vector<std::int64_t>{1, 2}), "(1, 2)");
}

TEST(CandidateSet, SizesFollowTheAnswerShape) {
  const auto rev = detail::manual_instance(TaskId::ReverseList, 4, ItemListPayload{{"leek", "kale", "yam", "okra"}});
  EXPECT_EQ(candidate_answer_count(rev), 24);
  const auto dup = detail::manual_instance(TaskId::ReverseList, 3, ItemListPayload{{"leek", "leek", "okra"}});
  EXPECT_EQ(candidate_answer_count(dup), 3);
  EXPECT_EQ(candidate_answer_count(generate_instance(TaskId::CycleNavigation, 9, 1)), 5);
  EXPECT_EQ(candidate_answer_count(generate_instance(TaskId::ParityCheck, 9, 1)), 2);
}

TEST(CandidateSet, SamplesStayInsideTheSet) {
  Rng rng(8);
  const auto inst = generate_instance(TaskId::OddsFirst, 6, 4);
  auto sorted = [](std::string s) {
    auto items = detail::split_list_items(s);
    std::sort(items.begin(), items.end());
    return items;
  };
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted(sample_candidate_answer(inst, rng)), sorted(inst.canonical_answer));
}
