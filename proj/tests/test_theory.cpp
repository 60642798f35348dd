#include <gtest/gtest.h>

#include "cotsup/theory.hpp"

using namespace cotsup;

namespace {

std::vector<std::vector<cpp_int>> pascal(std::size_t rows) {
  std::vector<std::vector<cpp_int>> p(rows + 1);
  for (std::size_t m = 0; m <= rows; ++m) {
    p[m].assign(m + 1, 1);
    for (std::size_t s = 1; s < m; ++s) p[m][s] = p[m - 1][s - 1] + p[m - 1][s];
  }
  return p;
}

}  // namespace

TEST(TemplateCount, MatchesPascalsTriangle) {
  const auto p = pascal(100);
  for (std::uint64_t m = 0; m <= 100; ++m) {
    for (std::uint64_t s = 0; s <= m; ++s) ASSERT_EQ(template_count(m, s), p[m][s]) << m << " " << s;
  }
}

TEST(TemplateCount, IsSymmetricAndGuarded) {
  for (std::uint64_t m = 1; m <= 40; ++m) {
    for (std::uint64_t s = 0; s <= m; ++s) EXPECT_EQ(template_count(m, s), template_count(m, m - s));
  }
  EXPECT_EQ(template_count(64, 32).str(), "1832624140942590534");
  try {
    template_count(3, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
  }
}

TEST(AnswerSpace, BlindRatiosForIncorrectTemplates) {
  const auto in = [](TaskId id, int n) {
    return answer_space_ratio(id, n, get_template(id, SupervisionKind::Incorrect)).ratio_text();
  };
  EXPECT_EQ(in(TaskId::ParityCheck, 6), "1/2");
  EXPECT_EQ(in(TaskId::CycleNavigation, 6), "1/5");
  EXPECT_EQ(in(TaskId::ModArithSimple, 6), "1/5");
  EXPECT_EQ(in(TaskId::ReverseList, 4), "1/24");
  EXPECT_EQ(in(TaskId::ReverseList, 5), "1/120");
}

TEST(AnswerSpace, SufficientTemplatesAreGuided) {
  for (TaskId id : {TaskId::ParityCheck, TaskId::CycleNavigation, TaskId::ReverseList}) {
    const auto est = answer_space_ratio(id, 4, get_template(id, SupervisionKind::Correct));
    EXPECT_TRUE(est.guided);
    EXPECT_EQ(est.ratio_text(), "1");
    EXPECT_DOUBLE_EQ(est.ratio(), 1.0);
  }
  const auto un = answer_space_ratio(TaskId::ParityCheck, 4, get_template(TaskId::ParityCheck, SupervisionKind::Unsupervised));
  EXPECT_FALSE(un.guided);
}

TEST(AnswerSpace, BlindRatioShrinksWithLength) {
  for (TaskId id : {TaskId::ReverseList, TaskId::OddsFirst, TaskId::Sorting, TaskId::StackManipulation}) {
    const auto& t = get_template(id, SupervisionKind::Incorrect);
    double prev = 1.0;
    for (int n = 2; n <= 8; ++n) {
      const double r = answer_space_ratio(id, n, t).ratio();
      EXPECT_LT(r, prev) << to_string(id) << " n=" << n;
      prev = r;
    }
  }
}

TEST(AnswerSpace, Guards) {
  const auto& t = get_template(TaskId::ParityCheck, SupervisionKind::Incorrect);
  EXPECT_THROW(answer_space_ratio(TaskId::ParityCheck, 9, t), Error);
  EXPECT_THROW(answer_space_ratio(TaskId::ParityCheck, 0, t), Error);
  EXPECT_THROW(answer_space_ratio(TaskId::CycleNavigation, 3, t), Error);
}

TEST(Depth, ProfileFollowsTheSequentialStepCounts) {
  const auto lin = depth_profile(TaskId::CycleNavigation, 1, 20);
  ASSERT_EQ(lin.size(), 20u);
  for (const auto& [n, d] : lin) EXPECT_EQ(d, static_cast<std::uint64_t>(n));
  // Schoolbook multiplication: one digit product per digit pair.
  EXPECT_EQ(depth_profile(TaskId::Multiplication, 7, 7).front().second, 49u);
  // Insertion into a sorted prefix of size k costs up to k + 1 comparisons.
  std::uint64_t sum = 0;
  for (int k = 0; k < 10; ++k) sum += static_cast<std::uint64_t>(k + 1);
  EXPECT_EQ(depth_profile(TaskId::Sorting, 10, 10).front().second, sum);
  EXPECT_THROW(depth_profile(TaskId::Sorting, 0, 3), Error);
  EXPECT_THROW(depth_profile(TaskId::Sorting, 5, 4), Error);
  EXPECT_THROW(depth_profile(TaskId::Sorting, 1, 21), Error);
}
