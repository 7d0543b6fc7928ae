#include <gtest/gtest.h>

#include <random>

#include "dmpath/scheduler.hpp"
#include "fixtures.hpp"

using namespace dmpath;
using fixtures::idx;

namespace {

std::vector<std::size_t> take(AssignmentState& s, std::size_t count) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(s.select());
  return out;
}

std::vector<double> random_rational_point(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint64_t> w(n);
  std::uint64_t total = 0;
  for (auto& v : w) {
    v = rng() % 3 == 0 ? 0 : rng() % 25;
    total += v;
  }
  if (total == 0) {
    w[rng() % n] = 1;
    total = 1;
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = static_cast<double>(w[k]) / static_cast<double>(total);
  return x;
}

// Runs N selections and checks the prefix discrepancy bound at every step.
void check_discrepancy(const std::vector<double>& x, std::size_t steps) {
  AssignmentState s(x);
  std::size_t h = 0;
  for (double v : x) h += v > 0;
  const double bound = 1.0 + static_cast<double>(h);
  double worst = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    s.select();
    const auto a = s.assigned();
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(n) * x[i]));
    }
  }
  EXPECT_LT(worst, bound);
  double gap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    gap = std::max(gap, std::abs(static_cast<double>(s.assigned()[i]) / static_cast<double>(steps) - x[i]));
  }
  EXPECT_LE(gap, 1e-3);
}

}  // namespace

TEST(Assignment, SingleCombinationIsAlwaysChosen) {
  AssignmentState s({1, 0, 0, 0});
  for (auto v : take(s, 50)) EXPECT_EQ(v, 0u);
  AssignmentState t({0, 1});
  for (auto v : take(t, 50)) EXPECT_EQ(v, 1u);
}

TEST(Assignment, EvenSplitAlternates) {
  AssignmentState s({0.5, 0.5});
  const auto seq = take(s, 10);
  for (std::size_t k = 0; k < seq.size(); ++k) EXPECT_EQ(seq[k], k % 2);
}

TEST(Assignment, HandTraceOfUnevenSplit) {
  // x = (1/3, 2/3): first the largest entry, then the one furthest behind.
  // After three picks both deficits are zero and index 0 wins the tie.
  AssignmentState s({1.0 / 3, 2.0 / 3});
  EXPECT_TRUE(s.exact());
  EXPECT_EQ(take(s, 6), (std::vector<std::size_t>{1, 0, 1, 0, 1, 1}));
}

TEST(Assignment, CountersStayConsistent) {
  AssignmentState s({0.2, 0.3, 0.5});
  take(s, 1000);
  std::uint64_t sum = 0;
  for (auto v : s.assigned()) sum += v;
  EXPECT_EQ(sum, s.total());
  EXPECT_EQ(s.total(), 1000u);
}

TEST(Assignment, OneHundredMbpsMixSplitsExactly) {
  std::vector<double> x(9, 0.0);
  x[idx(0, 0)] = 4.0 / 25;
  x[idx(1, 2)] = 4.0 / 5;
  x[idx(2, 2)] = 1.0 / 25;
  AssignmentState s(x);
  take(s, 100000);
  EXPECT_NEAR(s.assigned()[idx(0, 0)] / 1e5, 4.0 / 25, 1e-5);
  EXPECT_NEAR(s.assigned()[idx(1, 2)] / 1e5, 4.0 / 5, 1e-5);
  EXPECT_NEAR(s.assigned()[idx(2, 2)] / 1e5, 1.0 / 25, 1e-5);
  EXPECT_EQ(s.assigned()[idx(0, 0)] + s.assigned()[idx(1, 2)] + s.assigned()[idx(2, 2)], 100000u);
}

TEST(Assignment, ZeroTargetsAreNeverChosen) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_rational_point(rng, 2 + rng() % 15);
    AssignmentState s(x);
    for (auto v : take(s, 500)) EXPECT_GT(x[v], 0.0);
  }
}

TEST(Assignment, DiscrepancyAndConvergenceOnRationalTargets) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_rational_point(rng, 2 + rng() % 15);
    check_discrepancy(x, 100000);
  }
}

TEST(Assignment, DiscrepancyAndConvergenceOnIrrationalTargets) {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = fixtures::random_simplex_point(rng, 2 + rng() % 15);
    AssignmentState probe(x);
    // Exponential draws are essentially never small rationals.
    if (std::count_if(x.begin(), x.end(), [](double v) { return v > 0; }) > 1) {
      EXPECT_FALSE(probe.exact());
    }
    check_discrepancy(x, 100000);
  }
}

TEST(Assignment, IsDeterministic) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = trial % 2 ? random_rational_point(rng, 9) : fixtures::random_simplex_point(rng, 9);
    AssignmentState a(x), b(x);
    EXPECT_EQ(take(a, 5000), take(b, 5000));
  }
}

TEST(Assignment, RejectsBadTargets) {
  EXPECT_THROW(AssignmentState({}), std::invalid_argument);
  EXPECT_THROW(AssignmentState({0.5, -0.1, 0.6}), std::invalid_argument);
  EXPECT_THROW(AssignmentState({0.3, 0.3}), std::invalid_argument);
  EXPECT_THROW(AssignmentState({0.5, std::nan("")}), std::invalid_argument);
}

TEST(NextAction, Examples) {
  EXPECT_EQ(next_action(Combination{{0, 0}}, 0), Action{Drop{}});
  EXPECT_EQ(next_action(Combination{{1, 2}}, 0), Action{Send{1}});
  EXPECT_EQ(next_action(Combination{{1, 2}}, 1), Action{Send{2}});
  EXPECT_EQ(next_action(Combination{{1, 0}}, 1), Action{Drop{}});
  EXPECT_EQ(next_action(Combination{{1, 2}}, 2), Action{Abandon{}});
  EXPECT_EQ(next_action(Combination{{3}}, 5), Action{Abandon{}});
}
