#include "vlab/adversary.hpp"

#include <gtest/gtest.h>

using namespace vlab;

TEST(CountingInequality, HoldsForSmallBudgets)
{
    for (std::size_t M = 1; M <= 10; ++M) {
        auto c = counting_inequality(M);
        EXPECT_TRUE(c.holds) << M;
        EXPECT_TRUE(c.factors_at_least_two) << M;
    }
    auto c3 = counting_inequality(3);
    EXPECT_EQ(c3.successes, Integer(8) * Integer(74613));
    EXPECT_EQ(c3.candidates, Integer(5311735));
}

TEST(CountingInequality, BinomialMatchesPascal)
{
    std::vector<std::vector<Integer>> pascal(40);
    for (std::size_t n = 0; n < 40; ++n) {
        pascal[n].assign(n + 1, Integer(1));
        for (std::size_t k = 1; k < n; ++k) pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
        for (std::size_t k = 0; k <= n; ++k) EXPECT_EQ(binomial(n, k), pascal[n][k]);
    }
}

TEST(HiddenSubset, ParametersAndGuard)
{
    auto p = GameParameters::hidden_subset(2);
    EXPECT_EQ(p.k(), 9U);
    EXPECT_EQ(p.n, 20U);
    auto half = GameParameters::hidden_subset(1, Rational(1, 2));
    auto cls = power_set(11);
    auto rep = play_exact(half, budgeted_closure_learner(cls, 1));
    EXPECT_FALSE(rep.hard);
}

TEST(HiddenSubset, ClosureLearnerExactAtMostHalf)
{
    auto p = GameParameters::hidden_subset(1);
    auto cls = power_set(p.n);
    auto rep = play_exact(p, budgeted_closure_learner(cls, 1));
    ASSERT_TRUE(rep.probability);
    EXPECT_EQ(rep.runs, 462U * 5U);
    EXPECT_LE(*rep.probability, Rational(1, 2));
    ASSERT_TRUE(rep.per_transcript_bound);
    EXPECT_EQ(*rep.per_transcript_bound, binomial(8, 2));
    EXPECT_LE(Integer(static_cast<unsigned long>(rep.max_per_transcript)), *rep.per_transcript_bound);
}

TEST(HiddenSubset, GreedyGuesserWithinCountingBound)
{
    // Outputs the sample plus the queried point plus, when that answers 1, the
    // next two unseen points: still one-sided-risky, still bounded.
    auto p = GameParameters::hidden_subset(1);
    Learner guesser = [n = p.n](Oracle& o) {
        Point x = o.draw_example();
        Point q = (x + 1) % n;
        Hypothesis h(n);
        h.set(x, true);
        if (o.membership_query(q)) {
            h.set(q, true);
            h.set((x + 2) % n, true);
        }
        return LearnerOutput{h, 1, 1, {}, {}};
    };
    auto rep = play_exact(p, guesser);
    EXPECT_LE(*rep.probability, Rational(1, 2));
    EXPECT_LE(Integer(static_cast<unsigned long>(rep.max_per_transcript)), *rep.per_transcript_bound);
}

TEST(HiddenSubset, OmniscientWinsAndBudgetIsEnforced)
{
    auto p = GameParameters::hidden_subset(1);
    EXPECT_THROW(play_exact(p, omniscient_learner(p.n)), BudgetViolation);
    p.unlimited_budget = true;
    auto rep = play_exact(p, omniscient_learner(p.n));
    EXPECT_EQ(*rep.probability, 1);
}

TEST(HiddenSubset, MonteCarloAgreesWithExact)
{
    auto p = GameParameters::hidden_subset(1);
    p.unlimited_budget = true;
    // A learner that wins exactly when the queried point 0 is in U: 5/11.
    Learner coin = [n = p.n](Oracle& o) {
        o.draw_example();
        Hypothesis h(n);
        if (o.membership_query(0))
            for (Point x = 0; x < n; ++x)
                if (o.membership_query(x)) h.set(x, true);
        return LearnerOutput{h, 1, 0, {}, {}};
    };
    auto exact = play_exact(p, coin);
    EXPECT_EQ(*exact.probability, Rational(5, 11));
    auto mc = play_monte_carlo(p, coin, 2000, 9);
    EXPECT_TRUE(mc.estimate->covers(5.0 / 11.0));
}

TEST(HiddenSingleton, HardnessDisplay)
{
    EXPECT_LT(singleton_hardness(16, 1, Rational(1, 4)), Rational(1, 2));
    EXPECT_EQ(singleton_hardness(16, 1, Rational(1, 4)), Rational(23, 60));
    auto easy = play_exact(GameParameters::hidden_singleton(6, 1, Rational(1, 4)), omniscient_learner(6));
    EXPECT_FALSE(easy.hard);
    EXPECT_EQ(easy.note, "prior not hard at these parameters");
}

TEST(HiddenSingleton, LearnersBelowHalf)
{
    auto p = GameParameters::hidden_singleton(16, 1, Rational(1, 4));
    auto cls = singleton_complements(FiniteDomain(16));
    auto closure = play_exact(p, budgeted_closure_learner(cls, 1));
    EXPECT_LT(*closure.probability, Rational(1, 2));
    EXPECT_EQ(closure.runs, 16U * 15U);

    // Bold learner: queries the next point; if it is negative, answers exactly.
    // Otherwise claims everything except the next four points.
    Learner bold = [](Oracle& o) {
        Point x = o.draw_example();
        Point q = (x + 1) % 16;
        Hypothesis h(16, true);
        if (!o.membership_query(q)) {
            h.set(q, false);
        } else {
            for (Point j = 2; j <= 5; ++j) h.set((x + j) % 16, false);
        }
        return LearnerOutput{h, 1, 1, {}, {}};
    };
    auto b = play_exact(p, bold);
    EXPECT_LT(*b.probability, Rational(1, 2));
    EXPECT_GT(*b.probability, 0);

    EXPECT_THROW(play_exact(p, omniscient_learner(16)), BudgetViolation);
}

TEST(CubeDemo, ExcludersAndClosure)
{
    EXPECT_EQ(cube_distance(2, 1, 1), 0);
    for (Point x = 0; x < 4; ++x)
        if (x != 1) {
            EXPECT_GE(cube_distance(2, 1, x), 1);
        }
    auto empty = cube_halfspace_demo(2, {Hypothesis(4)});
    EXPECT_TRUE(empty.subsets_recovered);

    auto r2 = cube_halfspace_demo(2);
    EXPECT_TRUE(r2.excluders_valid);
    EXPECT_TRUE(r2.subsets_recovered);
    EXPECT_EQ(r2.subsets_checked, 16U);
    EXPECT_EQ(r2.class_size, 14U);
    EXPECT_EQ(r2.method, "search");
    EXPECT_EQ(r2.min_depth, 4U);
    EXPECT_TRUE(r2.no_shallower_scheme);

    auto r3 = cube_halfspace_demo(3);
    EXPECT_EQ(r3.class_size, 104U);
    EXPECT_TRUE(r3.subsets_recovered);
    EXPECT_EQ(r3.method, "bound");
    EXPECT_EQ(r3.min_depth, 8U);
}
