#include "vlab/compression.hpp"
#include "vlab/dimensions.hpp"
#include "vlab/families.hpp"

#include <gtest/gtest.h>

using namespace vlab;

namespace {

PointSet all_points(std::size_t n)
{
    PointSet s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<Point>(i);
    return s;
}

/// Direct restatement of scheme validity: every consistent hypothesis, run
/// through the tree, lands on a transcript whose closure contains S.
bool simulate_scheme(const ConceptClass& cls, const QueryStrategy& q, const PointSet& s, bool weak)
{
    const std::size_t need = weak ? (s.size() + 2) / 3 : s.size();
    for (const auto& h : cls.hypotheses()) {
        if (!h.contains_all(s)) continue;
        Transcript t = q.run([&](Point x) { return h(x); });
        Hypothesis c(cls.domain_size(), true);
        for (const auto& g : cls.hypotheses()) {
            bool agrees = true;
            for (const auto& e : t.entries) agrees = agrees && g(e.point) == e.response;
            if (agrees) c &= g;
        }
        std::size_t hit = 0;
        for (Point x : s) hit += c(x) ? 1 : 0;
        if (hit < need) return false;
    }
    return true;
}

bool intersection_closed(const ConceptClass& cls)
{
    std::unordered_set<Hypothesis, HypothesisHash> members(cls.hypotheses().begin(), cls.hypotheses().end());
    for (const auto& g : cls.hypotheses())
        for (const auto& h : cls.hypotheses())
            if (!members.count(g & h)) return false;
    return true;
}

}

TEST(QueryStrategy, TextRoundTrip)
{
    auto q = QueryStrategy::branch(3, QueryStrategy::leaf(), QueryStrategy::branch(1, QueryStrategy::leaf(), QueryStrategy::leaf()));
    EXPECT_EQ(q.to_text(), "Q 3 ( L | Q 1 ( L | L ) )");
    EXPECT_EQ(QueryStrategy::parse(q.to_text()), q);
    EXPECT_EQ(q.depth(), 2U);
    EXPECT_THROW(QueryStrategy::parse("Q 3 ( L | L"), std::invalid_argument);
    SeqRng rng(2);
    for (int i = 0; i < 50; ++i) {
        auto r = random_strategy(16, rng.below(5), rng);
        EXPECT_EQ(QueryStrategy::parse(r.to_text()).to_text(), r.to_text());
    }
}

TEST(RealizableBranches, Examples)
{
    auto cls = singleton_complements(2);
    auto one = realizable_branches(cls, QueryStrategy::leaf(), PointSet{});
    ASSERT_EQ(one.size(), 1U);
    EXPECT_TRUE(one[0].transcript.empty());

    auto split = realizable_branches(cls, QueryStrategy::chain(PointSet{1}), PointSet{});
    EXPECT_EQ(split.size(), 2U);

    // S = {00}: consistent are g, h_01, h_10, h_11. Querying 01 then 10 splits
    // them into g/h_11 (1,1), h_01 (0 at 01) and h_10 (1,0).
    auto q = QueryStrategy::chain(PointSet{1, 2});
    std::set<Transcript> direct;
    for (const auto& h : cls.hypotheses())
        if (h(0)) direct.insert(q.run([&](Point x) { return h(x); }));
    auto b = realizable_branches(cls, q, PointSet{0});
    EXPECT_EQ(b.size(), direct.size());
    EXPECT_EQ(b.size(), 3U);
    EXPECT_THROW(realizable_branches(ConceptClass(FiniteDomain(2), {Hypothesis(2)}), q, PointSet{0}), std::invalid_argument);
}

TEST(VerifyScheme, SingletonComplementsNeedsEveryPoint)
{
    for (unsigned d = 1; d <= 3; ++d) {
        auto cls = singleton_complements(d);
        auto s = all_points(cls.domain_size());
        EXPECT_TRUE(verify_scheme(cls, QueryStrategy::chain(s), s).valid);
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            PointSet partial = s;
            partial.erase(partial.begin() + static_cast<std::ptrdiff_t>(drop));
            auto cert = verify_scheme(cls, QueryStrategy::chain(partial), s);
            EXPECT_FALSE(cert.valid);
        }
    }
    EXPECT_TRUE(verify_scheme(singleton_complements(2), QueryStrategy::leaf(), PointSet{}).valid);
}

TEST(VerifyScheme, CertificateMatchesSimulationProperty)
{
    SeqRng rng(31);
    for (int rep = 0; rep < 300; ++rep) {
        auto cls = random_class(FiniteDomain::hypercube(3), 1 + rng.below(14), rng);
        const Hypothesis& h = cls[rng.below(cls.size())];
        PointSet s;
        for_each_set_bit(h.bits(), [&](std::size_t x) { if (rng.coin()) s.push_back(static_cast<Point>(x)); });
        auto q = random_strategy(8, rng.below(4), rng);
        auto cert = verify_scheme(cls, q, s);
        EXPECT_EQ(cert.valid, simulate_scheme(cls, q, s, false));
        EXPECT_EQ(cert.verified_depth, q.depth());
        for (const auto& b : cert.branches) {
            Hypothesis c = closure(cls, transcript_version_space_bits(cls, b.transcript));
            PointSet expected;
            for (Point x : cert.sample)
                if (c(x)) expected.push_back(x);
            EXPECT_EQ(b.certified, expected);
        }
        if (!s.empty()) {
            EXPECT_EQ(verify_weak_scheme(cls, q, s), simulate_scheme(cls, q, s, true));
        }
    }
}

TEST(VerifyWeakScheme, Cases)
{
    auto cls = monotone_conjunctions(3);
    PointSet s{cls.domain().parse_label("110"), cls.domain().parse_label("011"), cls.domain().parse_label("111")};
    EXPECT_THROW(verify_weak_scheme(cls, QueryStrategy::leaf(), PointSet{}), std::invalid_argument);
    auto q = QueryStrategy::chain(PointSet{cls.domain().parse_label("010")});
    EXPECT_EQ(verify_weak_scheme(cls, q, s), simulate_scheme(cls, q, s, true));
    auto strong = non_adaptive_scheme(cls, s);
    EXPECT_TRUE(verify_scheme(cls, strong, s).valid);
    EXPECT_TRUE(verify_weak_scheme(cls, strong, s));
    PointSet single{cls.domain().parse_label("011")};
    for (Point x = 0; x < 8; ++x) {
        auto qx = QueryStrategy::chain(PointSet{x});
        EXPECT_EQ(verify_weak_scheme(cls, qx, single), verify_scheme(cls, qx, single).valid);
    }
}

TEST(SearchMinScheme, TrivialAndSingletonComplements)
{
    auto conj = monotone_conjunctions(3);
    auto r0 = search_min_scheme(conj, PointSet{7}, 3);
    ASSERT_TRUE(r0.strategy);
    EXPECT_EQ(r0.depth, 0U);

    auto cls = singleton_complements(2);
    auto s = all_points(4);
    auto none = search_min_scheme(cls, s, 3);
    EXPECT_FALSE(none.strategy);
    auto r = search_min_scheme(cls, s, 4);
    ASSERT_TRUE(r.strategy);
    EXPECT_EQ(r.depth, 4U);
    EXPECT_TRUE(verify_scheme(cls, *r.strategy, s).valid);
}

TEST(SearchMinScheme, SoundAndCompleteProperty)
{
    SeqRng rng(12);
    for (int rep = 0; rep < 40; ++rep) {
        auto cls = random_class(FiniteDomain(5), 2 + rng.below(10), rng);
        const Hypothesis& h = cls[rng.below(cls.size())];
        PointSet s;
        for_each_set_bit(h.bits(), [&](std::size_t x) { s.push_back(static_cast<Point>(x)); });
        auto r = search_min_scheme(cls, s, 5);
        ASSERT_TRUE(r.strategy);
        EXPECT_TRUE(verify_scheme(cls, *r.strategy, s).valid);
        if (r.depth == 0) continue;
        auto below = search_min_scheme(cls, s, r.depth - 1);
        EXPECT_FALSE(below.strategy);
        for (int i = 0; i < 1000; ++i)
            EXPECT_FALSE(verify_scheme(cls, random_strategy(5, r.depth - 1, rng), s).valid);
    }
}

TEST(SearchMinScheme, IntersectionClosedWithinVc)
{
    SeqRng rng(44);
    for (int rep = 0; rep < 15; ++rep) {
        auto cls = intersection_closure(random_class(FiniteDomain::hypercube(3), 1 + rng.below(5), rng));
        const Hypothesis& h = cls[rng.below(cls.size())];
        PointSet s;
        for_each_set_bit(h.bits(), [&](std::size_t x) { s.push_back(static_cast<Point>(x)); });
        auto vc = vc_dimension(cls).value;
        auto r = search_min_scheme(cls, s, vc);
        ASSERT_TRUE(r.strategy);
        EXPECT_LE(r.depth, vc);
    }
}

TEST(StrengthenScheme, DepthBoundArithmetic)
{
    EXPECT_EQ(strengthened_depth_bound(2, 9), 14U);
    EXPECT_EQ(strengthened_depth_bound(1, 1), 1U);
    EXPECT_EQ(strengthened_depth_bound(3, 2), 9U);
}

TEST(StrengthenScheme, SmallSampleQueriedDirectly)
{
    auto cls = singleton_complements(2);
    PointSet s{0, 3};
    auto q = strengthen_scheme(cls, s, search_weak_finder(cls, 2), 2);
    EXPECT_EQ(q, QueryStrategy::chain(s));
}

TEST(StrengthenScheme, ValidAndWithinBoundProperty)
{
    SeqRng rng(66);
    int checked = 0;
    for (int rep = 0; rep < 30; ++rep) {
        auto cls = random_class(FiniteDomain::hypercube(3), 2 + rng.below(10), rng);
        const Hypothesis& h = cls[rng.below(cls.size())];
        PointSet s;
        for_each_set_bit(h.bits(), [&](std::size_t x) { s.push_back(static_cast<Point>(x)); });
        if (s.size() < 3) continue;
        const std::size_t q = 2;
        auto finder = search_weak_finder(cls, q);
        QueryStrategy out;
        try {
            out = strengthen_scheme(cls, s, finder, q);
        } catch (const std::runtime_error&) {
            continue;
        }
        ++checked;
        EXPECT_TRUE(verify_scheme(cls, out, s).valid);
        EXPECT_LE(out.depth(), strengthened_depth_bound(q, s.size()));
    }
    EXPECT_GT(checked, 5);
}

TEST(NonAdaptiveScheme, MinimalAndWithinVc)
{
    auto conj = monotone_conjunctions(3);
    EXPECT_EQ(non_adaptive_scheme(conj, PointSet{7}).depth(), 0U);
    SeqRng rng(8);
    for (int rep = 0; rep < 40; ++rep) {
        auto cls = intersection_closure(random_class(FiniteDomain::hypercube(3), 1 + rng.below(6), rng));
        ASSERT_TRUE(intersection_closed(cls));
        const Hypothesis& h = cls[rng.below(cls.size())];
        PointSet s;
        for_each_set_bit(h.bits(), [&](std::size_t x) { s.push_back(static_cast<Point>(x)); });
        auto t = minimal_certifying_subset(cls, s);
        EXPECT_LE(t.size(), vc_dimension(cls).value);
        EXPECT_TRUE(verify_scheme(cls, QueryStrategy::chain(t), s).valid);
        for (std::size_t i = 0; i < t.size(); ++i) {
            PointSet without = t;
            without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
            EXPECT_NE(closure(cls, sample_version_space_bits(cls, without)), closure(cls, sample_version_space_bits(cls, t)));
        }
    }
}
