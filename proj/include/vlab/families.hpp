#pragma once

#include "vlab/finite_model.hpp"

#include <array>
#include <numeric>
#include <set>

namespace vlab {

/// One hypothesis {x : x_i = 1 for all i in R} per coordinate set R, ordered by
/// the bit mask of R (bit i is coordinate i, counted from the left).
inline ConceptClass monotone_conjunctions(unsigned d)
{
    auto dom = FiniteDomain::hypercube(d);
    std::vector<Hypothesis> hyps;
    for (Point mask = 0; mask < (Point{1} << d); ++mask) {
        Point need = 0;
        for (unsigned i = 0; i < d; ++i)
            if (mask >> i & 1U) need |= Point{1} << (d - 1 - i);
        hyps.push_back(Hypothesis::from_predicate(dom.size(), [&](Point x) { return (x & need) == need; }));
    }
    return ConceptClass(dom, std::move(hyps));
}

/// The all-ones hypothesis followed by h_v = 1{x != v} for every cube vertex v.
inline ConceptClass singleton_complements(const FiniteDomain& dom)
{
    std::vector<Hypothesis> hyps{Hypothesis(dom.size(), true)};
    for (Point v = 0; v < dom.size(); ++v) {
        Hypothesis h(dom.size(), true);
        h.set(v, false);
        hyps.push_back(std::move(h));
    }
    return ConceptClass(dom, std::move(hyps));
}

inline ConceptClass singleton_complements(unsigned d) { return singleton_complements(FiniteDomain::hypercube(d)); }

inline ConceptClass power_set(std::size_t n)
{
    if (n > 20) throw std::invalid_argument("power set too large to materialize");
    std::vector<Hypothesis> hyps;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
        hyps.push_back(Hypothesis::from_predicate(n, [&](Point x) { return (mask >> x & 1U) != 0; }));
    return ConceptClass(FiniteDomain(n), std::move(hyps));
}

/// Nonempty index intervals [a, b] over points 0..n-1.
inline ConceptClass intervals(std::size_t n)
{
    std::vector<Hypothesis> hyps;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b)
            hyps.push_back(Hypothesis::from_predicate(n, [&](Point x) { return x >= a && x <= b; }));
    return ConceptClass(FiniteDomain(n), std::move(hyps));
}

/// Domain [n] x {0,1}. Point (x, slice) has index 2(x-1) + slice.
inline Point hybrid_point(std::size_t x, unsigned slice) { return static_cast<Point>(2 * (x - 1) + slice); }

/// h_i(x,0) = 1{x != i} and h_i(x,1) = 1{x >= i}; hypothesis index i-1.
inline Hypothesis hybrid_hypothesis(std::size_t n, std::size_t i)
{
    Hypothesis h(2 * n);
    for (std::size_t x = 1; x <= n; ++x) {
        h.set(hybrid_point(x, 0), x != i);
        h.set(hybrid_point(x, 1), x >= i);
    }
    return h;
}

inline ConceptClass hybrid_threshold_class(std::size_t n)
{
    std::vector<Hypothesis> hyps;
    for (std::size_t i = 1; i <= n; ++i) hyps.push_back(hybrid_hypothesis(n, i));
    return ConceptClass(FiniteDomain(2 * n), std::move(hyps));
}

/// Every dichotomy of {0,1}^d cut out by a closed halfspace {w.x >= t}.
/// Integer weights in [-w_max, w_max] realize all threshold functions for d <= 4.
inline ConceptClass cube_halfspaces(unsigned d)
{
    if (d < 1 || d > 4) throw std::invalid_argument("cube halfspaces supported for 1 <= d <= 4");
    const int w_max = d <= 2 ? 1 : (d == 3 ? 2 : 3);
    auto dom = FiniteDomain::hypercube(d);
    std::set<std::vector<bool>> seen;
    std::vector<Hypothesis> hyps;
    std::vector<int> w(d, -w_max);
    auto coord = [&](Point x, unsigned i) { return static_cast<int>(x >> (d - 1 - i) & 1U); };
    for (;;) {
        std::vector<int> values(dom.size());
        for (Point x = 0; x < dom.size(); ++x) {
            int s = 0;
            for (unsigned i = 0; i < d; ++i) s += w[i] * coord(x, i);
            values[x] = s;
        }
        std::vector<int> cuts(values);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        cuts.push_back(cuts.back() + 1);
        for (int t : cuts) {
            std::vector<bool> key(dom.size());
            for (Point x = 0; x < dom.size(); ++x) key[x] = values[x] >= t;
            if (seen.insert(key).second)
                hyps.push_back(Hypothesis::from_predicate(dom.size(), [&](Point x) { return key[x]; }));
        }
        unsigned i = 0;
        while (i < d && w[i] == w_max) w[i++] = -w_max;
        if (i == d) break;
        ++w[i];
    }
    std::sort(hyps.begin(), hyps.end());
    return ConceptClass(dom, std::move(hyps));
}

/// Random class over the given domain: `count` distinct supports, each point
/// included with probability num/den.
inline ConceptClass random_class(const FiniteDomain& dom, std::size_t count, SeqRng& rng, std::uint64_t num = 1, std::uint64_t den = 2)
{
    std::unordered_set<Hypothesis, HypothesisHash> seen;
    std::vector<Hypothesis> hyps;
    std::size_t attempts = 0;
    while (hyps.size() < count && attempts++ < 64 * count + 64) {
        Hypothesis h = Hypothesis::from_predicate(dom.size(), [&](Point) { return rng.coin(num, den); });
        if (seen.insert(h).second) hyps.push_back(std::move(h));
    }
    return ConceptClass(dom, std::move(hyps));
}

} // namespace vlab
