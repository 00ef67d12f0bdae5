#pragma once

#include "vlab/compression.hpp"
#include "vlab/errors.hpp"
#include "vlab/families.hpp"
#include "vlab/finite_model.hpp"
#include "vlab/halfspace_learner.hpp"
#include "vlab/learners.hpp"
#include "vlab/rng.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlab {

/// Oracle facade for games: examples come from a script or a sampler, queries
/// are answered by the hidden target, and both are capped at the budget.
class GameOracle final : public Oracle {
public:
    using Source = std::function<Point(std::size_t call)>;

    GameOracle(Hypothesis target, Source examples, std::optional<std::size_t> budget)
        : target_(std::move(target)), examples_(std::move(examples)), budget_(budget)
    {
    }

    Point draw_example() override
    {
        if (budget_ && example_calls_ >= *budget_) throw BudgetViolation("learner exceeded its example budget");
        Point x = examples_(example_calls_++);
        sample_.push_back(x);
        return x;
    }

    bool membership_query(Point x) override
    {
        if (budget_ && responses_.size() >= *budget_) throw BudgetViolation("learner exceeded its query budget");
        if (x >= target_.domain_size()) throw std::out_of_range("membership query outside domain");
        bool y = target_(x);
        responses_.push(x, y);
        return y;
    }

    std::size_t example_calls() const override { return example_calls_; }
    std::size_t membership_calls() const override { return responses_.size(); }

    /// Sample sequence and response transcript, the learner's entire view.
    std::string view() const
    {
        std::string s;
        for (Point x : sample_) s += std::to_string(x) + ',';
        return s + '|' + responses_.to_string();
    }

    std::string sample_key() const
    {
        std::string s;
        for (Point x : sample_) s += std::to_string(x) + ',';
        return s;
    }

private:
    Hypothesis target_;
    Source examples_;
    std::optional<std::size_t> budget_;
    std::size_t example_calls_ = 0;
    std::vector<Point> sample_;
    Transcript responses_;
};

enum class GameKind { hidden_subset, hidden_singleton };

struct GameParameters {
    GameKind kind = GameKind::hidden_subset;
    std::size_t M = 1;
    /// Number of shattered points; the hidden-subset game fixes n = 9M + 2.
    std::size_t n = 11;
    Rational epsilon = Rational(49, 100);
    /// Lifts the budget so an omniscient learner can be checked.
    bool unlimited_budget = false;

    std::size_t k() const { return kind == GameKind::hidden_subset ? 4 * M + 1 : 1; }

    static GameParameters hidden_subset(std::size_t M, Rational eps = Rational(49, 100))
    {
        if (M < 1) throw std::invalid_argument("budget must be positive");
        return {GameKind::hidden_subset, M, 9 * M + 2, std::move(eps), false};
    }

    static GameParameters hidden_singleton(std::size_t n, std::size_t M, Rational eps = Rational(49, 100))
    {
        if (M < 1 || n < 2) throw std::invalid_argument("need n >= 2 and M >= 1");
        return {GameKind::hidden_singleton, M, n, std::move(eps), false};
    }
};

struct GameReport {
    GameParameters params;
    bool exact = false;
    /// False when the prior is not hard at these parameters; nothing is played.
    bool hard = true;
    std::string note;
    std::size_t runs = 0;
    std::size_t successes = 0;
    std::optional<Rational> probability;
    std::optional<WilsonInterval> estimate;
    /// Largest number of hidden objects won under one (sample, responses) view.
    std::size_t max_per_transcript = 0;
    std::optional<Integer> per_transcript_bound;
};

/// Display of the hidden-singleton prior: (M + eps(n-1) + 1)/(n - M).
inline Rational singleton_hardness(std::size_t n, std::size_t M, const Rational& eps)
{
    if (n <= M) return Rational(1);
    return (Rational(static_cast<long>(M)) + eps * static_cast<long>(n - 1) + 1) / Rational(static_cast<long>(n - M));
}

struct CountingCheck {
    std::size_t M = 0;
    Integer successes;
    Integer candidates;
    bool factors_at_least_two = false;
    bool holds = false;
};

/// 2^M C(7M+1, 2M) <= C(8M+2, 3M+1) / 2, with the product of factors
/// (7M+2+j)/(2M+1+j) checked separately.
inline CountingCheck counting_inequality(std::size_t M)
{
    CountingCheck c;
    c.M = M;
    Integer two_m;
    mpz_ui_pow_ui(two_m.get_mpz_t(), 2, M);
    c.successes = two_m * binomial(7 * M + 1, 2 * M);
    c.candidates = binomial(8 * M + 2, 3 * M + 1);
    c.factors_at_least_two = true;
    for (std::size_t j = 0; j <= M; ++j) c.factors_at_least_two = c.factors_at_least_two && (7 * M + 2 + j) >= 2 * (2 * M + 1 + j);
    c.holds = 2 * c.successes <= c.candidates;
    return c;
}

namespace detail {

/// Success in the sense of a one-sided learner: no false positives and
/// missed mass at most epsilon under the uniform distribution on `support`.
inline bool game_success(const Hypothesis& out, const Hypothesis& target, const std::vector<Point>& support, const Rational& eps)
{
    if (!out.is_subset_of(target)) return false;
    std::size_t miss = 0;
    for (Point x : support) miss += out(x) ? 0 : 1;
    return ratio(static_cast<long>(miss), static_cast<long>(support.size())) <= eps;
}

struct HiddenObject {
    Hypothesis target;
    std::vector<Point> support;
};

inline HiddenObject subset_object(std::size_t n, std::vector<Point> u)
{
    return {Hypothesis::from_points(n, u), std::move(u)};
}

inline HiddenObject singleton_object(std::size_t n, Point i)
{
    Hypothesis t(n, true);
    t.set(i, false);
    std::vector<Point> sup;
    for (Point x = 0; x < n; ++x)
        if (x != i) sup.push_back(x);
    return {std::move(t), std::move(sup)};
}

inline void enumerate_hidden(const GameParameters& p, const std::function<void(std::size_t, HiddenObject)>& visit)
{
    if (p.kind == GameKind::hidden_singleton) {
        for (Point i = 0; i < p.n; ++i) visit(i, singleton_object(p.n, i));
        return;
    }
    auto c = first_combination(p.k());
    std::size_t idx = 0;
    do {
        visit(idx++, subset_object(p.n, std::vector<Point>(c.begin(), c.end())));
    } while (next_combination(c, p.n));
}

inline std::string guard(const GameParameters& p)
{
    if (p.kind == GameKind::hidden_subset) {
        if (p.n != 9 * p.M + 2) return "hidden-subset game requires n = 9M + 2";
        if (p.epsilon >= Rational(1, 2)) return "prior not hard at these parameters: epsilon must be below 1/2";
        return {};
    }
    if (p.epsilon >= Rational(1, 2) || singleton_hardness(p.n, p.M, p.epsilon) >= Rational(1, 2))
        return "prior not hard at these parameters";
    return {};
}

} // namespace detail

/// Exact success probability of a deterministic learner against the prior:
/// every hidden object times every example sequence of length M.
inline GameReport play_exact(const GameParameters& p, const Learner& learner)
{
    GameReport rep;
    rep.params = p;
    rep.exact = true;
    if (auto why = detail::guard(p); !why.empty()) {
        rep.hard = false;
        rep.note = why;
        return rep;
    }
    if (p.kind == GameKind::hidden_subset && p.M > 2) throw std::invalid_argument("exact hidden-subset game is capped at M <= 2");
    if (p.kind == GameKind::hidden_singleton && (p.n > 20 || p.M > 2)) throw std::invalid_argument("exact hidden-singleton game is capped at n <= 20, M <= 2");

    const std::optional<std::size_t> budget = p.unlimited_budget ? std::nullopt : std::optional<std::size_t>(p.M);
    std::map<std::string, std::size_t> wins_by_view;
    Integer sequences_per_object = 0;
    detail::enumerate_hidden(p, [&](std::size_t, detail::HiddenObject obj) {
        const std::size_t s = obj.support.size();
        std::vector<std::size_t> digits(p.M, 0);
        sequences_per_object = 0;
        for (;;) {
            ++sequences_per_object;
            GameOracle oracle(obj.target, [&](std::size_t call) { return call < digits.size() ? obj.support[digits[call]] : obj.support[0]; }, budget);
            auto out = learner(oracle);
            ++rep.runs;
            if (detail::game_success(out.hypothesis, obj.target, obj.support, p.epsilon)) {
                ++rep.successes;
                ++wins_by_view[oracle.view()];
            }
            std::size_t i = 0;
            while (i < p.M && digits[i] == s - 1) digits[i++] = 0;
            if (i == p.M) break;
            ++digits[i];
        }
    });
    rep.probability = Rational(Integer(static_cast<unsigned long>(rep.successes)), Integer(static_cast<unsigned long>(rep.runs)));
    rep.probability->canonicalize();
    for (const auto& [view, wins] : wins_by_view) rep.max_per_transcript = std::max(rep.max_per_transcript, wins);
    if (p.kind == GameKind::hidden_subset && !p.unlimited_budget) {
        rep.per_transcript_bound = binomial(7 * p.M + 1, 2 * p.M);
        ensure(Integer(static_cast<unsigned long>(rep.max_per_transcript)) <= *rep.per_transcript_bound,
               "a single view wins more hidden sets than the counting bound allows");
    }
    return rep;
}

/// Monte Carlo estimate over seeded trials.
inline GameReport play_monte_carlo(const GameParameters& p, const Learner& learner, std::size_t trials, std::uint64_t seed)
{
    GameReport rep;
    rep.params = p;
    if (auto why = detail::guard(p); !why.empty()) {
        rep.hard = false;
        rep.note = why;
        return rep;
    }
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    const std::optional<std::size_t> budget = p.unlimited_budget ? std::nullopt : std::optional<std::size_t>(p.M);
    CounterRng rng(seed, 0x67616d65);
    for (std::size_t t = 0; t < trials; ++t) {
        auto st = rng.stream(2 * t);
        detail::HiddenObject obj;
        if (p.kind == GameKind::hidden_singleton) {
            obj = detail::singleton_object(p.n, static_cast<Point>(st.below(p.n)));
        } else {
            std::vector<Point> all(p.n);
            std::iota(all.begin(), all.end(), Point{0});
            for (std::size_t i = 0; i < p.k(); ++i) std::swap(all[i], all[i + st.below(p.n - i)]);
            std::vector<Point> u(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(p.k()));
            std::sort(u.begin(), u.end());
            obj = detail::subset_object(p.n, std::move(u));
        }
        auto draws = rng.stream(2 * t + 1);
        GameOracle oracle(obj.target, [&](std::size_t) { return obj.support[draws.below(obj.support.size())]; }, budget);
        auto out = learner(oracle);
        ++rep.runs;
        if (detail::game_success(out.hypothesis, obj.target, obj.support, p.epsilon)) ++rep.successes;
    }
    rep.estimate = wilson_interval(rep.successes, rep.runs);
    return rep;
}

inline nlohmann::json to_json(const GameReport& r)
{
    nlohmann::json j{{"kind", r.params.kind == GameKind::hidden_subset ? "hidden-subset" : "hidden-singleton"},
                     {"M", r.params.M},
                     {"n", r.params.n},
                     {"k", r.params.k()},
                     {"epsilon", to_string(r.params.epsilon)},
                     {"exact", r.exact},
                     {"hard", r.hard},
                     {"runs", r.runs},
                     {"successes", r.successes}};
    if (!r.note.empty()) j["note"] = r.note;
    if (r.probability) j["probability"] = to_string(*r.probability);
    if (r.estimate) j["estimate"] = {{"value", r.estimate->estimate}, {"lower", r.estimate->lower}, {"upper", r.estimate->upper}};
    if (r.per_transcript_bound) {
        j["max_per_transcript"] = r.max_per_transcript;
        j["per_transcript_bound"] = r.per_transcript_bound->get_str();
    }
    return j;
}

// ---------------------------------------------------------------------------
// Learners for the games

/// Closure learner drawing M examples, querying the distinct sample points
/// and spending any remaining budget on the smallest unseen points.
inline Learner budgeted_closure_learner(const ConceptClass& cls, std::size_t M)
{
    return [&cls, M](Oracle& o) {
        return closure_learner(cls, o, M, [&cls, M](const PointSet& s) {
            PointSet q = s;
            for (Point x = 0; x < cls.domain_size() && q.size() < M; ++x)
                if (std::find(s.begin(), s.end(), x) == s.end()) q.push_back(x);
            return QueryStrategy::chain(q);
        });
    };
}

/// Queries every point; wins whenever it is allowed to exceed the budget.
inline Learner omniscient_learner(std::size_t n)
{
    return [n](Oracle& o) {
        LearnerOutput out{Hypothesis(n), 0, 0, {}, {}};
        for (Point x = 0; x < n; ++x) {
            bool y = o.membership_query(x);
            out.transcript.push(x, y);
            if (y) out.hypothesis.set(x, true);
        }
        out.membership_calls = n;
        return out;
    };
}

// ---------------------------------------------------------------------------
// Cube halfspace demo

struct CubeDemoReport {
    unsigned d = 0;
    std::size_t class_size = 0;
    /// Every h_v is in the class and excludes exactly v.
    bool excluders_valid = false;
    std::size_t subsets_checked = 0;
    bool subsets_recovered = false;
    std::size_t min_depth = 0;
    /// "search" when proven by exhaustive search, "bound" otherwise.
    std::string method;
    bool no_shallower_scheme = false;
    std::size_t states_explored = 0;
};

/// D_v(x) = sum_{v_i=0} x_i + sum_{v_i=1} (1 - x_i).
inline int cube_distance(unsigned d, Point v, Point x)
{
    int s = 0;
    for (unsigned i = 0; i < d; ++i) {
        const unsigned b = d - 1 - i;
        const int vi = static_cast<int>(v >> b & 1U);
        const int xi = static_cast<int>(x >> b & 1U);
        s += vi == 0 ? xi : 1 - xi;
    }
    return s;
}

/// h_v = 1{D_v >= 1/2}, i.e. D_v >= 1 over the integers.
inline Hypothesis cube_excluder(unsigned d, Point v)
{
    const std::size_t n = std::size_t{1} << d;
    return Hypothesis::from_predicate(n, [&](Point x) { return 2 * cube_distance(d, v, x) >= 1; });
}

/// `subsets` lists the sets A to reconstruct; empty means every subset when 2^d <= 8, else a seeded sample.
inline CubeDemoReport cube_halfspace_demo(unsigned d, std::vector<Hypothesis> subsets = {}, std::uint64_t seed = 1)
{
    if (d < 1 || d > 4) throw std::invalid_argument("cube demo supports 1 <= d <= 4");
    const std::size_t n = std::size_t{1} << d;
    auto cls = cube_halfspaces(d);
    CubeDemoReport rep;
    rep.d = d;
    rep.class_size = cls.size();

    std::unordered_set<Hypothesis, HypothesisHash> members(cls.hypotheses().begin(), cls.hypotheses().end());
    std::vector<Hypothesis> excluders;
    rep.excluders_valid = true;
    for (Point v = 0; v < n; ++v) {
        Hypothesis h = cube_excluder(d, v);
        Hypothesis expect(n, true);
        expect.set(v, false);
        rep.excluders_valid = rep.excluders_valid && h == expect && members.count(h) > 0 && cube_distance(d, v, v) == 0;
        excluders.push_back(std::move(h));
    }

    if (subsets.empty()) {
        if (n <= 8) {
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
                subsets.push_back(Hypothesis::from_predicate(n, [&](Point x) { return (mask >> x & 1U) != 0; }));
        } else {
            SeqRng rng(seed);
            subsets.push_back(Hypothesis(n));
            subsets.push_back(Hypothesis(n, true));
            for (int i = 0; i < 254; ++i) subsets.push_back(Hypothesis::from_predicate(n, [&](Point) { return rng.coin(); }));
        }
    }
    rep.subsets_recovered = true;
    for (const auto& a : subsets) {
        Hypothesis meet(n, true);
        for (Point v = 0; v < n; ++v)
            if (!a(v)) meet &= excluders[v];
        rep.subsets_recovered = rep.subsets_recovered && meet == a;
        ++rep.subsets_checked;
    }

    PointSet cube(n);
    std::iota(cube.begin(), cube.end(), Point{0});
    if (d <= 2) {
        rep.method = "search";
        auto below = search_min_scheme(cls, cube, n - 1);
        auto at = search_min_scheme(cls, cube, n);
        rep.no_shallower_scheme = !below.strategy.has_value();
        rep.min_depth = at.strategy ? at.depth : 0;
        rep.states_explored = below.states_explored + at.states_explored;
    } else {
        // Querying the whole cube certifies it, and any query set missing v
        // leaves h_v consistent with the all-ones answers, so v is not certified.
        rep.method = "bound";
        const bool full_valid = verify_scheme(cls, QueryStrategy::chain(cube), cube).valid;
        bool each_point_needed = rep.excluders_valid;
        for (Point v = 0; v < n && each_point_needed; ++v) {
            PointSet q;
            for (Point x = 0; x < n; ++x)
                if (x != v) q.push_back(x);
            each_point_needed = !verify_scheme(cls, QueryStrategy::chain(q), cube).valid;
        }
        rep.no_shallower_scheme = each_point_needed;
        rep.min_depth = full_valid && each_point_needed ? n : 0;
    }
    return rep;
}

inline nlohmann::json to_json(const CubeDemoReport& r)
{
    return {{"d", r.d},
            {"class_size", r.class_size},
            {"excluders_valid", r.excluders_valid},
            {"subsets_checked", r.subsets_checked},
            {"subsets_recovered", r.subsets_recovered},
            {"min_depth", r.min_depth},
            {"method", r.method},
            {"no_shallower_scheme", r.no_shallower_scheme},
            {"states_explored", r.states_explored}};
}

} // namespace vlab
