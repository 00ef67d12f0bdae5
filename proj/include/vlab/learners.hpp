#pragma once

#include "vlab/compression.hpp"
#include "vlab/errors.hpp"
#include "vlab/families.hpp"
#include "vlab/finite_model.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>

namespace vlab {

struct LearnerOutput {
    Hypothesis hypothesis;
    std::size_t example_calls = 0;
    std::size_t membership_calls = 0;
    Transcript transcript;
    std::map<std::string, Rational> diagnostics;
};

struct ValiantVerdict {
    bool false_positive_free = false;
    Rational false_negative_mass;

    bool succeeds(const Rational& epsilon) const { return false_positive_free && false_negative_mass <= epsilon; }
};

/// Exact evaluation against the true target and distribution.
inline ValiantVerdict evaluate(const Hypothesis& h, const Hypothesis& target, const Distribution& dist)
{
    if (h.domain_size() != target.domain_size()) throw std::invalid_argument("hypothesis and target domains differ");
    return {h.is_subset_of(target), dist.mass_outside(h)};
}

inline ValiantVerdict evaluate(const Hypothesis& h, const OracleState& oracle)
{
    return evaluate(h, oracle.target(), oracle.distribution());
}

inline nlohmann::json to_json(const ValiantVerdict& v)
{
    return {{"false_positive_free", v.false_positive_free}, {"false_negative_mass", to_string(v.false_negative_mass)}};
}

inline nlohmann::json to_json(const LearnerOutput& out)
{
    nlohmann::json diag = nlohmann::json::object();
    for (const auto& [k, v] : out.diagnostics) diag[k] = to_string(v);
    return {{"hypothesis", out.hypothesis.to_hex()},
            {"example_calls", out.example_calls},
            {"membership_calls", out.membership_calls},
            {"transcript", out.transcript.to_string()},
            {"diagnostics", diag}};
}

using Learner = std::function<LearnerOutput(Oracle&)>;
using SchemeProvider = std::function<QueryStrategy(const PointSet&)>;

namespace detail {

/// Records oracle counters at construction and fills the deltas in on finish.
class CallMeter {
public:
    explicit CallMeter(const Oracle& oracle)
        : oracle_(oracle), examples_(oracle.example_calls()), queries_(oracle.membership_calls())
    {
    }

    LearnerOutput finish(Hypothesis h, Transcript t = {}) const
    {
        LearnerOutput out{std::move(h), oracle_.example_calls() - examples_, oracle_.membership_calls() - queries_, std::move(t), {}};
        return out;
    }

private:
    const Oracle& oracle_;
    std::size_t examples_;
    std::size_t queries_;
};

inline PointSet draw_sample(Oracle& oracle, std::size_t n)
{
    PointSet s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.push_back(oracle.draw_example());
    return make_point_set(std::move(s));
}

/// ln(1/eta) for a rational eta in (0, 1].
inline double log_inverse(const Rational& eta) { return -std::log(to_double(eta)); }

inline std::size_t ceil_count(double x)
{
    if (!(x >= 0) || x > 1e15) throw std::invalid_argument("count out of range");
    return static_cast<std::size_t>(std::ceil(x));
}

} // namespace detail

/// Draws n examples S, runs the scheme for S against the membership oracle and
/// outputs the closure of the transcript's version space.
inline LearnerOutput closure_learner(const ConceptClass& cls, Oracle& oracle, std::size_t n, const SchemeProvider& scheme_provider)
{
    detail::CallMeter meter(oracle);
    PointSet s = detail::draw_sample(oracle, n);
    QueryStrategy scheme = scheme_provider(s);
    Transcript r = scheme.run(oracle);
    IndexSet vs = transcript_version_space_bits(cls, r);
    if (vs.none()) throw InvariantViolation("transcript version space is empty; target outside the class");
    Hypothesis c = closure(cls, vs);
    if (!c.contains_all(s)) throw InvariantViolation("scheme failed to certify the sample");
    auto out = meter.finish(std::move(c), std::move(r));
    out.diagnostics["distinct_sample"] = Rational(static_cast<long>(s.size()));
    out.diagnostics["scheme_depth"] = Rational(static_cast<long>(scheme.depth()));
    return out;
}

/// Closure learner for intersection-closed classes: no membership queries.
/// The closure of V(S) is the same whether taken over the class or over its
/// intersection closure, so the class itself is used.
inline LearnerOutput positive_only_closure_learner(const ConceptClass& cls, Oracle& oracle, std::size_t n)
{
    detail::CallMeter meter(oracle);
    PointSet s = detail::draw_sample(oracle, n);
    IndexSet vs = sample_version_space_bits(cls, s);
    if (vs.none()) throw InvariantViolation("sample not realizable; target outside the class");
    auto out = meter.finish(closure(cls, vs));
    out.diagnostics["distinct_sample"] = Rational(static_cast<long>(s.size()));
    return out;
}

/// Example sample size making the positive-only closure learner an
/// (epsilon, delta) learner by a union bound over the class:
/// |H| (1 - epsilon)^n <= delta.
inline std::size_t closure_sample_size(std::size_t class_size, const Rational& epsilon, const Rational& delta)
{
    double n = std::log(static_cast<double>(class_size) / to_double(delta)) / to_double(epsilon);
    return detail::ceil_count(n);
}

struct BoostingConstants {
    Rational C = 225;
    Rational C1 = 64;
    Rational C2 = 1350;
};

/// k = ceil(C ln(1/eta)).
inline std::size_t confidence_runs(const Rational& eta, const BoostingConstants& c = {})
{
    if (eta <= 0 || eta > Rational(1, 2)) throw std::invalid_argument("eta must lie in (0, 1/2]");
    return std::max<std::size_t>(1, detail::ceil_count(to_double(c.C) * detail::log_inverse(eta)));
}

/// Pointwise majority: x is positive when at least half of the hypotheses are.
inline Hypothesis majority(std::span<const Hypothesis> hyps)
{
    if (hyps.empty()) throw std::invalid_argument("majority of no hypotheses");
    const std::size_t n = hyps.front().domain_size();
    std::vector<std::size_t> votes(n);
    for (const auto& h : hyps) for_each_set_bit(h.bits(), [&](std::size_t x) { ++votes[x]; });
    return Hypothesis::from_predicate(n, [&](Point x) { return 2 * votes[x] >= hyps.size(); });
}

/// Runs the base learner k times on fresh data and takes the majority.
inline LearnerOutput boost_confidence(const Learner& base, std::size_t k, Oracle& oracle)
{
    if (k == 0) throw std::invalid_argument("boost_confidence needs at least one run");
    detail::CallMeter meter(oracle);
    std::vector<Hypothesis> hyps;
    hyps.reserve(k);
    for (std::size_t j = 0; j < k; ++j) hyps.push_back(base(oracle).hypothesis);
    auto out = meter.finish(majority(hyps));
    out.diagnostics["runs"] = Rational(static_cast<long>(k));
    return out;
}

inline LearnerOutput boost_confidence(const Learner& base, const Rational& eta, Oracle& oracle, const BoostingConstants& c = {})
{
    return boost_confidence(base, confidence_runs(eta, c), oracle);
}

/// Serves a fixed list of examples in order; membership queries go to the
/// wrapped oracle.
class ReplayOracle final : public Oracle {
public:
    ReplayOracle(std::vector<Point> examples, Oracle& membership) : examples_(std::move(examples)), membership_(membership) {}

    Point draw_example() override
    {
        if (next_ == examples_.size()) throw InvariantViolation("replay oracle exhausted");
        return examples_[next_++];
    }
    bool membership_query(Point x) override
    {
        ++queries_;
        return membership_.membership_query(x);
    }
    std::size_t example_calls() const override { return next_; }
    std::size_t membership_calls() const override { return queries_; }

private:
    std::vector<Point> examples_;
    Oracle& membership_;
    std::size_t next_ = 0;
    std::size_t queries_ = 0;
};

/// Base learner for boosting together with its example complexity m.
struct WeakLearner {
    Learner run;
    std::size_t examples = 0;
};

struct BoostStage {
    unsigned s = 0;
    Rational tau;
    Rational eta;
    std::size_t test_samples = 0;
    Rational p_hat;
    bool residual_large = false;
    std::size_t budget = 0;
    std::size_t residual_draws = 0;
    std::size_t needed = 0;
    bool budget_exhausted = false;
    std::size_t runs = 0;
    Hypothesis after;
};

struct BoostResult {
    LearnerOutput output;
    std::vector<BoostStage> stages;
    bool delta_clamped = false;
};

/// T = ceil(log_3(1/epsilon)), computed exactly.
inline unsigned boosting_stage_count(const Rational& epsilon)
{
    if (epsilon <= 0 || epsilon >= 1) throw std::invalid_argument("epsilon must lie in (0, 1)");
    unsigned t = 0;
    Rational scaled = epsilon;
    while (scaled < 1) {
        scaled *= 3;
        ++t;
    }
    return t;
}

/// Staged error boosting. Each stage tests the residual mass of H_s, simulates
/// the residual oracle by rejection, runs the confidence-boosted base learner on
/// it and unions the result into H.
inline BoostResult boost_error_staged(const WeakLearner& base, const Rational& epsilon, Rational delta, Oracle& oracle,
                                      std::size_t domain_size, const BoostingConstants& c = {})
{
    if (delta <= 0) throw std::invalid_argument("delta must be positive");
    BoostResult result;
    if (delta > Rational(1, 2)) {
        delta = Rational(1, 2);
        result.delta_clamped = true;
    }
    const unsigned T = boosting_stage_count(epsilon);
    Rational W = 0;
    for (unsigned s = 0; s <= T; ++s) W += Rational(power(3, s));

    detail::CallMeter meter(oracle);
    Hypothesis H(domain_size);
    std::size_t queries = 0;
    for (unsigned s = 0; s <= T; ++s) {
        BoostStage st;
        st.s = s;
        st.tau = Rational(Integer(1), power(3, s));
        st.eta = delta * Rational(power(3, s)) / (100 * W);
        const double log_eta = detail::log_inverse(st.eta);
        const double inv_tau = to_double(1 / st.tau);

        st.test_samples = detail::ceil_count(to_double(c.C1) * log_eta * inv_tau);
        std::size_t misses = 0;
        for (std::size_t i = 0; i < st.test_samples; ++i)
            if (!H(oracle.draw_example())) ++misses;
        st.p_hat = ratio(static_cast<long>(misses), static_cast<long>(st.test_samples));
        st.residual_large = st.p_hat >= 2 * st.tau / 3;

        if (st.residual_large) {
            const double m = static_cast<double>(base.examples);
            st.runs = confidence_runs(st.eta, c);
            st.needed = st.runs * base.examples;
            st.budget = detail::ceil_count(to_double(c.C2) * (m * log_eta + log_eta) * inv_tau);
            std::vector<Point> retained;
            retained.reserve(st.needed);
            while (retained.size() < st.needed && st.residual_draws < st.budget) {
                auto d = conditional_rejection_sampler(oracle, H, st.budget - st.residual_draws);
                st.residual_draws += d.draws;
                if (d.point) retained.push_back(*d.point);
            }
            if (retained.size() < st.needed) {
                st.budget_exhausted = true;
            } else {
                ReplayOracle replay(std::move(retained), oracle);
                H |= boost_confidence(base.run, st.runs, replay).hypothesis;
                queries += replay.membership_calls();
            }
        }
        st.after = H;
        result.stages.push_back(std::move(st));
    }

    result.output = meter.finish(H);
    ensure(result.output.membership_calls == queries, "boosting membership counter mismatch");
    auto& diag = result.output.diagnostics;
    diag["stages"] = Rational(static_cast<long>(T + 1));
    diag["delta_clamped"] = Rational(result.delta_clamped ? 1 : 0);
    long exhausted = 0;
    for (const auto& st : result.stages) exhausted += st.budget_exhausted ? 1 : 0;
    diag["budget_exhausted_stages"] = Rational(exhausted);
    return result;
}

inline LearnerOutput boost_error(const WeakLearner& base, const Rational& epsilon, const Rational& delta, Oracle& oracle,
                                 std::size_t domain_size, const BoostingConstants& c = {})
{
    return boost_error_staged(base, epsilon, delta, oracle, domain_size, c).output;
}

/// Class-specific closure D_{S,K}, replaced by the full domain when it does not
/// contain the sample.
struct UnionSide {
    Transcript transcript;
    Hypothesis candidate;
    bool discarded = false;
};

namespace detail {

inline UnionSide union_side(const ConceptClass& cls, const PointSet& s, const SchemeProvider& schemes, Oracle& oracle)
{
    const std::size_t n = cls.domain_size();
    UnionSide side{{}, Hypothesis(n, true), false};
    QueryStrategy scheme = sample_version_space_bits(cls, s).any() ? schemes(s) : QueryStrategy::leaf();
    side.transcript = scheme.run(oracle);
    Hypothesis d = closure_or_full(cls, transcript_version_space_bits(cls, side.transcript));
    if (d.contains_all(s)) side.candidate = std::move(d);
    else side.discarded = true;
    return side;
}

} // namespace detail

/// Learner for the union of two classes over a shared domain.
inline LearnerOutput union_learner(const ConceptClass& class_a, const ConceptClass& class_b, Oracle& oracle, std::size_t n,
                                   const SchemeProvider& schemes_a, const SchemeProvider& schemes_b)
{
    if (class_a.domain_size() != class_b.domain_size()) throw std::invalid_argument("classes live on different domains");
    detail::CallMeter meter(oracle);
    PointSet s = detail::draw_sample(oracle, n);
    UnionSide a = detail::union_side(class_a, s, schemes_a, oracle);
    UnionSide b = detail::union_side(class_b, s, schemes_b, oracle);
    Hypothesis c = a.candidate & b.candidate;
    if (!c.contains_all(s)) throw InvariantViolation("union closure lost a sample point");
    auto out = meter.finish(std::move(c), concatenate(a.transcript, b.transcript));
    out.diagnostics["discarded_a"] = Rational(a.discarded ? 1 : 0);
    out.diagnostics["discarded_b"] = Rational(b.discarded ? 1 : 0);
    out.diagnostics["queries_a"] = Rational(static_cast<long>(a.transcript.size()));
    out.diagnostics["queries_b"] = Rational(static_cast<long>(b.transcript.size()));
    return out;
}

/// m = ceil((2/epsilon) ln(2/(epsilon delta))).
inline std::size_t hybrid_sample_size(const Rational& epsilon, const Rational& delta)
{
    if (epsilon <= 0 || epsilon >= 1 || delta <= 0 || delta >= 1) throw std::invalid_argument("epsilon, delta must lie in (0, 1)");
    double e = to_double(epsilon);
    return detail::ceil_count(2.0 / e * std::log(2.0 / (e * to_double(delta))));
}

/// Learner for the threshold/singleton hybrid class on [n] x {0,1}.
inline LearnerOutput hybrid_threshold_learner(std::size_t n_range, Oracle& oracle, const Rational& epsilon, const Rational& delta)
{
    detail::CallMeter meter(oracle);
    const std::size_t m = hybrid_sample_size(epsilon, delta);
    std::vector<std::size_t> z;
    for (std::size_t i = 0; i < m; ++i) z.push_back(oracle.draw_example() / 2 + 1);
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    const std::size_t r = z.size();
    // z_(0) = 0 and z_(r+1) = n+1 act as the sentinels.
    auto z_at = [&](std::size_t t) { return t == 0 ? std::size_t{0} : (t == r + 1 ? n_range + 1 : z[t - 1]); };

    Transcript tr;
    auto ask = [&](Point p) {
        bool a = oracle.membership_query(p);
        tr.push(p, a);
        return a;
    };
    std::size_t lo = 1;
    std::size_t hi = r + 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (ask(hybrid_point(z_at(mid), 1))) hi = mid;
        else lo = mid + 1;
    }
    const std::size_t L = z_at(lo - 1);
    const std::size_t R = z_at(lo);

    Hypothesis out(2 * n_range);
    bool exact = false;
    if (R <= n_range && !ask(hybrid_point(R, 0))) {
        out = hybrid_hypothesis(n_range, R);
        exact = true;
    } else {
        for (std::size_t x = 1; x <= n_range; ++x) {
            out.set(hybrid_point(x, 0), !(x > L && x < R));
            out.set(hybrid_point(x, 1), x >= R);
        }
    }
    auto res = meter.finish(std::move(out), std::move(tr));
    res.diagnostics["distinct_coordinates"] = Rational(static_cast<long>(r));
    res.diagnostics["L"] = Rational(static_cast<long>(L));
    res.diagnostics["R"] = Rational(static_cast<long>(R));
    res.diagnostics["exact"] = Rational(exact ? 1 : 0);
    return res;
}

} // namespace vlab
