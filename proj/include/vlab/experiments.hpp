#pragma once

#include "vlab/adversary.hpp"
#include "vlab/compression.hpp"
#include "vlab/dimensions.hpp"
#include "vlab/families.hpp"
#include "vlab/finite_model.hpp"
#include "vlab/halfspace_learner.hpp"
#include "vlab/learners.hpp"
#include "vlab/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vlab {

/// One row of results.csv.
struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t example_calls = 0;
    std::size_t membership_calls = 0;
    bool false_positive_free = false;
    Rational false_negative_mass;
    bool false_negative_ok = false;
    std::map<std::string, std::string> diagnostics;
    /// Kept out of results.csv so results stay byte-identical across runs.
    double seconds = 0;
};

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return derive_key(master, trial); }

using TrialFn = std::function<TrialRecord(std::size_t trial, std::uint64_t seed)>;

/// Runs trials on a pool of threads; records land by index, so the result is
/// independent of the thread count.
inline std::vector<TrialRecord> run_trials(std::size_t trials, std::uint64_t master_seed, std::size_t threads, const TrialFn& fn)
{
    std::vector<TrialRecord> out(trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                const auto seed = trial_seed(master_seed, t);
                const auto start = std::chrono::steady_clock::now();
                TrialRecord r = fn(t, seed);
                r.trial = t;
                r.seed = seed;
                r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                out[t] = std::move(r);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = trials;
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, trials));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

inline std::string diag_value(const Rational& r) { return to_string(r); }
inline std::string diag_value(std::size_t v) { return std::to_string(v); }
inline std::string diag_value(bool v) { return v ? "1" : "0"; }

// ---------------------------------------------------------------------------
// Halfspace experiments

enum class HalfspaceTargetKind { random_halfspace, quadrant, fixed };

struct HalfspaceSetup {
    std::size_t d = 2;
    /// 1 runs the hull-simplex learner, larger values the s-halfspace learner.
    std::size_t s = 1;
    Rational epsilon = Rational(1, 10);
    Rational delta = Rational(1, 10);
    double c = 1;
    HalfspaceTargetKind target = HalfspaceTargetKind::random_halfspace;
    std::vector<RationalHalfspace> fixed;
    /// Grid points k/resolution with k in [-box, box] per axis.
    long resolution = 20;
    long box = 20;
    /// Extra Monte Carlo draws for a Wilson estimate; 0 disables.
    std::size_t evaluation_draws = 0;
};

/// Random integer normal in [-5,5]^d through a random point of [-1/2,1/2]^d on
/// the 1/8 grid.
inline HalfspaceTarget random_halfspace_target(std::size_t d, SeqRng& rng)
{
    Vec n;
    do {
        n.clear();
        for (std::size_t j = 0; j < d; ++j) n.emplace_back(static_cast<long>(rng.below(11)) - 5);
    } while (is_zero(n));
    Vec p;
    for (std::size_t j = 0; j < d; ++j) {
        p.push_back(ratio(static_cast<long>(rng.below(9)) - 4, 8));
    }
    return HalfspaceTarget{{RationalHalfspace{n, dot(n, p)}}};
}

/// {x >= a, y >= b} with corner offsets on the 1/4 grid in [-1/2, 1/2].
inline HalfspaceTarget random_quadrant_target(SeqRng& rng)
{
    HalfspaceTarget t;
    for (std::size_t j = 0; j < 2; ++j) {
        Vec n(2, Rational(0));
        n[j] = 1;
        t.halfspaces.push_back({n, ratio(static_cast<long>(rng.below(5)) - 2, 4)});
    }
    return t;
}

inline TrialRecord halfspace_trial(const HalfspaceSetup& setup, std::uint64_t seed)
{
    SeqRng rng(seed);
    HalfspaceTarget target;
    switch (setup.target) {
    case HalfspaceTargetKind::random_halfspace: target = random_halfspace_target(setup.d, rng); break;
    case HalfspaceTargetKind::quadrant:
        if (setup.d != 2) throw ConfigError("quadrant targets need d = 2");
        target = random_quadrant_target(rng);
        break;
    case HalfspaceTargetKind::fixed: target = HalfspaceTarget{setup.fixed}; break;
    }
    auto dist = PointDistribution::grid(target, setup.resolution, -setup.box, setup.box);
    ContinuousOracle oracle(target, dist, seed, 1);
    GeometricOutput out = setup.s == 1 ? hull_simplex_learn(oracle, setup.epsilon, setup.delta, setup.c)
                                      : s_halfspace_learn(oracle, setup.epsilon, setup.delta, setup.s, setup.c);
    auto verdict = evaluate_geometric(out.hypothesis, target, dist, setup.evaluation_draws, seed);

    TrialRecord r;
    r.example_calls = out.example_calls;
    r.membership_calls = out.membership_calls;
    r.false_positive_free = verdict.false_positive_free;
    r.false_negative_mass = verdict.false_negative_mass;
    r.false_negative_ok = verdict.false_negative_mass <= setup.epsilon;
    for (const auto& [k, v] : out.diagnostics) r.diagnostics[k] = diag_value(v);
    r.diagnostics["fallback"] = diag_value(out.fallback);
    r.diagnostics["output_vertices"] = diag_value(out.hypothesis.vertices().size());

    // (d+1) m^{d^2+1} for one halfspace, (2es)^d m^{s(d^2+1)} for s of them.
    const std::size_t m = out.sample.size();
    Integer bound;
    mpz_ui_pow_ui(bound.get_mpz_t(), m, static_cast<unsigned long>(setup.s * (setup.d * setup.d + 1)));
    if (setup.s == 1) {
        bound *= static_cast<unsigned long>(setup.d + 1);
    } else {
        const double lead = std::pow(2 * std::exp(1.0) * static_cast<double>(setup.s), static_cast<double>(setup.d));
        bound *= static_cast<unsigned long>(std::ceil(lead));
    }
    r.diagnostics["queries_within_bound"] = diag_value(Integer(static_cast<unsigned long>(r.membership_calls)) <= bound);
    if (setup.d == 2 && setup.s == 1) {
        const auto hv = static_cast<std::size_t>(to_double(out.diagnostics.at("hull_vertices")));
        r.diagnostics["queries_within_3v"] = diag_value(r.membership_calls <= 3 * hv);
    }
    if (verdict.estimate) {
        r.diagnostics["fn_estimate"] = std::to_string(verdict.estimate->estimate);
        r.diagnostics["fn_estimate_covers"] = diag_value(verdict.estimate->covers(to_double(verdict.false_negative_mass)));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Finite-class experiments

/// Random positive weights 1..8 on the support of the target.
inline Distribution random_weights_on(const Hypothesis& target, SeqRng& rng)
{
    std::vector<std::uint64_t> counts(target.domain_size(), 0);
    for (Point x = 0; x < target.domain_size(); ++x)
        if (target(x)) counts[x] = 1 + rng.below(8);
    return Distribution::proportional(counts);
}

struct BoostSetup {
    unsigned d = 6;
    Rational base_epsilon = Rational(1, 18);
    Rational base_delta = Rational(1, 3);
    Rational epsilon = Rational(1, 20);
    Rational delta = Rational(1, 20);
    BoostingConstants constants{};
};

/// Boosts the positive-only closure learner over monotone conjunctions, run
/// with just enough examples for (base_epsilon, base_delta).
inline TrialRecord boost_trial(const BoostSetup& setup, const ConceptClass& cls, std::uint64_t seed)
{
    SeqRng rng(seed);
    Hypothesis target;
    do {
        target = cls[rng.below(cls.size())];
    } while (target.empty());
    auto dist = random_weights_on(target, rng);
    OracleState oracle(target, dist, seed, 1);
    const std::size_t n = closure_sample_size(cls.size(), setup.base_epsilon, setup.base_delta);
    WeakLearner base{[&cls, n](Oracle& o) { return positive_only_closure_learner(cls, o, n); }, n};
    auto res = boost_error_staged(base, setup.epsilon, setup.delta, oracle, cls.domain_size(), setup.constants);
    auto verdict = evaluate(res.output.hypothesis, target, dist);

    TrialRecord r;
    r.example_calls = res.output.example_calls;
    r.membership_calls = res.output.membership_calls;
    r.false_positive_free = verdict.false_positive_free;
    r.false_negative_mass = verdict.false_negative_mass;
    r.false_negative_ok = verdict.false_negative_mass <= setup.epsilon;
    r.diagnostics["base_examples"] = diag_value(n);
    r.diagnostics["stages"] = diag_value(res.stages.size());
    // p_s is the exact residual mass before stage s; p_{T+1} is the final one.
    Rational prev = 1;
    std::size_t shrink_ok = 0;
    std::size_t shrink_seen = 0;
    bool monotone = true;
    for (const auto& st : res.stages) {
        Rational p = dist.mass_outside(st.after);
        r.diagnostics["residual_" + std::to_string(st.s)] = diag_value(p);
        monotone = monotone && p <= prev;
        // A stage that ran the base learner on a large residual is a "successful" stage for the /3 check.
        if (st.residual_large && !st.budget_exhausted && prev > 0) {
            ++shrink_seen;
            if (p * 3 <= prev) ++shrink_ok;
        }
        prev = p;
    }
    r.diagnostics["residuals_monotone"] = diag_value(monotone);
    r.diagnostics["shrink_stages"] = diag_value(shrink_seen);
    r.diagnostics["shrink_by_three"] = diag_value(shrink_ok);
    r.diagnostics["delta_clamped"] = diag_value(res.delta_clamped);
    return r;
}

struct UnionSetup {
    unsigned conj_dim = 3;
    std::size_t sample_size = 20;
};

inline SchemeProvider depth_recording_provider(const ConceptClass& cls, std::size_t& depth)
{
    return [&cls, &depth](const PointSet& s) {
        auto q = non_adaptive_scheme(cls, s);
        depth = q.depth();
        return q;
    };
}

/// Union of monotone conjunctions and intervals on a shared 2^d-point domain;
/// trials alternate the source class of the target.
inline TrialRecord union_trial(const UnionSetup& setup, const ConceptClass& a, const ConceptClass& b, std::size_t qa, std::size_t qb,
                               std::size_t trial, std::uint64_t seed)
{
    SeqRng rng(seed);
    const ConceptClass& src = trial % 2 == 0 ? a : b;
    Hypothesis target;
    do {
        target = src[rng.below(src.size())];
    } while (target.empty());
    auto dist = random_weights_on(target, rng);
    OracleState oracle(target, dist, seed, 1);
    std::size_t depth_a = 0;
    std::size_t depth_b = 0;
    auto out = union_learner(a, b, oracle, setup.sample_size, depth_recording_provider(a, depth_a), depth_recording_provider(b, depth_b));
    PointSet s;
    {
        OracleState replay(target, dist, seed, 1);
        for (std::size_t i = 0; i < setup.sample_size; ++i) s.push_back(replay.draw_example());
    }
    auto verdict = evaluate(out.hypothesis, target, dist);

    TrialRecord r;
    r.example_calls = out.example_calls;
    r.membership_calls = out.membership_calls;
    r.false_positive_free = verdict.false_positive_free;
    r.false_negative_mass = verdict.false_negative_mass;
    r.false_negative_ok = true;
    r.diagnostics["source"] = trial % 2 == 0 ? "A" : "B";
    r.diagnostics["queries_within_budget"] = diag_value(out.membership_calls <= qa + qb);
    r.diagnostics["sample_contained"] = diag_value(out.hypothesis.contains_all(s));
    r.diagnostics["scheme_depth_a"] = diag_value(depth_a);
    r.diagnostics["scheme_depth_b"] = diag_value(depth_b);
    for (const auto& [k, v] : out.diagnostics) r.diagnostics[k] = diag_value(v);
    return r;
}

struct HybridSetup {
    std::size_t n = 1024;
    Rational epsilon = Rational(1, 10);
    Rational delta = Rational(1, 10);
};

inline TrialRecord hybrid_trial(const HybridSetup& setup, std::uint64_t seed)
{
    SeqRng rng(seed);
    const std::size_t i = 1 + rng.below(setup.n);
    Hypothesis target = hybrid_hypothesis(setup.n, i);
    auto dist = random_weights_on(target, rng);
    OracleState oracle(target, dist, seed, 1);
    auto out = hybrid_threshold_learner(setup.n, oracle, setup.epsilon, setup.delta);
    auto verdict = evaluate(out.hypothesis, target, dist);
    const std::size_t m = hybrid_sample_size(setup.epsilon, setup.delta);
    std::size_t log_bound = 0;
    while ((std::size_t{1} << log_bound) < m + 1) ++log_bound;

    TrialRecord r;
    r.example_calls = out.example_calls;
    r.membership_calls = out.membership_calls;
    r.false_positive_free = verdict.false_positive_free;
    r.false_negative_mass = verdict.false_negative_mass;
    r.false_negative_ok = verdict.false_negative_mass <= setup.epsilon;
    r.diagnostics["target_index"] = diag_value(i);
    r.diagnostics["query_bound"] = diag_value(log_bound + 1);
    r.diagnostics["queries_within_bound"] = diag_value(out.membership_calls <= log_bound + 1);
    for (const auto& [k, v] : out.diagnostics) r.diagnostics[k] = diag_value(v);
    return r;
}

struct ClosureSetup {
    std::size_t sample_size = 10;
    Rational epsilon = Rational(1, 10);
    /// Scheme search cap; 0 uses the non-adaptive scheme.
    std::size_t search_cap = 0;
};

inline TrialRecord closure_trial(const ClosureSetup& setup, const ConceptClass& cls, std::uint64_t seed)
{
    SeqRng rng(seed);
    if (std::all_of(cls.hypotheses().begin(), cls.hypotheses().end(), [](const Hypothesis& h) { return h.empty(); }))
        throw ConfigError("class has no nonempty hypothesis to use as a target");
    Hypothesis target;
    do {
        target = cls[rng.below(cls.size())];
    } while (target.empty());
    auto dist = random_weights_on(target, rng);
    OracleState oracle(target, dist, seed, 1);
    SchemeProvider provider;
    if (setup.search_cap == 0) {
        provider = [&cls](const PointSet& s) { return non_adaptive_scheme(cls, s); };
    } else {
        provider = [&cls, cap = setup.search_cap](const PointSet& s) {
            auto res = search_min_scheme(cls, s, cap);
            if (!res.strategy) throw InvariantViolation("no scheme within the search cap");
            return *res.strategy;
        };
    }
    auto out = closure_learner(cls, oracle, setup.sample_size, provider);
    auto verdict = evaluate(out.hypothesis, target, dist);
    TrialRecord r;
    r.example_calls = out.example_calls;
    r.membership_calls = out.membership_calls;
    r.false_positive_free = verdict.false_positive_free;
    r.false_negative_mass = verdict.false_negative_mass;
    r.false_negative_ok = verdict.false_negative_mass <= setup.epsilon;
    for (const auto& [k, v] : out.diagnostics) r.diagnostics[k] = diag_value(v);
    return r;
}

} // namespace vlab
