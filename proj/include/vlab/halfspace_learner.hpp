#pragma once

#include "vlab/errors.hpp"
#include "vlab/geometry.hpp"
#include "vlab/learners.hpp"
#include "vlab/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlab {

/// Intersection of halfspaces; a single halfspace when s = 1.
struct HalfspaceTarget {
    std::vector<RationalHalfspace> halfspaces;

    std::size_t dim() const { return halfspaces.at(0).normal.size(); }

    bool contains(const Vec& x) const
    {
        return std::all_of(halfspaces.begin(), halfspaces.end(), [&](const auto& h) { return h.contains(x); });
    }

    /// A region is inside the target iff each of its vertices is.
    bool contains(const ConvexRegion& region) const
    {
        return std::all_of(region.vertices().begin(), region.vertices().end(), [&](const Vec& v) { return contains(v); });
    }
};

/// Finite-support distribution over rational points with integer weights.
class PointDistribution {
public:
    PointDistribution(std::vector<Vec> support, std::vector<Integer> weights) : support_(std::move(support)), weights_(std::move(weights))
    {
        if (support_.empty()) throw std::invalid_argument("distribution has empty support");
        if (weights_.size() != support_.size()) throw std::invalid_argument("one weight per support point");
        Integer acc = 0;
        for (const auto& w : weights_) {
            if (w <= 0) throw std::invalid_argument("weights must be positive");
            acc += w;
            cumulative_.push_back(acc);
        }
        if (!acc.fits_ulong_p() || acc.get_ui() > (1ULL << 62)) throw std::invalid_argument("total weight too large");
        total_ = acc.get_ui();
    }

    static PointDistribution uniform(std::vector<Vec> support)
    {
        std::vector<Integer> w(support.size(), Integer(1));
        return PointDistribution(std::move(support), std::move(w));
    }

    /// Rational mixture of point masses.
    static PointDistribution mixture(std::vector<Vec> points, const std::vector<Rational>& masses)
    {
        Integer l = 1;
        for (const auto& m : masses) l = lcm(l, m.get_den());
        std::vector<Integer> w;
        for (const auto& m : masses) w.push_back(m.get_num() * (l / m.get_den()));
        return PointDistribution(std::move(points), std::move(w));
    }

    /// Uniform over grid points k/resolution in the box [lo, hi]^d (in grid
    /// units) that lie inside the target.
    static PointDistribution grid(const HalfspaceTarget& target, long resolution, long lo, long hi)
    {
        if (resolution <= 0 || lo > hi) throw std::invalid_argument("bad grid");
        const std::size_t d = target.dim();
        std::vector<Vec> pts;
        std::vector<long> idx(d, lo);
        for (;;) {
            Vec x;
            for (long k : idx) {
                Rational r(k, resolution);
                r.canonicalize();
                x.push_back(r);
            }
            if (target.contains(x)) pts.push_back(std::move(x));
            std::size_t i = 0;
            while (i < d && idx[i] == hi) idx[i++] = lo;
            if (i == d) break;
            ++idx[i];
        }
        if (pts.empty()) throw std::invalid_argument("grid misses the target");
        return uniform(std::move(pts));
    }

    const std::vector<Vec>& support() const { return support_; }
    std::size_t dim() const { return support_.front().size(); }

    template <class Gen>
    const Vec& sample(Gen& gen) const
    {
        const std::uint64_t u = gen.below(total_);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), Integer(static_cast<unsigned long>(u)));
        return support_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    /// Exact mass of the points where pred fails.
    template <class Pred>
    Rational mass_where_not(Pred pred) const
    {
        Integer miss = 0;
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (!pred(support_[i])) miss += weights_[i];
        Rational r(miss, Integer(static_cast<unsigned long>(total_)));
        r.canonicalize();
        return r;
    }

private:
    std::vector<Vec> support_;
    std::vector<Integer> weights_;
    std::vector<Integer> cumulative_;
    std::uint64_t total_ = 0;
};

/// What a geometric learner may see: examples and membership answers.
class GeometricOracle {
public:
    virtual ~GeometricOracle() = default;
    virtual std::size_t dim() const = 0;
    virtual Vec draw_example() = 0;
    virtual bool membership_query(const Vec& x) = 0;
    virtual std::size_t example_calls() const = 0;
    virtual std::size_t membership_calls() const = 0;
};

class ContinuousOracle final : public GeometricOracle {
public:
    ContinuousOracle(HalfspaceTarget target, PointDistribution dist, std::uint64_t seed, std::uint64_t stream = 0)
        : target_(std::move(target)), dist_(std::move(dist)), rng_(seed, stream)
    {
        if (dist_.dim() != target_.dim()) throw std::invalid_argument("distribution and target disagree on dimension");
        for (const auto& x : dist_.support()) ensure(target_.contains(x), "distribution is not compatible with the target");
    }

    std::size_t dim() const override { return target_.dim(); }

    Vec draw_example() override
    {
        auto st = rng_.stream(examples_++);
        const Vec& x = dist_.sample(st);
        ensure(target_.contains(x), "example outside the target");
        return x;
    }

    bool membership_query(const Vec& x) override
    {
        if (x.size() != dim()) throw std::invalid_argument("query has wrong dimension");
        ++queries_;
        return target_.contains(x);
    }

    std::size_t example_calls() const override { return examples_; }
    std::size_t membership_calls() const override { return queries_; }
    const HalfspaceTarget& target() const { return target_; }
    const PointDistribution& distribution() const { return dist_; }

private:
    HalfspaceTarget target_;
    PointDistribution dist_;
    CounterRng rng_;
    std::size_t examples_ = 0;
    std::size_t queries_ = 0;
};

/// Labels candidate vertices. The default queries each distinct point once;
/// a point-location procedure can be substituted here.
using VertexLabeler = std::function<bool(const Vec&)>;

class CachedQueries {
public:
    explicit CachedQueries(GeometricOracle& oracle) : oracle_(&oracle) {}

    bool operator()(const Vec& x)
    {
        auto it = cache_.find(x);
        if (it != cache_.end()) return it->second;
        bool y = oracle_->membership_query(x);
        cache_.emplace(x, y);
        return y;
    }

    std::size_t distinct() const { return cache_.size(); }

private:
    GeometricOracle* oracle_;
    std::map<Vec, bool> cache_;
};

struct GeometricOutput {
    ConvexRegion hypothesis;
    std::size_t example_calls = 0;
    std::size_t membership_calls = 0;
    std::vector<Vec> sample;
    bool fallback = false;
    std::map<std::string, Rational> diagnostics;
};

inline nlohmann::json to_json(const ConvexRegion& r)
{
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : r.vertices()) verts.push_back(to_string(v));
    const char* kind = r.kind() == ConvexRegion::Kind::empty ? "empty" : r.kind() == ConvexRegion::Kind::point ? "point" : "polytope";
    return {{"kind", kind}, {"vertices", verts}};
}

namespace detail {

inline double floored_log2(double x) { return std::max(1.0, std::log2(x)); }

inline std::size_t geometric_sample_size(double core, const Rational& eps, const Rational& delta, double c)
{
    if (eps <= 0 || eps >= 1 || delta <= 0 || delta >= 1) throw std::invalid_argument("epsilon and delta must lie in (0,1)");
    const double e = to_double(eps);
    const double m = c * (core * floored_log2(1 / e) + floored_log2(1 / to_double(delta))) / e;
    return std::max<std::size_t>(1, ceil_count(m));
}

} // namespace detail

/// m = ceil(c (d^2 log d log(1/eps) + log(1/delta)) / eps), logs base 2 floored at 1.
inline std::size_t hull_simplex_sample_size(std::size_t d, const Rational& eps, const Rational& delta, double c = 1)
{
    const double dd = static_cast<double>(d);
    return detail::geometric_sample_size(dd * dd * detail::floored_log2(dd), eps, delta, c);
}

/// m = ceil(c (s d^2 log(sd) log(1/eps) + log(1/delta)) / eps).
inline std::size_t s_halfspace_sample_size(std::size_t d, std::size_t s, const Rational& eps, const Rational& delta, double c = 1)
{
    const double dd = static_cast<double>(d);
    const double ss = static_cast<double>(s);
    return detail::geometric_sample_size(ss * dd * dd * detail::floored_log2(ss * dd), eps, delta, c);
}

namespace detail {

struct GeometricRun {
    GeometricOracle& oracle;
    std::size_t start_examples;
    std::size_t start_queries;
    GeometricOutput out;

    explicit GeometricRun(GeometricOracle& o) : oracle(o), start_examples(o.example_calls()), start_queries(o.membership_calls()) {}

    void draw(std::size_t m)
    {
        out.sample.reserve(m);
        for (std::size_t i = 0; i < m; ++i) out.sample.push_back(oracle.draw_example());
        out.diagnostics["m"] = Rational(static_cast<long>(m));
    }

    GeometricOutput finish(ConvexRegion region)
    {
        for (const auto& x : out.sample) ensure(region.contains(x), "returned region misses a sample point");
        out.hypothesis = std::move(region);
        out.example_calls = oracle.example_calls() - start_examples;
        out.membership_calls = oracle.membership_calls() - start_queries;
        return std::move(out);
    }

    GeometricOutput fail(std::size_t d)
    {
        out.fallback = true;
        out.hypothesis = ConvexRegion::empty(d);
        out.example_calls = oracle.example_calls() - start_examples;
        out.membership_calls = oracle.membership_calls() - start_queries;
        return std::move(out);
    }
};

inline void note(GeometricOutput& o, const std::string& k, std::size_t v) { o.diagnostics[k] = Rational(static_cast<long>(v)); }

} // namespace detail

/// Draws m examples, builds C = conv(P) and returns the first candidate
/// S_{v,J} whose vertices all label positive, else the empty region.
inline GeometricOutput hull_simplex_learn(GeometricOracle& oracle, const Rational& eps, const Rational& delta, double c = 1,
                                          VertexLabeler labeler = {})
{
    const std::size_t d = oracle.dim();
    if (d < 1) throw std::invalid_argument("dimension must be at least 1");
    detail::GeometricRun run(oracle);
    run.draw(hull_simplex_sample_size(d, eps, delta, c));
    CachedQueries direct(oracle);
    if (!labeler) labeler = std::ref(direct);

    HullStructure h = hull(run.out.sample);
    detail::note(run.out, "hull_dim", h.dim());
    detail::note(run.out, "hull_vertices", h.vertices.size());
    detail::note(run.out, "hull_facets", h.facets.size());
    if (h.dim() == 0) return run.finish(ConvexRegion::point(h.vertices.front()));

    std::size_t tried = 0;
    const auto values = detail::facet_values(h);
    for (std::size_t v = 0; v < h.vertices.size(); ++v)
        for (const auto& J : independent_subsets(h, v)) {
            ++tried;
            auto s = detail::build_candidate(h, v, J, values);
            bool positive = true;
            for (const auto& w : s.vertices)
                if (!labeler(w)) {
                    positive = false;
                    break;
                }
            if (!positive) continue;
            detail::note(run.out, "candidates_tried", tried);
            detail::note(run.out, "apex", v);
            return run.finish(s.region());
        }
    detail::note(run.out, "candidates_tried", tried);
    return run.fail(d);
}

/// Returns the first nondecreasing s-tuple of candidates whose intersection
/// has only positive vertices.
inline GeometricOutput s_halfspace_learn(GeometricOracle& oracle, const Rational& eps, const Rational& delta, std::size_t s, double c = 1,
                                         VertexLabeler labeler = {})
{
    const std::size_t d = oracle.dim();
    if (d < 1 || s < 1) throw std::invalid_argument("dimension and s must be at least 1");
    detail::GeometricRun run(oracle);
    run.draw(s_halfspace_sample_size(d, s, eps, delta, c));
    CachedQueries direct(oracle);
    if (!labeler) labeler = std::ref(direct);

    HullStructure h = hull(run.out.sample);
    detail::note(run.out, "hull_dim", h.dim());
    detail::note(run.out, "hull_vertices", h.vertices.size());
    if (h.dim() == 0) return run.finish(ConvexRegion::point(h.vertices.front()));

    std::vector<ConvexRegion> candidates;
    for (const auto& cand : all_candidates(h)) candidates.push_back(cand.region());
    detail::note(run.out, "candidates", candidates.size());
    const std::size_t r = h.dim();
    const std::size_t vertex_bound = binomial(s * (r + 1), r).get_ui();

    std::size_t tried = 0;
    std::size_t max_vertices = 0;
    std::vector<std::size_t> tuple(s, 0);
    const std::size_t k = candidates.size();
    while (true) {
        ++tried;
        ConvexRegion p = candidates[tuple[0]];
        for (std::size_t t = 1; t < s; ++t)
            if (tuple[t] != tuple[t - 1]) p = p.intersect(candidates[tuple[t]]);
        max_vertices = std::max(max_vertices, p.vertices().size());
        ensure(p.vertices().size() <= vertex_bound, "tuple polytope exceeds its vertex bound");
        bool positive = std::all_of(p.vertices().begin(), p.vertices().end(), [&](const Vec& w) { return labeler(w); });
        if (positive) {
            detail::note(run.out, "candidates_tried", tried);
            detail::note(run.out, "max_tuple_vertices", max_vertices);
            return run.finish(std::move(p));
        }
        // Next nondecreasing tuple.
        std::size_t i = s;
        while (i > 0 && tuple[i - 1] == k - 1) --i;
        if (i == 0) break;
        ++tuple[i - 1];
        for (std::size_t j = i; j < s; ++j) tuple[j] = tuple[i - 1];
    }
    detail::note(run.out, "candidates_tried", tried);
    detail::note(run.out, "max_tuple_vertices", max_vertices);
    return run.fail(d);
}

struct WilsonInterval {
    double estimate = 0;
    double lower = 0;
    double upper = 0;

    bool covers(double x) const { return lower <= x && x <= upper; }
};

/// Wilson score interval for k successes in n trials.
inline WilsonInterval wilson_interval(std::size_t k, std::size_t n, double z = 1.96)
{
    if (n == 0) throw std::invalid_argument("wilson interval needs trials");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1 + z2 / nn;
    const double centre = (p + z2 / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct GeometricVerdict {
    bool false_positive_free = false;
    /// Exact, by summation over the finite support.
    Rational false_negative_mass;
    /// Monte Carlo estimate over fresh draws, when requested.
    std::optional<WilsonInterval> estimate;

    bool succeeds(const Rational& eps) const { return false_positive_free && false_negative_mass <= eps; }
};

inline GeometricVerdict evaluate_geometric(const ConvexRegion& region, const HalfspaceTarget& target, const PointDistribution& dist,
                                           std::size_t trials = 0, std::uint64_t seed = 0)
{
    GeometricVerdict v;
    v.false_positive_free = target.contains(region);
    v.false_negative_mass = dist.mass_where_not([&](const Vec& x) { return region.contains(x); });
    if (trials > 0) {
        CounterRng rng(seed, 0x65766131);
        std::size_t miss = 0;
        for (std::size_t i = 0; i < trials; ++i) {
            auto st = rng.stream(i);
            if (!region.contains(dist.sample(st))) ++miss;
        }
        v.estimate = wilson_interval(miss, trials);
    }
    return v;
}

inline nlohmann::json to_json(const GeometricVerdict& v)
{
    nlohmann::json j{{"false_positive_free", v.false_positive_free}, {"false_negative_mass", to_string(v.false_negative_mass)}};
    if (v.estimate) j["estimate"] = {{"value", v.estimate->estimate}, {"lower", v.estimate->lower}, {"upper", v.estimate->upper}};
    return j;
}

} // namespace vlab
