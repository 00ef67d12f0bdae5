#pragma once

#include "vlab/finite_model.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <set>
#include <unordered_map>

namespace vlab {

/// Adaptive query plan as a binary tree. Node 0 is the root; an internal node
/// queries a point and continues with `zero` or `one` by the answer.
class QueryStrategy {
public:
    struct Node {
        std::optional<Point> query;
        std::int32_t zero = -1;
        std::int32_t one = -1;
    };

    QueryStrategy() : nodes_{Node{}} {}

    static QueryStrategy leaf() { return {}; }

    static QueryStrategy branch(Point x, const QueryStrategy& zero, const QueryStrategy& one)
    {
        QueryStrategy s;
        s.nodes_.clear();
        s.nodes_.push_back(Node{x, -1, -1});
        s.nodes_[0].zero = s.append(zero, 0);
        s.nodes_[0].one = s.append(one, 0);
        return s;
    }

    /// Queries `pts` in order, stopping at the first 0 answer.
    static QueryStrategy chain(std::span<const Point> pts)
    {
        QueryStrategy s;
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) s = branch(*it, leaf(), s);
        return s;
    }

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    bool is_leaf(std::size_t i) const { return !nodes_[i].query.has_value(); }

    std::size_t depth() const { return depth_from(0); }

    /// Runs the plan against an answering function.
    template <class Answer>
    Transcript run(Answer&& answer) const
    {
        Transcript t;
        std::size_t i = 0;
        while (!is_leaf(i)) {
            Point x = *nodes_[i].query;
            bool r = answer(x);
            t.push(x, r);
            i = static_cast<std::size_t>(r ? nodes_[i].one : nodes_[i].zero);
        }
        return t;
    }

    /// Runs the plan against an oracle, returning the transcript.
    Transcript run(Oracle& oracle) const
    {
        return run([&](Point x) { return oracle.membership_query(x); });
    }

    /// Rebuilds the tree with every leaf replaced by `f(transcript to leaf)`.
    template <class F>
    QueryStrategy replace_leaves(F&& f) const
    {
        Transcript t;
        return replace_from(0, t, f);
    }

    /// Transcripts of all root-to-leaf paths.
    std::vector<Transcript> leaf_transcripts() const
    {
        std::vector<Transcript> out;
        Transcript t;
        collect(0, t, out);
        return out;
    }

    bool valid_for(std::size_t domain_size) const
    {
        for (const auto& n : nodes_)
            if (n.query && *n.query >= domain_size) return false;
        return true;
    }

    std::string to_text() const
    {
        std::string s;
        write(0, s);
        return s;
    }

    static QueryStrategy parse(std::string_view text)
    {
        std::size_t pos = 0;
        QueryStrategy s;
        s.nodes_.clear();
        s.parse_node(text, pos);
        skip_space(text, pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters after strategy");
        return s;
    }

    friend bool operator==(const QueryStrategy& a, const QueryStrategy& b) { return a.to_text() == b.to_text(); }

private:
    std::int32_t append(const QueryStrategy& sub, std::size_t from)
    {
        auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(sub.nodes_[from]);
        if (sub.nodes_[from].query) {
            auto z = append(sub, static_cast<std::size_t>(sub.nodes_[from].zero));
            auto o = append(sub, static_cast<std::size_t>(sub.nodes_[from].one));
            nodes_[static_cast<std::size_t>(idx)].zero = z;
            nodes_[static_cast<std::size_t>(idx)].one = o;
        }
        return idx;
    }

    std::size_t depth_from(std::size_t i) const
    {
        if (is_leaf(i)) return 0;
        return 1 + std::max(depth_from(static_cast<std::size_t>(nodes_[i].zero)), depth_from(static_cast<std::size_t>(nodes_[i].one)));
    }

    template <class F>
    QueryStrategy replace_from(std::size_t i, Transcript& t, F& f) const
    {
        if (is_leaf(i)) return f(static_cast<const Transcript&>(t));
        Point x = *nodes_[i].query;
        t.push(x, false);
        QueryStrategy z = replace_from(static_cast<std::size_t>(nodes_[i].zero), t, f);
        t.entries.back().response = true;
        QueryStrategy o = replace_from(static_cast<std::size_t>(nodes_[i].one), t, f);
        t.entries.pop_back();
        return branch(x, z, o);
    }

    void collect(std::size_t i, Transcript& t, std::vector<Transcript>& out) const
    {
        if (is_leaf(i)) { out.push_back(t); return; }
        t.push(*nodes_[i].query, false);
        collect(static_cast<std::size_t>(nodes_[i].zero), t, out);
        t.entries.back().response = true;
        collect(static_cast<std::size_t>(nodes_[i].one), t, out);
        t.entries.pop_back();
    }

    void write(std::size_t i, std::string& s) const
    {
        if (is_leaf(i)) { s += 'L'; return; }
        s += "Q " + std::to_string(*nodes_[i].query) + " ( ";
        write(static_cast<std::size_t>(nodes_[i].zero), s);
        s += " | ";
        write(static_cast<std::size_t>(nodes_[i].one), s);
        s += " )";
    }

    static void skip_space(std::string_view t, std::size_t& p)
    {
        while (p < t.size() && std::isspace(static_cast<unsigned char>(t[p]))) ++p;
    }

    static void expect(std::string_view t, std::size_t& p, char c)
    {
        skip_space(t, p);
        if (p >= t.size() || t[p] != c) throw std::invalid_argument(std::string("expected '") + c + "' in strategy text");
        ++p;
    }

    std::int32_t parse_node(std::string_view t, std::size_t& p)
    {
        skip_space(t, p);
        if (p >= t.size()) throw std::invalid_argument("unexpected end of strategy text");
        auto idx = static_cast<std::int32_t>(nodes_.size());
        if (t[p] == 'L') {
            ++p;
            nodes_.push_back(Node{});
            return idx;
        }
        if (t[p] != 'Q') throw std::invalid_argument("expected 'Q' or 'L' in strategy text");
        ++p;
        skip_space(t, p);
        std::size_t start = p;
        while (p < t.size() && std::isdigit(static_cast<unsigned char>(t[p]))) ++p;
        if (start == p) throw std::invalid_argument("expected point index in strategy text");
        Point x = static_cast<Point>(std::stoul(std::string(t.substr(start, p - start))));
        nodes_.push_back(Node{x, -1, -1});
        expect(t, p, '(');
        auto z = parse_node(t, p);
        expect(t, p, '|');
        auto o = parse_node(t, p);
        expect(t, p, ')');
        nodes_[static_cast<std::size_t>(idx)].zero = z;
        nodes_[static_cast<std::size_t>(idx)].one = o;
        return idx;
    }

    std::vector<Node> nodes_;
};

struct Branch {
    Transcript transcript;
    std::size_t witness;
};

struct BranchReport {
    Transcript transcript;
    std::size_t witness;
    PointSet certified;
};

struct SchemeCertificate {
    bool valid = false;
    QueryStrategy strategy;
    PointSet sample;
    std::size_t verified_depth = 0;
    std::vector<BranchReport> branches;
    /// Leaves no hypothesis of V(S) reaches; the scheme stops there.
    std::vector<Transcript> unrealizable_leaves;
};

inline std::vector<Branch> realizable_branches(const ConceptClass& cls, const QueryStrategy& strategy, std::span<const Point> sample)
{
    IndexSet vs = sample_version_space_bits(cls, sample);
    if (vs.none()) throw std::invalid_argument("sample is not realizable by the class");
    std::map<Transcript, std::size_t> seen;
    std::vector<Branch> out;
    for_each_set_bit(vs, [&](std::size_t h) {
        Transcript t = strategy.run([&](Point x) { return cls[h](x); });
        if (seen.emplace(t, h).second) out.push_back({std::move(t), h});
    });
    return out;
}

namespace detail {

inline SchemeCertificate certify(const ConceptClass& cls, const QueryStrategy& strategy, std::span<const Point> sample, bool weak)
{
    SchemeCertificate cert;
    cert.strategy = strategy;
    cert.sample = make_point_set({sample.begin(), sample.end()});
    cert.verified_depth = strategy.depth();
    const std::size_t need = weak ? (cert.sample.size() + 2) / 3 : cert.sample.size();
    cert.valid = true;
    std::set<Transcript> reached;
    for (auto& b : realizable_branches(cls, strategy, cert.sample)) {
        Hypothesis c = closure(cls, transcript_version_space_bits(cls, b.transcript));
        PointSet certified;
        for (Point x : cert.sample)
            if (c(x)) certified.push_back(x);
        if (certified.size() < need) cert.valid = false;
        reached.insert(b.transcript);
        cert.branches.push_back({std::move(b.transcript), b.witness, std::move(certified)});
    }
    for (auto& t : strategy.leaf_transcripts())
        if (!reached.count(t)) cert.unrealizable_leaves.push_back(std::move(t));
    return cert;
}

} // namespace detail

inline SchemeCertificate verify_scheme(const ConceptClass& cls, const QueryStrategy& strategy, std::span<const Point> sample)
{
    return detail::certify(cls, strategy, sample, false);
}

inline bool verify_weak_scheme(const ConceptClass& cls, const QueryStrategy& strategy, std::span<const Point> sample)
{
    if (sample.empty()) throw std::invalid_argument("weak scheme needs a nonempty sample");
    return detail::certify(cls, strategy, sample, true).valid;
}

enum class SchemeMode { strong, weak };

struct SearchResult {
    /// Minimum-depth scheme, absent when none exists within the cap.
    std::optional<QueryStrategy> strategy;
    /// Depth of the returned scheme, or the cap that was exhausted.
    std::size_t depth = 0;
    std::size_t states_explored = 0;
};

namespace detail {

class SchemeSearch {
public:
    SchemeSearch(const ConceptClass& cls, std::span<const Point> sample, SchemeMode mode)
        : cls_(cls), sample_(make_point_set({sample.begin(), sample.end()})), mode_(mode)
    {
        realizable_ = sample_version_space_bits(cls_, sample_);
        if (realizable_.none()) throw std::invalid_argument("sample is not realizable by the class");
        need_ = mode_ == SchemeMode::weak ? (sample_.size() + 2) / 3 : sample_.size();
    }

    SearchResult run(std::size_t depth_cap)
    {
        SearchResult r;
        const IndexSet root = cls_.all();
        for (std::size_t d = 0; d <= depth_cap; ++d) {
            if (solvable(root, d)) {
                r.strategy = build(root, d);
                r.depth = r.strategy->depth();
                r.states_explored = memo_.size();
                return r;
            }
        }
        r.depth = depth_cap;
        r.states_explored = memo_.size();
        return r;
    }

private:
    struct Bounds {
        std::size_t infeasible_up_to = 0; // solvable(v, d) is false for d < this
        std::size_t feasible_at = SIZE_MAX;
    };

    bool certified(const IndexSet& v) const
    {
        Hypothesis c = closure(cls_, v);
        std::size_t hit = 0;
        for (Point x : sample_) hit += c(x) ? 1 : 0;
        return hit >= need_;
    }

    bool solvable(const IndexSet& v, std::size_t d)
    {
        auto& b = memo_[v];
        if (d >= b.feasible_at) return true;
        if (d < b.infeasible_up_to) return false;
        bool ok = certified(v) || (d > 0 && first_query(v, d).has_value());
        auto& bb = memo_[v];
        if (ok) bb.feasible_at = std::min(bb.feasible_at, d);
        else bb.infeasible_up_to = std::max(bb.infeasible_up_to, d + 1);
        return ok;
    }

    std::optional<Point> first_query(const IndexSet& v, std::size_t d)
    {
        for (Point x = 0; x < cls_.domain_size(); ++x) {
            IndexSet one = v & cls_.positive_at(x);
            if (one.none() || one == v) continue;
            IndexSet zero = v - cls_.positive_at(x);
            if (child_ok(zero, d - 1) && child_ok(one, d - 1)) return x;
        }
        return std::nullopt;
    }

    bool child_ok(const IndexSet& v, std::size_t d)
    {
        if (!v.intersects(realizable_)) return true;
        return solvable(v, d);
    }

    QueryStrategy build(const IndexSet& v, std::size_t d)
    {
        if (!v.intersects(realizable_) || certified(v)) return QueryStrategy::leaf();
        auto x = first_query(v, d);
        ensure(x.has_value(), "scheme search lost a feasible state");
        IndexSet one = v & cls_.positive_at(*x);
        IndexSet zero = v - cls_.positive_at(*x);
        return QueryStrategy::branch(*x, build(zero, d - 1), build(one, d - 1));
    }

    const ConceptClass& cls_;
    PointSet sample_;
    SchemeMode mode_;
    IndexSet realizable_;
    std::size_t need_ = 0;
    std::unordered_map<IndexSet, Bounds, BitsHash> memo_;
};

} // namespace detail

/// Exact iterative-deepening search for a minimum-depth scheme. Among
/// minimum-depth schemes the smallest query point is chosen at every node.
inline SearchResult search_min_scheme(const ConceptClass& cls, std::span<const Point> sample, std::size_t depth_cap, SchemeMode mode = SchemeMode::strong)
{
    return detail::SchemeSearch(cls, sample, mode).run(depth_cap);
}

/// Random strategy of exactly the given depth on every path, for falsification.
inline QueryStrategy random_strategy(std::size_t domain_size, std::size_t depth, SeqRng& rng)
{
    if (depth == 0) return QueryStrategy::leaf();
    Point x = static_cast<Point>(rng.below(domain_size));
    return QueryStrategy::branch(x, random_strategy(domain_size, depth - 1, rng), random_strategy(domain_size, depth - 1, rng));
}

using WeakFinder = std::function<QueryStrategy(const PointSet&)>;

/// q * (1 + ceil(log_{3/2} |S|)).
inline std::size_t strengthened_depth_bound(std::size_t q, std::size_t sample_size)
{
    std::size_t rounds = 0;
    Integer three = 1, two = 1;
    while (three < two * Integer(static_cast<unsigned long>(sample_size))) {
        three *= 3;
        two *= 2;
        ++rounds;
    }
    return q * (1 + rounds);
}

/// Builds a strong scheme from weak ones: run the weak scheme, then recurse on
/// the uncertified residual of every realizable branch. Samples of size at
/// most q are queried directly.
inline QueryStrategy strengthen_scheme(const ConceptClass& cls, const PointSet& sample, const WeakFinder& weak_finder, std::size_t q)
{
    PointSet s = make_point_set(sample);
    if (s.empty()) return QueryStrategy::leaf();
    if (s.size() <= q) return QueryStrategy::chain(s);
    const IndexSet realizable = sample_version_space_bits(cls, s);
    ensure(realizable.any(), "strengthening a sample the class cannot realize");
    QueryStrategy weak = weak_finder(s);
    ensure(weak.depth() <= q, "weak finder exceeded its declared depth");
    return weak.replace_leaves([&](const Transcript& t) {
        IndexSet v = transcript_version_space_bits(cls, t);
        if (!v.intersects(realizable)) return QueryStrategy::leaf();
        Hypothesis c = closure(cls, v);
        PointSet residual;
        for (Point x : s)
            if (!c(x)) residual.push_back(x);
        ensure(3 * residual.size() <= 2 * s.size(), "weak scheme certified less than a third of the sample");
        if (residual.empty()) return QueryStrategy::leaf();
        return strengthen_scheme(cls, residual, weak_finder, q);
    });
}

/// Weak finder backed by exact search with the given depth cap.
inline WeakFinder search_weak_finder(const ConceptClass& cls, std::size_t q)
{
    return [&cls, q](const PointSet& s) {
        auto r = search_min_scheme(cls, s, q, SchemeMode::weak);
        if (!r.strategy) throw std::runtime_error("no weak scheme within depth " + std::to_string(q));
        return *r.strategy;
    };
}

/// Inclusion-minimal T subset of S with closure(V(T)) = closure(V(S)).
inline PointSet minimal_certifying_subset(const ConceptClass& cls, std::span<const Point> sample)
{
    PointSet t = make_point_set({sample.begin(), sample.end()});
    IndexSet vs = sample_version_space_bits(cls, t);
    if (vs.none()) throw std::invalid_argument("sample is not realizable by the class");
    const Hypothesis target = closure(cls, vs);
    for (std::size_t i = 0; i < t.size();) {
        PointSet without = t;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
        if (closure(cls, sample_version_space_bits(cls, without)) == target) t = std::move(without);
        else ++i;
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        PointSet without = t;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
        ensure(!(closure(cls, sample_version_space_bits(cls, without)) == target), "certifying subset is not minimal");
    }
    return t;
}

inline QueryStrategy non_adaptive_scheme(const ConceptClass& cls, std::span<const Point> sample)
{
    return QueryStrategy::chain(minimal_certifying_subset(cls, sample));
}

} // namespace vlab
