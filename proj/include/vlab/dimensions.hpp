#pragma once

#include "vlab/finite_model.hpp"

#include <json.hpp>

#include <bit>
#include <numeric>
#include <set>
#include <unordered_map>

namespace vlab {

using Ids = std::vector<std::uint32_t>;

inline Ids intersect_sorted(const Ids& a, const Ids& b)
{
    Ids out;
    const Ids& small = a.size() <= b.size() ? a : b;
    const Ids& large = a.size() <= b.size() ? b : a;
    if (small.size() * 16 < large.size()) {
        for (auto v : small)
            if (std::binary_search(large.begin(), large.end(), v)) out.push_back(v);
    } else {
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    }
    return out;
}

inline std::size_t intersection_size(const Ids& a, const Ids& b)
{
    const Ids& small = a.size() <= b.size() ? a : b;
    const Ids& large = a.size() <= b.size() ? b : a;
    std::size_t n = 0;
    for (auto v : small) n += std::binary_search(large.begin(), large.end(), v) ? 1 : 0;
    return n;
}

inline Ids subtract_sorted(const Ids& a, const Ids& b)
{
    Ids out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline Ids unite_sorted(const Ids& a, const Ids& b)
{
    Ids out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Set family stored as sorted support lists, for classes too large to hold
/// as dense bit-sets.
class SparseFamily {
public:
    SparseFamily(std::size_t domain_size, std::vector<Ids> supports) : n_(domain_size)
    {
        std::set<Ids> seen;
        for (auto& s : supports) {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            if (!s.empty() && s.back() >= n_) throw std::invalid_argument("support point outside domain");
            if (seen.insert(s).second) supports_.push_back(std::move(s));
        }
        if (supports_.empty()) throw std::invalid_argument("set family must be nonempty");
    }

    explicit SparseFamily(const ConceptClass& cls) : n_(cls.domain_size())
    {
        for (const auto& h : cls.hypotheses()) {
            Ids s;
            for_each_set_bit(h.bits(), [&](std::size_t x) { s.push_back(static_cast<std::uint32_t>(x)); });
            supports_.push_back(std::move(s));
        }
    }

    std::size_t domain_size() const { return n_; }
    std::size_t size() const { return supports_.size(); }
    const Ids& support(std::size_t i) const { return supports_[i]; }
    const std::vector<Ids>& supports() const { return supports_; }

    ConceptClass to_class(const FiniteDomain& dom) const
    {
        std::vector<Hypothesis> hyps;
        for (const auto& s : supports_) {
            Hypothesis h(dom.size());
            for (auto x : s) h.set(x);
            hyps.push_back(std::move(h));
        }
        return ConceptClass(dom, std::move(hyps));
    }

private:
    std::size_t n_;
    std::vector<Ids> supports_;
};

/// Point-to-member and member-to-point adjacency of a set family.
class Incidence {
public:
    explicit Incidence(const SparseFamily& fam) : supports_(&fam.supports()), members_(fam.domain_size())
    {
        for (std::size_t h = 0; h < fam.size(); ++h)
            for (auto x : fam.support(h)) members_[x].push_back(static_cast<std::uint32_t>(h));
    }
    /// Keeps a pointer to the family, so temporaries are refused.
    explicit Incidence(SparseFamily&&) = delete;

    std::size_t domain_size() const { return members_.size(); }
    std::size_t family_size() const { return supports_->size(); }
    const Ids& support(std::size_t h) const { return (*supports_)[h]; }
    const Ids& members(std::size_t x) const { return members_[x]; }
    bool contains(std::size_t h, std::uint32_t x) const
    {
        const Ids& s = support(h);
        return std::binary_search(s.begin(), s.end(), x);
    }

private:
    const std::vector<Ids>* supports_;
    std::vector<Ids> members_;
};

struct DimensionReport {
    std::string measure;
    std::size_t value = 0;
    /// True when a witness of size cap+1 was found; `value` is then cap+1 and
    /// only a lower bound.
    bool cap_exceeded = false;
    PointSet witness;
};

inline nlohmann::json to_json(const DimensionReport& r)
{
    return {{"measure", r.measure}, {"value", r.value}, {"cap_exceeded", r.cap_exceeded}, {"witness", r.witness}};
}

// ---------------------------------------------------------------------------
// Brute-force predicates

inline bool is_shattered(const Incidence& inc, const PointSet& pts)
{
    if (pts.size() > 20) throw std::invalid_argument("shattering check limited to 20 points");
    std::vector<char> seen(std::size_t{1} << pts.size(), 0);
    std::size_t distinct = 0;
    for (std::size_t h = 0; h < inc.family_size(); ++h) {
        std::size_t p = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (inc.contains(h, pts[i])) p |= std::size_t{1} << i;
        if (!seen[p]) { seen[p] = 1; ++distinct; }
    }
    return distinct == seen.size();
}

inline bool is_one_star(const Incidence& inc, const PointSet& pts)
{
    auto realizes = [&](std::optional<std::size_t> flipped) {
        for (std::size_t h = 0; h < inc.family_size(); ++h) {
            bool ok = true;
            for (std::size_t i = 0; i < pts.size() && ok; ++i)
                ok = inc.contains(h, pts[i]) == (!flipped || *flipped != i);
            if (ok) return true;
        }
        return false;
    };
    if (!realizes(std::nullopt)) return false;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!realizes(i)) return false;
    return true;
}

namespace detail {

/// Depth-first enumeration of shattered sets in increasing point order. A set
/// X u {y} is shattered iff y splits every pattern class of X; class sizes are
/// carried down the recursion so only the members of y are scanned.
class ShatterSearch {
public:
    ShatterSearch(const Incidence& inc, std::size_t cap) : inc_(inc), cap_(cap), stamp_(inc.domain_size(), 0)
    {
        limit_ = std::bit_width(inc.family_size()) - 1;
    }

    DimensionReport run()
    {
        std::vector<std::uint32_t> sizes{static_cast<std::uint32_t>(inc_.family_size())};
        PointSet x;
        dfs(x, sizes, nullptr);
        return DimensionReport{"vc", best_.size(), exceeded_, best_};
    }

private:
    void dfs(PointSet& x, const std::vector<std::uint32_t>& sizes, const Ids* ones)
    {
        if (x.size() > best_.size()) best_ = x;
        if (x.size() > cap_) { exceeded_ = true; stop_ = true; return; }
        if (x.size() >= limit_) { stop_ = true; return; }

        std::vector<std::uint32_t> candidates;
        const std::uint32_t floor = x.empty() ? 0 : x.back() + 1;
        if (!ones) {
            for (std::uint32_t y = floor; y < inc_.domain_size(); ++y) candidates.push_back(y);
        } else {
            ++epoch_;
            for (auto h : *ones)
                for (auto y : inc_.support(h))
                    if (y >= floor && stamp_[y] != epoch_) { stamp_[y] = epoch_; candidates.push_back(y); }
            std::sort(candidates.begin(), candidates.end());
        }
        if (x.size() + candidates.size() <= best_.size()) return;

        const std::size_t k = x.size();
        const std::size_t patterns = std::size_t{1} << k;
        std::vector<std::uint32_t> hits(patterns);
        for (std::size_t ci = 0; ci < candidates.size() && !stop_; ++ci) {
            if (x.size() + (candidates.size() - ci) <= best_.size()) return;
            const auto y = candidates[ci];
            std::fill(hits.begin(), hits.end(), 0);
            for (auto h : inc_.members(y)) {
                std::size_t p = 0;
                for (std::size_t i = 0; i < k; ++i)
                    if (inc_.contains(h, x[i])) p |= std::size_t{1} << i;
                ++hits[p];
            }
            bool splits = true;
            for (std::size_t p = 0; p < patterns && splits; ++p) splits = hits[p] > 0 && hits[p] < sizes[p];
            if (!splits) continue;
            std::vector<std::uint32_t> child(2 * patterns);
            for (std::size_t p = 0; p < patterns; ++p) {
                child[p] = sizes[p] - hits[p];
                child[p | patterns] = hits[p];
            }
            Ids child_ones = ones ? intersect_sorted(*ones, inc_.members(y)) : inc_.members(y);
            x.push_back(y);
            dfs(x, child, &child_ones);
            x.pop_back();
        }
    }

    const Incidence& inc_;
    std::size_t cap_;
    std::size_t limit_ = 0;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    PointSet best_;
    bool exceeded_ = false;
    bool stop_ = false;
};

/// Depth-first enumeration of 1-stars centred at the constant-one function.
/// `ones` holds the members containing X; `flips[i]` the members containing
/// X minus x_i but not x_i.
class StarSearch {
public:
    StarSearch(const Incidence& inc, std::size_t cap) : inc_(inc), cap_(cap), stamp_(inc.domain_size(), 0) {}

    DimensionReport run()
    {
        Ids all(inc_.family_size());
        std::iota(all.begin(), all.end(), 0U);
        PointSet x;
        std::vector<Ids> flips;
        dfs(x, all, flips);
        return DimensionReport{"one_star", best_.size(), exceeded_, best_};
    }

private:
    void dfs(PointSet& x, const Ids& ones, const std::vector<Ids>& flips)
    {
        if (x.size() > best_.size()) best_ = x;
        if (x.size() > cap_) { exceeded_ = true; stop_ = true; return; }

        const std::uint32_t floor = x.empty() ? 0 : x.back() + 1;
        std::vector<std::uint32_t> candidates;
        ++epoch_;
        for (auto h : ones)
            for (auto y : inc_.support(h))
                if (y >= floor && stamp_[y] != epoch_) { stamp_[y] = epoch_; candidates.push_back(y); }
        std::sort(candidates.begin(), candidates.end());

        for (std::size_t ci = 0; ci < candidates.size() && !stop_; ++ci) {
            if (x.size() + (candidates.size() - ci) <= best_.size()) return;
            const auto y = candidates[ci];
            const Ids& my = inc_.members(y);
            Ids keep = intersect_sorted(ones, my);
            if (keep.empty()) continue;
            Ids drop = subtract_sorted(ones, my);
            if (drop.empty()) continue;
            std::vector<Ids> child_flips;
            child_flips.reserve(flips.size() + 1);
            bool ok = true;
            for (const auto& f : flips) {
                child_flips.push_back(intersect_sorted(f, my));
                if (child_flips.back().empty()) { ok = false; break; }
            }
            if (!ok) continue;
            child_flips.push_back(std::move(drop));
            x.push_back(y);
            dfs(x, keep, child_flips);
            x.pop_back();
        }
    }

    const Incidence& inc_;
    std::size_t cap_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    PointSet best_;
    bool exceeded_ = false;
    bool stop_ = false;
};

} // namespace detail

inline DimensionReport vc_dimension(const SparseFamily& fam, std::size_t cap)
{
    if (cap > fam.domain_size()) throw std::invalid_argument("cap exceeds domain size");
    Incidence inc(fam);
    return detail::ShatterSearch(inc, cap).run();
}

inline DimensionReport vc_dimension(const ConceptClass& cls, std::size_t cap)
{
    return vc_dimension(SparseFamily(cls), cap);
}

inline DimensionReport vc_dimension(const ConceptClass& cls) { return vc_dimension(cls, cls.domain_size()); }

inline DimensionReport one_star_number(const SparseFamily& fam, std::size_t cap)
{
    if (cap > fam.domain_size()) throw std::invalid_argument("cap exceeds domain size");
    Incidence inc(fam);
    return detail::StarSearch(inc, cap).run();
}

inline DimensionReport one_star_number(const ConceptClass& cls, std::size_t cap)
{
    return one_star_number(SparseFamily(cls), cap);
}

inline DimensionReport one_star_number(const ConceptClass& cls) { return one_star_number(cls, cls.domain_size()); }

// ---------------------------------------------------------------------------
// Closure classes

/// Smallest superclass closed under pairwise intersection. Members of the
/// original class come first, in order; new members follow in discovery order.
inline ConceptClass intersection_closure(const ConceptClass& cls, std::size_t max_size = 1U << 20)
{
    std::vector<Hypothesis> out = cls.hypotheses();
    std::unordered_set<Hypothesis, HypothesisHash> seen(out.begin(), out.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& g : cls.hypotheses()) {
            Hypothesis t = out[i] & g;
            if (seen.insert(t).second) {
                out.push_back(std::move(t));
                if (out.size() > max_size) throw std::length_error("intersection closure exceeds size limit");
            }
        }
    }
    return ConceptClass(cls.domain(), std::move(out));
}

/// Closures of V(T) over all transcripts T of at most k distinct labelled
/// points with nonempty version space, in discovery order.
inline ConceptClass query_closure_class(const ConceptClass& cls, std::size_t k)
{
    std::vector<Hypothesis> out;
    std::unordered_set<Hypothesis, HypothesisHash> seen;
    auto rec = [&](auto&& self, Point start, std::size_t depth, const IndexSet& v) -> void {
        Hypothesis c = closure(cls, v);
        if (seen.insert(c).second) out.push_back(std::move(c));
        if (depth == k) return;
        for (Point x = start; x < cls.domain_size(); ++x) {
            for (int b = 0; b < 2; ++b) {
                IndexSet w = b ? (v & cls.positive_at(x)) : (v - cls.positive_at(x));
                if (w.none() || w == v) continue;
                self(self, x + 1, depth + 1, w);
            }
        }
    };
    rec(rec, 0, 0, cls.all());
    return ConceptClass(cls.domain(), std::move(out));
}

/// Same family as query_closure_class, for sparse families. Version spaces
/// reached only through negative answers are kept in complement form.
inline SparseFamily query_closure_family(const SparseFamily& fam, std::size_t k)
{
    Incidence inc(fam);
    const std::size_t total = fam.size();
    std::vector<Ids> out;
    std::set<Ids> seen;
    auto emit = [&](Ids c) { if (seen.insert(c).second) out.push_back(std::move(c)); };

    auto closure_explicit = [&](const Ids& v) {
        Ids cur = inc.support(v.front());
        for (std::size_t i = 1; i < v.size() && !cur.empty(); ++i) cur = intersect_sorted(cur, inc.support(v[i]));
        return cur;
    };
    auto closure_complement = [&](const Ids& excluded) {
        std::uint32_t first = 0;
        for (auto e : excluded) { if (e != first) break; ++first; }
        const std::size_t size = total - excluded.size();
        Ids cur;
        for (auto y : inc.support(first))
            if (inc.members(y).size() - intersection_size(inc.members(y), excluded) == size) cur.push_back(y);
        return cur;
    };

    struct State { bool complement; Ids ids; };
    auto rec = [&](auto&& self, std::uint32_t start, std::size_t depth, const State& s) -> void {
        emit(s.complement ? closure_complement(s.ids) : closure_explicit(s.ids));
        if (depth == k) return;
        for (std::uint32_t x = start; x < inc.domain_size(); ++x) {
            const Ids& m = inc.members(x);
            State pos{false, s.complement ? subtract_sorted(m, s.ids) : intersect_sorted(s.ids, m)};
            if (!pos.ids.empty()) self(self, x + 1, depth + 1, pos);
            State neg = s.complement ? State{true, unite_sorted(s.ids, m)} : State{false, subtract_sorted(s.ids, m)};
            const bool nonempty = neg.complement ? neg.ids.size() < total : !neg.ids.empty();
            if (nonempty) self(self, x + 1, depth + 1, neg);
        }
    };
    rec(rec, 0, 0, State{true, {}});
    return SparseFamily(fam.domain_size(), std::move(out));
}

// ---------------------------------------------------------------------------
// One-point-closure construction, truncated

/// Points q_1..q_{n+1} (indices 0..n) and r_A for A subset of [n] (index
/// n+1+mask). Hypotheses h_{A,i} for i in [n+1] \ A with support
/// {r_A} u {q_j : j != i}. The extra index n+1 keeps A = [n] populated.
struct OnePointClosureTruncation {
    std::size_t n;
    SparseFamily family;

    std::uint32_t q(std::size_t j) const { return static_cast<std::uint32_t>(j - 1); }
    std::uint32_t r(std::uint64_t mask) const { return static_cast<std::uint32_t>(n + 1 + mask); }
    PointSet q_points() const
    {
        PointSet out;
        for (std::size_t j = 1; j <= n; ++j) out.push_back(q(j));
        return out;
    }
};

inline OnePointClosureTruncation one_point_closure_truncation(std::size_t n)
{
    if (n < 1 || n > 20) throw std::invalid_argument("truncation size must be in [1, 20]");
    const std::size_t domain = n + 1 + (std::size_t{1} << n);
    std::vector<Ids> supports;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t i = 1; i <= n + 1; ++i) {
            if (i <= n && (mask >> (i - 1) & 1U)) continue;
            Ids s;
            for (std::size_t j = 1; j <= n + 1; ++j)
                if (j != i) s.push_back(static_cast<std::uint32_t>(j - 1));
            s.push_back(static_cast<std::uint32_t>(n + 1 + mask));
            supports.push_back(std::move(s));
        }
    }
    return {n, SparseFamily(domain, std::move(supports))};
}

} // namespace vlab
