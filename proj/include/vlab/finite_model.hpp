#pragma once

#include "vlab/errors.hpp"
#include "vlab/rational.hpp"
#include "vlab/rng.hpp"

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace vlab {

using Point = std::uint32_t;
/// Sorted, duplicate-free list of domain points.
using PointSet = std::vector<Point>;
/// Bit-set over hypothesis indices of a class.
using IndexSet = boost::dynamic_bitset<std::uint64_t>;

inline PointSet make_point_set(std::vector<Point> pts)
{
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <class Bits>
std::size_t hash_bits(const Bits& bits)
{
    std::size_t h = bits.size() * 0x9e3779b97f4a7c15ULL;
    std::vector<typename Bits::block_type> blocks(bits.num_blocks());
    boost::to_block_range(bits, blocks.begin());
    for (auto b : blocks) h = static_cast<std::size_t>(mix64(h ^ b));
    return h;
}

struct BitsHash {
    template <class Bits>
    std::size_t operator()(const Bits& bits) const { return hash_bits(bits); }
};

template <class Bits, class F>
void for_each_set_bit(const Bits& bits, F&& f)
{
    for (auto i = bits.find_first(); i != Bits::npos; i = bits.find_next(i)) f(i);
}

class FiniteDomain {
public:
    FiniteDomain() = default;
    explicit FiniteDomain(std::size_t size) : size_(size)
    {
        if (size == 0) throw std::invalid_argument("domain size must be positive");
    }

    static FiniteDomain hypercube(unsigned d)
    {
        if (d > 24) throw std::invalid_argument("hypercube dimension too large");
        FiniteDomain dom(std::size_t{1} << d);
        dom.cube_dim_ = d;
        return dom;
    }

    std::size_t size() const { return size_; }
    std::optional<unsigned> hypercube_dim() const { return cube_dim_; }

    /// Bit-string label for hypercube points (first coordinate is the most
    /// significant bit), decimal index otherwise.
    std::string label(Point x) const
    {
        if (!cube_dim_) return std::to_string(x);
        std::string s(*cube_dim_, '0');
        for (unsigned i = 0; i < *cube_dim_; ++i)
            if (x >> (*cube_dim_ - 1 - i) & 1U) s[i] = '1';
        return s;
    }

    Point parse_label(std::string_view text) const
    {
        if (cube_dim_ && text.size() == *cube_dim_ && text.find_first_not_of("01") == std::string_view::npos) {
            Point x = 0;
            for (char c : text) x = (x << 1) | static_cast<Point>(c == '1');
            return x;
        }
        std::size_t used = 0;
        unsigned long v = std::stoul(std::string(text), &used);
        if (used != text.size() || v >= size_) throw std::invalid_argument("bad point: " + std::string(text));
        return static_cast<Point>(v);
    }

    friend bool operator==(const FiniteDomain&, const FiniteDomain&) = default;

private:
    std::size_t size_ = 1;
    std::optional<unsigned> cube_dim_;
};

/// A concept given extensionally by its support.
class Hypothesis {
public:
    using Bits = boost::dynamic_bitset<std::uint64_t>;

    Hypothesis() = default;
    explicit Hypothesis(std::size_t domain_size, bool full = false) : bits_(domain_size)
    {
        if (full) bits_.set();
    }
    explicit Hypothesis(Bits bits) : bits_(std::move(bits)) {}

    static Hypothesis from_points(std::size_t domain_size, std::span<const Point> pts)
    {
        Hypothesis h(domain_size);
        for (Point p : pts) h.set(p);
        return h;
    }

    template <class Pred>
    static Hypothesis from_predicate(std::size_t domain_size, Pred&& pred)
    {
        Hypothesis h(domain_size);
        for (std::size_t x = 0; x < domain_size; ++x)
            if (pred(static_cast<Point>(x))) h.bits_.set(x);
        return h;
    }

    std::size_t domain_size() const { return bits_.size(); }
    bool operator()(Point x) const { return bits_.test(x); }
    bool contains(Point x) const { return bits_.test(x); }
    void set(Point x, bool value = true)
    {
        if (x >= bits_.size()) throw std::out_of_range("point outside domain");
        bits_.set(x, value);
    }
    std::size_t count() const { return bits_.count(); }
    bool empty() const { return bits_.none(); }
    bool is_subset_of(const Hypothesis& other) const { return bits_.is_subset_of(other.bits_); }
    bool contains_all(std::span<const Point> pts) const
    {
        return std::all_of(pts.begin(), pts.end(), [&](Point p) { return bits_.test(p); });
    }

    PointSet points() const
    {
        PointSet out;
        for_each_set_bit(bits_, [&](std::size_t i) { out.push_back(static_cast<Point>(i)); });
        return out;
    }

    const Bits& bits() const { return bits_; }

    Hypothesis& operator&=(const Hypothesis& o) { bits_ &= o.bits_; return *this; }
    Hypothesis& operator|=(const Hypothesis& o) { bits_ |= o.bits_; return *this; }
    friend Hypothesis operator&(Hypothesis a, const Hypothesis& b) { return a &= b; }
    friend Hypothesis operator|(Hypothesis a, const Hypothesis& b) { return a |= b; }
    friend Hypothesis operator~(const Hypothesis& a) { return Hypothesis(~a.bits_); }
    friend bool operator==(const Hypothesis& a, const Hypothesis& b) { return a.bits_ == b.bits_; }
    friend bool operator<(const Hypothesis& a, const Hypothesis& b) { return a.bits_ < b.bits_; }

    /// Hex digits, most significant first; bit i of the value is point i.
    std::string to_hex() const
    {
        static constexpr char digits[] = "0123456789abcdef";
        const std::size_t n = (bits_.size() + 3) / 4;
        std::string s(n, '0');
        for (std::size_t nib = 0; nib < n; ++nib) {
            unsigned v = 0;
            for (unsigned b = 0; b < 4; ++b) {
                std::size_t i = nib * 4 + b;
                if (i < bits_.size() && bits_.test(i)) v |= 1U << b;
            }
            s[n - 1 - nib] = digits[v];
        }
        return s;
    }

    static Hypothesis from_hex(std::string_view hex, std::size_t domain_size)
    {
        if (hex.size() != (domain_size + 3) / 4) throw std::invalid_argument("hex length does not match domain size");
        Hypothesis h(domain_size);
        for (std::size_t k = 0; k < hex.size(); ++k) {
            char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[hex.size() - 1 - k])));
            unsigned v;
            if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
            else throw std::invalid_argument("bad hex digit");
            for (unsigned b = 0; b < 4; ++b) {
                if (!(v >> b & 1U)) continue;
                std::size_t i = k * 4 + b;
                if (i >= domain_size) throw std::invalid_argument("hex sets a bit outside the domain");
                h.bits_.set(i);
            }
        }
        return h;
    }

private:
    Bits bits_;
};

struct HypothesisHash {
    std::size_t operator()(const Hypothesis& h) const { return hash_bits(h.bits()); }
};

class ConceptClass {
public:
    ConceptClass(FiniteDomain domain, std::vector<Hypothesis> hypotheses)
        : domain_(std::move(domain)), hyps_(std::move(hypotheses))
    {
        if (hyps_.empty()) throw std::invalid_argument("concept class must be nonempty");
        std::unordered_set<Hypothesis, HypothesisHash> seen;
        for (const auto& h : hyps_) {
            if (h.domain_size() != domain_.size()) throw std::invalid_argument("hypothesis length differs from domain size");
            if (!seen.insert(h).second) throw std::invalid_argument("duplicate hypothesis support");
        }
        columns_.assign(domain_.size(), IndexSet(hyps_.size()));
        for (std::size_t i = 0; i < hyps_.size(); ++i)
            for_each_set_bit(hyps_[i].bits(), [&](std::size_t x) { columns_[x].set(i); });
    }

    /// Builds a class from possibly repeated supports, keeping first occurrences.
    static ConceptClass deduplicated(FiniteDomain domain, const std::vector<Hypothesis>& hyps)
    {
        std::unordered_set<Hypothesis, HypothesisHash> seen;
        std::vector<Hypothesis> kept;
        for (const auto& h : hyps)
            if (seen.insert(h).second) kept.push_back(h);
        return ConceptClass(std::move(domain), std::move(kept));
    }

    const FiniteDomain& domain() const { return domain_; }
    std::size_t domain_size() const { return domain_.size(); }
    std::size_t size() const { return hyps_.size(); }
    const Hypothesis& operator[](std::size_t i) const { return hyps_[i]; }
    const std::vector<Hypothesis>& hypotheses() const { return hyps_; }

    /// Indices of the hypotheses labelling x positive.
    const IndexSet& positive_at(Point x) const { return columns_.at(x); }
    IndexSet all() const { IndexSet s(hyps_.size()); s.set(); return s; }

    std::optional<std::size_t> index_of(const Hypothesis& h) const
    {
        auto it = std::find(hyps_.begin(), hyps_.end(), h);
        if (it == hyps_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - hyps_.begin());
    }

private:
    FiniteDomain domain_;
    std::vector<Hypothesis> hyps_;
    std::vector<IndexSet> columns_;
};

struct QueryResponse {
    Point point;
    bool response;
    friend auto operator<=>(const QueryResponse&, const QueryResponse&) = default;
};

struct Transcript {
    std::vector<QueryResponse> entries;

    void push(Point x, bool r) { entries.push_back({x, r}); }
    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    friend auto operator<=>(const Transcript&, const Transcript&) = default;

    std::string to_string() const
    {
        std::ostringstream os;
        for (std::size_t i = 0; i < entries.size(); ++i)
            os << (i ? " " : "") << entries[i].point << ':' << (entries[i].response ? 1 : 0);
        return os.str();
    }
};

inline Transcript concatenate(Transcript a, const Transcript& b)
{
    a.entries.insert(a.entries.end(), b.entries.begin(), b.entries.end());
    return a;
}

// ---------------------------------------------------------------------------
// Version spaces and closures

inline IndexSet sample_version_space_bits(const ConceptClass& cls, std::span<const Point> sample)
{
    IndexSet v = cls.all();
    for (Point x : sample) {
        if (x >= cls.domain_size()) throw std::out_of_range("sample point outside domain");
        v &= cls.positive_at(x);
    }
    return v;
}

inline IndexSet transcript_version_space_bits(const ConceptClass& cls, const Transcript& t)
{
    IndexSet v = cls.all();
    for (const auto& [x, r] : t.entries) {
        if (x >= cls.domain_size()) throw std::out_of_range("transcript point outside domain");
        if (r) v &= cls.positive_at(x);
        else v -= cls.positive_at(x);
    }
    return v;
}

inline std::vector<std::size_t> to_indices(const IndexSet& s)
{
    std::vector<std::size_t> out;
    for_each_set_bit(s, [&](std::size_t i) { out.push_back(i); });
    return out;
}

inline std::vector<std::size_t> version_space_of_sample(const ConceptClass& cls, std::span<const Point> sample)
{
    return to_indices(sample_version_space_bits(cls, sample));
}

inline std::vector<std::size_t> version_space_of_transcript(const ConceptClass& cls, const Transcript& t)
{
    return to_indices(transcript_version_space_bits(cls, t));
}

/// Intersection of the named supports, or the full domain when none are named.
inline Hypothesis closure_or_full(const ConceptClass& cls, const IndexSet& members)
{
    Hypothesis out(cls.domain_size(), true);
    for_each_set_bit(members, [&](std::size_t i) { out &= cls[i]; });
    return out;
}

/// Intersection of the named supports. Refuses an empty family.
inline Hypothesis closure(const ConceptClass& cls, const IndexSet& members)
{
    if (members.none()) throw std::invalid_argument("closure of an empty version space");
    return closure_or_full(cls, members);
}

inline Hypothesis closure(const ConceptClass& cls, std::span<const std::size_t> members)
{
    IndexSet s(cls.size());
    for (auto i : members) s.set(i);
    return closure(cls, s);
}

// ---------------------------------------------------------------------------
// Distributions

class Distribution {
public:
    explicit Distribution(std::vector<Rational> weights) : w_(std::move(weights))
    {
        if (w_.empty()) throw std::invalid_argument("distribution over empty domain");
        Rational total = 0;
        for (const auto& q : w_) {
            if (q < 0) throw std::invalid_argument("negative weight");
            total += q;
        }
        if (total != 1) throw std::invalid_argument("weights do not sum to 1");
        build_sampler();
    }

    static Distribution uniform_on(std::size_t domain_size, std::span<const Point> pts)
    {
        PointSet s = make_point_set({pts.begin(), pts.end()});
        if (s.empty()) throw std::invalid_argument("uniform distribution over empty set");
        std::vector<Rational> w(domain_size, Rational(0));
        for (Point p : s) w.at(p) = Rational(1, s.size());
        return Distribution(std::move(w));
    }

    static Distribution uniform_on(const Hypothesis& support)
    {
        auto pts = support.points();
        return uniform_on(support.domain_size(), pts);
    }

    static Distribution point_mass(std::size_t domain_size, Point x)
    {
        std::vector<Rational> w(domain_size, Rational(0));
        w.at(x) = 1;
        return Distribution(std::move(w));
    }

    /// Weights proportional to the given nonnegative integers.
    static Distribution proportional(const std::vector<std::uint64_t>& counts)
    {
        Integer total = 0;
        for (auto c : counts) total += c;
        if (total == 0) throw std::invalid_argument("all-zero weights");
        std::vector<Rational> w;
        w.reserve(counts.size());
        for (auto c : counts) {
            Rational q(Integer(static_cast<unsigned long>(c)), total);
            q.canonicalize();
            w.push_back(q);
        }
        return Distribution(std::move(w));
    }

    std::size_t domain_size() const { return w_.size(); }
    const std::vector<Rational>& weights() const { return w_; }
    const Rational& weight(Point x) const { return w_.at(x); }

    Hypothesis support() const
    {
        return Hypothesis::from_predicate(w_.size(), [&](Point x) { return w_[x] > 0; });
    }

    Rational mass(const Hypothesis& region) const
    {
        Rational m = 0;
        for (Point x : support_) if (region(x)) m += w_[x];
        return m;
    }

    /// Probability that a draw lands outside the region.
    Rational mass_outside(const Hypothesis& region) const { return 1 - mass(region); }

    Point sample(CounterRng::Stream& stream) const
    {
        if (fast_.size() == support_.size()) {
            std::uint64_t u = stream.below(fast_.back());
            auto it = std::upper_bound(fast_.begin(), fast_.end(), u);
            return support_[static_cast<std::size_t>(it - fast_.begin())];
        }
        const Integer& total = cumulative_.back();
        const std::size_t bits = mpz_sizeinbase(total.get_mpz_t(), 2);
        Integer u;
        std::vector<std::uint64_t> words((bits + 63) / 64);
        for (;;) {
            for (auto& w : words) w = stream();
            mpz_import(u.get_mpz_t(), words.size(), 1, sizeof(std::uint64_t), 0, 0, words.data());
            mpz_fdiv_r_2exp(u.get_mpz_t(), u.get_mpz_t(), bits);
            if (u < total) break;
        }
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return support_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

private:
    void build_sampler()
    {
        Integer den = 1;
        for (const auto& q : w_) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), q.get_den_mpz_t());
        Integer running = 0;
        for (std::size_t x = 0; x < w_.size(); ++x) {
            if (w_[x] == 0) continue;
            Rational scaled = w_[x] * den;
            running += scaled.get_num();
            support_.push_back(static_cast<Point>(x));
            cumulative_.push_back(running);
        }
        if (mpz_sizeinbase(running.get_mpz_t(), 2) <= 62)
            for (const auto& c : cumulative_) fast_.push_back(static_cast<std::uint64_t>(c.get_ui()));
    }

    std::vector<Rational> w_;
    std::vector<Point> support_;
    std::vector<Integer> cumulative_;
    std::vector<std::uint64_t> fast_;
};

// ---------------------------------------------------------------------------
// Oracles

/// What a learner sees: an example source and a membership oracle.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual Point draw_example() = 0;
    virtual bool membership_query(Point x) = 0;
    virtual std::size_t example_calls() const = 0;
    virtual std::size_t membership_calls() const = 0;
};

class OracleState final : public Oracle {
public:
    OracleState(Hypothesis target, Distribution distribution, std::uint64_t seed, std::uint64_t stream = 0)
        : target_(std::move(target)), dist_(std::move(distribution)), rng_(seed, stream), seed_(seed)
    {
        if (target_.domain_size() != dist_.domain_size())
            throw std::invalid_argument("target and distribution disagree on domain size");
        if (!dist_.support().is_subset_of(target_))
            throw std::invalid_argument("distribution is not compatible with the target");
    }

    Point draw_example() override
    {
        auto stream = rng_.stream(examples_++);
        return dist_.sample(stream);
    }

    bool membership_query(Point x) override
    {
        if (x >= target_.domain_size()) throw std::out_of_range("membership query outside domain");
        ++queries_;
        return target_(x);
    }

    std::size_t example_calls() const override { return examples_; }
    std::size_t membership_calls() const override { return queries_; }

    const Hypothesis& target() const { return target_; }
    const Distribution& distribution() const { return dist_; }
    std::uint64_t seed() const { return seed_; }

private:
    Hypothesis target_;
    Distribution dist_;
    CounterRng rng_;
    std::uint64_t seed_;
    std::size_t examples_ = 0;
    std::size_t queries_ = 0;
};

/// Draws until a point outside the reject region appears, or `budget` draws
/// have been spent. Returns the point and the number of draws used.
struct RejectionDraw {
    std::optional<Point> point;
    std::size_t draws = 0;
};

inline RejectionDraw conditional_rejection_sampler(Oracle& oracle, const Hypothesis& reject_region, std::size_t budget)
{
    if (budget == 0) throw std::invalid_argument("rejection sampler budget must be positive");
    RejectionDraw out;
    while (out.draws < budget) {
        Point x = oracle.draw_example();
        ++out.draws;
        if (!reject_region(x)) {
            out.point = x;
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-based class format

inline void write_class(std::ostream& os, const ConceptClass& cls)
{
    os << "domain " << cls.domain_size();
    if (auto d = cls.domain().hypercube_dim()) os << " hypercube " << *d;
    os << '\n';
    for (const auto& h : cls.hypotheses()) os << h.to_hex() << '\n';
}

inline ConceptClass read_class(std::istream& is)
{
    std::string line;
    std::optional<FiniteDomain> domain;
    std::vector<Hypothesis> hyps;
    while (std::getline(is, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (!domain) {
            if (word != "domain") throw ConfigError("class file must start with a domain header");
            std::size_t n = 0;
            if (!(ls >> n) || n == 0) throw ConfigError("bad domain size");
            std::string kw;
            if (ls >> kw) {
                unsigned d = 0;
                if (kw != "hypercube" || !(ls >> d) || (std::size_t{1} << d) != n)
                    throw ConfigError("bad hypercube annotation");
                domain = FiniteDomain::hypercube(d);
            } else {
                domain = FiniteDomain(n);
            }
            continue;
        }
        try {
            hyps.push_back(Hypothesis::from_hex(word, domain->size()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad hypothesis line: ") + e.what());
        }
    }
    if (!domain) throw ConfigError("empty class file");
    try {
        return ConceptClass(*domain, std::move(hyps));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

} // namespace vlab
