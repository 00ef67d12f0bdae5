// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "vlab/harness.hpp"

#include <chrono>
#include <functional>
#include <iostream>

using namespace vlab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string failure;

    void require(bool cond, const std::string& what)
    {
        if (!cond && pass) failure = what;
        pass = pass && cond;
    }
};

std::string fraction(std::size_t k, std::size_t n) { return std::to_string(k) + "/" + std::to_string(n); }

std::size_t count_flag(const std::vector<TrialRecord>& rs, const std::string& key, const std::string& value = "1")
{
    return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [&](const TrialRecord& r) {
        auto it = r.diagnostics.find(key);
        return it != r.diagnostics.end() && it->second == value;
    }));
}

std::size_t fp_free(const std::vector<TrialRecord>& rs)
{
    return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [](const TrialRecord& r) { return r.false_positive_free; }));
}

std::size_t fn_ok(const std::vector<TrialRecord>& rs)
{
    return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [](const TrialRecord& r) { return r.false_negative_ok; }));
}

// Exact Gauss-Jordan inverse, kept separate from the library solver.
std::optional<std::vector<Vec>> gauss_inverse(std::vector<Vec> a)
{
    const std::size_t n = a.size();
    std::vector<Vec> inv(n, Vec(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (auto& x : inv[i]) x /= a[i][i];
    return inv;
}

std::size_t gauss_rank(std::vector<Vec> rows)
{
    std::size_t rank = 0;
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][c] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank]);
        for (std::size_t r = rank + 1; r < rows.size(); ++r) {
            Rational f = rows[r][c] / rows[rank][c];
            for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
        }
        ++rank;
    }
    return rank;
}

// x lies in conv(vertices) iff its barycentric coordinates are nonnegative.
class Barycentric {
public:
    explicit Barycentric(const SimplexCandidate& s) : frame_(s.frame), apex_(s.frame.coordinates(s.vertices[0]))
    {
        const std::size_t r = frame_.dim();
        std::vector<Vec> e(r, Vec(r));
        for (std::size_t j = 0; j < r; ++j) {
            Vec col = frame_.coordinates(s.vertices[j + 1]) - apex_;
            for (std::size_t i = 0; i < r; ++i) e[i][j] = col[i];
        }
        inv_ = gauss_inverse(std::move(e));
    }

    bool inside(const Vec& x) const
    {
        if (!inv_ || !frame_.contains(x)) return false;
        const Vec y = frame_.coordinates(x) - apex_;
        Rational total = 0;
        for (const auto& row : *inv_) {
            Rational l = dot(row, y);
            if (l < 0) return false;
            total += l;
        }
        return total <= 1;
    }

private:
    const AffineFrame& frame_;
    Vec apex_;
    std::optional<std::vector<Vec>> inv_;
};

Integer pascal_binomial(std::size_t n, std::size_t k)
{
    std::vector<Integer> row{1};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<Integer> next(i + 1, Integer(1));
        for (std::size_t j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
        row = std::move(next);
    }
    return k <= n ? row[k] : Integer(0);
}

constexpr std::uint64_t master = 20240601;

// ---------------------------------------------------------------------------

Outcome ac1()
{
    Outcome o;
    for (std::size_t d : {2U, 3U}) {
        HalfspaceSetup setup;
        setup.d = d;
        if (d == 3) setup.resolution = setup.box = 10;
        auto rs = run_trials(500, derive_key(master, d), 1, [&](std::size_t, std::uint64_t s) { return halfspace_trial(setup, s); });
        const auto fp = fp_free(rs), ok = fn_ok(rs), qb = count_flag(rs, "queries_within_bound");
        o.require(fp == rs.size(), "false positive at d=" + std::to_string(d));
        o.require(ok * 100 >= 85 * rs.size(), "FN success below 85% at d=" + std::to_string(d));
        o.require(qb == rs.size(), "query bound at d=" + std::to_string(d));
        o.detail += "d=" + std::to_string(d) + " fp_free " + fraction(fp, rs.size()) + " fn_ok " + fraction(ok, rs.size());
        if (d == 2) {
            const auto q3 = count_flag(rs, "queries_within_3v");
            o.require(q3 == rs.size(), "queries above 3 x hull vertices");
            o.detail += " q<=3v " + fraction(q3, rs.size());
        }
        o.detail += "; ";
    }
    return o;
}

Outcome ac2()
{
    Outcome o;
    SeqRng rng(derive_key(master, 2));
    std::size_t checks = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const unsigned d = 1 + static_cast<unsigned>(rng.below(4));
        auto cls = random_class(FiniteDomain::hypercube(d), 1 + rng.below(std::size_t{1} << std::min(d + 1, 4U)), rng);
        const std::size_t k = rng.below(4);
        auto cl = query_closure_family(SparseFamily(cls), k);
        const std::size_t bound = (d + 1) * (k + 1);
        const bool size_ok = bound >= 63 || cl.size() <= (std::size_t{1} << bound);
        const auto vc = vc_dimension(cl, cl.domain_size());
        o.require(size_ok, "closure size at rep " + std::to_string(rep));
        o.require(vc.value <= bound, "closure VC at rep " + std::to_string(rep));
        ++checks;
    }
    o.detail = fraction(checks, 50) + " random classes checked";
    return o;
}

Outcome ac3()
{
    Outcome o;
    auto cls = singleton_complements(2);
    PointSet s{0, 1, 2, 3};
    auto four = search_min_scheme(cls, s, 4);
    auto three = search_min_scheme(cls, s, 3);
    o.require(four.strategy.has_value() && four.depth == 4, "no depth-4 scheme");
    o.require(!three.strategy.has_value(), "a depth-3 scheme exists");
    if (four.strategy) o.require(verify_scheme(cls, *four.strategy, s).valid, "found scheme does not verify");
    o.detail = "min depth " + std::to_string(four.depth) + ", depth 3 exhausted after " + std::to_string(three.states_explored) + " states";
    return o;
}

Outcome ac4()
{
    Outcome o;
    SeqRng rng(derive_key(master, 4));
    std::size_t samples = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const unsigned d = 2 + static_cast<unsigned>(rng.below(2));
        auto cls = intersection_closure(random_class(FiniteDomain::hypercube(d), 2 + rng.below(6), rng));
        const std::size_t vc = vc_dimension(cls).value;
        for (int t = 0; t < 5; ++t) {
            const Hypothesis& target = cls[rng.below(cls.size())];
            std::vector<Point> pts;
            for (Point x = 0; x < cls.domain_size(); ++x)
                if (target.contains(x) && rng.coin(1, 2)) pts.push_back(x);
            PointSet s = make_point_set(pts);
            auto q = non_adaptive_scheme(cls, s);
            PointSet tset = minimal_certifying_subset(cls, s);
            o.require(q.depth() == tset.size(), "scheme depth differs from |T|");
            o.require(tset.size() <= vc, "|T| exceeds VC");
            o.require(verify_scheme(cls, QueryStrategy::chain(tset), s).valid, "T does not certify S");
            for (std::size_t i = 0; i < tset.size(); ++i) {
                PointSet smaller = tset;
                smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
                o.require(!verify_scheme(cls, QueryStrategy::chain(smaller), s).valid, "T is not inclusion-minimal");
            }
            ++samples;
        }
    }
    o.detail = std::to_string(samples) + " samples over 20 intersection-closed classes";
    return o;
}

Outcome ac5()
{
    Outcome o;
    for (std::size_t m = 1; m <= 10; ++m) {
        auto c = counting_inequality(m);
        Integer lhs = pascal_binomial(7 * m + 1, 2 * m) << static_cast<mp_bitcnt_t>(m);
        Integer rhs = pascal_binomial(8 * m + 2, 3 * m + 1);
        o.require(c.holds && c.factors_at_least_two && 2 * lhs <= rhs, "counting inequality at M=" + std::to_string(m));
        o.require(c.successes == lhs && c.candidates == rhs, "counting values disagree with Pascal at M=" + std::to_string(m));
    }
    auto p = GameParameters::hidden_subset(1);
    auto cls = power_set(p.n);
    auto rep = play_exact(p, budgeted_closure_learner(cls, 1));
    o.require(rep.hard, "prior not hard");
    o.require(rep.probability && *rep.probability <= Rational(1, 2), "closure learner wins more than half");
    o.detail = "M=1..10 exact; game M=1 n=" + std::to_string(p.n) + " success " + (rep.probability ? to_string(*rep.probability) : "?");
    return o;
}

Outcome ac6()
{
    Outcome o;
    BoostSetup setup;
    auto cls = monotone_conjunctions(setup.d);
    auto rs = run_trials(300, derive_key(master, 6), 1, [&](std::size_t, std::uint64_t s) { return boost_trial(setup, cls, s); });
    std::size_t seen = 0, shrunk = 0;
    for (const auto& r : rs) {
        seen += std::stoul(r.diagnostics.at("shrink_stages"));
        shrunk += std::stoul(r.diagnostics.at("shrink_by_three"));
    }
    const auto fp = fp_free(rs), ok = fn_ok(rs), mono = count_flag(rs, "residuals_monotone");
    o.require(fp == rs.size(), "false positive");
    o.require(ok * 100 >= 90 * rs.size(), "FN success below 90%");
    o.require(mono == rs.size(), "residual increased");
    o.require(seen == 0 || shrunk * 100 >= 90 * seen, "residual shrink by 3 below 90%");
    o.detail = "fp_free " + fraction(fp, rs.size()) + " fn_ok " + fraction(ok, rs.size()) + " monotone " + fraction(mono, rs.size()) +
               " shrink/3 " + fraction(shrunk, seen);
    return o;
}

Outcome ac7()
{
    Outcome o;
    UnionSetup setup;
    auto a = monotone_conjunctions(setup.conj_dim);
    auto b = intervals(a.domain_size());
    const std::size_t qa = vc_dimension(a).value, qb = vc_dimension(b).value;
    auto rs = run_trials(400, derive_key(master, 7), 1, [&](std::size_t t, std::uint64_t s) { return union_trial(setup, a, b, qa, qb, t, s); });
    const auto fp = fp_free(rs), qok = count_flag(rs, "queries_within_budget"), sc = count_flag(rs, "sample_contained");
    const auto from_a = count_flag(rs, "source", "A");
    o.require(fp == rs.size(), "output escapes the target");
    o.require(qok == rs.size(), "query budget exceeded");
    o.require(sc == rs.size(), "sample not contained in output");
    o.require(from_a == 200, "targets not split 200/200");
    o.detail = "q_A=" + std::to_string(qa) + " q_B=" + std::to_string(qb) + " fp_free " + fraction(fp, rs.size()) + " budget " +
               fraction(qok, rs.size()) + " S-contained " + fraction(sc, rs.size());
    return o;
}

Outcome ac8()
{
    Outcome o;
    HybridSetup setup;
    auto rs = run_trials(300, derive_key(master, 8), 1, [&](std::size_t, std::uint64_t s) { return hybrid_trial(setup, s); });
    const auto fp = fp_free(rs), ok = fn_ok(rs), qb = count_flag(rs, "queries_within_bound");
    o.require(fp == rs.size(), "false positive");
    o.require(ok * 100 >= 85 * rs.size(), "FN success below 85%");
    o.require(qb == rs.size(), "query bound exceeded");
    o.detail = "n=" + std::to_string(setup.n) + " fp_free " + fraction(fp, rs.size()) + " fn_ok " + fraction(ok, rs.size()) + " q-bound " +
               fraction(qb, rs.size());
    return o;
}

Outcome ac9()
{
    Outcome o;
    for (std::size_t n : {4U, 8U, 12U, 16U}) {
        auto t = one_point_closure_truncation(n);
        const auto base = vc_dimension(t.family, 3);
        auto cl = query_closure_family(t.family, 1);
        const auto closed = vc_dimension(cl, n);
        o.require(base.value == 2, "base VC != 2 at n=" + std::to_string(n));
        o.require(closed.value >= n, "closure VC < n at n=" + std::to_string(n));
        o.require(is_shattered(Incidence(cl), t.q_points()), "q points not shattered at n=" + std::to_string(n));
        o.detail += "n=" + std::to_string(n) + ": VC " + std::to_string(base.value) + " -> " + std::to_string(closed.value) +
                    (closed.cap_exceeded ? "+" : "") + "; ";
    }
    return o;
}

Outcome ac10()
{
    Outcome o;
    SeqRng rng(derive_key(master, 10));
    std::size_t candidates = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t d = 1 + rng.below(4);
        const std::size_t m = 1 + rng.below(30);
        // One set in four lies in a random lower-dimensional affine subspace.
        const bool flat = d > 1 && rng.coin(1, 4);
        std::vector<Vec> dirs;
        if (flat)
            for (std::size_t k = 0; k + 1 < d; ++k) {
                Vec v;
                for (std::size_t j = 0; j < d; ++j) v.emplace_back(static_cast<long>(rng.below(5)) - 2);
                dirs.push_back(v);
            }
        std::vector<Vec> pts;
        const long den = 1 + static_cast<long>(rng.below(3));
        for (std::size_t i = 0; i < m; ++i) {
            Vec x(d, Rational(0));
            if (flat) {
                for (const auto& v : dirs) {
                    x = x + ratio(static_cast<long>(rng.below(9)) - 4, den) * v;
                }
            } else {
                for (auto& c : x) c = ratio(static_cast<long>(rng.below(13)) - 6, den);
            }
            pts.push_back(x);
        }
        auto h = hull(pts);
        const std::size_t r = h.dim();
        const std::string at = " (rep " + std::to_string(rep) + ")";
        o.require(h.facets.size() <= binomial(m, r), "facet count above C(m,r)" + at);
        for (const auto& x : pts) o.require(h.contains(x), "hull misses an input point" + at);
        if (r == 0) continue;
        for (std::size_t v = 0; v < h.vertices.size(); ++v) {
            std::vector<Vec> normals;
            for (const auto& f : h.facets)
                if (dot(f.normal, h.vertices[v]) == f.offset) normals.push_back(f.normal);
            o.require(gauss_rank(normals) == r, "incident normals rank != r" + at);
        }
        auto cands = all_candidates(h);
        candidates += cands.size();
        for (const auto& c : cands) {
            Barycentric bary(c);
            for (const auto& x : h.vertices) {
                o.require(c.contains(x), "candidate misses a hull vertex" + at);
                o.require(bary.inside(x), "barycentric check misses a hull vertex" + at);
            }
        }
        for (int t = 0; t < 3; ++t) {
            Vec n;
            do {
                n.clear();
                for (std::size_t j = 0; j < d; ++j) n.emplace_back(static_cast<long>(rng.below(11)) - 5);
            } while (is_zero(n));
            Rational lo = dot(n, pts.front());
            for (const auto& x : pts) lo = std::min(lo, dot(n, x));
            RationalHalfspace hs{n, lo - ratio(static_cast<long>(rng.below(3)), 4)};
            bool safe = std::any_of(cands.begin(), cands.end(), [&](const SimplexCandidate& c) {
                return std::all_of(c.vertices.begin(), c.vertices.end(), [&](const Vec& x) { return hs.contains(x); });
            });
            bool safe_lib = std::any_of(cands.begin(), cands.end(), [&](const SimplexCandidate& c) { return halfspace_contains_simplex(hs, c); });
            o.require(safe && safe_lib, "no safe candidate" + at);
        }
    }
    o.detail = "200 point sets, " + std::to_string(candidates) + " candidate simplices";
    return o;
}

Outcome ac11()
{
    Outcome o;
    HalfspaceSetup setup;
    setup.s = 2;
    setup.target = HalfspaceTargetKind::quadrant;
    auto rs = run_trials(200, derive_key(master, 11), 1, [&](std::size_t, std::uint64_t s) { return halfspace_trial(setup, s); });
    const auto fp = fp_free(rs), ok = fn_ok(rs);
    const std::size_t cap = binomial(setup.s * (setup.d + 1), setup.d).get_ui();
    std::size_t worst = 0;
    for (const auto& r : rs) worst = std::max<std::size_t>(worst, std::stoul(r.diagnostics.at("max_tuple_vertices")));
    o.require(fp == rs.size(), "false positive");
    o.require(ok * 100 >= 85 * rs.size(), "FN success below 85%");
    o.require(worst <= cap, "candidate vertex count above C(s(r+1), r)");
    o.detail = "fp_free " + fraction(fp, rs.size()) + " fn_ok " + fraction(ok, rs.size()) + " max vertices " + std::to_string(worst) + " <= " +
               std::to_string(cap);
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC-1", ac1}, {"AC-2", ac2}, {"AC-3", ac3}, {"AC-4", ac4},   {"AC-5", ac5},   {"AC-6", ac6},
        {"AC-7", ac7}, {"AC-8", ac8}, {"AC-9", ac9}, {"AC-10", ac10}, {"AC-11", ac11},
    };
    int failures = 0;
    const std::vector<std::string> only(argv + 1, argv + argc);
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << name << (o.pass ? " PASS " : " FAIL ") << "(" << std::fixed << std::setprecision(1) << secs << "s) " << (o.failure.empty() ? "" : "first failure: " + o.failure + "; ") << o.detail << std::endl;
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
