#pragma once

#include "vlab/errors.hpp"
#include "vlab/rational.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace vlab {

using Vec = std::vector<Rational>;
using RationalPoint = Vec;
using Matrix = std::vector<Vec>;

inline Rational dot(const Vec& a, const Vec& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec operator-(const Vec& a, const Vec& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vec operator+(const Vec& a, const Vec& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vec operator*(const Rational& s, const Vec& a)
{
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

inline bool is_zero(const Vec& a)
{
    return std::all_of(a.begin(), a.end(), [](const Rational& x) { return x == 0; });
}

/// Whitespace-separated rationals, e.g. "1/2 -3 0.25".
inline Vec parse_point(std::string_view text)
{
    std::istringstream in{std::string(text)};
    Vec out;
    std::string tok;
    while (in >> tok) out.push_back(parse_rational(tok));
    if (out.empty()) throw std::invalid_argument("empty point");
    return out;
}

inline std::string to_string(const Vec& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += to_string(v[i]);
    }
    return s;
}

/// Scales a rational vector to the primitive integer vector with the same direction.
inline Vec primitive(const Vec& v)
{
    Integer l = 1;
    for (const auto& x : v) l = lcm(l, x.get_den());
    Integer g = 0;
    std::vector<Integer> ints;
    for (const auto& x : v) {
        Integer n = x.get_num() * (l / x.get_den());
        g = gcd(g, n);
        ints.push_back(n);
    }
    if (g == 0) return v;
    Vec out;
    for (const auto& n : ints) out.emplace_back(Integer(n / g));
    return out;
}

/// {x : <normal, x> >= offset}.
struct RationalHalfspace {
    Vec normal;
    Rational offset;

    bool contains(const Vec& x) const { return dot(normal, x) >= offset; }
};

/// "n_1 ... n_d >= c".
inline RationalHalfspace parse_halfspace(std::string_view text)
{
    auto pos = text.find(">=");
    if (pos == std::string_view::npos) throw std::invalid_argument("halfspace needs '>='");
    RationalHalfspace h{parse_point(text.substr(0, pos)), parse_rational(std::string(text.substr(pos + 2)))};
    if (is_zero(h.normal)) throw std::invalid_argument("halfspace normal must be nonzero");
    return h;
}

/// {x : <normal, x> <= bound}.
struct LinearInequality {
    Vec normal;
    Rational bound;

    bool holds(const Vec& x) const { return dot(normal, x) <= bound; }
};

// ---------------------------------------------------------------------------
// Exact linear algebra

/// Rank by Gaussian elimination over the rationals.
inline std::size_t rank_of(Matrix rows)
{
    std::size_t rank = 0;
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
        std::size_t p = rank;
        while (p < rows.size() && rows[p][c] == 0) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[p], rows[rank]);
        for (std::size_t i = rank + 1; i < rows.size(); ++i) {
            if (rows[i][c] == 0) continue;
            Rational f = rows[i][c] / rows[rank][c];
            for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[rank][j];
        }
        ++rank;
    }
    return rank;
}

/// Inverse of a square matrix, or nothing when singular.
inline std::optional<Matrix> inverse(Matrix a)
{
    const std::size_t n = a.size();
    Matrix inv(n, Vec(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && a[p][c] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        Rational piv = a[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a[i][c] == 0) continue;
            Rational f = a[i][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] -= f * a[c][j];
                inv[i][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

inline std::optional<Vec> solve_linear(const Matrix& a, const Vec& b)
{
    auto inv = inverse(a);
    if (!inv) return std::nullopt;
    Vec x(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = dot((*inv)[i], b);
    return x;
}

/// Steps c to the next k-combination of {0..n-1} in lexicographic order.
inline bool next_combination(std::vector<std::size_t>& c, std::size_t n)
{
    const std::size_t k = c.size();
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    return true;
}

inline std::vector<std::size_t> first_combination(std::size_t k)
{
    std::vector<std::size_t> c(k);
    std::iota(c.begin(), c.end(), std::size_t{0});
    return c;
}

// ---------------------------------------------------------------------------
// Affine frames

/// Affine hull of a point set: origin plus a reduced row-echelon basis of the
/// direction space L. Intrinsic coordinates are read off the pivot columns.
class AffineFrame {
public:
    AffineFrame() = default;

    static AffineFrame of(std::span<const Vec> pts)
    {
        if (pts.empty()) throw std::invalid_argument("affine hull of no points");
        AffineFrame f;
        f.origin_ = *std::min_element(pts.begin(), pts.end());
        for (const auto& p : pts) {
            if (p.size() != f.origin_.size()) throw std::invalid_argument("points disagree on ambient dimension");
            f.insert(p - f.origin_);
        }
        return f;
    }

    std::size_t ambient_dim() const { return origin_.size(); }
    std::size_t dim() const { return basis_.size(); }
    const Vec& origin() const { return origin_; }
    const Matrix& basis() const { return basis_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }

    bool contains(const Vec& x) const { return dim() == ambient_dim() || is_zero(reduce(x - origin_)); }

    Vec coordinates(const Vec& x) const
    {
        Vec d = x - origin_;
        Vec y(dim());
        for (std::size_t i = 0; i < dim(); ++i) y[i] = d[pivots_[i]];
        return y;
    }

    Vec to_ambient(const Vec& y) const
    {
        Vec x = origin_;
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j) x[j] += y[i] * basis_[i][j];
        return x;
    }

    /// The linear functional <n, .> restricted to L, in intrinsic coordinates.
    Vec restrict(const Vec& n) const
    {
        Vec out(dim());
        for (std::size_t i = 0; i < dim(); ++i) out[i] = dot(basis_[i], n);
        return out;
    }

    /// The vector of L representing an intrinsic functional nu: <n, x - origin> = <nu, y>.
    Vec represent(const Vec& nu) const
    {
        Matrix gram(dim(), Vec(dim()));
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = 0; j < dim(); ++j) gram[i][j] = dot(basis_[i], basis_[j]);
        auto z = solve_linear(gram, nu);
        ensure(z.has_value(), "frame basis is not independent");
        Vec n(ambient_dim(), Rational(0));
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t j = 0; j < n.size(); ++j) n[j] += (*z)[i] * basis_[i][j];
        return n;
    }

    friend bool operator==(const AffineFrame&, const AffineFrame&) = default;

private:
    Vec reduce(Vec v) const
    {
        for (std::size_t i = 0; i < dim(); ++i) {
            Rational f = v[pivots_[i]];
            if (f == 0) continue;
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= f * basis_[i][j];
        }
        return v;
    }

    void insert(const Vec& d)
    {
        Vec v = reduce(d);
        auto it = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
        if (it == v.end()) return;
        const auto p = static_cast<std::size_t>(it - v.begin());
        Rational lead = v[p];
        for (auto& x : v) x /= lead;
        for (auto& row : basis_) {
            Rational f = row[p];
            if (f == 0) continue;
            for (std::size_t j = 0; j < row.size(); ++j) row[j] -= f * v[j];
        }
        auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), p) - pivots_.begin();
        pivots_.insert(pivots_.begin() + pos, p);
        basis_.insert(basis_.begin() + pos, std::move(v));
    }

    Vec origin_;
    Matrix basis_;
    std::vector<std::size_t> pivots_;
};

// ---------------------------------------------------------------------------
// Integer hull kernel

namespace detail {

inline std::int64_t int_gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }
inline Integer int_gcd(const Integer& a, const Integer& b) { return gcd(a, b); }
inline Rational to_rational(std::int64_t a) { return Rational(static_cast<long>(a)); }
inline Rational to_rational(const Integer& a) { return Rational(a); }

/// Hull of integer points spanning Z^r. Vertices are found by extreme-point
/// seeding and refinement; facets by supporting hyperplanes through r-subsets
/// of the current vertex set.
template <class Int>
class HullKernel {
public:
    using IPoint = std::vector<Int>;
    struct IFacet {
        IPoint normal;
        Int offset;
        std::vector<std::size_t> incident;
    };

    HullKernel(const std::vector<IPoint>& pts, std::size_t r) : pts_(pts), r_(r) {}

    void run()
    {
        seed();
        for (;;) {
            facets_ = facets_of(active_);
            bool added = false;
            for (const auto& f : facets_) {
                std::size_t best = argmax(f.normal);
                if (value(f.normal, pts_[best]) > f.offset && !in_active(best)) {
                    active_.insert(std::lower_bound(active_.begin(), active_.end(), best), best);
                    added = true;
                }
            }
            if (!added) break;
        }
    }

    const std::vector<std::size_t>& active() const { return active_; }
    const std::vector<IFacet>& facets() const { return facets_; }

private:
    static Int value(const IPoint& n, const IPoint& x)
    {
        Int s = 0;
        for (std::size_t i = 0; i < n.size(); ++i) s += n[i] * x[i];
        return s;
    }

    bool in_active(std::size_t i) const { return std::binary_search(active_.begin(), active_.end(), i); }

    /// Maximizer of <n, x>, ties broken towards the lexicographically largest point.
    std::size_t argmax(const IPoint& n) const
    {
        std::size_t best = 0;
        Int bv = value(n, pts_[0]);
        for (std::size_t i = 1; i < pts_.size(); ++i) {
            Int v = value(n, pts_[i]);
            if (v > bv || (v == bv && pts_[best] < pts_[i])) {
                best = i;
                bv = v;
            }
        }
        return best;
    }

    void add(std::size_t i)
    {
        if (!in_active(i)) active_.insert(std::lower_bound(active_.begin(), active_.end(), i), i);
    }

    void seed()
    {
        std::vector<IPoint> dirs;
        if (r_ <= 4) {
            IPoint d(r_, Int(-1));
            for (;;) {
                if (std::any_of(d.begin(), d.end(), [](const Int& x) { return x != 0; })) dirs.push_back(d);
                std::size_t i = 0;
                while (i < r_ && d[i] == 1) d[i++] = -1;
                if (i == r_) break;
                d[i] += 1;
            }
        } else {
            for (std::size_t i = 0; i < r_; ++i)
                for (int s : {-1, 1}) {
                    IPoint d(r_, Int(0));
                    d[i] = s;
                    dirs.push_back(d);
                }
        }
        for (const auto& d : dirs) add(argmax(d));
        // Extreme points can all sit in a proper face; top up with an affinely
        // independent set so the brute-force facets are full-dimensional.
        Matrix rows;
        for (auto i : active_) {
            Vec diff;
            for (std::size_t j = 0; j < r_; ++j) diff.push_back(to_rational(pts_[i][j]) - to_rational(pts_[active_[0]][j]));
            rows.push_back(std::move(diff));
        }
        std::size_t rank = rank_of(rows);
        for (std::size_t i = 0; i < pts_.size() && rank < r_; ++i) {
            Vec diff;
            for (std::size_t j = 0; j < r_; ++j) diff.push_back(to_rational(pts_[i][j]) - to_rational(pts_[active_[0]][j]));
            rows.push_back(std::move(diff));
            std::size_t nr = rank_of(rows);
            if (nr > rank) {
                rank = nr;
                add(i);
            } else {
                rows.pop_back();
            }
        }
        ensure(rank == r_, "hull kernel input does not span its space");
    }

    /// Determinant by fraction-free elimination.
    static Int det(std::vector<IPoint> m)
    {
        const std::size_t n = m.size();
        if (n == 0) return Int(1);
        Int prev = 1;
        int sign = 1;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (m[k][k] == 0) {
                std::size_t p = k + 1;
                while (p < n && m[p][k] == 0) ++p;
                if (p == n) return Int(0);
                std::swap(m[p], m[k]);
                sign = -sign;
            }
            for (std::size_t i = k + 1; i < n; ++i)
                for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            prev = m[k][k];
        }
        return sign > 0 ? m[n - 1][n - 1] : Int(-m[n - 1][n - 1]);
    }

    std::vector<IFacet> facets_of(const std::vector<std::size_t>& v) const
    {
        std::set<std::pair<IPoint, Int>> seen;
        std::vector<IFacet> out;
        if (v.size() < r_) return out;
        auto c = first_combination(r_);
        do {
            const IPoint& p0 = pts_[v[c[0]]];
            std::vector<IPoint> diffs;
            for (std::size_t k = 1; k < r_; ++k) {
                IPoint d(r_);
                for (std::size_t j = 0; j < r_; ++j) d[j] = pts_[v[c[k]]][j] - p0[j];
                diffs.push_back(std::move(d));
            }
            IPoint n(r_);
            bool nonzero = false;
            for (std::size_t j = 0; j < r_; ++j) {
                std::vector<IPoint> minor;
                for (const auto& d : diffs) {
                    IPoint row;
                    for (std::size_t t = 0; t < r_; ++t)
                        if (t != j) row.push_back(d[t]);
                    minor.push_back(std::move(row));
                }
                n[j] = det(std::move(minor));
                if (j % 2 == 1) n[j] = -n[j];
                nonzero = nonzero || n[j] != 0;
            }
            if (!nonzero) continue;
            const Int base = value(n, p0);
            bool pos = false;
            bool neg = false;
            for (auto i : v) {
                Int s = value(n, pts_[i]) - base;
                if (s > 0) pos = true;
                else if (s < 0) neg = true;
                if (pos && neg) break;
            }
            if (pos && neg) continue;
            if (pos)
                for (auto& x : n) x = -x;
            Int g = 0;
            for (const auto& x : n) g = int_gcd(g, x);
            for (auto& x : n) x /= g;
            Int off = value(n, p0);
            if (!seen.emplace(n, off).second) continue;
            IFacet f{n, off, {}};
            for (auto i : v)
                if (value(n, pts_[i]) == off) f.incident.push_back(i);
            out.push_back(std::move(f));
        } while (next_combination(c, v.size()));
        return out;
    }

    const std::vector<IPoint>& pts_;
    std::size_t r_;
    std::vector<std::size_t> active_;
    std::vector<IFacet> facets_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Hulls

/// Facet of a hull within its affine hull A: <normal, x> <= offset holds on
/// the hull with equality exactly on the incident vertices. The normal is a
/// primitive integer vector in L pointing outward.
struct Facet {
    Vec normal;
    Rational offset;
    std::vector<std::size_t> incident;
};

struct HullStructure {
    AffineFrame frame;
    std::vector<Vec> vertices;
    std::vector<Facet> facets;

    std::size_t ambient_dim() const { return frame.ambient_dim(); }
    std::size_t dim() const { return frame.dim(); }

    bool contains(const Vec& x) const
    {
        if (!frame.contains(x)) return false;
        if (dim() == 0) return x == vertices.front();
        return std::all_of(facets.begin(), facets.end(), [&](const Facet& f) { return dot(f.normal, x) <= f.offset; });
    }
};

namespace detail {

template <class Int>
HullStructure hull_with_kernel(const std::vector<Vec>& pts, const AffineFrame& frame, const std::vector<std::vector<Integer>>& scaled)
{
    const std::size_t r = frame.dim();
    std::vector<std::vector<Int>> ints;
    ints.reserve(scaled.size());
    for (const auto& p : scaled) {
        std::vector<Int> q;
        for (const auto& x : p) {
            if constexpr (std::is_same_v<Int, Integer>) q.push_back(x);
            else q.push_back(static_cast<Int>(x.get_si()));
        }
        ints.push_back(std::move(q));
    }
    HullKernel<Int> kernel(ints, r);
    kernel.run();

    // A point is a vertex iff the normals of its incident facets span L.
    std::vector<std::size_t> verts;
    for (auto i : kernel.active()) {
        Matrix normals;
        for (const auto& f : kernel.facets())
            if (std::binary_search(f.incident.begin(), f.incident.end(), i)) {
                Vec n;
                for (const auto& x : f.normal) n.push_back(to_rational(x));
                normals.push_back(std::move(n));
            }
        if (rank_of(std::move(normals)) == r) verts.push_back(i);
    }
    std::sort(verts.begin(), verts.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
    std::vector<std::size_t> slot(pts.size(), SIZE_MAX);
    HullStructure h;
    h.frame = frame;
    for (std::size_t k = 0; k < verts.size(); ++k) {
        slot[verts[k]] = k;
        h.vertices.push_back(pts[verts[k]]);
    }
    for (const auto& f : kernel.facets()) {
        Vec nu;
        for (const auto& x : f.normal) nu.push_back(to_rational(x));
        Facet out;
        out.normal = primitive(frame.represent(nu));
        for (auto i : f.incident)
            if (slot[i] != SIZE_MAX) out.incident.push_back(slot[i]);
        std::sort(out.incident.begin(), out.incident.end());
        ensure(!out.incident.empty(), "facet without vertices");
        out.offset = dot(out.normal, h.vertices[out.incident.front()]);
        h.facets.push_back(std::move(out));
    }
    std::sort(h.facets.begin(), h.facets.end(), [](const Facet& a, const Facet& b) {
        return std::tie(a.normal, a.offset) < std::tie(b.normal, b.offset);
    });
    return h;
}

} // namespace detail

/// Exact convex hull within the affine hull of the points.
inline HullStructure hull(std::span<const Vec> input)
{
    if (input.empty()) throw std::invalid_argument("hull of no points");
    std::vector<Vec> pts(input.begin(), input.end());
    for (auto& p : pts)
        for (auto& c : p) c.canonicalize();
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    AffineFrame frame = AffineFrame::of(pts);
    const std::size_t r = frame.dim();
    if (r == 0) return HullStructure{frame, {pts.front()}, {}};

    std::vector<Vec> coords;
    Integer l = 1;
    for (const auto& p : pts) {
        coords.push_back(frame.coordinates(p));
        for (const auto& y : coords.back()) l = lcm(l, y.get_den());
    }
    std::vector<std::vector<Integer>> scaled;
    Integer max_abs = 0;
    for (const auto& y : coords) {
        std::vector<Integer> s;
        for (const auto& c : y) {
            Integer v = c.get_num() * (l / c.get_den());
            if (abs(v) > max_abs) max_abs = abs(v);
            s.push_back(std::move(v));
        }
        scaled.push_back(std::move(s));
    }
    // int64 is exact for 3x3 minors of coordinates up to 10^4 and their dot products.
    if (r <= 4 && max_abs <= 10000) return detail::hull_with_kernel<std::int64_t>(pts, frame, scaled);
    return detail::hull_with_kernel<Integer>(pts, frame, scaled);
}

/// Facets incident to vertex v; their normals span L.
inline std::vector<std::size_t> incident_facets(const HullStructure& h, std::size_t v)
{
    if (v >= h.vertices.size()) throw std::out_of_range("vertex index");
    std::vector<std::size_t> out;
    Matrix normals;
    for (std::size_t f = 0; f < h.facets.size(); ++f) {
        const auto& inc = h.facets[f].incident;
        if (std::binary_search(inc.begin(), inc.end(), v)) {
            out.push_back(f);
            normals.push_back(h.facets[f].normal);
        }
    }
    ensure(rank_of(std::move(normals)) == h.dim(), "incident normals do not span L");
    return out;
}

/// r-subsets of F(v) with linearly independent normals, lexicographic.
inline std::vector<std::vector<std::size_t>> independent_subsets(const HullStructure& h, std::size_t v)
{
    const std::size_t r = h.dim();
    if (r == 0) throw std::invalid_argument("independent subsets need r >= 1");
    auto inc = incident_facets(h, v);
    std::vector<std::vector<std::size_t>> out;
    if (inc.size() < r) return out;
    auto c = first_combination(r);
    do {
        Matrix normals;
        std::vector<std::size_t> j;
        for (auto k : c) {
            j.push_back(inc[k]);
            normals.push_back(h.facets[inc[k]].normal);
        }
        if (rank_of(std::move(normals)) == r) out.push_back(std::move(j));
    } while (next_combination(c, inc.size()));
    return out;
}

inline nlohmann::json to_json(const HullStructure& h)
{
    nlohmann::json facets = nlohmann::json::array();
    for (const auto& f : h.facets)
        facets.push_back({{"normal", to_string(f.normal)}, {"offset", to_string(f.offset)}, {"incident", f.incident}});
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : h.vertices) verts.push_back(to_string(v));
    return {{"dim", h.dim()}, {"vertices", verts}, {"facets", facets}};
}

// ---------------------------------------------------------------------------
// Convex regions inside an affine frame

/// Polytope {x in A : all inequalities hold}, a single point, or empty.
class ConvexRegion {
public:
    enum class Kind { empty, point, polytope };

    static ConvexRegion empty(std::size_t ambient_dim)
    {
        ConvexRegion c;
        c.kind_ = Kind::empty;
        c.ambient_ = ambient_dim;
        return c;
    }

    static ConvexRegion point(Vec x)
    {
        ConvexRegion c;
        c.kind_ = Kind::point;
        c.ambient_ = x.size();
        c.vertices_ = {std::move(x)};
        return c;
    }

    /// Bounded polytope; vertices are enumerated exactly from r-subsets of the inequalities.
    static ConvexRegion polytope(AffineFrame frame, std::vector<LinearInequality> ineqs)
    {
        ConvexRegion c;
        c.ambient_ = frame.ambient_dim();
        c.frame_ = std::move(frame);
        c.ineqs_ = std::move(ineqs);
        c.enumerate_vertices();
        c.kind_ = c.vertices_.empty() ? Kind::empty : Kind::polytope;
        return c;
    }

    Kind kind() const { return kind_; }
    std::size_t ambient_dim() const { return ambient_; }
    const std::vector<Vec>& vertices() const { return vertices_; }
    const std::vector<LinearInequality>& inequalities() const { return ineqs_; }
    const AffineFrame& frame() const { return frame_; }

    bool contains(const Vec& x) const
    {
        switch (kind_) {
        case Kind::empty: return false;
        case Kind::point: return x == vertices_.front();
        case Kind::polytope:
            return frame_.contains(x) && std::all_of(ineqs_.begin(), ineqs_.end(), [&](const auto& q) { return q.holds(x); });
        }
        return false;
    }

    /// Intersection of two polytopes in the same frame.
    ConvexRegion intersect(const ConvexRegion& other) const
    {
        if (kind_ != Kind::polytope || other.kind_ != Kind::polytope) throw std::invalid_argument("intersect needs polytopes");
        if (!(frame_ == other.frame_)) throw std::invalid_argument("polytopes live in different frames");
        auto ineqs = ineqs_;
        ineqs.insert(ineqs.end(), other.ineqs_.begin(), other.ineqs_.end());
        return polytope(frame_, std::move(ineqs));
    }

    bool inside(const RationalHalfspace& h) const
    {
        return std::all_of(vertices_.begin(), vertices_.end(), [&](const Vec& v) { return h.contains(v); });
    }

private:
    void enumerate_vertices()
    {
        const std::size_t r = frame_.dim();
        Matrix rows;
        Vec rhs;
        for (const auto& q : ineqs_) {
            rows.push_back(frame_.restrict(q.normal));
            rhs.push_back(q.bound - dot(q.normal, frame_.origin()));
        }
        auto feasible = [&](const Vec& y) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (dot(rows[i], y) > rhs[i]) return false;
            return true;
        };
        std::set<Vec> found;
        if (r == 0) {
            if (feasible({})) found.insert(frame_.origin());
        } else if (rows.size() >= r) {
            auto c = first_combination(r);
            do {
                Matrix a;
                Vec b;
                for (auto k : c) {
                    a.push_back(rows[k]);
                    b.push_back(rhs[k]);
                }
                auto y = solve_linear(a, b);
                if (y && feasible(*y)) found.insert(frame_.to_ambient(*y));
            } while (next_combination(c, rows.size()));
        }
        vertices_.assign(found.begin(), found.end());
    }

    Kind kind_ = Kind::empty;
    std::size_t ambient_ = 0;
    AffineFrame frame_;
    std::vector<LinearInequality> ineqs_;
    std::vector<Vec> vertices_;
};

// ---------------------------------------------------------------------------
// Candidate simplices

struct SimplexCandidate {
    std::size_t apex = 0;
    std::vector<std::size_t> facet_subset;
    Vec aggregate;
    Rational extent;
    /// Apex first, then the vertex on the l-th edge for each facet F_l.
    std::vector<Vec> vertices;
    AffineFrame frame;
    /// <n_F, x> <= <n_F, v> for F in J, then <a, x> <= <a, v> + T.
    std::vector<LinearInequality> inequalities;

    bool contains(const Vec& x) const
    {
        return frame.contains(x) && std::all_of(inequalities.begin(), inequalities.end(), [&](const auto& q) { return q.holds(x); });
    }

    ConvexRegion region() const { return ConvexRegion::polytope(frame, inequalities); }
};

namespace detail {

/// values[f][x] = <n_f, vertex x>.
using FacetValues = std::vector<std::vector<Rational>>;

inline FacetValues facet_values(const HullStructure& h)
{
    FacetValues values(h.facets.size());
    for (std::size_t f = 0; f < h.facets.size(); ++f)
        for (const auto& x : h.vertices) values[f].push_back(dot(h.facets[f].normal, x));
    return values;
}

/// Assumes J is an independent r-subset of the facets at v.
inline SimplexCandidate build_candidate(const HullStructure& h, std::size_t v, const std::vector<std::size_t>& J, const FacetValues& values)
{
    const std::size_t r = h.dim();
    SimplexCandidate s;
    s.apex = v;
    s.facet_subset = J;
    s.frame = h.frame;
    const Vec& apex = h.vertices[v];
    s.aggregate = Vec(h.ambient_dim(), Rational(0));
    for (auto f : J) s.aggregate = s.aggregate - h.facets[f].normal;

    // <a, x - v> = sum over F in J of <n_F, v> - <n_F, x>.
    std::vector<Rational> along(h.vertices.size(), Rational(0));
    s.extent = 0;
    for (std::size_t x = 0; x < h.vertices.size(); ++x) {
        for (auto f : J) along[x] += values[f][v] - values[f][x];
        if (along[x] > s.extent) s.extent = along[x];
    }
    ensure(s.extent > 0, "candidate extent must be positive");

    // Edge vertices: w in L with <n_k, w> = -T [k == l].
    Matrix m(r, Vec(r));
    for (std::size_t k = 0; k < r; ++k)
        for (std::size_t i = 0; i < r; ++i) m[k][i] = dot(h.facets[J[k]].normal, h.frame.basis()[i]);
    auto inv = inverse(m);
    ensure(inv.has_value(), "candidate wedge map is singular");
    s.vertices.push_back(apex);
    for (std::size_t l = 0; l < r; ++l) {
        Vec w = apex;
        for (std::size_t i = 0; i < r; ++i) {
            const Rational c = -s.extent * (*inv)[i][l];
            for (std::size_t j = 0; j < w.size(); ++j) w[j] += c * h.frame.basis()[i][j];
        }
        s.vertices.push_back(std::move(w));
    }
    for (auto f : J) s.inequalities.push_back({h.facets[f].normal, values[f][v]});
    s.inequalities.push_back({s.aggregate, dot(s.aggregate, apex) + s.extent});
    for (std::size_t x = 0; x < h.vertices.size(); ++x) {
        for (auto f : J) ensure(values[f][x] <= values[f][v], "candidate simplex misses a hull vertex");
        ensure(along[x] <= s.extent, "candidate simplex misses a hull vertex");
    }
    return s;
}

} // namespace detail

/// S_{v,J}: the wedge of the facets in J at v, closed off at extent T along
/// the aggregate inward direction a = -sum n_F.
inline SimplexCandidate candidate_simplex(const HullStructure& h, std::size_t v, const std::vector<std::size_t>& J)
{
    const std::size_t r = h.dim();
    if (r == 0) throw std::invalid_argument("candidate simplex needs r >= 1");
    if (J.size() != r) throw std::invalid_argument("facet subset must have r elements");
    if (v >= h.vertices.size()) throw std::out_of_range("vertex index");
    Matrix normals;
    for (auto f : J) {
        const auto& inc = h.facets.at(f).incident;
        if (!std::binary_search(inc.begin(), inc.end(), v)) throw std::invalid_argument("facet not incident to apex");
        normals.push_back(h.facets[f].normal);
    }
    if (rank_of(normals) != r) throw std::invalid_argument("facet normals are dependent");
    auto s = detail::build_candidate(h, v, J, detail::facet_values(h));
    for (const auto& x : h.vertices) ensure(s.contains(x), "candidate simplex misses a hull vertex");
    return s;
}

inline bool simplex_contains(const SimplexCandidate& s, const Vec& x) { return s.contains(x); }

/// By convexity, the simplex lies in h iff all of its vertices do.
inline bool halfspace_contains_simplex(const RationalHalfspace& h, const SimplexCandidate& s)
{
    return std::all_of(s.vertices.begin(), s.vertices.end(), [&](const Vec& v) { return h.contains(v); });
}

/// All candidates S_{v,J} in (vertex, facet-subset) lexicographic order.
inline std::vector<SimplexCandidate> all_candidates(const HullStructure& h)
{
    std::vector<SimplexCandidate> out;
    if (h.dim() == 0) return out;
    const auto values = detail::facet_values(h);
    for (std::size_t v = 0; v < h.vertices.size(); ++v)
        for (const auto& J : independent_subsets(h, v)) out.push_back(detail::build_candidate(h, v, J, values));
    return out;
}

} // namespace vlab
