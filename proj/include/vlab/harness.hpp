#pragma once

#include "vlab/experiments.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace vlab {

namespace fs = std::filesystem;

inline constexpr int schema_version = 1;
inline constexpr const char* results_header =
    "trial,seed,example_calls,membership_calls,false_positive_free,false_negative_mass,false_negative_ok,diagnostics";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_invariant = 3, exit_budget = 4 };

/// Parsed experiment file plus the directory it was read from.
struct ExperimentConfig {
    toml::table table;
    fs::path base_dir;
    std::string kind;
    std::string name;
    std::uint64_t seed = 1;
    std::size_t trials = 0;
    std::size_t threads = 1;
    fs::path output;
};

namespace detail {

inline const toml::table& section(const toml::table& t, std::string_view key)
{
    const auto* s = t[key].as_table();
    if (!s) throw ConfigError("missing table [" + std::string(key) + "]");
    return *s;
}

inline std::string get_string(const toml::table& t, std::string_view key, std::optional<std::string> fallback = std::nullopt)
{
    auto node = t[key];
    if (!node) {
        if (fallback) return *fallback;
        throw ConfigError("missing key '" + std::string(key) + "'");
    }
    auto v = node.value<std::string>();
    if (!v) throw ConfigError("key '" + std::string(key) + "' must be a string");
    return *v;
}

inline std::int64_t get_int(const toml::table& t, std::string_view key, std::optional<std::int64_t> fallback = std::nullopt)
{
    auto node = t[key];
    if (!node) {
        if (fallback) return *fallback;
        throw ConfigError("missing key '" + std::string(key) + "'");
    }
    if (!node.is_integer()) throw ConfigError("key '" + std::string(key) + "' must be an integer");
    return *node.value<std::int64_t>();
}

inline std::size_t get_count(const toml::table& t, std::string_view key, std::optional<std::int64_t> fallback = std::nullopt)
{
    auto v = get_int(t, key, fallback);
    if (v < 0) throw ConfigError("key '" + std::string(key) + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

inline double get_real(const toml::table& t, std::string_view key, double fallback)
{
    auto node = t[key];
    if (!node) return fallback;
    auto v = node.value<double>();
    if (!v) throw ConfigError("key '" + std::string(key) + "' must be a number");
    return *v;
}

inline bool get_bool(const toml::table& t, std::string_view key, bool fallback)
{
    auto node = t[key];
    if (!node) return fallback;
    if (!node.is_boolean()) throw ConfigError("key '" + std::string(key) + "' must be a boolean");
    return *node.value<bool>();
}

/// Exact rationals are written as strings ("1/10") or integers.
inline Rational get_rational(const toml::table& t, std::string_view key, std::optional<Rational> fallback = std::nullopt)
{
    auto node = t[key];
    if (!node) {
        if (fallback) return *fallback;
        throw ConfigError("missing key '" + std::string(key) + "'");
    }
    if (node.is_integer()) return Rational(static_cast<long>(*node.value<std::int64_t>()));
    auto s = node.value<std::string>();
    if (!s) throw ConfigError("key '" + std::string(key) + "' must be a rational string such as \"1/10\"");
    try {
        return parse_rational(*s);
    } catch (const std::exception& e) {
        throw ConfigError("key '" + std::string(key) + "': " + e.what());
    }
}

inline Rational unit_interval(const toml::table& t, std::string_view key, Rational fallback)
{
    Rational r = get_rational(t, key, fallback);
    if (r <= 0 || r >= 1) throw ConfigError("key '" + std::string(key) + "' must lie in (0, 1)");
    return r;
}

inline std::vector<std::string> get_strings(const toml::table& t, std::string_view key)
{
    std::vector<std::string> out;
    const auto* arr = t[key].as_array();
    if (!arr) throw ConfigError("key '" + std::string(key) + "' must be an array");
    for (const auto& el : *arr) {
        auto s = el.value<std::string>();
        if (!s) throw ConfigError("key '" + std::string(key) + "' must hold strings");
        out.push_back(*s);
    }
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config(std::string_view text, fs::path base_dir = ".")
{
    ExperimentConfig c;
    try {
        c.table = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error: " << e.description() << " at line " << e.source().begin.line;
        throw ConfigError(os.str());
    }
    c.base_dir = std::move(base_dir);
    const auto& t = c.table;
    if (detail::get_int(t, "schema", schema_version) != schema_version) throw ConfigError("unsupported schema version");
    c.kind = detail::get_string(t, "kind");
    static const std::vector<std::string> kinds{"learn", "compress", "dimension", "adversary", "geometry-demo"};
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) throw ConfigError("unknown experiment kind '" + c.kind + "'");
    c.name = detail::get_string(t, "name", c.kind);
    c.seed = static_cast<std::uint64_t>(detail::get_int(t, "seed", 1));
    c.trials = detail::get_count(t, "trials", 0);
    c.threads = std::max<std::size_t>(1, detail::get_count(t, "threads", 1));
    c.output = detail::get_string(t, "output", "results/" + c.name);
    return c;
}

inline ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

/// Finite class from a [class] table: a named family or a class file.
inline ConceptClass load_class(const toml::table& t, const fs::path& base_dir)
{
    const std::string family = detail::get_string(t, "family");
    auto dim = [&] {
        auto d = detail::get_int(t, "d");
        if (d < 1 || d > 12) throw ConfigError("class dimension d must lie in [1, 12]");
        return static_cast<unsigned>(d);
    };
    auto size = [&] {
        auto n = detail::get_int(t, "n");
        if (n < 1 || n > 4096) throw ConfigError("class size n must lie in [1, 4096]");
        return static_cast<std::size_t>(n);
    };
    ConceptClass cls = [&]() -> ConceptClass {
        if (family == "monotone-conjunctions") return monotone_conjunctions(dim());
        if (family == "singleton-complements") return singleton_complements(dim());
        if (family == "cube-halfspaces") return cube_halfspaces(dim());
        if (family == "power-set") {
            auto n = size();
            if (n > 16) throw ConfigError("power-set class is limited to n <= 16");
            return power_set(n);
        }
        if (family == "intervals") return intervals(size());
        if (family == "hybrid") return hybrid_threshold_class(size());
        if (family == "file") {
            fs::path p = base_dir / detail::get_string(t, "path");
            std::ifstream in(p);
            if (!in) throw ConfigError("cannot read class file " + p.string());
            return read_class(in);
        }
        throw ConfigError("unknown class family '" + family + "'");
    }();
    if (detail::get_bool(t, "intersection_closure", false)) cls = intersection_closure(cls);
    return cls;
}

// ---------------------------------------------------------------------------
// Output

inline std::string csv_row(const TrialRecord& r)
{
    std::string diag;
    for (const auto& [k, v] : r.diagnostics) {
        if (!diag.empty()) diag += ';';
        diag += k + '=' + v;
    }
    std::ostringstream os;
    os << r.trial << ',' << r.seed << ',' << r.example_calls << ',' << r.membership_calls << ',' << (r.false_positive_free ? 1 : 0)
       << ',' << to_string(r.false_negative_mass) << ',' << (r.false_negative_ok ? 1 : 0) << ',' << diag;
    return os.str();
}

/// Diagnostics whose name marks a hard invariant; a value of 0 is a violation.
inline bool is_invariant_flag(const std::string& key)
{
    return key.starts_with("queries_within") || key == "sample_contained" || key == "residuals_monotone";
}

inline nlohmann::json summarize(const ExperimentConfig& cfg, const std::string& learner, const Rational& eps,
                                const std::vector<TrialRecord>& records)
{
    std::size_t fp_violations = 0;
    std::size_t fn_ok = 0;
    std::size_t successes = 0;
    std::size_t flag_violations = 0;
    std::size_t fallbacks = 0;
    double ex_sum = 0;
    double q_sum = 0;
    std::size_t ex_max = 0;
    std::size_t q_max = 0;
    for (const auto& r : records) {
        fp_violations += r.false_positive_free ? 0 : 1;
        fn_ok += r.false_negative_ok ? 1 : 0;
        successes += r.false_positive_free && r.false_negative_ok ? 1 : 0;
        for (const auto& [k, v] : r.diagnostics) {
            if (is_invariant_flag(k) && v == "0") ++flag_violations;
            if (k == "fallback" && v == "1") ++fallbacks;
        }
        ex_sum += static_cast<double>(r.example_calls);
        q_sum += static_cast<double>(r.membership_calls);
        ex_max = std::max(ex_max, r.example_calls);
        q_max = std::max(q_max, r.membership_calls);
    }
    const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    auto fraction = [&](std::size_t k) { return records.empty() ? 0.0 : static_cast<double>(k) / n; };
    return {{"schema", schema_version},
            {"kind", cfg.kind},
            {"name", cfg.name},
            {"learner", learner},
            {"seed", cfg.seed},
            {"trials", records.size()},
            {"epsilon", to_string(eps)},
            {"successes", successes},
            {"success_fraction", fraction(successes)},
            {"false_negative_ok", fn_ok},
            {"false_negative_failure_fraction", fraction(records.size() - fn_ok)},
            {"false_positive_violations", fp_violations},
            {"invariant_violations", fp_violations + flag_violations},
            {"fallbacks", fallbacks},
            {"mean_example_calls", records.empty() ? 0.0 : ex_sum / n},
            {"max_example_calls", ex_max},
            {"mean_membership_calls", records.empty() ? 0.0 : q_sum / n},
            {"max_membership_calls", q_max}};
}

inline void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Experiment kinds

struct RunOutcome {
    int exit_code = exit_ok;
    nlohmann::json summary;
};

inline RunOutcome run_learn(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const auto& t = cfg.table;
    const auto& lt = detail::section(t, "learner");
    const std::string learner = detail::get_string(lt, "name");
    Rational eps = detail::unit_interval(lt, "epsilon", Rational(1, 10));
    Rational delta = detail::unit_interval(lt, "delta", Rational(1, 10));

    // Classes shared by all trials live here, outside the trial closure.
    std::optional<ConceptClass> cls;
    std::optional<ConceptClass> other;
    TrialFn fn;
    std::size_t qa = 0;
    std::size_t qb = 0;
    HalfspaceSetup hs;
    BoostSetup bs;
    UnionSetup us;
    HybridSetup hy;
    ClosureSetup cs;

    if (learner == "hull-simplex" || learner == "s-halfspace") {
        const auto& tt = detail::section(t, "target");
        hs.d = detail::get_count(tt, "d", 2);
        if (hs.d < 1 || hs.d > 6) throw ConfigError("halfspace dimension must lie in [1, 6]");
        hs.s = learner == "hull-simplex" ? 1 : detail::get_count(lt, "s", 2);
        if (hs.s < 1) throw ConfigError("s must be at least 1");
        hs.epsilon = eps;
        hs.delta = delta;
        hs.c = detail::get_real(lt, "c", 1.0);
        if (!(hs.c > 0)) throw ConfigError("c must be positive");
        const std::string tk = detail::get_string(tt, "kind", "random-halfspace");
        if (tk == "random-halfspace") hs.target = HalfspaceTargetKind::random_halfspace;
        else if (tk == "quadrant") hs.target = HalfspaceTargetKind::quadrant;
        else if (tk == "fixed") {
            hs.target = HalfspaceTargetKind::fixed;
            for (const auto& s : detail::get_strings(tt, "halfspaces")) {
                try {
                    hs.fixed.push_back(parse_halfspace(s));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string("bad halfspace: ") + e.what());
                }
                if (hs.fixed.back().normal.size() != hs.d) throw ConfigError("halfspace dimension disagrees with d");
            }
            if (hs.fixed.empty()) throw ConfigError("fixed target needs halfspaces");
        } else {
            throw ConfigError("unknown target kind '" + tk + "'");
        }
        if (const auto* dt = t["distribution"].as_table()) {
            if (detail::get_string(*dt, "kind", "grid") != "grid") throw ConfigError("only grid distributions are configurable");
            hs.resolution = detail::get_int(*dt, "resolution", 20);
            hs.box = detail::get_int(*dt, "box", hs.resolution);
            hs.evaluation_draws = detail::get_count(*dt, "evaluation_draws", 0);
            if (hs.resolution < 1 || hs.box < 1) throw ConfigError("grid resolution and box must be positive");
        }
        fn = [&hs](std::size_t, std::uint64_t seed) { return halfspace_trial(hs, seed); };
    } else if (learner == "boosted-closure") {
        cls = load_class(detail::section(t, "class"), cfg.base_dir);
        bs.epsilon = eps;
        bs.delta = delta;
        bs.base_epsilon = detail::unit_interval(lt, "base_epsilon", Rational(1, 18));
        bs.base_delta = detail::unit_interval(lt, "base_delta", Rational(1, 3));
        fn = [&](std::size_t, std::uint64_t seed) { return boost_trial(bs, *cls, seed); };
    } else if (learner == "union") {
        us.conj_dim = static_cast<unsigned>(detail::get_count(lt, "d", 3));
        if (us.conj_dim < 1 || us.conj_dim > 6) throw ConfigError("union d must lie in [1, 6]");
        us.sample_size = detail::get_count(lt, "sample_size", 20);
        cls = monotone_conjunctions(us.conj_dim);
        other = intervals(cls->domain_size());
        qa = vc_dimension(*cls).value;
        qb = vc_dimension(*other).value;
        fn = [&](std::size_t trial, std::uint64_t seed) { return union_trial(us, *cls, *other, qa, qb, trial, seed); };
    } else if (learner == "hybrid") {
        hy.n = detail::get_count(lt, "n", 1024);
        if (hy.n < 1) throw ConfigError("hybrid n must be positive");
        hy.epsilon = eps;
        hy.delta = delta;
        fn = [&hy](std::size_t, std::uint64_t seed) { return hybrid_trial(hy, seed); };
    } else if (learner == "closure") {
        cls = load_class(detail::section(t, "class"), cfg.base_dir);
        cs.sample_size = detail::get_count(lt, "sample_size", 10);
        cs.epsilon = eps;
        cs.search_cap = detail::get_count(lt, "search_cap", 0);
        fn = [&](std::size_t, std::uint64_t seed) { return closure_trial(cs, *cls, seed); };
    } else {
        throw ConfigError("unknown learner '" + learner + "'");
    }

    auto records = run_trials(cfg.trials, cfg.seed, cfg.threads, fn);
    std::string csv = std::string(results_header) + "\n";
    std::string timings = "trial,seconds\n";
    for (const auto& r : records) {
        csv += csv_row(r) + "\n";
        std::ostringstream os;
        os << r.trial << ',' << std::fixed << std::setprecision(6) << r.seconds << '\n';
        timings += os.str();
    }
    RunOutcome out;
    out.summary = summarize(cfg, learner, eps, records);
    write_text(out_dir / "results.csv", csv);
    write_text(out_dir / "timings.csv", timings);
    write_json(out_dir / "summary.json", out.summary);
    if (out.summary["invariant_violations"].get<std::size_t>() > 0) out.exit_code = exit_invariant;
    return out;
}

inline PointSet parse_sample(const toml::table& t, std::string_view key, const ConceptClass& cls)
{
    PointSet s;
    const auto* arr = t[key].as_array();
    if (!arr) throw ConfigError("key '" + std::string(key) + "' must be an array");
    for (const auto& el : *arr) {
        if (el.is_integer()) {
            auto v = *el.value<std::int64_t>();
            if (v < 0 || static_cast<std::size_t>(v) >= cls.domain_size()) throw ConfigError("sample point outside the domain");
            s.push_back(static_cast<Point>(v));
        } else if (auto str = el.value<std::string>()) {
            try {
                s.push_back(cls.domain().parse_label(*str));
            } catch (const std::exception& e) {
                throw ConfigError(std::string("bad sample label: ") + e.what());
            }
        } else {
            throw ConfigError("sample entries must be integers or labels");
        }
    }
    return make_point_set(std::move(s));
}

inline RunOutcome run_compress(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const auto& t = cfg.table;
    auto cls = load_class(detail::section(t, "class"), cfg.base_dir);
    const auto& ct = detail::section(t, "compress");
    PointSet s = parse_sample(ct, "sample", cls);
    const std::string mode = detail::get_string(ct, "mode", "strong");
    if (mode != "strong" && mode != "weak") throw ConfigError("mode must be strong or weak");
    nlohmann::json j{{"schema", schema_version}, {"kind", cfg.kind}, {"name", cfg.name}, {"mode", mode}, {"sample", s}};
    if (auto text = ct["scheme"].value<std::string>()) {
        QueryStrategy q;
        try {
            q = QueryStrategy::parse(*text);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad scheme: ") + e.what());
        }
        j["scheme"] = q.to_text();
        j["depth"] = q.depth();
        j["valid"] = mode == "strong" ? verify_scheme(cls, q, s).valid : verify_weak_scheme(cls, q, s);
    } else {
        const std::size_t cap = detail::get_count(ct, "cap", s.size());
        auto r = search_min_scheme(cls, s, cap, mode == "strong" ? SchemeMode::strong : SchemeMode::weak);
        j["cap"] = cap;
        j["found"] = r.strategy.has_value();
        j["depth"] = r.depth;
        j["states_explored"] = r.states_explored;
        if (r.strategy) j["scheme"] = r.strategy->to_text();
    }
    write_json(out_dir / "summary.json", j);
    return {exit_ok, j};
}

inline RunOutcome run_dimension(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const auto& t = cfg.table;
    auto cls = load_class(detail::section(t, "class"), cfg.base_dir);
    nlohmann::json j{{"schema", schema_version}, {"kind", cfg.kind}, {"name", cfg.name}, {"domain_size", cls.domain_size()}, {"class_size", cls.size()}};
    j["vc"] = to_json(vc_dimension(cls));
    j["one_star"] = to_json(one_star_number(cls));
    nlohmann::json closures = nlohmann::json::array();
    if (const auto* dt = t["dimension"].as_table(); dt && (*dt)["closure_k"]) {
        const auto* arr = (*dt)["closure_k"].as_array();
        if (!arr) throw ConfigError("closure_k must be an array");
        for (const auto& el : *arr) {
            auto k = el.value<std::int64_t>();
            if (!k || *k < 0) throw ConfigError("closure_k entries must be nonnegative integers");
            auto fam = query_closure_family(SparseFamily(cls), static_cast<std::size_t>(*k));
            closures.push_back({{"k", *k}, {"size", fam.size()}, {"vc", to_json(vc_dimension(fam, fam.domain_size()))}});
        }
    }
    j["query_closures"] = closures;
    write_json(out_dir / "summary.json", j);
    return {exit_ok, j};
}

inline RunOutcome run_adversary(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const auto& gt = detail::section(cfg.table, "game");
    const std::string kind = detail::get_string(gt, "kind");
    const std::size_t M = detail::get_count(gt, "M", 1);
    if (M < 1) throw ConfigError("M must be at least 1");
    Rational eps = detail::get_rational(gt, "epsilon", Rational(49, 100));
    GameParameters p;
    if (kind == "hidden-subset") p = GameParameters::hidden_subset(M, eps);
    else if (kind == "hidden-singleton") p = GameParameters::hidden_singleton(detail::get_count(gt, "n"), M, eps);
    else throw ConfigError("unknown game '" + kind + "'");
    p.unlimited_budget = detail::get_bool(gt, "unlimited_budget", false);

    const std::string learner_name = detail::get_string(gt, "learner", "closure");
    std::optional<ConceptClass> cls;
    Learner learner;
    if (learner_name == "closure") {
        if (p.kind == GameKind::hidden_subset && p.n > 16) throw ConfigError("closure learner over the power set is limited to n <= 16");
        cls = p.kind == GameKind::hidden_subset ? power_set(p.n) : singleton_complements(FiniteDomain(p.n));
        learner = budgeted_closure_learner(*cls, M);
    } else if (learner_name == "omniscient") {
        learner = omniscient_learner(p.n);
    } else {
        throw ConfigError("unknown game learner '" + learner_name + "'");
    }
    const std::string mode = detail::get_string(gt, "mode", "exact");
    GameReport rep;
    try {
        if (mode == "exact") rep = play_exact(p, learner);
        else if (mode == "monte-carlo") rep = play_monte_carlo(p, learner, std::max<std::size_t>(1, cfg.trials), cfg.seed);
        else throw ConfigError("mode must be exact or monte-carlo");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    nlohmann::json j = to_json(rep);
    j["schema"] = schema_version;
    j["kind"] = cfg.kind;
    j["name"] = cfg.name;
    j["learner"] = learner_name;
    if (kind == "hidden-subset") {
        nlohmann::json counting = nlohmann::json::array();
        for (std::size_t m = 1; m <= 10; ++m) {
            auto c = counting_inequality(m);
            counting.push_back({{"M", m}, {"successes", c.successes.get_str()}, {"candidates", c.candidates.get_str()}, {"holds", c.holds}});
        }
        j["counting"] = counting;
    }
    write_json(out_dir / "summary.json", j);
    return {exit_ok, j};
}

inline RunOutcome run_geometry_demo(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    const auto& gt = detail::section(cfg.table, "geometry");
    const std::string demo = detail::get_string(gt, "demo");
    nlohmann::json j{{"schema", schema_version}, {"kind", cfg.kind}, {"name", cfg.name}, {"demo", demo}};
    if (demo == "cube") {
        auto d = detail::get_int(gt, "d", 2);
        if (d < 1 || d > 4) throw ConfigError("cube demo needs 1 <= d <= 4");
        j["report"] = to_json(cube_halfspace_demo(static_cast<unsigned>(d), {}, cfg.seed));
    } else if (demo == "hull") {
        std::vector<Vec> pts;
        for (const auto& s : detail::get_strings(gt, "points")) {
            try {
                pts.push_back(parse_point(s));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("bad point: ") + e.what());
            }
        }
        if (pts.empty()) throw ConfigError("hull demo needs points");
        for (const auto& p : pts)
            if (p.size() != pts.front().size()) throw ConfigError("points disagree on dimension");
        auto h = hull(pts);
        j["hull"] = to_json(h);
        nlohmann::json cands = nlohmann::json::array();
        if (h.dim() > 0)
            for (const auto& c : all_candidates(h)) {
                nlohmann::json verts = nlohmann::json::array();
                for (const auto& v : c.vertices) verts.push_back(to_string(v));
                cands.push_back({{"apex", c.apex}, {"facets", c.facet_subset}, {"extent", to_string(c.extent)}, {"vertices", verts}});
            }
        j["candidates"] = cands;
    } else {
        throw ConfigError("unknown geometry demo '" + demo + "'");
    }
    write_json(out_dir / "summary.json", j);
    return {exit_ok, j};
}

/// Runs a config into out_dir. Errors surface as exceptions; see exit_code_for.
inline RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir)
{
    fs::create_directories(out_dir);
    if (cfg.kind == "learn") return run_learn(cfg, out_dir);
    if (cfg.kind == "compress") return run_compress(cfg, out_dir);
    if (cfg.kind == "dimension") return run_dimension(cfg, out_dir);
    if (cfg.kind == "adversary") return run_adversary(cfg, out_dir);
    return run_geometry_demo(cfg, out_dir);
}

/// Maps an in-flight exception to the documented exit code and message.
inline int exit_code_for(std::exception_ptr e, std::string& message)
{
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& x) {
        message = std::string("config error: ") + x.what();
        return exit_config;
    } catch (const InvariantViolation& x) {
        message = std::string("invariant violation: ") + x.what();
        return exit_invariant;
    } catch (const BudgetViolation& x) {
        message = std::string("budget violation: ") + x.what();
        return exit_budget;
    } catch (const std::exception& x) {
        message = std::string("error: ") + x.what();
        return 1;
    }
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
    std::string table;
    std::string plot_data;
};

inline nlohmann::json read_summary(const fs::path& p)
{
    fs::path file = fs::is_directory(p) ? p / "summary.json" : p;
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read " + file.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad summary " + file.string() + ": " + e.what());
    }
}

/// Aggregates summaries of one kind into a text table and columnar plot data.
inline Report make_report(const std::vector<nlohmann::json>& summaries, bool color = false)
{
    if (summaries.empty()) throw ConfigError("report needs at least one result");
    const std::string kind = summaries.front().value("kind", "");
    for (const auto& s : summaries) {
        if (s.value("schema", 0) != schema_version) throw ConfigError("unsupported result schema");
        if (s.value("kind", "") != kind) throw ConfigError("mixed-schema inputs: cannot combine '" + kind + "' with '" + s.value("kind", "") + "'");
    }
    std::ostringstream table;
    std::ostringstream plot;
    const char* green = color ? "\033[32m" : "";
    const char* red = color ? "\033[31m" : "";
    const char* reset = color ? "\033[0m" : "";
    if (kind == "learn") {
        table << std::left << std::setw(24) << "name" << std::setw(16) << "learner" << std::setw(10) << "epsilon" << std::setw(8) << "trials"
              << std::setw(10) << "success" << std::setw(10) << "fn_fail" << std::setw(12) << "examples" << std::setw(10) << "queries"
              << "fp_viol\n";
        plot << "# epsilon mean_example_calls fn_failure_fraction mean_membership_calls\n";
        for (const auto& s : summaries) {
            const auto fp = s.at("false_positive_violations").get<std::size_t>();
            table << std::left << std::setw(24) << s.at("name").get<std::string>() << std::setw(16) << s.at("learner").get<std::string>()
                  << std::setw(10) << s.at("epsilon").get<std::string>() << std::setw(8) << s.at("trials").get<std::size_t>() << std::fixed
                  << std::setprecision(3) << std::setw(10) << s.at("success_fraction").get<double>() << std::setw(10)
                  << s.at("false_negative_failure_fraction").get<double>() << std::setprecision(1) << std::setw(12)
                  << s.at("mean_example_calls").get<double>() << std::setw(10) << s.at("mean_membership_calls").get<double>()
                  << (fp == 0 ? green : red) << fp << reset << '\n';
            plot << to_double(parse_rational(s.at("epsilon").get<std::string>())) << ' ' << s.at("mean_example_calls").get<double>() << ' '
                 << s.at("false_negative_failure_fraction").get<double>() << ' ' << s.at("mean_membership_calls").get<double>() << '\n';
        }
    } else if (kind == "adversary") {
        table << std::left << std::setw(24) << "name" << std::setw(18) << "game" << std::setw(5) << "M" << std::setw(6) << "n" << std::setw(14)
              << "success" << "verdict\n";
        plot << "# M success_probability\n";
        for (const auto& s : summaries) {
            std::string prob = s.contains("probability") ? s["probability"].get<std::string>()
                                                          : (s.contains("estimate") ? std::to_string(s["estimate"]["value"].get<double>()) : "-");
            std::string verdict;
            if (!s.at("hard").get<bool>()) {
                verdict = s.value("note", "prior not hard");
            } else {
                double p = s.contains("probability") ? to_double(parse_rational(prob)) : s["estimate"]["upper"].get<double>();
                bool ok = p <= 0.5;
                verdict = std::string(ok ? green : red) + (ok ? "<= 1/2" : "> 1/2") + reset;
            }
            table << std::left << std::setw(24) << s.at("name").get<std::string>() << std::setw(18) << s.at("kind").get<std::string>()
                  << std::setw(5) << s.at("M").get<std::size_t>() << std::setw(6) << s.at("n").get<std::size_t>() << std::setw(14) << prob
                  << verdict << '\n';
            if (prob != "-") plot << s.at("M").get<std::size_t>() << ' ' << (s.contains("probability") ? to_double(parse_rational(prob)) : s["estimate"]["value"].get<double>()) << '\n';
        }
    } else {
        plot << "# name\n";
        for (const auto& s : summaries) {
            table << s.value("name", "?") << ": " << s.dump() << '\n';
            plot << s.value("name", "?") << '\n';
        }
    }
    return {table.str(), plot.str()};
}

} // namespace vlab
