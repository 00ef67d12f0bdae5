#include "vlab/harness.hpp"

#include <CLI11.hpp>

#include <unistd.h>

using namespace vlab;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
};

ConceptClass class_from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read class file " + path);
    return read_class(in);
}

PointSet sample_from_text(const std::string& text, const ConceptClass& cls)
{
    std::vector<Point> pts;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        try {
            pts.push_back(std::all_of(tok.begin(), tok.end(), ::isdigit) ? static_cast<Point>(std::stoul(tok)) : cls.domain().parse_label(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad sample point '" + tok + "'");
        }
        if (pts.back() >= cls.domain_size()) throw ConfigError("sample point outside the domain");
    }
    return make_point_set(std::move(pts));
}

int cmd_run(const Globals& g, const std::string& config_path)
{
    auto cfg = load_config(config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads) cfg.threads = std::max<std::size_t>(1, *g.threads);
    fs::path out = g.out.empty() ? cfg.output : fs::path(g.out);
    auto r = run_experiment(cfg, out);
    std::cout << "wrote " << out.string() << '\n';
    if (r.summary.contains("invariant_violations"))
        std::cout << "trials " << r.summary["trials"] << ", invariant violations " << r.summary["invariant_violations"] << '\n';
    return r.exit_code;
}

int cmd_report(const Globals& g, const std::vector<std::string>& inputs)
{
    std::vector<nlohmann::json> summaries;
    for (const auto& p : inputs) summaries.push_back(read_summary(p));
    auto rep = make_report(summaries, isatty(STDOUT_FILENO) != 0);
    std::cout << rep.table;
    fs::path plot = g.out.empty() ? fs::path("report.dat") : fs::path(g.out);
    if (plot.has_parent_path()) fs::create_directories(plot.parent_path());
    write_text(plot, rep.plot_data);
    std::cout << "plot data: " << plot.string() << '\n';
    return exit_ok;
}

int cmd_verify(const std::string& class_path, const std::string& sample, const std::string& scheme, bool weak)
{
    auto cls = class_from_file(class_path);
    auto s = sample_from_text(sample, cls);
    QueryStrategy q;
    try {
        q = QueryStrategy::parse(scheme);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad scheme: ") + e.what());
    }
    bool ok = false;
    try {
        ok = weak ? verify_weak_scheme(cls, q, s) : verify_scheme(cls, q, s).valid;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::cout << (ok ? "valid" : "invalid") << " depth " << q.depth() << '\n';
    return ok ? exit_ok : exit_invariant;
}

int cmd_dimensions(const std::string& class_path, std::size_t closure_k)
{
    auto cls = class_from_file(class_path);
    nlohmann::json j{{"vc", to_json(vc_dimension(cls))}, {"one_star", to_json(one_star_number(cls))}};
    if (closure_k > 0) {
        auto fam = query_closure_family(SparseFamily(cls), closure_k);
        j["query_closure"] = {{"k", closure_k}, {"size", fam.size()}, {"vc", to_json(vc_dimension(fam, fam.domain_size()))}};
    }
    std::cout << j.dump(2) << '\n';
    return exit_ok;
}

int cmd_attack(const Globals& g, std::size_t M, const std::string& learner, const std::string& mode, std::size_t trials)
{
    std::ostringstream cfg;
    cfg << "kind = \"adversary\"\nname = \"attack-M" << M << "\"\ntrials = " << trials << "\nseed = " << g.seed.value_or(1)
        << "\n[game]\nkind = \"hidden-subset\"\nM = " << M << "\nlearner = \"" << learner << "\"\nmode = \"" << mode << "\"\n";
    auto c = parse_config(cfg.str());
    fs::path out = g.out.empty() ? c.output : fs::path(g.out);
    auto r = run_experiment(c, out);
    std::cout << r.summary.dump(2) << '\n';
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"vlab: query-based learning experiments"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override the master seed");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads");
    app.add_option("--out", g.out, "output directory (run, attack) or plot file (report)");

    std::string config;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config)->required()->check(CLI::ExistingFile);

    std::vector<std::string> inputs;
    auto* report = app.add_subcommand("report", "tabulate result directories");
    report->add_option("results", inputs)->required();

    std::string class_path, sample, scheme;
    bool weak = false;
    auto* verify = app.add_subcommand("verify-scheme", "check a query scheme on a sample");
    verify->add_option("--class", class_path)->required()->check(CLI::ExistingFile);
    verify->add_option("--sample", sample)->required();
    verify->add_option("--scheme", scheme)->required();
    verify->add_flag("--weak", weak);

    std::size_t closure_k = 0;
    auto* dims = app.add_subcommand("dimensions", "VC dimension and star number of a class");
    dims->add_option("--class", class_path)->required()->check(CLI::ExistingFile);
    dims->add_option("--closure-k", closure_k);

    std::size_t M = 1;
    std::size_t trials = 1000;
    std::string learner = "closure", mode = "exact";
    auto* attack = app.add_subcommand("attack", "play the hidden-subset game");
    attack->add_option("-M", M)->check(CLI::Range(1, 4));
    attack->add_option("--learner", learner)->check(CLI::IsMember({"closure", "omniscient"}));
    attack->add_option("--mode", mode)->check(CLI::IsMember({"exact", "monte-carlo"}));
    attack->add_option("--trials", trials);

    for (auto* sub : {run, report, verify, dims, attack}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }
    if (*seed_opt) g.seed = seed;
    if (*threads_opt) g.threads = threads;

    try {
        if (*run) return cmd_run(g, config);
        if (*report) return cmd_report(g, inputs);
        if (*verify) return cmd_verify(class_path, sample, scheme, weak);
        if (*dims) return cmd_dimensions(class_path, closure_k);
        return cmd_attack(g, M, learner, mode, trials);
    } catch (...) {
        std::string msg;
        int rc = exit_code_for(std::current_exception(), msg);
        std::cerr << msg << '\n';
        return rc;
    }
}
