#include "vlab/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace vlab;

namespace {

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("vlab_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string halfspace_config(std::size_t trials, std::size_t threads)
{
    std::ostringstream os;
    os << "schema = 1\nkind = \"learn\"\nname = \"hs\"\nseed = 7\ntrials = " << trials << "\nthreads = " << threads
       << "\n[learner]\nname = \"hull-simplex\"\nepsilon = \"1/5\"\ndelta = \"1/5\"\n[target]\nkind = \"random-halfspace\"\nd = 2\n"
          "[distribution]\nresolution = 8\nbox = 8\n";
    return os.str();
}

int run_cli(const std::string& args)
{
    std::string cmd = std::string(VLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, ParsesDefaultsAndRejectsBadInput)
{
    auto c = parse_config(halfspace_config(3, 1));
    EXPECT_EQ(c.kind, "learn");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.trials, 3u);
    EXPECT_EQ(c.output, fs::path("results/hs"));

    EXPECT_THROW(parse_config("kind = \"learn\"\nschema = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("kind = \"dance\"\n"), ConfigError);
    EXPECT_THROW(parse_config("kind = = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("name = \"x\"\n"), ConfigError);
    EXPECT_THROW(parse_config("kind = \"learn\"\ntrials = -1\n"), ConfigError);

    auto dir = scratch("bad");
    auto bad_eps = parse_config("kind = \"learn\"\n[learner]\nname = \"hybrid\"\nepsilon = \"3/2\"\n");
    EXPECT_THROW(run_experiment(bad_eps, dir), ConfigError);
    auto bad_learner = parse_config("kind = \"learn\"\n[learner]\nname = \"oracle\"\n");
    EXPECT_THROW(run_experiment(bad_learner, dir), ConfigError);
    auto missing = parse_config("kind = \"learn\"\n");
    EXPECT_THROW(run_experiment(missing, dir), ConfigError);
}

TEST(Run, ZeroTrialsWritesHeaderOnly)
{
    auto dir = scratch("zero");
    auto r = run_experiment(parse_config(halfspace_config(0, 1)), dir);
    EXPECT_EQ(r.exit_code, exit_ok);
    EXPECT_EQ(slurp(dir / "results.csv"), std::string(results_header) + "\n");
    EXPECT_EQ(r.summary["trials"], 0);
    EXPECT_EQ(r.summary["invariant_violations"], 0);
}

TEST(Run, OutputIsAPureFunctionOfConfig)
{
    auto a = scratch("det_a");
    auto b = scratch("det_b");
    auto c = scratch("det_c");
    run_experiment(parse_config(halfspace_config(12, 1)), a);
    run_experiment(parse_config(halfspace_config(12, 1)), b);
    run_experiment(parse_config(halfspace_config(12, 3)), c);
    const auto csv = slurp(a / "results.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
    EXPECT_EQ(csv, slurp(b / "results.csv"));
    EXPECT_EQ(csv, slurp(c / "results.csv"));
    EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
    EXPECT_EQ(slurp(a / "summary.json"), slurp(c / "summary.json"));
    EXPECT_TRUE(fs::exists(a / "timings.csv"));
}

TEST(Run, FixedTargetAndOtherLearners)
{
    auto dir = scratch("kinds");
    auto fixed = parse_config("kind = \"learn\"\ntrials = 4\n[learner]\nname = \"s-halfspace\"\ns = 2\nepsilon = \"1/5\"\ndelta = \"1/5\"\n"
                              "[target]\nkind = \"fixed\"\nd = 2\nhalfspaces = [\"1 0 >= -1/2\", \"0 1 >= -1/2\"]\n"
                              "[distribution]\nresolution = 4\nbox = 4\n");
    auto r = run_experiment(fixed, dir);
    EXPECT_EQ(r.exit_code, exit_ok);
    EXPECT_EQ(r.summary["false_positive_violations"], 0);

    auto mismatched = parse_config("kind = \"learn\"\n[learner]\nname = \"hull-simplex\"\n[target]\nkind = \"fixed\"\nd = 3\nhalfspaces = [\"1 0 >= 0\"]\n");
    EXPECT_THROW(run_experiment(mismatched, dir), ConfigError);

    for (std::string learner : {"hybrid", "union"}) {
        auto cfg = parse_config("kind = \"learn\"\ntrials = 3\n[learner]\nname = \"" + learner + "\"\n");
        auto out = run_experiment(cfg, dir);
        EXPECT_EQ(out.exit_code, exit_ok) << learner;
        EXPECT_EQ(out.summary["invariant_violations"], 0) << learner;
    }
    auto closure = parse_config("kind = \"learn\"\ntrials = 3\n[learner]\nname = \"closure\"\nsample_size = 6\n"
                                "[class]\nfamily = \"monotone-conjunctions\"\nd = 3\n");
    EXPECT_EQ(run_experiment(closure, dir).summary["false_positive_violations"], 0);
}

TEST(Run, FalsePositiveRowsCountAsInvariantViolations)
{
    ExperimentConfig cfg = parse_config(halfspace_config(2, 1));
    TrialRecord ok;
    ok.false_positive_free = true;
    ok.false_negative_ok = true;
    TrialRecord bad = ok;
    bad.trial = 1;
    bad.false_positive_free = false;
    EXPECT_EQ(summarize(cfg, "x", Rational(1, 10), {ok, ok})["invariant_violations"], 0);
    EXPECT_EQ(summarize(cfg, "x", Rational(1, 10), {ok, bad})["invariant_violations"], 1);

    TrialRecord flagged = ok;
    flagged.diagnostics["queries_within_bound"] = "0";
    EXPECT_EQ(summarize(cfg, "x", Rational(1, 10), {flagged})["invariant_violations"], 1);

    bad.diagnostics = {{"b", "2"}, {"a", "1"}};
    EXPECT_EQ(csv_row(bad), "1,0,0,0,0,0,1,a=1;b=2");
}

TEST(Run, ExitCodesForErrorKinds)
{
    std::string msg;
    auto code = [&](auto ex) { return exit_code_for(std::make_exception_ptr(ex), msg); };
    EXPECT_EQ(code(ConfigError("x")), exit_config);
    EXPECT_EQ(code(InvariantViolation("x")), exit_invariant);
    EXPECT_EQ(code(BudgetViolation("x")), exit_budget);
    EXPECT_NE(code(std::runtime_error("x")), 0);
}

TEST(Report, SingleRunGivesOneRow)
{
    auto dir = scratch("report_one");
    run_experiment(parse_config(halfspace_config(3, 1)), dir);
    auto rep = make_report({read_summary(dir)});
    EXPECT_EQ(std::count(rep.table.begin(), rep.table.end(), '\n'), 2);
    EXPECT_EQ(std::count(rep.plot_data.begin(), rep.plot_data.end(), '\n'), 2);
    EXPECT_NE(rep.table.find("hull-simplex"), std::string::npos);
}

TEST(Report, RejectsMixedKinds)
{
    auto learn = scratch("report_learn");
    auto game = scratch("report_game");
    run_experiment(parse_config(halfspace_config(1, 1)), learn);
    run_experiment(parse_config("kind = \"adversary\"\n[game]\nkind = \"hidden-subset\"\nM = 1\n"), game);
    EXPECT_THROW(make_report({read_summary(learn), read_summary(game)}), ConfigError);
    auto rep = make_report({read_summary(game)}, true);
    EXPECT_NE(rep.table.find("\033[32m<= 1/2"), std::string::npos);
}

TEST(Report, EpsilonSweepColumns)
{
    std::vector<nlohmann::json> summaries;
    for (std::string eps : {"1/2", "1/4", "1/8"}) {
        auto dir = scratch("sweep_" + std::to_string(summaries.size()));
        auto cfg = parse_config("kind = \"learn\"\ntrials = 4\n[learner]\nname = \"hull-simplex\"\nepsilon = \"" + eps +
                                "\"\ndelta = \"1/5\"\n[target]\nd = 2\n[distribution]\nresolution = 6\n");
        summaries.push_back(run_experiment(cfg, dir).summary);
    }
    auto rep = make_report(summaries);
    std::istringstream in(rep.plot_data);
    std::string header;
    std::getline(in, header);
    std::vector<double> examples;
    double eps, ex, fn, q;
    while (in >> eps >> ex >> fn >> q) examples.push_back(ex);
    ASSERT_EQ(examples.size(), 3u);
    EXPECT_LT(examples[0], examples[1]);
    EXPECT_LT(examples[1], examples[2]);
}

TEST(Other, CompressDimensionGeometryKinds)
{
    auto dir = scratch("other");
    auto cs = run_experiment(parse_config("kind = \"compress\"\n[class]\nfamily = \"singleton-complements\"\nd = 2\n"
                                          "[compress]\nsample = [0, 1, 2, 3]\n"),
                             dir);
    EXPECT_EQ(cs.summary["depth"], 4);
    EXPECT_EQ(cs.summary["found"], true);

    auto dm = run_experiment(parse_config("kind = \"dimension\"\n[class]\nfamily = \"intervals\"\nn = 6\n[dimension]\nclosure_k = [1]\n"), dir);
    EXPECT_EQ(dm.summary["vc"]["value"], 2);

    auto gd = run_experiment(parse_config("kind = \"geometry-demo\"\n[geometry]\ndemo = \"hull\"\npoints = [\"0 0\", \"2 0\", \"0 2\", \"1/2 1/2\"]\n"), dir);
    EXPECT_EQ(gd.summary["candidates"].size(), 3u);
    EXPECT_THROW(run_experiment(parse_config("kind = \"geometry-demo\"\n[geometry]\ndemo = \"hull\"\npoints = [\"0 0\", \"1\"]\n"), dir),
                 ConfigError);
}

TEST(Cli, ExitStatuses)
{
    auto dir = scratch("cli");
    const std::string cfg = (dir / "hs.toml").string();
    write_text(cfg, halfspace_config(2, 1));
    EXPECT_EQ(run_cli("run " + cfg + " --out " + (dir / "out").string()), exit_ok);
    EXPECT_TRUE(fs::exists(dir / "out" / "results.csv"));
    EXPECT_EQ(run_cli("report " + (dir / "out").string() + " --out " + (dir / "plot.dat").string()), exit_ok);
    EXPECT_TRUE(fs::exists(dir / "plot.dat"));

    write_text(dir / "bad.toml", "kind = \"nope\"\n");
    EXPECT_EQ(run_cli("run " + (dir / "bad.toml").string()), exit_config);
    EXPECT_EQ(run_cli("frobnicate"), exit_config);
    EXPECT_EQ(run_cli("attack -M 1 --learner omniscient --out " + (dir / "atk").string()), exit_budget);
    EXPECT_EQ(run_cli("attack -M 1 --out " + (dir / "atk").string()), exit_ok);

    write_text(dir / "tri.cls", "domain 3\n0\n1\n2\n3\n4\n");
    EXPECT_EQ(run_cli("verify-scheme --class " + (dir / "tri.cls").string() + " --sample \"0 1\" --scheme \"Q 0 ( Q 1 ( L | L ) | Q 1 ( L | L ) )\""), exit_ok);
    EXPECT_EQ(run_cli("verify-scheme --class " + (dir / "tri.cls").string() + " --sample \"0 1\" --scheme L"), exit_invariant);
    EXPECT_EQ(run_cli("verify-scheme --class " + (dir / "tri.cls").string() + " --sample \"1 2\" --scheme L"), exit_config);
    EXPECT_EQ(run_cli("dimensions --class " + (dir / "tri.cls").string()), exit_ok);
}

TEST(Cli, ShippedConfigParses)
{
    auto cfg = load_config(fs::path(VLAB_SOURCE_DIR) / "configs" / "halfspace_d2.toml");
    EXPECT_EQ(cfg.trials, 500u);
    EXPECT_EQ(detail::get_rational(*cfg.table["learner"].as_table(), "epsilon"), Rational(1, 10));
}
