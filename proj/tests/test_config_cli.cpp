#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plap/config.hpp"
#include "plap/io.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace plap;

namespace {

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("plap_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct Result {
    int code;
    std::string out;
};

// Runs the CLI binary; stdout is captured through a file.
Result plaplab(const std::string& args, const std::filesystem::path& dir)
{
    const auto out = dir / "stdout.txt";
    const std::string cmd = std::string(PLAPLAB_PATH) + " " + args + " > " + out.string()
                            + " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

}  // namespace

TEST_CASE("defaults")
{
    CliConfig c;
    finalize(c);
    CHECK(c.run.grid.nr == 1000);
    CHECK(c.run.grid.R == 20.0);
    CHECK(c.run.params.N == 3);
    CHECK(c.run.inner_solver == InnerSolver::newton);
    CHECK(c.query.threshold_mode == ThresholdMode::corrected);
}

TEST_CASE("config text parsing")
{
    CliConfig c;
    apply_config_text(c, R"(
# hyperbolic p-Laplacian
manifold.kind = hyperbolic
manifold.dim = 4     # N
problem.p = 3
problem.sigma = 3.5
problem.C_p = 1.5
datum.width = 2
run.record_qs = 2, 3, 8
run.reaction = off
query.s = 2.5
)");
    finalize(c);
    CHECK(c.run.manifold.kind == ManifoldKind::hyperbolic);
    CHECK(c.run.params.N == 4);
    CHECK(c.run.params.p == 3.0);
    CHECK(*c.run.params.C_p == 1.5);
    CHECK(c.run.grid.R == 40.0);
    CHECK(c.run.record_qs == std::vector<double>{2.0, 3.0, 8.0});
    CHECK_FALSE(c.run.reaction_on);
    CHECK(*c.query.s == 2.5);
}

TEST_CASE("config errors")
{
    CliConfig c;
    CHECK_THROWS_AS(apply_setting(c, "problem.q", "1"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "problem.p", "three"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "problem.p", "3x"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "manifold.kind", "flat"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "run.reaction", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "problem.p 3\n"), ConfigError);

    // Physical gates are revalidated.
    CliConfig bad;
    apply_setting(bad, "problem.p", "3");  // p = N = 3
    CHECK_THROWS_AS(finalize(bad), ConfigError);
    CliConfig pme;
    apply_setting(pme, "problem.mode", "pme");
    apply_setting(pme, "problem.m", "3");  // sigma = 3 <= m
    CHECK_THROWS_AS(finalize(pme), ConfigError);
}

TEST_CASE("config echo round-trips")
{
    CliConfig c;
    apply_config_text(c, "problem.mode = pme\nproblem.m = 1.7\nproblem.sigma = 3.1\n"
                         "datum.amplitude = 0.1\nrun.t_end = 12.5\nrun.inner_solver = picard\n"
                         "query.q0 = 2.2\nsweep.values = 1,2,3\n");
    finalize(c);
    CliConfig back;
    for (const auto& [key, value] : config_echo(c)) {
        apply_setting(back, key, value);
    }
    finalize(back);
    CHECK(config_echo(back) == config_echo(c));
    CHECK(back.run.params.m == c.run.params.m);
    CHECK(back.run.inner_solver == InnerSolver::picard);
    CHECK(back.sweep.values.size() == 3);

    // The run echo written into manifests round-trips too.
    CliConfig from_run;
    for (const auto& [key, value] : run_config_echo(c.run)) {
        apply_setting(from_run, key, value);
    }
    finalize(from_run);
    CHECK(run_config_echo(from_run.run) == run_config_echo(c.run));
}

TEST_CASE("doubles are written with 17 significant digits")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(3.0) == "3");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("cli: exponents")
{
    const auto dir = scratch_dir("exponents");
    const Result r = plaplab("exponents --p 2 --sigma 3 --N 3", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("sigma0=3\n") != std::string::npos);
    CHECK(r.out.find("alpha=1.5\n") != std::string::npos);
}

TEST_CASE("cli: thresholds csv")
{
    const auto dir = scratch_dir("thresholds");
    const Result r = plaplab("thresholds --p 3 --sigma 4 --N 4 --C-p 1 --q-max 6", dir);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("q,eps_tilde0,eps_bar0,eps_hat0,eps_tilde1\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') >= 4);
}

TEST_CASE("cli: identities")
{
    const auto dir = scratch_dir("identities");
    const Result r = plaplab("identities --samples 1000", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("cli: usage and config errors")
{
    const auto dir = scratch_dir("errors");
    CHECK(plaplab("bogus", dir).code == 1);
    CHECK(plaplab("", dir).code == 1);
    CHECK(plaplab("exponents --p 5 --N 3", dir).code == 1);
    CHECK(plaplab("exponents --set problem.nope=1", dir).code == 1);
    CHECK(plaplab("exponents --config " + (dir / "missing.cfg").string(), dir).code == 1);
}

TEST_CASE("cli: simulate blow-up and completion")
{
    const auto dir = scratch_dir("simulate");
    const auto big = dir / "big";
    const Result r = plaplab("simulate --amplitude 1e3 --t-end 5 --nr 200 --out " + big.string(),
                             dir);
    CHECK(r.code == 3);
    const auto manifest = nlohmann::json::parse(slurp(big / "manifest.json"));
    CHECK(manifest["status"] == "blowup");
    CHECK(manifest.contains("t_star"));
    CHECK(manifest["exploratory"] == true);

    const auto small = dir / "small";
    const Result ok = plaplab(
        "simulate --amplitude 1e-3 --t-end 1 --nr 200 --out " + small.string(), dir);
    CHECK(ok.code == 0);
    const auto m2 = nlohmann::json::parse(slurp(small / "manifest.json"));
    CHECK(m2["status"] == "completed");
    CHECK(m2["t_end"] == 1.0);
    for (const char* key : {"config", "clipped_mass", "wallclock_s"}) {
        CHECK(m2.contains(key));
    }
    // The manifest echo re-parses to the same run configuration.
    CliConfig back;
    for (auto it = m2["config"].begin(); it != m2["config"].end(); ++it) {
        apply_setting(back, it.key(), it.value().get<std::string>());
    }
    finalize(back);
    CHECK(back.run.datum.amplitude == 1e-3);
    CHECK(back.run.grid.nr == 200);
    CHECK(slurp(small / "series.csv").rfind("t,dt,linf,l1,l2,l4,s_monitor\n", 0) == 0);
}

TEST_CASE("cli: config file and determinism")
{
    const auto dir = scratch_dir("determinism");
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "problem.p = 2.5\nproblem.sigma = 3\ndatum.amplitude = 1e-2\n"
               "grid.nr = 200\nrun.t_end = 2\n";
    }
    const std::string base = "simulate --config " + (dir / "run.cfg").string() + " --out ";
    CHECK(plaplab(base + (dir / "a").string(), dir).code == 0);
    CHECK(plaplab(base + (dir / "b").string(), dir).code == 0);
    CHECK(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));
}

TEST_CASE("cli: verify and sweep")
{
    const auto dir = scratch_dir("verify");
    const Result v = plaplab("verify --reaction off --width 0.5 --R 40 --nr 1000 --t-end 10 "
                             "--record-qs 2 --out "
                                 + (dir / "v").string(),
                             dir);
    CHECK(v.code == 0);
    CHECK(v.out.find("thm1_alpha,inf,") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "v" / "verify.json"));

    const Result s = plaplab("sweep --axis amplitude --values 1e-3,1e3 --t-end 2 --nr 200 "
                             "--workers 2 --out "
                                 + (dir / "s").string(),
                             dir);
    CHECK(s.code == 0);
    const std::string index = slurp(dir / "s" / "runs" / "index.csv");
    CHECK(index.find("global") != std::string::npos);
    CHECK(index.find("blowup") != std::string::npos);

    const Result empty = plaplab("sweep --out " + (dir / "e").string(), dir);
    CHECK(empty.code == 0);
}
