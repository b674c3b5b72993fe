#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plap/harness.hpp"
#include "plap/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace plap;
using doctest::Approx;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<std::pair<double, double>> sample(double (*f)(double), double lo, double hi, int n)
{
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < n; ++i) {
        const double t = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        out.emplace_back(t, f(t));
    }
    return out;
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("plap_harness_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

RunConfig quick_config()
{
    RunConfig c;
    c.manifold = {ManifoldKind::euclidean, 3};
    c.params = ProblemParams::plaplacian(2, 3, 3);
    c.grid = RadialGrid::make(20.0, 400);
    c.datum = {DatumKind::gaussian, 1e-3, 1.0};
    c.t_end = 2.0;
    return c;
}

}  // namespace

TEST_CASE("slope fit on exact power laws")
{
    const auto exact = sample([](double t) { return std::pow(t, -0.5); }, 1, 100, 30);
    const SlopeFit fit = fit_decay_slope(exact, {1, 100});
    CHECK(fit.slope == Approx(-0.5).epsilon(1e-13));
    CHECK(fit.std_error <= 1e-12);
    CHECK(fit.intercept == Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(fit.points == 30);

    const auto flat = sample([](double) { return 2.0; }, 1, 10, 12);
    CHECK(fit_decay_slope(flat, {1, 10}).slope == Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("slope fit on a perturbed power law")
{
    const auto wavy = sample(
        [](double t) { return 3 * std::pow(t, -1.5) * (1 + 0.01 * std::sin(std::log(t))); }, 1,
        1e3, 60);
    CHECK(std::abs(fit_decay_slope(wavy, {1, 1e3}).slope + 1.5) <= 0.02);
}

TEST_CASE("slope fit is invariant under rescaling")
{
    auto data = sample([](double t) { return std::pow(t, -0.7) * (1 + 0.1 / t); }, 1, 50, 20);
    const double slope = fit_decay_slope(data, {1, 50}).slope;
    for (auto& [t, v] : data) {
        v *= 1234.5;
    }
    CHECK(std::abs(fit_decay_slope(data, {1, 50}).slope - slope) <= 1e-12);
}

TEST_CASE("slope fit preconditions")
{
    auto data = sample([](double t) { return 1 / t; }, 1, 10, 7);
    CHECK_THROWS_AS(fit_decay_slope(data, {1, 10}), std::invalid_argument);
    data = sample([](double t) { return 1 / t; }, 1, 10, 10);
    data[4].second = 0.0;
    CHECK_THROWS_AS(fit_decay_slope(data, {1, 10}), std::invalid_argument);
    // Points outside the window are ignored, even nonpositive ones.
    data[4].second = 1.0 / data[4].first;
    data.emplace_back(20.0, -1.0);
    CHECK(fit_decay_slope(data, {1, 10}).slope == Approx(-1.0));
}

TEST_CASE("verdict rule")
{
    CHECK(decay_verdict(-1.5, 0.0, 1.5) == Verdict::match);
    CHECK(decay_verdict(-1.64, 0.0, 1.5) == Verdict::match);
    CHECK(decay_verdict(-1.7, 0.0, 1.5) == Verdict::mismatch);
    CHECK(decay_verdict(-1.7, 0.11, 1.5) == Verdict::match);
    CHECK(decay_verdict(-1e-15, 1e-16, 0.0) == Verdict::match);
    CHECK(decay_verdict(-2e-3, 1e-16, 0.0) == Verdict::mismatch);
}

TEST_CASE("predicted decay exponents")
{
    const auto heat = ProblemParams::plaplacian(2, 3, 3);
    CHECK(predicted_decay({DecayFamily::thm1_alpha, inf, {}}, heat) == Approx(1.5));
    CHECK(predicted_decay({DecayFamily::thm1_alpha, 2.0, {}}, heat) == Approx(0.75));
    CHECK(predicted_decay({DecayFamily::prop42, 2.0, {}}, heat) == Approx(0.75));
    CHECK(predicted_decay({DecayFamily::thm2, inf, {}}, heat) == Approx(0.5));
    CHECK(predicted_decay({DecayFamily::thm1ii, 6.0, {}}, heat) == Approx(0.25));
    const auto plap3 = ProblemParams::plaplacian(3, 4, 4);
    CHECK(predicted_decay({DecayFamily::thm1_alpha, inf, {}}, plap3) == Approx(4.0 / 7.0));
    const auto poincare = ProblemParams::plaplacian(3, 3.2, 4, 1, 1.0);
    CHECK(predicted_decay({DecayFamily::thm3, 4.0, 2.0}, poincare) == Approx(0.5));
    CHECK(predicted_decay({DecayFamily::thm3_beta, 4.0, 2.0}, poincare) == Approx(0.625));
    const auto pme = ProblemParams::porous_medium(2, 3, 3);
    CHECK(predicted_decay({DecayFamily::pme_alpha, inf, {}}, pme) == Approx(0.6));
    CHECK_THROWS_AS(predicted_decay({DecayFamily::pme_alpha, inf, {}}, heat), std::domain_error);
    CHECK_THROWS_AS(predicted_decay({DecayFamily::thm3, 4.0, 2.0}, heat), std::domain_error);
    CHECK_THROWS_AS(predicted_decay({DecayFamily::thm1ii, 6.0, {}},
                                    ProblemParams::plaplacian(2, 1.5, 3)),
                    std::domain_error);
    CHECK(parse_decay_family("prop71") == DecayFamily::prop71);
    CHECK_THROWS(parse_decay_family("thm9"));
}

TEST_CASE("smoothing report on a heat run")
{
    RunConfig c;
    c.manifold = {ManifoldKind::euclidean, 3};
    c.params = ProblemParams::plaplacian(2, 3, 3);
    c.grid = RadialGrid::make(40.0, 1000);
    c.datum = {DatumKind::gaussian, 1.0, 0.5};
    c.reaction_on = false;
    c.t_end = 10.0;
    const RunRecord r = run(c);
    const auto reports = smoothing_report(r, {{DecayFamily::thm1_alpha, inf, {}},
                                              {DecayFamily::thm1_alpha, 2.0, {}}});
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].predicted == Approx(1.5));
    CHECK(reports[0].verdict == Verdict::match);
    CHECK(reports[0].window.lo == Approx(1.0));
    CHECK(reports[0].window.hi == Approx(10.0));
    CHECK(reports[1].verdict == Verdict::match);

    // Too narrow a window leaves the fit inconclusive.
    const auto narrow = smoothing_report(r, {{DecayFamily::thm1_alpha, inf, {}}},
                                         TimeWindow{9.0, 10.0});
    CHECK(narrow[0].verdict == Verdict::inconclusive);
    CHECK_FALSE(narrow[0].note.empty());

    RunRecord blown = r;
    blown.status = RunStatus::blowup;
    CHECK_THROWS_AS(smoothing_report(blown, {{DecayFamily::thm1_alpha, inf, {}}}),
                    std::invalid_argument);
}

TEST_CASE("classification")
{
    CHECK(classify_run(quick_config()) == Classification::global);

    RunConfig large = quick_config();
    large.datum.amplitude = 1e3;
    CHECK(classify_run(large) == Classification::blowup);

    RunRecord r;
    r.status = RunStatus::dt_collapse;
    CHECK(classify_record(r) == Classification::undecided);
    r.status = RunStatus::completed;
    r.series.push_back({1.0, 0.1, {}, 1.0 + 1e-10});
    CHECK(classify_record(r) == Classification::global);
    r.series.push_back({2.0, 0.1, {}, 1.01});
    CHECK(classify_record(r) == Classification::undecided);
}

TEST_CASE("global classification keeps S below one")
{
    const RunRecord r = run(quick_config());
    REQUIRE(classify_record(r) == Classification::global);
    for (const auto& row : r.series) {
        CHECK(row.s_monitor <= 1.0 + 1e-9);
    }
}

TEST_CASE("axis application")
{
    const RunConfig base = quick_config();
    CHECK(apply_axis(base, SweepAxis::amplitude, 0.5).datum.amplitude == 0.5);
    CHECK(apply_axis(base, SweepAxis::sigma, 4.0).params.sigma == 4.0);
    const RunConfig n4 = apply_axis(base, SweepAxis::N, 4.0);
    CHECK(n4.params.N == 4);
    CHECK(n4.manifold.dim == 4);
    CHECK_THROWS(apply_axis(base, SweepAxis::N, 3.5));
    CHECK(parse_sweep_axis("m") == SweepAxis::m);
}

TEST_CASE("empty sweep writes a header-only index")
{
    const auto dir = scratch_dir("empty");
    const SweepManifest m = sweep(quick_config(), SweepAxis::amplitude, {}, dir);
    CHECK(m.rows.empty());
    const std::string index = slurp(dir / "runs" / "index.csv");
    CHECK(std::count(index.begin(), index.end(), '\n') == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep over sigma flips the gate at the Fujita exponent")
{
    // p = 2, N = 3: sigma_0 = 1 at sigma = 5/3.
    RunConfig base = quick_config();
    base.t_end = 0.05;
    base.datum.amplitude = 1e-6;
    const auto dir = scratch_dir("sigma");
    const SweepManifest m =
        sweep(base, SweepAxis::sigma, {1.5, 5.0 / 3.0 - 1e-3, 5.0 / 3.0 + 1e-3, 2.5}, dir, 2);
    REQUIRE(m.rows.size() == 4);
    CHECK_FALSE(m.rows[0].gate);
    CHECK_FALSE(m.rows[1].gate);
    CHECK(m.rows[2].gate);
    CHECK(m.rows[3].gate);
    for (const auto& row : m.rows) {
        CHECK(row.status == "completed");
        CHECK(std::filesystem::exists(dir / "runs" / row.id / "series.csv"));
        CHECK(std::filesystem::exists(dir / "runs" / row.id / "manifest.json"));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep records per-run failures and continues")
{
    const auto dir = scratch_dir("errors");
    // p = 3.5 violates p < N for N = 3.
    const SweepManifest m = sweep(quick_config(), SweepAxis::p, {3.5, 2.0}, dir);
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].status == "error");
    CHECK_FALSE(m.rows[0].error.empty());
    CHECK(m.rows[1].status == "completed");
    const std::string index = slurp(dir / "runs" / "index.csv");
    CHECK(index.find("error") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("amplitude sweep has a single global-to-blowup change point")
{
    RunConfig base = quick_config();
    base.t_end = 5.0;
    std::vector<double> amps;
    for (int e = -3; e <= 2; ++e) {
        amps.push_back(std::pow(10.0, e));
    }
    const auto dir = scratch_dir("amplitude");
    const SweepManifest m = sweep(base, SweepAxis::amplitude, amps, dir, 2);
    int changes = 0;
    for (std::size_t i = 1; i < m.rows.size(); ++i) {
        changes += m.rows[i].classification != m.rows[i - 1].classification;
    }
    CHECK(m.rows.front().classification == Classification::global);
    CHECK(m.rows.back().classification == Classification::blowup);
    CHECK(changes == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep index is reproducible across worker counts")
{
    RunConfig base = quick_config();
    base.t_end = 0.5;
    const auto a = scratch_dir("w1");
    const auto b = scratch_dir("w3");
    sweep(base, SweepAxis::amplitude, {1e-3, 1e-2, 1e-1}, a, 1);
    sweep(base, SweepAxis::amplitude, {1e-3, 1e-2, 1e-1}, b, 3);
    CHECK(slurp(a / "runs" / "index.csv") == slurp(b / "runs" / "index.csv"));
    CHECK(slurp(a / "runs" / "0001" / "series.csv") == slurp(b / "runs" / "0001" / "series.csv"));
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST_CASE("series csv layout")
{
    RunConfig c = quick_config();
    c.t_end = 0.01;
    c.record_qs = {2.0, 4.0};
    const std::string csv = series_csv(run(c));
    CHECK(csv.rfind("t,dt,linf,l1,l2,l4,s_monitor\n", 0) == 0);
    const auto second_line = csv.substr(csv.find('\n') + 1);
    CHECK(second_line.rfind("0,0,0.001,", 0) == 0);
}
