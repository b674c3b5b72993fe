#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plap/dynamics.hpp"

#include <cmath>

using namespace plap;
using doctest::Approx;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

RunConfig heat_config(int nr = 400, double R = 8.0)
{
    RunConfig c;
    c.manifold = {ManifoldKind::euclidean, 3};
    c.params = ProblemParams::plaplacian(2, 3, 3);
    c.grid = RadialGrid::make(R, nr);
    c.datum = {DatumKind::gaussian, 1.0, 1.0};
    c.reaction_on = false;
    c.t_end = 1.0;
    return c;
}

RunConfig small_data_config()
{
    RunConfig c;
    c.manifold = {ManifoldKind::euclidean, 4};
    c.params = ProblemParams::plaplacian(3, 3, 4);
    c.grid = RadialGrid::make(40.0, 1000);
    c.datum = {DatumKind::gaussian, 1e-2, 4.0};
    c.t_end = 5.0;
    return c;
}

RadialState uniform_state(const RadialGrid& grid, double value)
{
    RadialState s{grid, Eigen::VectorXd::Constant(grid.size(), value), 0.0};
    s.values[grid.size() - 1] = 0.0;
    return s;
}

}  // namespace

TEST_CASE("truncation")
{
    CHECK(truncate(3.0, 2.0) == 2.0);
    CHECK(excess(3.0, 2.0) == 1.0);
    CHECK(truncate(1.5, 2.0) == 1.5);
    CHECK(excess(1.5, 2.0) == 0.0);
    CHECK(truncate(-3.0, 2.0) == -2.0);
    for (double v : {-7.25, -1.0, 0.0, 0.3, 2.0, 11.5}) {
        CHECK(truncate(v, 2.0) + excess(v, 2.0) == v);
    }
}

TEST_CASE("exact reaction flow")
{
    // u' = u^2 from 1: u(t) = 1/(1-t).
    CHECK(reaction_flow(1.0, 0.5, 2.0, 1e12) == Approx(2.0).epsilon(1e-14));
    CHECK(reaction_flow(1.0, 1.0, 2.0, inf) == inf);
    // With k = 1e12 the level 1e6 is reached at t = 1 - 1e-6; then linear.
    CHECK(reaction_flow(1.0, 1.0, 2.0, 1e12) == Approx(2e6).epsilon(1e-6));
    // u' = u: exponential.
    CHECK(reaction_flow(2.0, 0.3, 1.0, 1e12) == Approx(2.0 * std::exp(0.3)));
    // Above the truncation level the growth is linear at rate k.
    CHECK(reaction_flow(10.0, 0.5, 2.0, 4.0) == Approx(12.0));
    // From u = 1 the level u^2 = k = 4 is reached at t = 1/2.
    CHECK(reaction_flow(1.0, 0.75, 2.0, 4.0) == Approx(2.0 + 4.0 * 0.25));
    CHECK(reaction_flow(0.0, 1.0, 3.0, 1e12) == 0.0);
}

TEST_CASE("zero is a fixed point")
{
    RunConfig c = heat_config();
    c.reaction_on = true;
    const RadialState zero = uniform_state(c.grid, 0.0);
    for (double dt : {1e-6, 1e-2, 1.0}) {
        const StepOutcome out = step(zero, dt, c);
        CHECK(out.converged);
        CHECK(out.state.values.cwiseAbs().maxCoeff() == 0.0);
        CHECK(out.state.time == Approx(dt));
    }
    CHECK_THROWS_AS(step(zero, 0.0, c), std::invalid_argument);
}

TEST_CASE("reaction-only stepping follows the ODE")
{
    RunConfig c = heat_config(64, 1.0);
    c.params = ProblemParams::plaplacian(2, 2, 3);
    c.reaction_on = true;
    c.diffusion_on = false;
    RadialState s = uniform_state(c.grid, 1.0);
    for (int i = 0; i < 100; ++i) {
        const StepOutcome out = step(s, 5e-3, c);
        REQUIRE(out.converged);
        s = out.state;
    }
    CHECK(s.time == Approx(0.5));
    const double err = (s.values.head(c.grid.size() - 1).array() - 2.0).abs().maxCoeff();
    CHECK(err <= 0.01 * 2.0);
}

TEST_CASE("heat step agrees with a refined reference")
{
    auto peak_at = [](int nr, double dt0) {
        RunConfig c = heat_config(nr, 8.0);
        c.t_end = 0.1;
        c.dt0 = dt0;
        c.record_qs = {};
        const RunRecord r = run(c);
        REQUIRE(r.status == RunStatus::completed);
        return r.series.back().norms[0];
    };
    const double coarse = peak_at(399, 1e-4);
    const double fine = peak_at(1599, 2.5e-5);
    CHECK(std::abs(coarse - fine) <= 0.01 * fine);
}

TEST_CASE("Picard and Newton agree")
{
    for (DiffusionMode mode : {DiffusionMode::plap, DiffusionMode::pme}) {
        RunConfig c;
        c.manifold = {ManifoldKind::hyperbolic, 3};
        c.params = mode == DiffusionMode::plap ? ProblemParams::plaplacian(2.5, 3, 3)
                                               : ProblemParams::porous_medium(2, 3, 3);
        c.grid = RadialGrid::make(10.0, 300);
        c.datum = {DatumKind::bump, 1.0, 2.0};
        c.t_end = 1.0;
        c.inner_solver = InnerSolver::newton;
        const RunRecord a = run(c);
        c.inner_solver = InnerSolver::picard;
        const RunRecord b = run(c);
        REQUIRE(a.series.size() == b.series.size());
        CHECK(a.series.back().norms[0] == Approx(b.series.back().norms[0]).epsilon(1e-6));
    }
}

TEST_CASE("reaction-off runs contract every recorded norm")
{
    for (DiffusionMode mode : {DiffusionMode::plap, DiffusionMode::pme}) {
        for (ManifoldKind kind : {ManifoldKind::euclidean, ManifoldKind::hyperbolic}) {
            RunConfig c;
            c.manifold = {kind, 3};
            c.params = mode == DiffusionMode::plap ? ProblemParams::plaplacian(2.5, 3, 3)
                                                   : ProblemParams::porous_medium(2, 3, 3);
            c.grid = RadialGrid::make(12.0, 400);
            c.datum = {DatumKind::indicator, 2.0, 1.5};
            c.reaction_on = false;
            c.t_end = 5.0;
            const RunRecord r = run(c);
            REQUIRE(r.status == RunStatus::completed);
            CHECK(r.norm_qs.size() == 4);  // inf, 1, 2, 4
            for (std::size_t i = 1; i < r.series.size(); ++i) {
                for (std::size_t k = 0; k < r.norm_qs.size(); ++k) {
                    const double before = r.series[i - 1].norms[k];
                    CHECK(r.series[i].norms[k] <= before * (1 + 1e-8));
                }
            }
            CHECK(r.clipped_mass <= 1e-8 * r.initial_l1);
            CHECK((r.final_state.values.array() >= 0).all());
        }
    }
}

TEST_CASE("small data stays small with reaction on")
{
    const RunRecord r = run(small_data_config());
    REQUIRE(r.status == RunStatus::completed);
    for (std::size_t i = 1; i < r.series.size(); ++i) {
        CHECK(r.series[i].t > r.series[i - 1].t);
        CHECK(r.series[i].s_monitor >= r.series[i - 1].s_monitor);
        CHECK(r.series[i].s_monitor <= 1.0);
        // The mass and the peak may grow; L^2 and L^4 may not.
        for (double q : {2.0, 4.0}) {
            const std::size_t k = r.column(q);
            CHECK(r.series[i].norms[k] <= r.series[i - 1].norms[k] * (1 + 1e-6));
        }
    }
}

TEST_CASE("truncation level is inert for small solutions")
{
    RunConfig c = small_data_config();
    c.t_end = 1.0;
    const RunRecord a = run(c);
    c.truncation_k = 1e15;
    const RunRecord b = run(c);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        CHECK(std::abs(a.series[i].norms[0] - b.series[i].norms[0])
              <= 1e-10 * a.series[i].norms[0]);
    }
}

TEST_CASE("grid refinement converges")
{
    auto peak = [](int level) {
        RunConfig c;
        c.manifold = {ManifoldKind::euclidean, 3};
        c.params = ProblemParams::plaplacian(2, 3, 3);
        c.grid = RadialGrid::make(8.0, 100 * (1 << level) - 1);
        c.datum = {DatumKind::gaussian, 1.0, 1.0};
        c.reaction_on = false;
        c.t_end = 0.5;
        c.dt0 = 1e-3 / (1 << level);
        c.dt_max_rel = 0.02 / (1 << level);
        c.record_qs = {};
        return run(c).series.back().norms[0];
    };
    const double p0 = peak(0);
    const double p1 = peak(1);
    const double p2 = peak(2);
    CHECK(std::abs(p1 - p0) >= 1.5 * std::abs(p2 - p1));
}

TEST_CASE("run bookkeeping")
{
    RunConfig c = heat_config(200, 6.0);
    c.t_end = 2.0;
    const RunRecord r = run(c);
    CHECK(r.series.front().t == 0.0);
    CHECK(r.series.back().t == 2.0);
    CHECK(r.status_time == 2.0);
    CHECK(r.norm_qs[0] == inf);
    CHECK(r.norm_qs[1] == 1.0);
    CHECK(r.column(2.0) == 2);
    CHECK_THROWS(r.column(3.0));
    const auto linf = r.norm_series(inf);
    CHECK(linf.size() == r.series.size());

    const auto s = s_monitor(r, 3.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i] == Approx(r.series[i].s_monitor));
    }
}

TEST_CASE("s monitor of a constant sup norm")
{
    RunRecord r;
    r.norm_qs = {inf, 1.0};
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        r.series.push_back({t, 0.1, {0.5, 1.0}, 0.0});
    }
    const auto s = s_monitor(r, 3.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i] == Approx(0.25 * r.series[i].t));
    }
}

TEST_CASE("blow-up and reaction-only oracle")
{
    RunConfig c = heat_config(32, 1.0);
    c.params = ProblemParams::plaplacian(2, 2, 3);
    c.reaction_on = true;
    c.diffusion_on = false;
    c.datum = {DatumKind::indicator, 1.0, 2.0};
    c.t_end = 2.0;
    const RunRecord r = run(c);
    REQUIRE(r.status == RunStatus::blowup);
    CHECK(r.status_time == Approx(1.0).epsilon(0.02));
    CHECK(r.series.back().norms[0] >= std::min(c.blowup_threshold, 1e6));

    RunConfig large = small_data_config();
    large.datum.amplitude *= 100;
    large.t_end = 10.0;
    const RunRecord b = run(large);
    CHECK(b.status == RunStatus::blowup);
    CHECK(b.status_time < 10.0);
}

TEST_CASE("invalid configs")
{
    RunConfig c = heat_config();
    c.t_end = 0;
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c = heat_config();
    c.datum.amplitude = -1;
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c = heat_config();
    c.manifold.dim = 4;
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c = heat_config();
    c.truncation_k = 0;
    CHECK_THROWS_AS(run(c), std::invalid_argument);
}

TEST_CASE("runs are deterministic")
{
    const RunConfig c = small_data_config();
    const RunRecord a = run(c);
    const RunRecord b = run(c);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        CHECK(a.series[i].norms == b.series[i].norms);
        CHECK(a.series[i].t == b.series[i].t);
    }
}
