#pragma once

// Radial solver for the truncated Dirichlet problem on the geodesic ball B_R
//
//   u_t = div(|grad u|^{p-2} grad u) + T_k(u^sigma)   (p-Laplacian)
//   u_t = Laplacian(u^m)           + T_k(u^sigma)   (porous medium)
//   u = 0 on the boundary, u(0) = u_0 >= 0.
//
// One step is a Lie splitting: the reaction ODE u' = T_k(u^sigma) is advanced
// pointwise by its exact flow, then diffusion is advanced by backward Euler on
// a finite-volume discretization whose inner flux at r = 0 vanishes.

#include "plap/exponents.hpp"
#include "plap/geometry.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace plap {

/// T_k(v): v clamped to [-k, k].
double truncate(double v, double k);

/// G_k(v) = v - T_k(v).
double excess(double v, double k);

enum class DatumKind { gaussian, bump, indicator };

std::string to_string(DatumKind kind);
DatumKind parse_datum_kind(const std::string& text);

/// Radial initial datum. `width` is the Gaussian length scale
/// (amplitude * exp(-(r/width)^2)) or the support radius of the bump
/// and indicator profiles.
struct Datum {
    DatumKind kind = DatumKind::gaussian;
    double amplitude = 1.0;
    double width = 1.0;
};

Eigen::VectorXd sample_datum(const Datum& datum, const RadialGrid& grid);

enum class InnerSolver { picard, newton };

std::string to_string(InnerSolver solver);
InnerSolver parse_inner_solver(const std::string& text);

struct RunConfig {
    ManifoldSpec manifold;
    ProblemParams params;
    RadialGrid grid;
    Datum datum;
    double t_end = 10.0;
    double dt0 = 1e-4;
    double dt_max_rel = 0.01;      // dt <= max(dt_max_rel * t, dt0)
    double truncation_k = 1e12;
    bool reaction_on = true;
    bool diffusion_on = true;
    double blowup_threshold = 1e8;  // also blow-up once the peak reaches k^{1/sigma}
    std::vector<double> record_qs{2.0, 4.0};
    int outputs_per_decade = 20;
    InnerSolver inner_solver = InnerSolver::newton;
    int max_inner_iterations = 50;
    double inner_tolerance = 1e-10;

    void validate() const;

    /// 1e-8 max(1, ||u_0||_inf) / R.
    double gradient_regularization() const;
};

struct StepOutcome {
    RadialState state;
    bool converged = false;
    int iterations = 0;
    double clipped_mass = 0.0;  // weighted L^1 mass removed by clipping at 0
};

/// Advances `state` by dt. A non-converged outcome means the caller must
/// retry with a smaller step.
StepOutcome step(const RadialState& state, double dt, const RunConfig& config);

/// Exact flow of u' = T_k(u^sigma) over dt from u >= 0. Returns +infinity if
/// the solution blows up within dt.
double reaction_flow(double u, double dt, double sigma, double k);

enum class RunStatus { completed, blowup, dt_collapse };

std::string to_string(RunStatus status);

struct SeriesRow {
    double t = 0.0;
    double dt = 0.0;
    std::vector<double> norms;  // aligned with RunRecord::norm_qs
    double s_monitor = 0.0;
};

struct RunRecord {
    RunConfig config;
    std::vector<double> norm_qs;  // infinity, 1, then the extra recorded q
    std::vector<SeriesRow> series;
    RunStatus status = RunStatus::completed;
    double status_time = 0.0;  // blow-up time, collapse time or t_end
    // "threshold" or "truncation" (peak reached k^{1/sigma}); empty unless blowup.
    std::string blowup_trigger;
    double clipped_mass = 0.0;
    double initial_l1 = 0.0;
    double wallclock_s = 0.0;
    int accepted_steps = 0;
    int rejected_steps = 0;
    RadialState final_state;

    /// Index of q in norm_qs; throws if q was not recorded.
    std::size_t column(double q) const;
    std::vector<std::pair<double, double>> norm_series(double q) const;
};

RunRecord run(const RunConfig& config);

/// Running supremum of t ||u(t)||_inf^{sigma-1} over the recorded rows.
std::vector<double> s_monitor(const RunRecord& record, double sigma);

}  // namespace plap
