#include "plap/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plap {

double truncate(double v, double k)
{
    return std::clamp(v, -k, k);
}

double excess(double v, double k)
{
    return v - truncate(v, k);
}

std::string to_string(DatumKind kind)
{
    switch (kind) {
    case DatumKind::gaussian:
        return "gaussian";
    case DatumKind::bump:
        return "bump";
    case DatumKind::indicator:
        return "indicator";
    }
    return "unknown";
}

DatumKind parse_datum_kind(const std::string& text)
{
    if (text == "gaussian") {
        return DatumKind::gaussian;
    }
    if (text == "bump") {
        return DatumKind::bump;
    }
    if (text == "indicator") {
        return DatumKind::indicator;
    }
    throw std::invalid_argument("unknown datum kind '" + text + "'");
}

std::string to_string(InnerSolver solver)
{
    return solver == InnerSolver::picard ? "picard" : "newton";
}

InnerSolver parse_inner_solver(const std::string& text)
{
    if (text == "picard") {
        return InnerSolver::picard;
    }
    if (text == "newton") {
        return InnerSolver::newton;
    }
    throw std::invalid_argument("unknown inner solver '" + text + "'");
}

std::string to_string(RunStatus status)
{
    switch (status) {
    case RunStatus::completed:
        return "completed";
    case RunStatus::blowup:
        return "blowup";
    case RunStatus::dt_collapse:
        return "dt_collapse";
    }
    return "unknown";
}

Eigen::VectorXd sample_datum(const Datum& datum, const RadialGrid& grid)
{
    if (!(datum.amplitude >= 0) || !(datum.width > 0)) {
        throw std::invalid_argument("datum needs amplitude >= 0 and width > 0");
    }
    Eigen::VectorXd u(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double x = grid.node(j) / datum.width;
        switch (datum.kind) {
        case DatumKind::gaussian:
            u[j] = datum.amplitude * std::exp(-x * x);
            break;
        case DatumKind::bump: {
            const double s = 1.0 - x * x;
            u[j] = s > 0 ? datum.amplitude * s * s : 0.0;
            break;
        }
        case DatumKind::indicator:
            u[j] = x <= 1.0 ? datum.amplitude : 0.0;
            break;
        }
    }
    u[grid.size() - 1] = 0.0;
    return u;
}

void RunConfig::validate() const
{
    manifold.validate();
    params.validate();
    grid.validate();
    if (params.N != manifold.dim) {
        throw std::invalid_argument("problem dimension differs from manifold dimension");
    }
    if (!(t_end > 0) || !(dt0 > 0) || !(dt_max_rel > 0)) {
        throw std::invalid_argument("t_end, dt0 and dt_max_rel must be positive");
    }
    if (!(truncation_k > 0)) {
        throw std::invalid_argument("truncation level must be positive");
    }
    if (!(datum.amplitude >= 0) || !(datum.width > 0)) {
        throw std::invalid_argument("datum needs amplitude >= 0 and width > 0");
    }
    if (!(blowup_threshold > 0)) {
        throw std::invalid_argument("blow-up threshold must be positive");
    }
    if (outputs_per_decade < 1 || max_inner_iterations < 1 || !(inner_tolerance > 0)) {
        throw std::invalid_argument("invalid output or inner-solver settings");
    }
    for (double q : record_qs) {
        if (!(q >= 1)) {
            throw std::invalid_argument("recorded norms need q >= 1");
        }
    }
}

double RunConfig::gradient_regularization() const
{
    return 1e-8 * std::max(1.0, datum.amplitude) / grid.R;
}

double reaction_flow(double u, double dt, double sigma, double k)
{
    if (u <= 0.0) {
        return u;
    }
    const double level = std::pow(k, 1.0 / sigma);  // u^sigma = k here
    if (u >= level) {
        return u + k * dt;
    }
    const bool linear = std::abs(sigma - 1.0) < 1e-12;
    // Time for the untruncated flow to reach the truncation level.
    const double reach = linear ? std::log(level / u)
                                : (std::pow(u, 1.0 - sigma) - std::pow(level, 1.0 - sigma))
                                      / (sigma - 1.0);
    if (dt > reach) {
        return level + k * (dt - reach);
    }
    if (linear) {
        return u * std::exp(dt);
    }
    const double base = std::pow(u, 1.0 - sigma) - (sigma - 1.0) * dt;
    if (base <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::pow(base, 1.0 / (1.0 - sigma));
}

namespace {

struct Tridiagonal {
    Eigen::VectorXd sub;   // sub[j] couples j to j-1
    Eigen::VectorXd diag;
    Eigen::VectorXd sup;   // sup[j] couples j to j+1

    explicit Tridiagonal(Eigen::Index n)
        : sub(Eigen::VectorXd::Zero(n)),
          diag(Eigen::VectorXd::Zero(n)),
          sup(Eigen::VectorXd::Zero(n))
    {
    }

    // Thomas algorithm; the systems assembled here are M-matrices so no
    // pivoting is needed.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        const Eigen::Index n = diag.size();
        Eigen::VectorXd c(n);
        Eigen::VectorXd x(n);
        c[0] = sup[0] / diag[0];
        x[0] = rhs[0] / diag[0];
        for (Eigen::Index i = 1; i < n; ++i) {
            const double factor = 1.0 / (diag[i] - sub[i] * c[i - 1]);
            c[i] = sup[i] * factor;
            x[i] = (rhs[i] - sub[i] * x[i - 1]) * factor;
        }
        for (Eigen::Index i = n - 1; i > 0; --i) {
            x[i - 1] -= c[i - 1] * x[i];
        }
        return x;
    }
};

// Finite-volume geometry of the unknowns j = 0..nr; node nr+1 is the
// Dirichlet boundary.
struct Discretization {
    Eigen::VectorXd mass;  // control volume of node j
    Eigen::VectorXd face;  // area of the face between j and j+1
    double dr;

    Discretization(const ManifoldSpec& manifold, const RadialGrid& grid)
    {
        const int n = grid.nr + 1;
        dr = grid.dr();
        mass = quadrature_weights(manifold, grid).head(n);
        face.resize(n);
        for (int j = 0; j < n; ++j) {
            face[j] = radial_density(manifold, grid.node(j) + 0.5 * dr);
        }
    }
};

class DiffusionSolver {
public:
    DiffusionSolver(const RunConfig& config, const Discretization& disc, double dt)
        : config_(config),
          disc_(disc),
          dt_(dt),
          eps2_(std::pow(config.gradient_regularization(), 2))
    {
    }

    // Solves V (u - prev)/dt = div(flux(u)) on the unknowns.
    bool solve(const Eigen::VectorXd& prev, Eigen::VectorXd& u, int& iterations) const
    {
        return config_.inner_solver == InnerSolver::newton ? newton(prev, u, iterations)
                                                           : picard(prev, u, iterations);
    }

private:
    bool plap() const { return config_.params.mode == DiffusionMode::plap; }

    double at(const Eigen::VectorXd& u, Eigen::Index j) const
    {
        return j < u.size() ? u[j] : 0.0;
    }

    // Flux density phi(g) = (g^2 + eps^2)^{(p-2)/2} g and its derivative.
    double plap_coefficient(double g) const
    {
        return std::pow(g * g + eps2_, 0.5 * (config_.params.p - 2.0));
    }

    double plap_slope(double g) const
    {
        const double p = config_.params.p;
        return std::pow(g * g + eps2_, 0.5 * (p - 4.0)) * ((p - 1.0) * g * g + eps2_);
    }

    double potential(double u) const { return std::pow(std::max(u, 0.0), config_.params.m); }

    double potential_slope(double u) const
    {
        const double m = config_.params.m;
        return u > 0 ? m * std::pow(u, m - 1.0) : 0.0;
    }

    // Outward flux through the face between j and j+1.
    double flux(const Eigen::VectorXd& u, Eigen::Index j) const
    {
        const double diff = (at(u, j + 1) - at(u, j)) / disc_.dr;
        if (plap()) {
            return disc_.face[j] * plap_coefficient(diff) * diff;
        }
        return disc_.face[j] * (potential(at(u, j + 1)) - potential(at(u, j))) / disc_.dr;
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& prev, const Eigen::VectorXd& u) const
    {
        const Eigen::Index n = u.size();
        Eigen::VectorXd out(n);
        double inner = 0.0;  // zero flux through r = 0
        for (Eigen::Index j = 0; j < n; ++j) {
            const double outer = flux(u, j);
            out[j] = disc_.mass[j] * (u[j] - prev[j]) / dt_ - (outer - inner);
            inner = outer;
        }
        return out;
    }

    Tridiagonal jacobian(const Eigen::VectorXd& u) const
    {
        const Eigen::Index n = u.size();
        Tridiagonal jac(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            jac.diag[j] = disc_.mass[j] / dt_;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            // d flux_j / d u_{j+1} = hi, d flux_j / d u_j = -lo
            double hi;
            double lo;
            if (plap()) {
                const double slope = disc_.face[j]
                                     * plap_slope((at(u, j + 1) - at(u, j)) / disc_.dr)
                                     / disc_.dr;
                hi = slope;
                lo = slope;
            } else {
                hi = disc_.face[j] * potential_slope(at(u, j + 1)) / disc_.dr;
                lo = disc_.face[j] * potential_slope(u[j]) / disc_.dr;
            }
            // Residual j contains -flux_j, residual j+1 contains +flux_j.
            jac.diag[j] += lo;
            if (j + 1 < n) {
                jac.sup[j] -= hi;
                jac.sub[j + 1] -= lo;
                jac.diag[j + 1] += hi;
            }
        }
        return jac;
    }

    // Frozen-coefficient operator of the lagged (Picard) linearization.
    Tridiagonal lagged_operator(const Eigen::VectorXd& u) const
    {
        const Eigen::Index n = u.size();
        Tridiagonal op(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            op.diag[j] = disc_.mass[j] / dt_;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            double hi;
            double lo;
            if (plap()) {
                const double c = disc_.face[j]
                                 * plap_coefficient((at(u, j + 1) - at(u, j)) / disc_.dr)
                                 / disc_.dr;
                hi = c;
                lo = c;
            } else {
                const double m1 = config_.params.m - 1.0;
                hi = disc_.face[j] * std::pow(std::max(at(u, j + 1), 0.0), m1) / disc_.dr;
                lo = disc_.face[j] * std::pow(std::max(u[j], 0.0), m1) / disc_.dr;
            }
            op.diag[j] += lo;
            if (j + 1 < n) {
                op.sup[j] -= hi;
                op.sub[j + 1] -= lo;
                op.diag[j + 1] += hi;
            }
        }
        return op;
    }

    bool converged(const Eigen::VectorXd& change, const Eigen::VectorXd& u) const
    {
        const double size = u.cwiseAbs().maxCoeff();
        const double delta = change.cwiseAbs().maxCoeff();
        return delta == 0.0 || delta <= config_.inner_tolerance * size;
    }

    bool picard(const Eigen::VectorXd& prev, Eigen::VectorXd& u, int& iterations) const
    {
        const Eigen::VectorXd rhs = disc_.mass.cwiseProduct(prev) / dt_;
        for (iterations = 1; iterations <= config_.max_inner_iterations; ++iterations) {
            Eigen::VectorXd next = lagged_operator(u).solve(rhs);
            if (!next.allFinite()) {
                return false;
            }
            const bool done = converged(next - u, next);
            u = std::move(next);
            if (done) {
                return true;
            }
        }
        return false;
    }

    bool newton(const Eigen::VectorXd& prev, Eigen::VectorXd& u, int& iterations) const
    {
        Eigen::VectorXd res = residual(prev, u);
        double norm = res.cwiseAbs().maxCoeff();
        for (iterations = 1; iterations <= config_.max_inner_iterations; ++iterations) {
            const Eigen::VectorXd delta = jacobian(u).solve(-res);
            if (!delta.allFinite()) {
                return false;
            }
            // Backtracking on the residual keeps the iteration monotone when
            // the flux is strongly nonlinear.
            double lambda = 1.0;
            Eigen::VectorXd trial = u + delta;
            Eigen::VectorXd trial_res = residual(prev, trial);
            // Roundoff-sized corrections skip the line search.
            const bool tiny = converged(delta, trial);
            for (int half = 0; half < 8 && !tiny; ++half) {
                const double trial_norm = trial_res.cwiseAbs().maxCoeff();
                if (std::isfinite(trial_norm) && trial_norm <= norm) {
                    break;
                }
                lambda *= 0.5;
                trial = u + lambda * delta;
                trial_res = residual(prev, trial);
            }
            const bool done = converged(lambda * delta, trial);
            u = std::move(trial);
            res = std::move(trial_res);
            norm = res.cwiseAbs().maxCoeff();
            if (!std::isfinite(norm)) {
                return false;
            }
            if (done) {
                return true;
            }
        }
        return false;
    }

    const RunConfig& config_;
    const Discretization& disc_;
    double dt_;
    double eps2_;
};

StepOutcome step_impl(const RadialState& state, double dt, const RunConfig& config,
                      const Discretization& disc)
{
    StepOutcome out;
    out.state = state;
    out.state.time = state.time + dt;
    Eigen::VectorXd& u = out.state.values;
    const Eigen::Index last = u.size() - 1;

    if (config.reaction_on) {
        for (Eigen::Index j = 0; j < last; ++j) {
            u[j] = reaction_flow(u[j], dt, config.params.sigma, config.truncation_k);
        }
        if (!u.allFinite()) {
            return out;
        }
    }

    out.iterations = 0;
    if (config.diffusion_on) {
        const Eigen::VectorXd prev = u.head(last);
        Eigen::VectorXd interior = prev;
        DiffusionSolver solver(config, disc, dt);
        if (!solver.solve(prev, interior, out.iterations)) {
            return out;
        }
        u.head(last) = interior;
    }
    u[last] = 0.0;

    for (Eigen::Index j = 0; j < last; ++j) {
        if (u[j] < 0.0) {
            out.clipped_mass += disc.mass[j] * -u[j];
            u[j] = 0.0;
        }
    }
    out.converged = u.allFinite();
    return out;
}

}  // namespace

StepOutcome step(const RadialState& state, double dt, const RunConfig& config)
{
    if (!(dt > 0)) {
        throw std::invalid_argument("step: dt must be positive");
    }
    state.validate();
    const Discretization disc(config.manifold, state.grid);
    return step_impl(state, dt, config, disc);
}

std::size_t RunRecord::column(double q) const
{
    for (std::size_t i = 0; i < norm_qs.size(); ++i) {
        if (norm_qs[i] == q) {
            return i;
        }
    }
    throw std::invalid_argument("norm of order " + std::to_string(q) + " was not recorded");
}

std::vector<std::pair<double, double>> RunRecord::norm_series(double q) const
{
    const std::size_t col = column(q);
    std::vector<std::pair<double, double>> out;
    out.reserve(series.size());
    for (const auto& row : series) {
        out.emplace_back(row.t, row.norms[col]);
    }
    return out;
}

namespace {

std::vector<double> output_times(const RunConfig& config)
{
    // Geometric grid ending exactly at t_end, starting near dt0.
    const double decades = std::log10(config.t_end / config.dt0);
    const int count = std::max(1, static_cast<int>(std::ceil(decades * config.outputs_per_decade)));
    std::vector<double> out;
    out.reserve(count + 1);
    for (int i = count; i >= 1; --i) {
        out.push_back(config.t_end * std::pow(10.0, -static_cast<double>(i) / config.outputs_per_decade));
    }
    out.push_back(config.t_end);
    return out;
}

// Step cap keeping the reaction increment per step below a fixed fraction:
// 0.5 min(1, 1/(sigma-1)) ||u|| / T_k(||u||^sigma).
double reaction_cap(double peak, const RunConfig& config)
{
    if (!config.reaction_on || peak <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double sigma = config.params.sigma;
    const double rate = truncate(std::pow(peak, sigma), config.truncation_k) / peak;
    const double fraction = sigma > 2.0 ? 0.5 / (sigma - 1.0) : 0.5;
    return fraction / rate;
}

}  // namespace

RunRecord run(const RunConfig& config)
{
    config.validate();
    const auto started = std::chrono::steady_clock::now();

    RunRecord record;
    record.config = config;
    record.norm_qs = {infinity_v<double>, 1.0};
    for (double q : config.record_qs) {
        if (std::find(record.norm_qs.begin(), record.norm_qs.end(), q) == record.norm_qs.end()) {
            record.norm_qs.push_back(q);
        }
    }

    const Discretization disc(config.manifold, config.grid);
    const Eigen::VectorXd weights = quadrature_weights(config.manifold, config.grid);
    const double sigma = config.params.sigma;
    const double min_dt = 1e-12;
    // Above k^{1/sigma} the reaction is truncated to linear growth, so the run
    // no longer follows the untruncated problem.
    const double saturation =
        config.reaction_on ? std::pow(config.truncation_k, 1.0 / sigma)
                           : std::numeric_limits<double>::infinity();

    RadialState state{config.grid, sample_datum(config.datum, config.grid), 0.0};
    record.initial_l1 = lq_norm(state.values, weights, 1.0);

    auto make_row = [&](double t, double dt, double s) {
        SeriesRow row;
        row.t = t;
        row.dt = dt;
        row.s_monitor = s;
        for (double q : record.norm_qs) {
            row.norms.push_back(lq_norm(state.values, weights, q));
        }
        return row;
    };

    double s_value = 0.0;
    record.series.push_back(make_row(0.0, 0.0, 0.0));

    const std::vector<double> outputs = output_times(config);
    std::size_t next_output = 0;
    double dt = config.dt0;
    record.status = RunStatus::completed;
    record.status_time = config.t_end;

    while (next_output < outputs.size()) {
        const double t = state.time;
        const double peak = state.values.maxCoeff();
        const double nominal = std::min({dt, reaction_cap(peak, config),
                                         std::max(config.dt_max_rel * t, config.dt0)});
        const double to_output = outputs[next_output] - t;
        const bool hits_output = to_output <= nominal;
        const double h = hits_output ? to_output : nominal;

        StepOutcome outcome = step_impl(state, h, config, disc);
        if (!outcome.converged) {
            ++record.rejected_steps;
            dt = 0.5 * h;
            if (dt < min_dt) {
                record.status = RunStatus::dt_collapse;
                record.status_time = t;
                break;
            }
            continue;
        }

        ++record.accepted_steps;
        state = std::move(outcome.state);
        if (hits_output) {
            state.time = outputs[next_output];
        }
        record.clipped_mass += outcome.clipped_mass;
        const double new_peak = state.values.maxCoeff();
        s_value = std::max(s_value, state.time * std::pow(new_peak, sigma - 1.0));

        if (new_peak >= config.blowup_threshold || new_peak >= saturation) {
            record.series.push_back(make_row(state.time, h, s_value));
            record.status = RunStatus::blowup;
            record.status_time = state.time;
            record.blowup_trigger = new_peak >= config.blowup_threshold ? "threshold"
                                                                        : "truncation";
            break;
        }
        if (hits_output) {
            record.series.push_back(make_row(state.time, h, s_value));
            ++next_output;
        }
        // A step shortened to land on an output time does not set the pace.
        dt = hits_output ? std::max(dt, h) : 1.2 * h;
    }

    record.final_state = state;
    record.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

std::vector<double> s_monitor(const RunRecord& record, double sigma)
{
    const std::size_t col = record.column(infinity_v<double>);
    std::vector<double> out;
    out.reserve(record.series.size());
    double running = 0.0;
    for (const auto& row : record.series) {
        if (row.t > 0.0) {
            running = std::max(running, row.t * std::pow(row.norms[col], sigma - 1.0));
        }
        out.push_back(running);
    }
    return out;
}

}  // namespace plap
