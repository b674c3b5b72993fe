#include "plap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace plap {

std::string to_string(ManifoldKind kind)
{
    return kind == ManifoldKind::euclidean ? "euclidean" : "hyperbolic";
}

ManifoldKind parse_manifold_kind(const std::string& text)
{
    if (text == "euclidean") {
        return ManifoldKind::euclidean;
    }
    if (text == "hyperbolic") {
        return ManifoldKind::hyperbolic;
    }
    throw std::invalid_argument("unknown manifold kind '" + text + "'");
}

ManifoldSpec ManifoldSpec::make(ManifoldKind kind, int dim)
{
    ManifoldSpec out{kind, dim};
    out.validate();
    return out;
}

void ManifoldSpec::validate() const
{
    if (dim < 3) {
        throw std::invalid_argument("manifold dimension must be >= 3");
    }
}

Warping warping(const ManifoldSpec& manifold, double r)
{
    if (!(r >= 0)) {
        throw std::invalid_argument("warping: radius must be nonnegative");
    }
    if (manifold.kind == ManifoldKind::euclidean) {
        return {r, 1.0};
    }
    return {std::sinh(r), std::cosh(r)};
}

double sphere_area(int dim)
{
    const double half = 0.5 * dim;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double radial_density(const ManifoldSpec& manifold, double r)
{
    return sphere_area(manifold.dim) * std::pow(warping(manifold, r).value, manifold.dim - 1);
}

RadialGrid RadialGrid::make(double R, int nr)
{
    RadialGrid out{R, nr};
    out.validate();
    return out;
}

void RadialGrid::validate() const
{
    if (!(R > 0) || !std::isfinite(R)) {
        throw std::invalid_argument("grid radius must be positive");
    }
    if (nr < 16) {
        throw std::invalid_argument("grid needs at least 16 interior nodes");
    }
}

Eigen::VectorXd RadialGrid::nodes() const
{
    return Eigen::VectorXd::LinSpaced(size(), 0.0, R);
}

void RadialState::validate() const
{
    grid.validate();
    if (values.size() != grid.size()) {
        throw std::invalid_argument("state size does not match grid");
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("state has non-finite entries");
    }
    if ((values.array() < 0).any()) {
        throw std::invalid_argument("state has negative entries");
    }
}

Eigen::VectorXd quadrature_weights(const ManifoldSpec& manifold, const RadialGrid& grid)
{
    manifold.validate();
    grid.validate();
    const double dr = grid.dr();
    Eigen::VectorXd w(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        w[j] = radial_density(manifold, grid.node(j)) * dr;
    }
    w[0] = shell_volume(manifold, 0.0, 0.5 * dr);
    w[grid.size() - 1] *= 0.5;
    return w;
}

double lq_norm(const Eigen::Ref<const Eigen::VectorXd>& values,
               const Eigen::Ref<const Eigen::VectorXd>& weights, double q)
{
    if (!(q >= 1)) {
        throw std::invalid_argument("lq_norm: q must be >= 1");
    }
    const double peak = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    if (std::isinf(q) || peak == 0.0) {
        return peak;
    }
    // Scale by the peak so large q cannot underflow.
    const double sum = (weights.array() * (values.array().abs() / peak).pow(q)).sum();
    return peak * std::pow(sum, 1.0 / q);
}

double lq_norm(const RadialState& state, const ManifoldSpec& manifold, double q)
{
    if (!(q >= 1)) {
        throw std::invalid_argument("lq_norm: q must be >= 1");
    }
    return lq_norm(state.values, quadrature_weights(manifold, state.grid), q);
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const ManifoldSpec& m, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth)
{
    const double mid = 0.5 * (a + b);
    const double lm = radial_density(m, 0.5 * (a + mid));
    const double rm = radial_density(m, 0.5 * (mid + b));
    const double left = simpson(a, mid, fa, lm, fm);
    const double right = simpson(mid, b, fm, rm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(m, a, mid, fa, lm, fm, left, 0.5 * tol, depth - 1)
           + adaptive_simpson(m, mid, b, fm, rm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double shell_volume(const ManifoldSpec& manifold, double a, double b, double tol)
{
    manifold.validate();
    if (!(a >= 0 && b >= a)) {
        throw std::invalid_argument("shell_volume: need 0 <= a <= b");
    }
    if (a == b) {
        return 0.0;
    }
    const double fa = radial_density(manifold, a);
    const double fb = radial_density(manifold, b);
    const double fm = radial_density(manifold, 0.5 * (a + b));
    const double whole = simpson(a, b, fa, fm, fb);
    const double scale = std::max(std::abs(whole), std::numeric_limits<double>::min());
    return adaptive_simpson(manifold, a, b, fa, fm, fb, whole, tol * scale, 40);
}

double ball_volume(const ManifoldSpec& manifold, double R)
{
    if (!(R > 0)) {
        throw std::invalid_argument("ball_volume: radius must be positive");
    }
    return shell_volume(manifold, 0.0, R);
}

double gradient_ratio(const ManifoldSpec& manifold, const RadialGrid& grid,
                      const Eigen::Ref<const Eigen::VectorXd>& profile, double p, double r)
{
    const int n = grid.size();
    const double dr = grid.dr();
    const double area = sphere_area(manifold.dim);
    double grad = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
        const double g = (profile[j + 1] - profile[j]) / dr;
        const double psi = warping(manifold, grid.node(j) + 0.5 * dr).value;
        grad += area * std::pow(psi, manifold.dim - 1) * dr * std::pow(std::abs(g), p);
    }
    const double num = std::pow(grad, 1.0 / p);
    const double den = lq_norm(profile, quadrature_weights(manifold, grid), r);
    return num / den;
}

namespace {

// C^2 bump (1 - x^2)^3 on |x| < 1.
double bump(double x)
{
    const double s = 1.0 - x * x;
    return s > 0 ? s * s * s : 0.0;
}

template <class Ratio>
double minimize_over_profiles(const RadialGrid& grid, int trials, std::uint64_t seed,
                              Ratio&& ratio)
{
    grid.validate();
    if (trials < 1) {
        throw std::invalid_argument("need at least one trial profile");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(1, 4);
    const Eigen::VectorXd r = grid.nodes();
    const double R = grid.R;
    const double min_width = 8.0 * grid.dr();

    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd v(grid.size());
    for (int trial = 0; trial < trials; ++trial) {
        v.setZero();
        const int bumps = count(rng);
        for (int b = 0; b < bumps; ++b) {
            // Support [c - w, c + w] kept inside [0, R); c = 0 gives symmetric bumps.
            const bool centred = unit(rng) < 0.5;
            const double w = min_width * std::pow(R / min_width, unit(rng));
            const double c = centred ? 0.0 : unit(rng) * std::max(0.0, 0.98 * R - w);
            const double amp = 0.05 + unit(rng);
            for (int j = 0; j < grid.size(); ++j) {
                const double x = (r[j] - c) / std::min(w, 0.98 * R);
                v[j] += amp * bump(x);
            }
        }
        v[grid.size() - 1] = 0.0;
        if (v.maxCoeff() <= 0) {
            continue;
        }
        best = std::min(best, ratio(v));
    }
    return best;
}

}  // namespace

double poincare_rayleigh(const ManifoldSpec& manifold, double p, const RadialGrid& grid,
                         int trials, std::uint64_t seed)
{
    manifold.validate();
    if (manifold.kind != ManifoldKind::hyperbolic) {
        throw std::invalid_argument("the Poincare inequality fails on Euclidean space");
    }
    if (!(p > 1 && p < manifold.dim)) {
        throw std::invalid_argument("poincare_rayleigh requires 1 < p < N");
    }
    return minimize_over_profiles(grid, trials, seed, [&](const Eigen::VectorXd& v) {
        return gradient_ratio(manifold, grid, v, p, p);
    });
}

double sobolev_ratio_floor(const ManifoldSpec& manifold, double p, const RadialGrid& grid,
                           int trials, std::uint64_t seed)
{
    manifold.validate();
    const double N = manifold.dim;
    if (!(p > 2.0 * N / (N + 1.0) && p < N)) {
        throw std::invalid_argument("sobolev_ratio_floor requires 2N/(N+1) < p < N");
    }
    const double p_star = p * N / (N - p);
    return minimize_over_profiles(grid, trials, seed, [&](const Eigen::VectorXd& v) {
        return gradient_ratio(manifold, grid, v, p, p_star);
    });
}

}  // namespace plap
