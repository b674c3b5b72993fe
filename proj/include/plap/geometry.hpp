#pragma once

// Rotationally symmetric model manifolds dr^2 + psi(r)^2 dtheta^2 with
// psi(r) = r (Euclidean space) or psi(r) = sinh r (hyperbolic space).

#include <Eigen/Core>

#include <cstdint>
#include <string>

namespace plap {

enum class ManifoldKind { euclidean, hyperbolic };

std::string to_string(ManifoldKind kind);
ManifoldKind parse_manifold_kind(const std::string& text);

struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::euclidean;
    int dim = 3;

    static ManifoldSpec make(ManifoldKind kind, int dim);
    void validate() const;
};

struct Warping {
    double value;       // psi(r)
    double derivative;  // psi'(r)
};

Warping warping(const ManifoldSpec& manifold, double r);

/// Area of the unit sphere S^{N-1}.
double sphere_area(int dim);

/// Density omega_{N-1} psi(r)^{N-1} of the Riemannian measure in r.
double radial_density(const ManifoldSpec& manifold, double r);

/// Uniform radial grid r_j = j dr, j = 0..nr+1, with r_{nr+1} = R.
struct RadialGrid {
    double R = 1.0;
    int nr = 16;

    static RadialGrid make(double R, int nr);
    void validate() const;

    double dr() const { return R / (nr + 1); }
    double node(int j) const { return j * dr(); }
    int size() const { return nr + 2; }
    Eigen::VectorXd nodes() const;
};

/// Nonnegative samples of a radial function at the grid nodes at a time.
struct RadialState {
    RadialGrid grid;
    Eigen::VectorXd values;
    double time = 0.0;

    void validate() const;
};

/// Trapezoid weights of the Riemannian measure on the grid. The origin node
/// carries the exact volume of the ball of radius dr/2, so these are also the
/// control volumes of the diffusion scheme.
Eigen::VectorXd quadrature_weights(const ManifoldSpec& manifold, const RadialGrid& grid);

/// (sum_j w_j |u_j|^q)^{1/q}, or max_j |u_j| for q = infinity.
double lq_norm(const Eigen::Ref<const Eigen::VectorXd>& values,
               const Eigen::Ref<const Eigen::VectorXd>& weights, double q);

double lq_norm(const RadialState& state, const ManifoldSpec& manifold, double q);

/// Adaptive Simpson quadrature of the measure density over [a, b].
double shell_volume(const ManifoldSpec& manifold, double a, double b, double tol = 1e-12);

double ball_volume(const ManifoldSpec& manifold, double R);

/// Upper bound on the best Poincare constant C_p of hyperbolic space:
/// min ||v'||_p / ||v||_p over `trials` random mixtures of compactly supported
/// radial bumps on `grid`.
double poincare_rayleigh(const ManifoldSpec& manifold, double p, const RadialGrid& grid,
                         int trials, std::uint64_t seed = 1);

/// min ||v'||_p / ||v||_{p*}, p* = pN/(N-p), over the same profile family. Any
/// admissible Sobolev constant C_sp must not exceed it.
double sobolev_ratio_floor(const ManifoldSpec& manifold, double p, const RadialGrid& grid,
                           int trials, std::uint64_t seed = 1);

/// Ratio ||v'||_p / ||v||_r for one sampled profile (gradient by midpoint
/// differences, norms by the trapezoid rule).
double gradient_ratio(const ManifoldSpec& manifold, const RadialGrid& grid,
                      const Eigen::Ref<const Eigen::VectorXd>& profile, double p, double r);

}  // namespace plap
