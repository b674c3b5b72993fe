#pragma once

// Closed-form exponents, Moser-ladder sequences and smallness thresholds for
// the p-Laplacian and porous-medium reaction-diffusion problems.
//
// Every formula is written once in terms of three homogeneity quantities so
// that the p-Laplacian and porous-medium variants share code:
//
//   quantity     p-Laplacian    porous medium
//   degeneracy   p - 2          m - 1
//   scale        p              2
//   excess       sigma - p + 1  sigma - m
//
// This is the substitution table used by the tests to compare the two modes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

enum class DiffusionMode { plap, pme };

template <typename Scalar>
struct BasicProblemParams {
    DiffusionMode mode = DiffusionMode::plap;
    Scalar p = 2;      // p-Laplacian exponent (plap mode)
    Scalar m = 2;      // porous-medium exponent (pme mode)
    Scalar sigma = 3;  // reaction exponent
    int N = 3;
    Scalar C_sp = 1;   // Sobolev constant
    std::optional<Scalar> C_p;  // Poincare constant, when assumed

    static BasicProblemParams plaplacian(Scalar p, Scalar sigma, int N, Scalar C_sp = 1,
                                         std::optional<Scalar> C_p = std::nullopt)
    {
        BasicProblemParams out;
        out.mode = DiffusionMode::plap;
        out.p = p;
        out.sigma = sigma;
        out.N = N;
        out.C_sp = C_sp;
        out.C_p = C_p;
        out.validate();
        return out;
    }

    static BasicProblemParams porous_medium(Scalar m, Scalar sigma, int N, Scalar C_sp = 1,
                                            std::optional<Scalar> C_p = std::nullopt)
    {
        BasicProblemParams out;
        out.mode = DiffusionMode::pme;
        out.m = m;
        out.sigma = sigma;
        out.N = N;
        out.C_sp = C_sp;
        out.C_p = C_p;
        out.validate();
        return out;
    }

    /// Throws std::invalid_argument unless the standing parameter assumptions hold.
    void validate() const
    {
        if (N < 3) {
            throw std::invalid_argument("dimension N must be >= 3");
        }
        if (!(C_sp > 0)) {
            throw std::invalid_argument("C_sp must be positive");
        }
        if (C_p && !(*C_p > 0)) {
            throw std::invalid_argument("C_p must be positive when given");
        }
        if (mode == DiffusionMode::plap) {
            const Scalar lo = Scalar(2 * N) / Scalar(N + 1);
            if (!(p > lo && p < Scalar(N))) {
                throw std::invalid_argument("p must satisfy 2N/(N+1) < p < N");
            }
            if (!(sigma > p - 1)) {
                throw std::invalid_argument("sigma must exceed p - 1");
            }
        } else {
            if (!(m > 1)) {
                throw std::invalid_argument("m must exceed 1");
            }
            if (!(sigma > m)) {
                throw std::invalid_argument("sigma must exceed m");
            }
        }
    }

    Scalar degeneracy() const { return mode == DiffusionMode::plap ? p - 2 : m - 1; }
    Scalar scale() const { return mode == DiffusionMode::plap ? p : Scalar(2); }
    Scalar excess() const { return mode == DiffusionMode::plap ? sigma - p + 1 : sigma - m; }
};

using ProblemParams = BasicProblemParams<double>;

template <typename Scalar>
constexpr Scalar infinity_v = std::numeric_limits<Scalar>::infinity();

namespace detail {

template <typename Scalar>
void require_plap(const BasicProblemParams<Scalar>& params, const char* what)
{
    params.validate();
    if (params.mode != DiffusionMode::plap) {
        throw std::invalid_argument(std::string(what) + " requires p-Laplacian mode");
    }
}

template <typename Scalar>
void require_pme(const BasicProblemParams<Scalar>& params, const char* what)
{
    params.validate();
    if (params.mode != DiffusionMode::pme) {
        throw std::invalid_argument(std::string(what) + " requires porous-medium mode");
    }
}

template <typename Scalar>
Scalar critical_exponent(const BasicProblemParams<Scalar>& params)
{
    return params.excess() * Scalar(params.N) / params.scale();
}

template <typename Scalar>
void require_fujita_gate(const BasicProblemParams<Scalar>& params, const char* what)
{
    if (!(critical_exponent(params) > 1)) {
        throw std::domain_error(std::string(what)
                                + " requires sigma above the Fujita-type exponent");
    }
}

template <typename Scalar>
void require_degenerate(const BasicProblemParams<Scalar>& params, const char* what)
{
    if (!(params.degeneracy() > 0)) {
        throw std::domain_error(std::string(what) + " requires p > 2 (or m > 1)");
    }
}

// (p (x - 1)^{1/p} / den)^p, the coercivity factor of the L^x energy estimate.
template <typename Scalar>
Scalar coercivity(Scalar p, Scalar x, Scalar den)
{
    using std::pow;
    return pow(p * pow(x - 1, 1 / p) / den, p);
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Critical exponents
//---------------------------------------------------------------------------//

/// (sigma - p + 1) N / p. The Fujita-type gate is sigma_zero > 1.
template <typename Scalar>
Scalar sigma_zero(const BasicProblemParams<Scalar>& params)
{
    detail::require_plap(params, "sigma_zero");
    return detail::critical_exponent(params);
}

/// (sigma - m) N / 2, the porous-medium counterpart of sigma_zero.
template <typename Scalar>
Scalar sigma_one(const BasicProblemParams<Scalar>& params)
{
    detail::require_pme(params, "sigma_one");
    return detail::critical_exponent(params);
}

/// True iff sigma > p - 1 + p/N (resp. sigma > m + 2/N).
template <typename Scalar>
bool fujita_gate(const BasicProblemParams<Scalar>& params)
{
    params.validate();
    return detail::critical_exponent(params) > 1;
}

/// L^1 -> L^infinity decay exponent N / (N deg + scale).
template <typename Scalar>
Scalar alpha_smoothing(const BasicProblemParams<Scalar>& params)
{
    params.validate();
    const Scalar n = params.N;
    return n / (n * params.degeneracy() + params.scale());
}

//---------------------------------------------------------------------------//
// Smoothing pairs (time exponent gamma, datum exponent delta)
//---------------------------------------------------------------------------//

enum class SmoothingFamily { thm1ii, prop42, thm2, thm3, prop71, pme_thm };

template <typename Scalar>
struct SmoothingPair {
    Scalar gamma;
    Scalar delta;
};

namespace detail {

template <typename Scalar>
SmoothingPair<Scalar> critical_pair(const BasicProblemParams<Scalar>& params, Scalar q)
{
    const Scalar n = params.N;
    const Scalar s1 = params.sigma - 1;
    if (std::isinf(q)) {
        return {1 / s1, params.excess() / s1};
    }
    return {(1 - n * params.excess() / (params.scale() * q)) / s1,
            params.excess() / s1 * (1 + n * params.degeneracy() / (params.scale() * q))};
}

template <typename Scalar>
SmoothingPair<Scalar> moser_pair(const BasicProblemParams<Scalar>& params, Scalar q0, Scalar q)
{
    const Scalar n = params.N;
    const Scalar w = params.scale();
    const Scalar lift = n * params.degeneracy() / w;
    return {(1 / q0 - 1 / q) * n * q0 / (w * q0 + n * params.degeneracy()),
            q0 / q * (q + lift) / (q0 + lift)};
}

template <typename Scalar>
SmoothingPair<Scalar> poincare_pair(const BasicProblemParams<Scalar>& params, Scalar q0, Scalar q)
{
    return {q0 / params.degeneracy() * (1 / q0 - 1 / q), q0 / q};
}

}  // namespace detail

/// Exponent pair of the requested smoothing estimate
/// ||u(t)||_q <= C t^{-gamma} ||u_0||_{q0}^{delta}.
///
/// `q0_or_s` is the datum exponent: ignored by thm1ii/thm2/pme_thm (which fix
/// it at the critical exponent), q0 for prop42/prop71 and s for thm3.
/// q = infinity is accepted by thm2 and pme_thm only.
template <typename Scalar>
SmoothingPair<Scalar> smoothing_pair(SmoothingFamily family, Scalar q0_or_s, Scalar q,
                                     const BasicProblemParams<Scalar>& params)
{
    using detail::critical_exponent;
    params.validate();
    const bool infinite = std::isinf(q) && q > 0;
    if (std::isnan(q) || std::isnan(q0_or_s)) {
        throw std::invalid_argument("smoothing_pair: NaN exponent");
    }
    switch (family) {
    case SmoothingFamily::thm1ii:
    case SmoothingFamily::thm2: {
        detail::require_plap(params, "smoothing_pair");
        detail::require_fujita_gate(params, "smoothing_pair");
        if (infinite && family == SmoothingFamily::thm1ii) {
            throw std::domain_error("thm1ii: q = infinity is not admissible");
        }
        if (!(q >= critical_exponent(params))) {
            throw std::domain_error("smoothing_pair: q must be >= sigma_0");
        }
        return detail::critical_pair(params, q);
    }
    case SmoothingFamily::pme_thm: {
        detail::require_pme(params, "smoothing_pair");
        detail::require_fujita_gate(params, "smoothing_pair");
        if (!(q >= critical_exponent(params))) {
            throw std::domain_error("smoothing_pair: q must be >= sigma_1");
        }
        return detail::critical_pair(params, q);
    }
    case SmoothingFamily::prop42: {
        detail::require_plap(params, "smoothing_pair");
        detail::require_fujita_gate(params, "smoothing_pair");
        if (infinite) {
            throw std::domain_error("prop42: q = infinity is not admissible");
        }
        if (!(q0_or_s >= 1 && q >= q0_or_s)) {
            throw std::domain_error("prop42 requires 1 <= q0 <= q");
        }
        return detail::moser_pair(params, q0_or_s, q);
    }
    case SmoothingFamily::thm3:
    case SmoothingFamily::prop71: {
        detail::require_plap(params, "smoothing_pair");
        detail::require_degenerate(params, "smoothing_pair");
        if (infinite) {
            throw std::domain_error("thm3/prop71: q = infinity is not admissible");
        }
        if (family == SmoothingFamily::thm3
            && !(q0_or_s > std::max<Scalar>(critical_exponent(params), 1))) {
            throw std::domain_error("thm3 requires s > max(sigma_0, 1)");
        }
        if (!(q0_or_s > 1 && q >= q0_or_s)) {
            throw std::domain_error("thm3/prop71 require 1 < q0 <= q");
        }
        return detail::poincare_pair(params, q0_or_s, q);
    }
    }
    throw std::invalid_argument("smoothing_pair: unknown family");
}

/// L^s -> L^infinity time exponent 1/deg (1 - scale s / (N deg + scale q)).
template <typename Scalar>
Scalar beta_qs(Scalar s, Scalar q, const BasicProblemParams<Scalar>& params)
{
    params.validate();
    detail::require_degenerate(params, "beta_qs");
    if (!(s > std::max<Scalar>(detail::critical_exponent(params), 1) && q >= s)) {
        throw std::domain_error("beta_qs requires q >= s > max(critical exponent, 1)");
    }
    const Scalar n = params.N;
    const Scalar w = params.scale();
    const Scalar d = params.degeneracy();
    return (1 - w * s / (n * d + w * q)) / d;
}

//---------------------------------------------------------------------------//
// Moser ladders
//---------------------------------------------------------------------------//

/// q_n = N/(N-p) (p + q_{n-1} - 2), evaluated by recursion.
template <typename Scalar>
Scalar qn_sequence(Scalar q0, int n, const BasicProblemParams<Scalar>& params)
{
    detail::require_plap(params, "qn_sequence");
    if (n < 0) {
        throw std::invalid_argument("qn_sequence: negative index");
    }
    if (!(q0 >= 1)) {
        throw std::domain_error("qn_sequence requires q0 >= 1");
    }
    const Scalar ratio = Scalar(params.N) / (Scalar(params.N) - params.p);
    Scalar q = q0;
    for (int i = 0; i < n; ++i) {
        q = ratio * (params.p + q - 2);
    }
    return q;
}

/// Closed form of the q_n ladder (geometric sum written out).
template <typename Scalar>
Scalar qn_closed_form(Scalar q0, int n, const BasicProblemParams<Scalar>& params)
{
    detail::require_plap(params, "qn_closed_form");
    if (n < 0) {
        throw std::invalid_argument("qn_closed_form: negative index");
    }
    using std::pow;
    const Scalar ratio = Scalar(params.N) / (Scalar(params.N) - params.p);
    Scalar geometric = 0;
    for (int i = 0; i < n; ++i) {
        geometric += pow(ratio, Scalar(i));
    }
    return pow(ratio, Scalar(n)) * q0 + ratio * (params.p - 2) * geometric;
}

/// q_m = q0 + m (p - 2).
template <typename Scalar>
Scalar qm_sequence(Scalar q0, int m_idx, const BasicProblemParams<Scalar>& params)
{
    detail::require_plap(params, "qm_sequence");
    if (!(params.p > 2)) {
        throw std::domain_error("qm_sequence requires p > 2");
    }
    if (m_idx < 0) {
        throw std::invalid_argument("qm_sequence: negative index");
    }
    if (!(q0 > 1)) {
        throw std::domain_error("qm_sequence requires q0 > 1");
    }
    return q0 + Scalar(m_idx) * (params.p - 2);
}

/// Ladder q_0 .. q_nbar where nbar is the first index with q_nbar >= q.
template <typename Scalar>
std::vector<Scalar> qn_ladder(Scalar q0, Scalar q, const BasicProblemParams<Scalar>& params)
{
    std::vector<Scalar> out{q0};
    const Scalar ratio = Scalar(params.N) / (Scalar(params.N) - params.p);
    while (out.back() < q) {
        out.push_back(ratio * (params.p + out.back() - 2));
        if (out.size() > 100000) {
            throw std::domain_error("qn_ladder does not reach q");
        }
    }
    return out;
}

template <typename Scalar>
std::vector<Scalar> qm_ladder(Scalar q0, Scalar q, const BasicProblemParams<Scalar>& params)
{
    std::vector<Scalar> out{q0};
    while (out.back() < q) {
        out.push_back(out.back() + params.p - 2);
        if (out.size() > 1000000) {
            throw std::domain_error("qm_ladder does not reach q");
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
// Smallness thresholds
//---------------------------------------------------------------------------//

/// Sign of the second denominator in the eps_tilde_0 / eps_bar_0 formulas.
/// `as_written` keeps (p - sigma_0 - 2); `corrected` uses (p + sigma_0 - 2).
enum class ThresholdMode { as_written, corrected };

namespace detail {

template <typename Scalar>
Scalar critical_branch(const BasicProblemParams<Scalar>& params, ThresholdMode mode)
{
    const Scalar p = params.p;
    const Scalar s0 = critical_exponent(params);
    const Scalar den = mode == ThresholdMode::corrected ? p + s0 - 2 : p - s0 - 2;
    return coercivity(p, s0, den);
}

template <typename Scalar>
Scalar positive_root(Scalar bracket, Scalar power, const char* what)
{
    using std::pow;
    if (!(bracket > 0) || !std::isfinite(bracket)) {
        throw std::domain_error(std::string(what) + ": bracket is not positive");
    }
    return pow(bracket, power);
}

template <typename Scalar>
void require_threshold_gates(const BasicProblemParams<Scalar>& params, Scalar q, Scalar q0)
{
    require_plap(params, "threshold");
    require_fujita_gate(params, "threshold");
    if (!(q0 > 1 && q >= q0) || std::isinf(q)) {
        throw std::domain_error("threshold requires 1 < q0 <= q < infinity");
    }
}

}  // namespace detail

/// eps_tilde_0(q, q0): smallness of ||u_0||_{sigma_0} sufficient for the
/// L^{q0} -> L^q smoothing estimate.
template <typename Scalar>
Scalar eps_tilde0(Scalar q, Scalar q0, const BasicProblemParams<Scalar>& params,
                  ThresholdMode mode = ThresholdMode::corrected)
{
    using std::pow;
    detail::require_threshold_gates(params, q, q0);
    const Scalar p = params.p;
    Scalar ladder_min = std::numeric_limits<Scalar>::infinity();
    for (Scalar qn : qn_ladder(q0, q, params)) {
        ladder_min = std::min(ladder_min, detail::coercivity(p, qn, p + qn - 2));
    }
    const Scalar bracket = std::min(ladder_min, detail::critical_branch(params, mode))
                           * pow(params.C_sp, p) / 2;
    return detail::positive_root(bracket, 1 / params.excess(), "eps_tilde0");
}

/// eps_bar_0(q): smallness for the L^q -> L^q contraction.
template <typename Scalar>
Scalar eps_bar0(Scalar q, const BasicProblemParams<Scalar>& params,
                ThresholdMode mode = ThresholdMode::corrected)
{
    using std::pow;
    detail::require_plap(params, "eps_bar0");
    detail::require_fujita_gate(params, "eps_bar0");
    if (!(q > 1) || std::isinf(q)) {
        throw std::domain_error("eps_bar0 requires 1 < q < infinity");
    }
    const Scalar p = params.p;
    const Scalar cp = pow(params.C_sp, p);
    const Scalar bracket = std::min(detail::coercivity(p, q, p + q - 2) * cp,
                                    detail::critical_branch(params, mode) * cp);
    return detail::positive_root(bracket, 1 / params.excess(), "eps_bar0");
}

/// eps_hat_0(q) = eps_tilde_0(q, sigma_0).
template <typename Scalar>
Scalar eps_hat0(Scalar q, const BasicProblemParams<Scalar>& params,
                ThresholdMode mode = ThresholdMode::corrected)
{
    return eps_tilde0(q, sigma_zero(params), params, mode);
}

template <typename Scalar>
struct Eps0Report {
    Scalar tilde;     // eps_tilde_0(q, q0)
    Scalar bar;       // eps_bar_0(q)
    Scalar hat;       // eps_hat_0(q)
    Scalar eps;       // eps_bar_0(q) ^ eps_hat_0(q)
    Scalar eps_at_critical;  // eps_bar_0(q) ^ eps_hat_0(sigma_0)
};

template <typename Scalar>
Eps0Report<Scalar> threshold_eps0(Scalar q, Scalar q0, const BasicProblemParams<Scalar>& params,
                                  ThresholdMode mode = ThresholdMode::corrected)
{
    Eps0Report<Scalar> out;
    out.tilde = eps_tilde0(q, q0, params, mode);
    const Scalar s0 = sigma_zero(params);
    out.bar = eps_bar0(q, params, mode);
    out.hat = q >= s0 ? eps_hat0(q, params, mode) : std::numeric_limits<Scalar>::quiet_NaN();
    out.eps = q >= s0 ? std::min(out.bar, out.hat) : out.bar;
    out.eps_at_critical = std::min(out.bar, eps_hat0(s0, params, mode));
    return out;
}

/// theta(q) = (p-1)(p+q-2) / (sigma (sigma+q-1)), the interpolation weight of
/// the L^q energy estimate under the Poincare inequality.
template <typename Scalar>
Scalar eps1_theta(Scalar q, const BasicProblemParams<Scalar>& params)
{
    detail::require_plap(params, "eps1_theta");
    const Scalar p = params.p;
    const Scalar s = params.sigma;
    return (p - 1) * (p + q - 2) / (s * (s + q - 1));
}

/// C_tilde(q) = (1/C_sp)^{p (1-theta) (sigma+q-1)/(sigma+p+q-2)}.
template <typename Scalar>
Scalar eps1_c_tilde(Scalar q, const BasicProblemParams<Scalar>& params)
{
    using std::pow;
    const Scalar p = params.p;
    const Scalar s = params.sigma;
    const Scalar theta = eps1_theta(q, params);
    return pow(1 / params.C_sp, p * (1 - theta) * (s + q - 1) / (s + p + q - 2));
}

/// Power applied to each bracket of eps_tilde_1. `as_written` keeps the
/// denominator sigma(sigma+q-1) - p(p+q-2); `energy_balance` uses the
/// (p-1)(p+q-2) that comes out of the differential inequality and is
/// positive for every sigma > p - 1.
enum class Eps1Exponent { as_written, energy_balance };

namespace detail {

template <typename Scalar>
Scalar eps1_branch(Scalar x, const BasicProblemParams<Scalar>& params, Eps1Exponent exponent)
{
    using std::pow;
    const Scalar p = params.p;
    const Scalar s = params.sigma;
    const Scalar C = eps1_c_tilde(x, params) * pow(*params.C_p, p * (p - 1) / s);
    const Scalar bracket = coercivity(p, x, p + x - 2) * C;
    const Scalar lead = exponent == Eps1Exponent::as_written ? p : p - 1;
    const Scalar den = s * (s + x - 1) - lead * (p + x - 2);
    if (den == 0) {
        throw std::domain_error("eps_tilde1: degenerate exponent");
    }
    return positive_root(bracket, (s + p + x - 2) / den, "eps_tilde1");
}

}  // namespace detail

/// eps_tilde_1(q, q0): minimum over the q_m ladder up to the first q_m >= q
/// and the branch at sigma N / p. Each bracket uses C = C_tilde C_p^{p(p-1)/sigma}
/// with C_tilde evaluated at that bracket's exponent.
template <typename Scalar>
Scalar threshold_eps1(Scalar q, Scalar q0, const BasicProblemParams<Scalar>& params,
                      Eps1Exponent exponent = Eps1Exponent::as_written)
{
    detail::require_plap(params, "threshold_eps1");
    detail::require_degenerate(params, "threshold_eps1");
    if (!params.C_p) {
        throw std::invalid_argument("threshold_eps1 requires the Poincare constant C_p");
    }
    if (!(q0 > 1 && q >= q0) || std::isinf(q)) {
        throw std::domain_error("threshold_eps1 requires 1 < q0 <= q < infinity");
    }
    Scalar out = std::numeric_limits<Scalar>::infinity();
    for (Scalar qm : qm_ladder(q0, q, params)) {
        out = std::min(out, detail::eps1_branch(qm, params, exponent));
    }
    const Scalar critical = params.sigma * Scalar(params.N) / params.p;
    return std::min(out, detail::eps1_branch(critical, params, exponent));
}

//---------------------------------------------------------------------------//
// De Giorgi machinery
//---------------------------------------------------------------------------//

template <typename Scalar>
struct DeGiorgiLevels {
    Scalar k;
    Scalar theta;
};

/// k_i = a2 + (a1-a2) 2^{-i}, theta_i = tau2 + (tau1-tau2) 2^{-i}.
template <typename Scalar>
DeGiorgiLevels<Scalar> degiorgi_sequences(Scalar a1, Scalar a2, Scalar tau1, Scalar tau2, int i)
{
    using std::ldexp;
    if (!(a1 > a2 && a2 > 0 && tau1 > tau2 && tau2 > 0)) {
        throw std::invalid_argument("degiorgi_sequences requires a1 > a2 > 0, tau1 > tau2 > 0");
    }
    if (i < 0) {
        throw std::invalid_argument("degiorgi_sequences: negative index");
    }
    return {a2 + ldexp(a1 - a2, -i), tau2 + ldexp(tau1 - tau2, -i)};
}

/// C_1 = 1/(tau1 - tau2) + S(t)/tau1 * 2 a1/(a1 - a2).
template <typename Scalar>
Scalar degiorgi_c1(Scalar S_t, Scalar tau1, Scalar tau2, Scalar a1, Scalar a2)
{
    if (!(a1 > a2 && a2 > 0 && tau1 > tau2 && tau2 > 0)) {
        throw std::invalid_argument("degiorgi_c1 requires a1 > a2 > 0, tau1 > tau2 > 0");
    }
    if (!(S_t >= 0)) {
        throw std::invalid_argument("degiorgi_c1 requires S(t) >= 0");
    }
    return 1 / (tau1 - tau2) + S_t / tau1 * 2 * a1 / (a1 - a2);
}

template <typename Scalar>
struct LinftyExponents {
    Scalar time_exp;
    Scalar mass_exp;
};

/// Exponents of the L^r -> L^infinity bound under S(t) <= 1:
/// (N / (N deg + scale r), scale / (N deg + scale r)).
template <typename Scalar>
LinftyExponents<Scalar> linfty_bound_exponents(Scalar r, const BasicProblemParams<Scalar>& params)
{
    params.validate();
    if (!(r >= 1) || std::isinf(r)) {
        throw std::domain_error("linfty_bound_exponents requires 1 <= r < infinity");
    }
    const Scalar n = params.N;
    const Scalar den = n * params.degeneracy() + params.scale() * r;
    return {n / den, params.scale() / den};
}

//---------------------------------------------------------------------------//
// Report
//---------------------------------------------------------------------------//

enum class Regime { sobolev_only, sobolev_poincare };

template <typename Scalar>
struct ExponentReport {
    DiffusionMode mode;
    Scalar critical;   // sigma_0 or sigma_1
    bool gate;
    Scalar alpha;
    Regime regime;
    std::map<Scalar, Scalar> gamma_q;
    std::map<Scalar, Scalar> delta_q;
    std::optional<Scalar> beta_qs;
    std::map<std::string, Scalar> thresholds;
};

/// Collects every closed-form quantity available for `params` at the given
/// q values (entries whose gates fail are omitted). `s` selects the datum
/// exponent of the Poincare-regime quantities when set.
template <typename Scalar>
ExponentReport<Scalar> exponent_report(const BasicProblemParams<Scalar>& params,
                                       const std::vector<Scalar>& qs,
                                       std::optional<Scalar> s = std::nullopt)
{
    params.validate();
    ExponentReport<Scalar> out;
    out.mode = params.mode;
    out.critical = detail::critical_exponent(params);
    out.gate = out.critical > 1;
    out.alpha = alpha_smoothing(params);
    out.regime = params.C_p ? Regime::sobolev_poincare : Regime::sobolev_only;

    const bool plap_mode = params.mode == DiffusionMode::plap;
    for (Scalar q : qs) {
        try {
            SmoothingPair<Scalar> pair{};
            if (out.regime == Regime::sobolev_poincare && s && params.degeneracy() > 0) {
                pair = plap_mode ? smoothing_pair(SmoothingFamily::thm3, *s, q, params)
                                 : detail::poincare_pair(params, *s, q);
            } else {
                pair = smoothing_pair(plap_mode ? SmoothingFamily::thm1ii
                                                : SmoothingFamily::pme_thm,
                                      out.critical, q, params);
            }
            out.gamma_q[q] = pair.gamma;
            out.delta_q[q] = pair.delta;
        } catch (const std::exception&) {
        }
    }
    if (s && !qs.empty()) {
        try {
            out.beta_qs = beta_qs(*s, qs.back(), params);
        } catch (const std::exception&) {
        }
    }
    if (plap_mode && out.gate && !qs.empty()) {
        const Scalar q = std::max(qs.back(), out.critical);
        try {
            const auto eps = threshold_eps0(q, out.critical, params);
            out.thresholds["eps_tilde0"] = eps.tilde;
            out.thresholds["eps_bar0"] = eps.bar;
            out.thresholds["eps_hat0"] = eps.hat;
            out.thresholds["eps"] = eps.eps;
            out.thresholds["eps_at_sigma0"] = eps.eps_at_critical;
        } catch (const std::exception&) {
        }
    }
    if (plap_mode && params.C_p && params.p > 2 && !qs.empty()) {
        const Scalar q0 = s.value_or(std::max<Scalar>(out.critical, Scalar(1.5)));
        try {
            out.thresholds["eps_tilde1"] = threshold_eps1(std::max(qs.back(), q0), q0, params);
        } catch (const std::exception&) {
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
// Identity suite
//---------------------------------------------------------------------------//

struct IdentityReport {
    int draws = 0;
    double max_residual = 0;
    std::map<std::string, double> residual_by_identity;
    bool pass = false;
};

namespace detail {

inline void track(IdentityReport& report, const std::string& name, double residual)
{
    auto& slot = report.residual_by_identity[name];
    slot = std::max(slot, residual);
    report.max_residual = std::max(report.max_residual, residual);
}

// Residual of a - b measured against the size of the terms involved.
template <typename Scalar>
double scaled_residual(Scalar a, Scalar b, Scalar scale = 1)
{
    using std::abs;
    const Scalar denom = std::max<Scalar>({Scalar(1), abs(scale)});
    return static_cast<double>(abs(a - b) / denom);
}

}  // namespace detail

/// Evaluates both sides of every exponent identity linking the closed-form
/// smoothing exponents to the Moser ladders, over `samples` random admissible
/// draws. PASS iff the maximum residual is <= 1e-12.
template <typename Scalar = double>
IdentityReport identity_suite(int samples, std::uint64_t seed = 20240101)
{
    using std::abs;
    using std::pow;
    IdentityReport report;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(3, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int draw = 0; draw < samples; ++draw) {
        const int N = dim(rng);
        const Scalar n = N;
        const Scalar p_lo = Scalar(2 * N) / Scalar(N + 1) + Scalar(0.05);
        const Scalar p = p_lo + (n - Scalar(0.05) - p_lo) * Scalar(unit(rng));
        // Fujita regime with sigma_0 >= 1.05.
        const Scalar sigma = p - 1 + p / n * Scalar(1.05) + Scalar(3.0 * unit(rng));
        const auto params = BasicProblemParams<Scalar>::plaplacian(p, sigma, N);
        const Scalar s0 = sigma_zero(params);
        const Scalar q = s0 * (1 + Scalar(0.01) + Scalar(5.0 * unit(rng)));
        const Scalar den = n * (p - 2) + p * q;

        const auto thm = smoothing_pair(SmoothingFamily::thm1ii, s0, q, params);
        const auto moser = smoothing_pair(SmoothingFamily::prop42, s0, q, params);
        detail::track(report, "thm1ii_vs_prop42_gamma", detail::scaled_residual(thm.gamma, moser.gamma));
        detail::track(report, "thm1ii_vs_prop42_delta", detail::scaled_residual(thm.delta, moser.delta));

        // Time exponent cancellation in the L^infinity bound.
        const auto linf = linfty_bound_exponents(q, params);
        const Scalar lhs_time = -linf.time_exp - moser.gamma * q * linf.mass_exp;
        detail::track(report, "linf_time_exponent", detail::scaled_residual(lhs_time, -1 / (sigma - 1)));
        const Scalar lhs_mass = moser.delta * p * q / den;
        detail::track(report, "linf_datum_exponent",
                      detail::scaled_residual(lhs_mass, (sigma - p + 1) / (sigma - 1)));

        // Exponent cancellation that closes the S(t) <= 1 bootstrap.
        const Scalar lhs_boot = 1 - n * (sigma - 1) / den - moser.gamma * p * q * (sigma - 1) / den;
        detail::track(report, "bootstrap_time_cancellation", detail::scaled_residual(lhs_boot, Scalar(0), sigma));
        detail::track(report, "bootstrap_datum_exponent",
                      detail::scaled_residual(moser.delta * p * q * (sigma - 1) / den, sigma - p + 1, sigma));

        // Interpolation step of the q_n ladder.
        const Scalar q0 = 1 + Scalar(0.02) + Scalar(2.0 * unit(rng));
        const Scalar qt = q0 * (1 + Scalar(0.05) + Scalar(20.0 * unit(rng)));
        const auto ladder = qn_ladder(q0, qt, params);
        const int nbar = static_cast<int>(ladder.size()) - 1;
        const Scalar qbar = qn_closed_form(q0, nbar, params);
        const Scalar A = pow(n / (n - p), Scalar(nbar)) - 1;
        const Scalar B = n * (p - 2) * A + p * q0 * (A + 1);
        const Scalar theta = q0 / qt * (qbar - qt) / (qbar - q0);
        const auto target = smoothing_pair(SmoothingFamily::prop42, q0, qt, params);
        detail::track(report, "interpolation_time", detail::scaled_residual(n * A / B * (1 - theta), target.gamma));
        detail::track(report, "interpolation_datum",
                      detail::scaled_residual(p * q0 * (A + 1) / B * (1 - theta) + theta, target.delta));

        // Closed form of the ladder against the recursion, relative.
        for (int k = 0; k <= std::min(nbar + 3, 30); ++k) {
            const Scalar rec = qn_sequence(q0, k, params);
            const Scalar closed = qn_closed_form(q0, k, params);
            detail::track(report, "qn_closed_form", static_cast<double>(abs(rec - closed) / abs(rec)));
        }

        // Poincare regime (p > 2): beta identity and the t^{-beta} rate.
        if (p > 2) {
            const Scalar s = std::max<Scalar>(s0, 1) * (1 + Scalar(0.01) + Scalar(unit(rng)));
            const Scalar qq = s * (1 + Scalar(0.01) + Scalar(3.0 * unit(rng)));
            const Scalar dq = n * (p - 2) + p * qq;
            const auto pc = smoothing_pair(SmoothingFamily::thm3, s, qq, params);
            const Scalar lhs = -n / dq - pc.gamma * p * qq / dq;
            detail::track(report, "beta_identity", detail::scaled_residual(lhs, -beta_qs(s, qq, params)));
            detail::track(report, "beta_datum_exponent", detail::scaled_residual(pc.delta * p * qq / dq, p * s / dq));
        }
        ++report.draws;
    }
    report.pass = report.max_residual <= 1e-12;
    return report;
}

}  // namespace plap
