#pragma once

// Experiment orchestration: log-log decay fits against the predicted
// exponents, run classification and parameter sweeps.

#include "plap/dynamics.hpp"
#include "plap/exponents.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace plap {

struct TimeWindow {
    double lo = 0.0;
    double hi = 0.0;
};

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;  // log value at log t = 0
    int points = 0;
};

/// OLS of log(value) against log(t) over the samples with t in [lo, hi].
/// Throws std::invalid_argument with fewer than 8 samples in the window or a
/// nonpositive value (or time) among them.
SlopeFit fit_decay_slope(const std::vector<std::pair<double, double>>& series,
                         TimeWindow window);

/// Last decade [t_last / 10, t_last] of the recorded times.
TimeWindow last_decade(const RunRecord& record);

/// Which estimate supplies the predicted decay exponent.
///   thm1_alpha, pme_alpha  Barenblatt rate alpha (1 - 1/q) from L^1 data
///   thm1ii, thm2, pme_thm  gamma at the critical datum exponent
///   prop42                 gamma from L^{q0} data (q0 = 1 unless given)
///   thm3, prop71           Poincare-regime gamma from L^{q0} data
///   thm3_beta              beta_{q,s} with s = q0
enum class DecayFamily {
    thm1_alpha,
    prop42,
    thm2,
    thm1ii,
    thm3,
    thm3_beta,
    prop71,
    pme_alpha,
    pme_thm,
};

std::string to_string(DecayFamily family);
DecayFamily parse_decay_family(const std::string& text);

/// Default family for a mode: thm1_alpha or pme_alpha.
DecayFamily default_decay_family(const ProblemParams& params);

struct DecayRequest {
    DecayFamily family = DecayFamily::thm1_alpha;
    double q = infinity_v<double>;
    std::optional<double> q0;
};

/// Predicted decay exponent (positive: ||u(t)||_q ~ t^{-predicted}).
/// Throws std::domain_error when the family's gates fail for `params`.
double predicted_decay(const DecayRequest& request, const ProblemParams& params);

enum class Verdict { match, mismatch, inconclusive };

std::string to_string(Verdict verdict);

struct DecayReport {
    DecayFamily family = DecayFamily::thm1_alpha;
    double q = infinity_v<double>;
    double fitted_slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
    double predicted = 0.0;
    TimeWindow window;
    Verdict verdict = Verdict::inconclusive;
    std::string note;  // why the verdict is inconclusive
};

inline constexpr double kVerdictFloor = 1e-3;

/// match iff |fitted + predicted| <= max(0.1 |predicted|, 2 stderr, 1e-3).
Verdict decay_verdict(double fitted_slope, double std_error, double predicted);

/// One report per request. Throws std::invalid_argument unless the run
/// completed, std::domain_error when a family's gates fail.
std::vector<DecayReport> smoothing_report(const RunRecord& record,
                                          const std::vector<DecayRequest>& requests,
                                          std::optional<TimeWindow> window = std::nullopt);

enum class Classification { global, blowup, undecided };

std::string to_string(Classification c);

/// global iff completed with S <= 1 (+1e-9) on every recorded row; blowup iff
/// the run ended in blow-up. Blow-up labels are exploratory.
Classification classify_record(const RunRecord& record);
Classification classify_run(const RunConfig& config);

enum class SweepAxis { amplitude, sigma, p, m, N };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

/// Copy of `base` with the axis set to `value`. N also sets the manifold
/// dimension and must be an integer.
RunConfig apply_axis(RunConfig base, SweepAxis axis, double value);

struct SweepRow {
    std::string id;
    double value = 0.0;
    std::string status;  // run status, or "error"
    std::string error;
    double t_final = 0.0;
    double critical = 0.0;
    bool gate = false;
    double s_max = 0.0;
    std::optional<double> linf_slope;
    std::optional<double> slope_std_error;
    Classification classification = Classification::undecided;
};

struct SweepManifest {
    SweepAxis axis = SweepAxis::amplitude;
    std::vector<SweepRow> rows;
};

/// Runs every value on a pool of `workers` threads. Each run writes
/// runs/<id>/series.csv and runs/<id>/manifest.json under `out_dir`; the
/// coordinator writes runs/index.csv once all runs finish. Per-run failures are
/// recorded in the index and do not stop the sweep.
SweepManifest sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                    const std::filesystem::path& out_dir, int workers = 1);

std::string sweep_index_csv(const SweepManifest& manifest);

}  // namespace plap
