#include "plap/harness.hpp"

#include "plap/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace plap {

SlopeFit fit_decay_slope(const std::vector<std::pair<double, double>>& series,
                         TimeWindow window)
{
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [t, v] : series) {
        if (t < window.lo || t > window.hi) {
            continue;
        }
        if (!(t > 0) || !(v > 0)) {
            throw std::invalid_argument("fit_decay_slope: nonpositive time or value in window");
        }
        xs.push_back(std::log(t));
        ys.push_back(std::log(v));
    }
    const int n = static_cast<int>(xs.size());
    if (n < 8) {
        throw std::invalid_argument("fit_decay_slope: fewer than 8 samples in window");
    }
    double mx = 0.0;
    double my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0)) {
        throw std::invalid_argument("fit_decay_slope: window spans a single time");
    }
    SlopeFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += r * r;
    }
    fit.std_error = std::sqrt(rss / (n - 2) / sxx);
    return fit;
}

TimeWindow last_decade(const RunRecord& record)
{
    if (record.series.empty()) {
        return {};
    }
    const double hi = record.series.back().t;
    return {hi / 10.0, hi};
}

std::string to_string(DecayFamily family)
{
    switch (family) {
    case DecayFamily::thm1_alpha:
        return "thm1_alpha";
    case DecayFamily::prop42:
        return "prop42";
    case DecayFamily::thm2:
        return "thm2";
    case DecayFamily::thm1ii:
        return "thm1ii";
    case DecayFamily::thm3:
        return "thm3";
    case DecayFamily::thm3_beta:
        return "thm3_beta";
    case DecayFamily::prop71:
        return "prop71";
    case DecayFamily::pme_alpha:
        return "pme_alpha";
    case DecayFamily::pme_thm:
        return "pme_thm";
    }
    return "unknown";
}

DecayFamily parse_decay_family(const std::string& text)
{
    for (DecayFamily f : {DecayFamily::thm1_alpha, DecayFamily::prop42, DecayFamily::thm2,
                          DecayFamily::thm1ii, DecayFamily::thm3, DecayFamily::thm3_beta,
                          DecayFamily::prop71, DecayFamily::pme_alpha, DecayFamily::pme_thm}) {
        if (to_string(f) == text) {
            return f;
        }
    }
    throw std::invalid_argument("unknown decay family '" + text + "'");
}

DecayFamily default_decay_family(const ProblemParams& params)
{
    return params.mode == DiffusionMode::plap ? DecayFamily::thm1_alpha : DecayFamily::pme_alpha;
}

double predicted_decay(const DecayRequest& request, const ProblemParams& params)
{
    params.validate();
    const double q = request.q;
    const bool plap_mode = params.mode == DiffusionMode::plap;
    auto require_mode = [&](bool want_plap) {
        if (plap_mode != want_plap) {
            throw std::domain_error(to_string(request.family) + " does not apply to this mode");
        }
    };
    switch (request.family) {
    case DecayFamily::thm1_alpha:
    case DecayFamily::pme_alpha:
        // Barenblatt scaling from integrable data: alpha (1 - 1/q).
        require_mode(request.family == DecayFamily::thm1_alpha);
        if (!(q >= 1)) {
            throw std::domain_error("decay exponent requires q >= 1");
        }
        return alpha_smoothing(params) * (std::isinf(q) ? 1.0 : 1.0 - 1.0 / q);
    case DecayFamily::prop42:
        return smoothing_pair(SmoothingFamily::prop42, request.q0.value_or(1.0), q, params).gamma;
    case DecayFamily::thm2:
    case DecayFamily::thm1ii:
        return smoothing_pair(request.family == DecayFamily::thm2 ? SmoothingFamily::thm2
                                                                  : SmoothingFamily::thm1ii,
                              sigma_zero(params), q, params)
            .gamma;
    case DecayFamily::pme_thm:
        require_mode(false);
        return smoothing_pair(SmoothingFamily::pme_thm, sigma_one(params), q, params).gamma;
    case DecayFamily::thm3:
    case DecayFamily::prop71:
        if (!request.q0) {
            throw std::domain_error(to_string(request.family) + " needs a datum exponent q0");
        }
        return smoothing_pair(request.family == DecayFamily::thm3 ? SmoothingFamily::thm3
                                                                  : SmoothingFamily::prop71,
                              *request.q0, q, params)
            .gamma;
    case DecayFamily::thm3_beta:
        require_mode(true);
        if (!request.q0) {
            throw std::domain_error("thm3_beta needs s (q0)");
        }
        return beta_qs(*request.q0, q, params);
    }
    throw std::invalid_argument("unknown decay family");
}

std::string to_string(Verdict verdict)
{
    switch (verdict) {
    case Verdict::match:
        return "match";
    case Verdict::mismatch:
        return "mismatch";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

Verdict decay_verdict(double fitted_slope, double std_error, double predicted)
{
    // The absolute floor covers a predicted rate of 0 (conserved L^1 mass).
    const double tolerance =
        std::max({0.1 * std::abs(predicted), 2.0 * std_error, kVerdictFloor});
    return std::abs(fitted_slope + predicted) <= tolerance ? Verdict::match : Verdict::mismatch;
}

std::vector<DecayReport> smoothing_report(const RunRecord& record,
                                          const std::vector<DecayRequest>& requests,
                                          std::optional<TimeWindow> window)
{
    if (record.status != RunStatus::completed) {
        throw std::invalid_argument("smoothing_report needs a completed run");
    }
    const TimeWindow w = window.value_or(last_decade(record));
    std::vector<DecayReport> out;
    for (const auto& request : requests) {
        DecayReport report;
        report.family = request.family;
        report.q = request.q;
        report.window = w;
        report.predicted = predicted_decay(request, record.config.params);
        try {
            const SlopeFit fit = fit_decay_slope(record.norm_series(request.q), w);
            report.fitted_slope = fit.slope;
            report.std_error = fit.std_error;
            report.intercept = fit.intercept;
            report.verdict = decay_verdict(fit.slope, fit.std_error, report.predicted);
        } catch (const std::invalid_argument& e) {
            report.verdict = Verdict::inconclusive;
            report.note = e.what();
        }
        out.push_back(report);
    }
    return out;
}

std::string to_string(Classification c)
{
    switch (c) {
    case Classification::global:
        return "global";
    case Classification::blowup:
        return "blowup";
    case Classification::undecided:
        return "undecided";
    }
    return "unknown";
}

Classification classify_record(const RunRecord& record)
{
    if (record.status == RunStatus::blowup) {
        return Classification::blowup;
    }
    if (record.status != RunStatus::completed) {
        return Classification::undecided;
    }
    for (const auto& row : record.series) {
        if (row.s_monitor > 1.0 + 1e-9) {
            return Classification::undecided;
        }
    }
    return Classification::global;
}

Classification classify_run(const RunConfig& config)
{
    return classify_record(run(config));
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::amplitude:
        return "amplitude";
    case SweepAxis::sigma:
        return "sigma";
    case SweepAxis::p:
        return "p";
    case SweepAxis::m:
        return "m";
    case SweepAxis::N:
        return "N";
    }
    return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& text)
{
    for (SweepAxis a : {SweepAxis::amplitude, SweepAxis::sigma, SweepAxis::p, SweepAxis::m,
                        SweepAxis::N}) {
        if (to_string(a) == text) {
            return a;
        }
    }
    throw std::invalid_argument("unknown sweep axis '" + text + "'");
}

RunConfig apply_axis(RunConfig base, SweepAxis axis, double value)
{
    switch (axis) {
    case SweepAxis::amplitude:
        base.datum.amplitude = value;
        break;
    case SweepAxis::sigma:
        base.params.sigma = value;
        break;
    case SweepAxis::p:
        base.params.p = value;
        break;
    case SweepAxis::m:
        base.params.m = value;
        break;
    case SweepAxis::N:
        if (value != std::floor(value)) {
            throw std::invalid_argument("the N axis takes integer values");
        }
        base.params.N = static_cast<int>(value);
        base.manifold.dim = static_cast<int>(value);
        break;
    }
    return base;
}

namespace {

SweepRow sweep_one(const RunConfig& base, SweepAxis axis, double value, const std::string& id,
                   const std::filesystem::path& dir)
{
    SweepRow row;
    row.id = id;
    row.value = value;
    try {
        const RunConfig config = apply_axis(base, axis, value);
        config.validate();
        row.critical = config.params.excess() * config.params.N / config.params.scale();
        row.gate = fujita_gate(config.params);
        const RunRecord record = run(config);
        write_run(record, dir);
        row.status = to_string(record.status);
        row.t_final = record.status_time;
        row.s_max = record.series.empty() ? 0.0 : record.series.back().s_monitor;
        row.classification = classify_record(record);
        if (record.status == RunStatus::completed) {
            try {
                const SlopeFit fit =
                    fit_decay_slope(record.norm_series(infinity_v<double>), last_decade(record));
                row.linf_slope = fit.slope;
                row.slope_std_error = fit.std_error;
            } catch (const std::invalid_argument&) {
            }
        }
    } catch (const std::exception& e) {
        row.status = "error";
        row.error = e.what();
    }
    return row;
}

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

SweepManifest sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                    const std::filesystem::path& out_dir, int workers)
{
    SweepManifest manifest;
    manifest.axis = axis;
    manifest.rows.resize(values.size());
    const std::filesystem::path runs = out_dir / "runs";
    std::filesystem::create_directories(runs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            char id[16];
            std::snprintf(id, sizeof id, "%04zu", i);
            manifest.rows[i] = sweep_one(base, axis, values[i], id, runs / id);
        }
    };
    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(values.size())));
    std::vector<std::thread> threads;
    for (int w = 1; w < pool; ++w) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    write_text(runs / "index.csv", sweep_index_csv(manifest));
    return manifest;
}

std::string sweep_index_csv(const SweepManifest& manifest)
{
    std::string out =
        "id,axis,value,status,t_final,critical_exponent,gate,s_max,linf_slope,"
        "slope_stderr,classification,exploratory,error\n";
    for (const auto& row : manifest.rows) {
        out += row.id + ',' + to_string(manifest.axis) + ',' + format_double(row.value) + ','
               + row.status + ',';
        const bool ran = row.status != "error";
        out += (ran ? format_double(row.t_final) : "") + ',';
        out += (ran ? format_double(row.critical) : "") + ',';
        out += (ran ? std::string(row.gate ? "true" : "false") : "") + ',';
        out += (ran ? format_double(row.s_max) : "") + ',';
        out += (row.linf_slope ? format_double(*row.linf_slope) : "") + ',';
        out += (row.slope_std_error ? format_double(*row.slope_std_error) : "") + ',';
        out += (ran ? to_string(row.classification) : "") + ',';
        out += std::string(row.classification == Classification::blowup ? "true" : "false") + ',';
        out += csv_field(row.error) + '\n';
    }
    return out;
}

}  // namespace plap
