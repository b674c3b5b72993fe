// plaplab: command-line driver for the exponent tables, threshold scans,
// radial simulations, decay verification, sweeps and the identity suite.
//
// Exit codes: 0 success, 1 configuration error, 2 verification mismatch or
// identity failure, 3 blow-up, 4 time-step collapse.

#include "plap/config.hpp"
#include "plap/dynamics.hpp"
#include "plap/exponents.hpp"
#include "plap/harness.hpp"
#include "plap/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace plap;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_mismatch = 2;
constexpr int exit_blowup = 3;
constexpr int exit_collapse = 4;

// Flag -> config key. Every subcommand accepts all of them.
const std::vector<std::pair<std::string, std::string>> overrides = {
    {"--kind", "manifold.kind"},       {"--N", "manifold.dim"},
    {"--mode", "problem.mode"},        {"--p", "problem.p"},
    {"--m", "problem.m"},              {"--sigma", "problem.sigma"},
    {"--C-sp", "problem.C_sp"},        {"--C-p", "problem.C_p"},
    {"--R", "grid.R"},                 {"--nr", "grid.nr"},
    {"--datum", "datum.kind"},         {"--amplitude", "datum.amplitude"},
    {"--width", "datum.width"},        {"--t-end", "run.t_end"},
    {"--dt0", "run.dt0"},              {"--reaction", "run.reaction"},
    {"--diffusion", "run.diffusion"},  {"--record-qs", "run.record_qs"},
    {"--solver", "run.inner_solver"},  {"--q", "query.q"},
    {"--q0", "query.q0"},              {"--s", "query.s"},
    {"--q-max", "query.q_max"},        {"--samples", "query.samples"},
    {"--trials", "query.trials"},      {"--seed", "query.seed"},
    {"--family", "verify.family"},     {"--axis", "sweep.axis"},
    {"--values", "sweep.values"},      {"--workers", "sweep.workers"},
};

struct Common {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> sets;
    std::vector<std::string> values = std::vector<std::string>(overrides.size());
};

void add_common(CLI::App* sub, Common& common)
{
    sub->add_option("--config", common.config_path, "config file (section.key = value)");
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--set", common.sets, "override any key: --set section.key=value");
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        sub->add_option(overrides[i].first, common.values[i], "sets " + overrides[i].second);
    }
}

CliConfig load(const Common& common)
{
    CliConfig config;
    if (!common.config_path.empty()) {
        apply_config_file(config, common.config_path);
    }
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        if (!common.values[i].empty()) {
            apply_setting(config, overrides[i].second, common.values[i]);
        }
    }
    for (const auto& item : common.sets) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + item + "'");
        }
        apply_setting(config, item.substr(0, eq), item.substr(eq + 1));
    }
    finalize(config);
    return config;
}

void put(const std::string& key, double value)
{
    std::cout << key << '=' << format_double(value) << '\n';
}

int cmd_exponents(const CliConfig& config)
{
    const ProblemParams& params = config.run.params;
    const bool plap_mode = params.mode == DiffusionMode::plap;
    const auto report = exponent_report(params, {config.query.q}, config.query.s);
    std::cout << "mode=" << (plap_mode ? "plap" : "pme") << '\n';
    put(plap_mode ? "sigma0" : "sigma1", report.critical);
    std::cout << "fujita_gate=" << (report.gate ? "true" : "false") << '\n';
    put("alpha", report.alpha);
    std::cout << "regime="
              << (report.regime == Regime::sobolev_only ? "sobolev_only" : "sobolev_poincare")
              << '\n';
    for (const auto& [q, gamma] : report.gamma_q) {
        put("gamma_q" + format_double(q), gamma);
        put("delta_q" + format_double(q), report.delta_q.at(q));
    }
    if (report.beta_qs) {
        put("beta_qs", *report.beta_qs);
    }
    for (const auto& [name, value] : report.thresholds) {
        put(name, value);
    }
    return exit_ok;
}

std::string try_value(const std::function<double()>& f)
{
    try {
        return format_double(f());
    } catch (const std::exception&) {
        return "";
    }
}

int cmd_thresholds(const CliConfig& config, const Common& common)
{
    const ProblemParams& params = config.run.params;
    if (params.mode != DiffusionMode::plap) {
        throw ConfigError("thresholds are defined for the p-Laplacian mode");
    }
    if (!fujita_gate(params)) {
        throw ConfigError("thresholds require sigma above the Fujita-type exponent");
    }
    const double s0 = sigma_zero(params);
    const double q0 = config.query.q0.value_or(s0);
    const ThresholdMode mode = config.query.threshold_mode;
    std::vector<double> qs{q0};
    for (double q = std::floor(q0) + 1; q <= config.query.q_max; q += 1) {
        qs.push_back(q);
    }
    std::string csv = "q,eps_tilde0,eps_bar0,eps_hat0,eps_tilde1\n";
    for (double q : qs) {
        csv += format_double(q) + ',';
        csv += try_value([&] { return eps_tilde0(q, q0, params, mode); }) + ',';
        csv += try_value([&] { return eps_bar0(q, params, mode); }) + ',';
        csv += try_value([&] { return eps_hat0(q, params, mode); }) + ',';
        csv += try_value([&] {
            return threshold_eps1(q, q0, params, config.query.eps1_exponent);
        }) + '\n';
    }
    if (common.out_dir.empty()) {
        std::cout << csv;
    } else {
        std::filesystem::create_directories(common.out_dir);
        write_text(std::filesystem::path(common.out_dir) / "thresholds.csv", csv);
    }
    return exit_ok;
}

int status_code(const RunRecord& record)
{
    switch (record.status) {
    case RunStatus::completed:
        return exit_ok;
    case RunStatus::blowup:
        return exit_blowup;
    case RunStatus::dt_collapse:
        return exit_collapse;
    }
    return exit_ok;
}

void summarize(const RunRecord& record)
{
    std::cout << "status=" << to_string(record.status) << '\n';
    put(record.status == RunStatus::blowup ? "t_star" : "t_final", record.status_time);
    if (record.status == RunStatus::blowup) {
        std::cout << "exploratory=true\nblowup_trigger=" << record.blowup_trigger << '\n';
    }
    put("s_max", record.series.empty() ? 0.0 : record.series.back().s_monitor);
    put("clipped_mass", record.clipped_mass);
    std::cout << "steps=" << record.accepted_steps << " rejected=" << record.rejected_steps
              << '\n';
}

std::filesystem::path out_or_default(const Common& common, const char* fallback)
{
    return common.out_dir.empty() ? std::filesystem::path(fallback)
                                  : std::filesystem::path(common.out_dir);
}

int cmd_simulate(const CliConfig& config, const Common& common)
{
    const RunRecord record = run(config.run);
    const auto dir = out_or_default(common, "plaplab_out");
    write_run(record, dir);
    summarize(record);
    std::cout << "output=" << dir.string() << '\n';
    return status_code(record);
}

int cmd_verify(const CliConfig& config, const Common& common)
{
    const RunRecord record = run(config.run);
    const auto dir = out_or_default(common, "plaplab_out");
    write_run(record, dir);
    summarize(record);
    if (record.status != RunStatus::completed) {
        return status_code(record);
    }
    const DecayFamily family = config.verify_family == "auto"
                                   ? default_decay_family(config.run.params)
                                   : parse_decay_family(config.verify_family);
    std::vector<DecayRequest> requests;
    for (double q : record.norm_qs) {
        requests.push_back({family, q, config.query.q0});
    }
    std::vector<DecayReport> reports;
    try {
        reports = smoothing_report(record, requests);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("verify: ") + e.what());
    }
    bool all_match = true;
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    std::cout << "family,q,fitted_slope,stderr,predicted,t_lo,t_hi,verdict\n";
    for (const auto& r : reports) {
        std::cout << to_string(r.family) << ',' << format_double(r.q) << ','
                  << format_double(r.fitted_slope) << ',' << format_double(r.std_error) << ','
                  << format_double(r.predicted) << ',' << format_double(r.window.lo) << ','
                  << format_double(r.window.hi) << ',' << to_string(r.verdict) << '\n';
        all_match = all_match && r.verdict == Verdict::match;
        out.push_back({{"family", to_string(r.family)},
                       {"q", format_double(r.q)},
                       {"fitted_slope", r.fitted_slope},
                       {"stderr", r.std_error},
                       {"intercept", r.intercept},
                       {"predicted", r.predicted},
                       {"window", {r.window.lo, r.window.hi}},
                       {"verdict", to_string(r.verdict)},
                       {"note", r.note}});
    }
    write_text(dir / "verify.json", out.dump(2) + "\n");
    return all_match ? exit_ok : exit_mismatch;
}

int cmd_sweep(const CliConfig& config, const Common& common)
{
    const auto dir = out_or_default(common, "plaplab_sweep");
    const SweepManifest manifest =
        sweep(config.run, config.sweep.axis, config.sweep.values, dir, config.sweep.workers);
    std::cout << "runs=" << manifest.rows.size() << '\n'
              << "index=" << (dir / "runs" / "index.csv").string() << '\n';
    for (const auto& row : manifest.rows) {
        std::cout << row.id << ' ' << to_string(manifest.axis) << '=' << format_double(row.value)
                  << ' ' << row.status << ' ' << to_string(row.classification) << '\n';
    }
    return exit_ok;
}

int cmd_identities(const CliConfig& config)
{
    const IdentityReport report = identity_suite(config.query.samples, config.query.seed);
    for (const auto& [name, residual] : report.residual_by_identity) {
        put(name, residual);
    }
    std::cout << "draws=" << report.draws << '\n';
    put("max_residual", report.max_residual);
    std::cout << (report.pass ? "PASS" : "FAIL") << '\n';
    return report.pass ? exit_ok : exit_mismatch;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"plaplab: p-Laplacian / porous-medium reaction-diffusion laboratory"};
    app.footer("\n" + config_reference()
               + "\nExit codes: 0 ok, 1 config error, 2 verify mismatch or identity FAIL,"
                 " 3 blowup, 4 dt collapse.");
    app.require_subcommand(1);

    Common common;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"exponents", "print the closed-form exponents as key=value lines"},
        {"thresholds", "smallness thresholds as CSV over q"},
        {"simulate", "run the radial solver and write series.csv and manifest.json"},
        {"verify", "run and compare fitted decay slopes with the predicted exponents"},
        {"sweep", "run a parameter sweep on a worker pool"},
        {"identities", "random-draw check of the exponent identities"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << e.what() << "\n\n" << app.help();
        return exit_config;
    }

    try {
        const CliConfig config = load(common);
        if (subs[0]->parsed()) {
            return cmd_exponents(config);
        }
        if (subs[1]->parsed()) {
            return cmd_thresholds(config, common);
        }
        if (subs[2]->parsed()) {
            return cmd_simulate(config, common);
        }
        if (subs[3]->parsed()) {
            return cmd_verify(config, common);
        }
        if (subs[4]->parsed()) {
            return cmd_sweep(config, common);
        }
        return cmd_identities(config);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
}
