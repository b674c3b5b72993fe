#include "plap/config.hpp"

#include "plap/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace plap {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "inf" || t == "infinity") {
        return infinity_v<double>;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || std::isnan(v)) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& text)
{
    const long long v = parse_integer(key, text);
    if (v < -2147483647LL || v > 2147483647LL) {
        throw ConfigError(key + ": integer out of range");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "true" || t == "on" || t == "1") {
        return true;
    }
    if (t == "false" || t == "off" || t == "0") {
        return false;
    }
    throw ConfigError(key + ": expected true/false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!trim(item).empty()) {
            out.push_back(parse_real(key, item));
        }
    }
    return out;
}

std::string format_list(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += format_double(values[i]);
    }
    return out;
}

std::string format_optional(const std::optional<double>& v, const char* unset)
{
    return v ? format_double(*v) : unset;
}

std::optional<double> parse_optional(const std::string& key, const std::string& text,
                                     const char* unset)
{
    if (trim(text) == unset) {
        return std::nullopt;
    }
    return parse_real(key, text);
}

template <class Parse>
auto translate(const std::string& key, Parse&& parse)
{
    try {
        return parse();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::string to_string(DiffusionMode mode)
{
    return mode == DiffusionMode::plap ? "plap" : "pme";
}

std::string to_string(ThresholdMode mode)
{
    return mode == ThresholdMode::corrected ? "corrected" : "as_written";
}

std::string to_string(Eps1Exponent e)
{
    return e == Eps1Exponent::as_written ? "as_written" : "energy_balance";
}

struct Entry {
    const char* key;
    const char* fallback;  // default shown in the reference
    std::function<void(CliConfig&, const std::string&)> set;
    std::function<std::string(const CliConfig&)> get;
    bool run_key;
};

const std::vector<Entry>& entries()
{
    static const std::vector<Entry> table = {
        {"manifold.kind", "euclidean",
         [](CliConfig& c, const std::string& v) {
             c.run.manifold.kind = translate("manifold.kind", [&] { return parse_manifold_kind(trim(v)); });
         },
         [](const CliConfig& c) { return to_string(c.run.manifold.kind); }, true},
        {"manifold.dim", "3",
         [](CliConfig& c, const std::string& v) { c.run.manifold.dim = parse_int("manifold.dim", v); },
         [](const CliConfig& c) { return std::to_string(c.run.manifold.dim); }, true},
        {"problem.mode", "plap",
         [](CliConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "plap") {
                 c.run.params.mode = DiffusionMode::plap;
             } else if (t == "pme") {
                 c.run.params.mode = DiffusionMode::pme;
             } else {
                 throw ConfigError("problem.mode: expected plap or pme, got '" + v + "'");
             }
         },
         [](const CliConfig& c) { return to_string(c.run.params.mode); }, true},
        {"problem.p", "2",
         [](CliConfig& c, const std::string& v) { c.run.params.p = parse_real("problem.p", v); },
         [](const CliConfig& c) { return format_double(c.run.params.p); }, true},
        {"problem.m", "2",
         [](CliConfig& c, const std::string& v) { c.run.params.m = parse_real("problem.m", v); },
         [](const CliConfig& c) { return format_double(c.run.params.m); }, true},
        {"problem.sigma", "3",
         [](CliConfig& c, const std::string& v) { c.run.params.sigma = parse_real("problem.sigma", v); },
         [](const CliConfig& c) { return format_double(c.run.params.sigma); }, true},
        {"problem.C_sp", "1",
         [](CliConfig& c, const std::string& v) { c.run.params.C_sp = parse_real("problem.C_sp", v); },
         [](const CliConfig& c) { return format_double(c.run.params.C_sp); }, true},
        {"problem.C_p", "none",
         [](CliConfig& c, const std::string& v) { c.run.params.C_p = parse_optional("problem.C_p", v, "none"); },
         [](const CliConfig& c) { return format_optional(c.run.params.C_p, "none"); }, true},
        {"grid.R", "auto (20 x datum.width)",
         [](CliConfig& c, const std::string& v) { c.grid_R = parse_optional("grid.R", v, "auto"); },
         [](const CliConfig& c) { return c.grid_R ? format_double(*c.grid_R) : format_double(c.run.grid.R); },
         true},
        {"grid.nr", "1000",
         [](CliConfig& c, const std::string& v) { c.run.grid.nr = parse_int("grid.nr", v); },
         [](const CliConfig& c) { return std::to_string(c.run.grid.nr); }, true},
        {"datum.kind", "gaussian",
         [](CliConfig& c, const std::string& v) {
             c.run.datum.kind = translate("datum.kind", [&] { return parse_datum_kind(trim(v)); });
         },
         [](const CliConfig& c) { return to_string(c.run.datum.kind); }, true},
        {"datum.amplitude", "1",
         [](CliConfig& c, const std::string& v) { c.run.datum.amplitude = parse_real("datum.amplitude", v); },
         [](const CliConfig& c) { return format_double(c.run.datum.amplitude); }, true},
        {"datum.width", "1",
         [](CliConfig& c, const std::string& v) { c.run.datum.width = parse_real("datum.width", v); },
         [](const CliConfig& c) { return format_double(c.run.datum.width); }, true},
        {"run.t_end", "10",
         [](CliConfig& c, const std::string& v) { c.run.t_end = parse_real("run.t_end", v); },
         [](const CliConfig& c) { return format_double(c.run.t_end); }, true},
        {"run.dt0", "1e-4",
         [](CliConfig& c, const std::string& v) { c.run.dt0 = parse_real("run.dt0", v); },
         [](const CliConfig& c) { return format_double(c.run.dt0); }, true},
        {"run.dt_max_rel", "0.01",
         [](CliConfig& c, const std::string& v) { c.run.dt_max_rel = parse_real("run.dt_max_rel", v); },
         [](const CliConfig& c) { return format_double(c.run.dt_max_rel); }, true},
        {"run.truncation_k", "1e12",
         [](CliConfig& c, const std::string& v) { c.run.truncation_k = parse_real("run.truncation_k", v); },
         [](const CliConfig& c) { return format_double(c.run.truncation_k); }, true},
        {"run.reaction", "true",
         [](CliConfig& c, const std::string& v) { c.run.reaction_on = parse_bool("run.reaction", v); },
         [](const CliConfig& c) { return std::string(c.run.reaction_on ? "true" : "false"); }, true},
        {"run.diffusion", "true",
         [](CliConfig& c, const std::string& v) { c.run.diffusion_on = parse_bool("run.diffusion", v); },
         [](const CliConfig& c) { return std::string(c.run.diffusion_on ? "true" : "false"); }, true},
        {"run.blowup_threshold", "1e8",
         [](CliConfig& c, const std::string& v) { c.run.blowup_threshold = parse_real("run.blowup_threshold", v); },
         [](const CliConfig& c) { return format_double(c.run.blowup_threshold); }, true},
        {"run.record_qs", "2,4",
         [](CliConfig& c, const std::string& v) { c.run.record_qs = parse_list("run.record_qs", v); },
         [](const CliConfig& c) { return format_list(c.run.record_qs); }, true},
        {"run.outputs_per_decade", "20",
         [](CliConfig& c, const std::string& v) { c.run.outputs_per_decade = parse_int("run.outputs_per_decade", v); },
         [](const CliConfig& c) { return std::to_string(c.run.outputs_per_decade); }, true},
        {"run.inner_solver", "newton",
         [](CliConfig& c, const std::string& v) {
             c.run.inner_solver = translate("run.inner_solver", [&] { return parse_inner_solver(trim(v)); });
         },
         [](const CliConfig& c) { return to_string(c.run.inner_solver); }, true},
        {"run.max_inner_iterations", "50",
         [](CliConfig& c, const std::string& v) { c.run.max_inner_iterations = parse_int("run.max_inner_iterations", v); },
         [](const CliConfig& c) { return std::to_string(c.run.max_inner_iterations); }, true},
        {"run.inner_tolerance", "1e-10",
         [](CliConfig& c, const std::string& v) { c.run.inner_tolerance = parse_real("run.inner_tolerance", v); },
         [](const CliConfig& c) { return format_double(c.run.inner_tolerance); }, true},
        {"query.q", "4",
         [](CliConfig& c, const std::string& v) { c.query.q = parse_real("query.q", v); },
         [](const CliConfig& c) { return format_double(c.query.q); }, false},
        {"query.q0", "auto (critical exponent)",
         [](CliConfig& c, const std::string& v) { c.query.q0 = parse_optional("query.q0", v, "auto"); },
         [](const CliConfig& c) { return format_optional(c.query.q0, "auto"); }, false},
        {"query.s", "none",
         [](CliConfig& c, const std::string& v) { c.query.s = parse_optional("query.s", v, "none"); },
         [](const CliConfig& c) { return format_optional(c.query.s, "none"); }, false},
        {"query.q_max", "20",
         [](CliConfig& c, const std::string& v) { c.query.q_max = parse_real("query.q_max", v); },
         [](const CliConfig& c) { return format_double(c.query.q_max); }, false},
        {"query.samples", "1000",
         [](CliConfig& c, const std::string& v) { c.query.samples = parse_int("query.samples", v); },
         [](const CliConfig& c) { return std::to_string(c.query.samples); }, false},
        {"query.trials", "400",
         [](CliConfig& c, const std::string& v) { c.query.trials = parse_int("query.trials", v); },
         [](const CliConfig& c) { return std::to_string(c.query.trials); }, false},
        {"query.seed", "1",
         [](CliConfig& c, const std::string& v) {
             const long long s = parse_integer("query.seed", v);
             if (s < 0) {
                 throw ConfigError("query.seed must be nonnegative");
             }
             c.query.seed = static_cast<std::uint64_t>(s);
         },
         [](const CliConfig& c) { return std::to_string(c.query.seed); }, false},
        {"query.threshold_mode", "corrected",
         [](CliConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "corrected") {
                 c.query.threshold_mode = ThresholdMode::corrected;
             } else if (t == "as_written") {
                 c.query.threshold_mode = ThresholdMode::as_written;
             } else {
                 throw ConfigError("query.threshold_mode: expected corrected or as_written");
             }
         },
         [](const CliConfig& c) { return to_string(c.query.threshold_mode); }, false},
        {"query.eps1_exponent", "as_written",
         [](CliConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "as_written") {
                 c.query.eps1_exponent = Eps1Exponent::as_written;
             } else if (t == "energy_balance") {
                 c.query.eps1_exponent = Eps1Exponent::energy_balance;
             } else {
                 throw ConfigError("query.eps1_exponent: expected as_written or energy_balance");
             }
         },
         [](const CliConfig& c) { return to_string(c.query.eps1_exponent); }, false},
        {"verify.family", "auto",
         [](CliConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t != "auto") {
                 translate("verify.family", [&] { return parse_decay_family(t); });
             }
             c.verify_family = t;
         },
         [](const CliConfig& c) { return c.verify_family; }, false},
        {"sweep.axis", "amplitude",
         [](CliConfig& c, const std::string& v) {
             c.sweep.axis = translate("sweep.axis", [&] { return parse_sweep_axis(trim(v)); });
         },
         [](const CliConfig& c) { return to_string(c.sweep.axis); }, false},
        {"sweep.values", "(empty)",
         [](CliConfig& c, const std::string& v) { c.sweep.values = parse_list("sweep.values", v); },
         [](const CliConfig& c) { return format_list(c.sweep.values); }, false},
        {"sweep.workers", "1",
         [](CliConfig& c, const std::string& v) { c.sweep.workers = parse_int("sweep.workers", v); },
         [](const CliConfig& c) { return std::to_string(c.sweep.workers); }, false},
    };
    return table;
}

}  // namespace

void apply_setting(CliConfig& config, const std::string& key, const std::string& value)
{
    const std::string k = trim(key);
    for (const auto& entry : entries()) {
        if (k == entry.key) {
            entry.set(config, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + k + "'");
}

void apply_config_text(CliConfig& config, const std::string& text)
{
    std::stringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    }
}

void apply_config_file(CliConfig& config, const std::filesystem::path& path)
{
    std::ifstream file(path);
    if (!file) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    apply_config_text(config, buffer.str());
}

void finalize(CliConfig& config)
{
    RunConfig& run = config.run;
    run.params.N = run.manifold.dim;
    if (!(run.datum.width > 0)) {
        throw ConfigError("datum.width must be positive");
    }
    run.grid.R = config.grid_R.value_or(20.0 * run.datum.width);
    try {
        run.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const QueryConfig& q = config.query;
    if (!(q.q >= 1) || (q.q0 && !(*q.q0 >= 1)) || (q.s && !(*q.s >= 1)) || !(q.q_max >= 1)) {
        throw ConfigError("query exponents must be >= 1");
    }
    if (q.samples < 1 || q.trials < 1) {
        throw ConfigError("query.samples and query.trials must be positive");
    }
    if (config.sweep.workers < 1) {
        throw ConfigError("sweep.workers must be positive");
    }
}

std::vector<std::pair<std::string, std::string>> run_config_echo(const RunConfig& run)
{
    CliConfig wrapper;
    wrapper.run = run;
    wrapper.grid_R = run.grid.R;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& entry : entries()) {
        if (entry.run_key) {
            out.emplace_back(entry.key, entry.get(wrapper));
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> config_echo(const CliConfig& config)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& entry : entries()) {
        out.emplace_back(entry.key, entry.get(config));
    }
    return out;
}

std::string config_reference()
{
    std::string out = "Config keys (section.key = value, '#' comments):\n";
    for (const auto& entry : entries()) {
        out += "  ";
        out += entry.key;
        out += std::string(26 - std::min<std::size_t>(25, std::string(entry.key).size()), ' ');
        out += "default ";
        out += entry.fallback;
        out += '\n';
    }
    return out;
}

}  // namespace plap
