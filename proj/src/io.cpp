#include "plap/io.hpp"

#include "plap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace plap {

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string norm_label(double q)
{
    if (std::isinf(q)) {
        return "linf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "l%g", q);
    return buf;
}

}  // namespace

std::string series_csv(const RunRecord& record)
{
    std::string out = "t,dt";
    for (double q : record.norm_qs) {
        out += ',';
        out += norm_label(q);
    }
    out += ",s_monitor\n";
    for (const auto& row : record.series) {
        out += format_double(row.t);
        out += ',';
        out += format_double(row.dt);
        for (double v : row.norms) {
            out += ',';
            out += format_double(v);
        }
        out += ',';
        out += format_double(row.s_monitor);
        out += '\n';
    }
    return out;
}

nlohmann::ordered_json run_manifest(const RunRecord& record)
{
    nlohmann::ordered_json echo;
    for (const auto& [key, value] : run_config_echo(record.config)) {
        echo[key] = value;
    }
    nlohmann::ordered_json out;
    out["status"] = to_string(record.status);
    switch (record.status) {
    case RunStatus::completed:
        out["t_end"] = record.status_time;
        break;
    case RunStatus::blowup:
        out["t_star"] = record.status_time;
        out["blowup_trigger"] = record.blowup_trigger;
        break;
    case RunStatus::dt_collapse:
        out["t_collapse"] = record.status_time;
        break;
    }
    out["exploratory"] = record.status == RunStatus::blowup;
    out["config"] = std::move(echo);
    out["clipped_mass"] = record.clipped_mass;
    out["initial_l1"] = record.initial_l1;
    out["accepted_steps"] = record.accepted_steps;
    out["rejected_steps"] = record.rejected_steps;
    out["wallclock_s"] = record.wallclock_s;
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    file << text;
    if (!file) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

void write_run(const RunRecord& record, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_text(dir / "series.csv", series_csv(record));
    write_text(dir / "manifest.json", run_manifest(record).dump(2) + "\n");
}

}  // namespace plap
