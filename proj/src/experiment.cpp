#include "cem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>

#include "cem/output.hpp"
#include "cem/stability.hpp"
#include "cem/steady_state.hpp"
#include "cem/timedomain.hpp"

#ifndef CEM_VERSION
#define CEM_VERSION "dev"
#endif

namespace cem {
namespace {

using nlohmann::json;

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string lambda_units_name(LambdaUnits u) {
    switch (u) {
        case LambdaUnits::FromFile: return "from-file";
        case LambdaUnits::Angular: return "angular";
        case LambdaUnits::Hz: return "hz";
    }
    return "from-file";
}

LambdaUnits parse_lambda_units(const std::string& s) {
    if (s == "from-file") return LambdaUnits::FromFile;
    if (s == "angular") return LambdaUnits::Angular;
    if (s == "hz") return LambdaUnits::Hz;
    throw ConfigError("unknown lambda units '" + s + "' (angular|hz)");
}

std::string join(const std::filesystem::path& dir, const std::string& file) { return (dir / file).string(); }

bool is_monotone(const std::vector<double>& v) {
    return std::is_sorted(v.begin(), v.end()) || std::is_sorted(v.rbegin(), v.rend());
}

json metadata(const ExperimentSpec& spec) {
    return {{"code_version", CEM_VERSION},
            {"generated_at", timestamp()},
            {"spec", to_json(spec)},
            {"params", to_json(spec.params)},
            {"normalization", to_string(spec.normalization)}};
}

struct Writer {
    const ExperimentSpec& spec;
    RunResult& result;
    std::filesystem::path dir;

    void write(const std::string& file, const std::string& content) {
        const auto path = join(dir, file);
        write_atomic(path, content);
        result.files.push_back(path);
    }
    [[nodiscard]] bool csv() const { return spec.format != OutputFormat::Json; }
    [[nodiscard]] bool json_out() const { return spec.format != OutputFormat::Csv; }
};

std::string power_tag(std::size_t i) { return "p" + std::to_string(i); }
std::string detuning_tag(std::size_t i) { return "d" + std::to_string(i); }

std::string power_label(double watts) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g pW", watts * 1e12);
    return buf;
}

void run_spectra(const ExperimentSpec& spec, Writer& w, std::size_t& flagged, std::size_t& total) {
    json doc = metadata(spec);
    doc["spectra"] = json::array();
    for (std::size_t di = 0; di < spec.detunings.size(); ++di) {
        std::vector<PlotSeries> series;
        for (std::size_t pi = 0; pi < spec.pump_powers.size(); ++pi) {
            const double power = spec.pump_powers[pi];
            const auto drive = make_drive(spec.params, {.pump_power = power,
                                                        .signal_power = power * spec.signal_ratio,
                                                        .delta_p = spec.detunings[di]});
            const auto ss = select_steady_state(spec.params, drive, Selection::LowestStable);
            const double half = spec.half_span.value_or(default_half_span(spec.params, ss.n_p));
            const auto spectrum =
                sweep_spectrum(spec.params, drive, linear_grid(0.0, half, spec.points), spec.normalization);
            flagged += spectrum.flagged();
            total += spectrum.points.size();
            const std::string stem = spec.name + "_" + detuning_tag(di) + "_" + power_tag(pi);
            if (w.csv()) w.write(stem + ".csv", spectrum_csv(spectrum));
            json entry = spectrum_json(spectrum);
            entry["drive"] = to_json(drive);
            entry["file_stem"] = stem;
            doc["spectra"].push_back(std::move(entry));

            PlotSeries s{power_label(power), {}, {}};
            for (const auto& p : spectrum.points) {
                s.x.push_back(p.delta_s);
                s.y.push_back(p.transmission);
            }
            series.push_back(std::move(s));
        }
        if (spec.svg) {
            w.write(spec.name + "_" + detuning_tag(di) + ".svg",
                    svg_plot(series, spec.name + ": Delta_p = " + format_number(spec.detunings[di]) + " rad/s",
                             "Delta_s (rad/s)", "|t_p|^2"));
        }
    }
    if (w.json_out()) w.write(spec.name + ".json", doc.dump(2));
}

void run_gain(const ExperimentSpec& spec, Writer& w, std::size_t& flagged, std::size_t& total) {
    const auto curve = gain_curve(spec.params, spec.pump_powers, spec.normalization);
    for (const auto& g : curve) flagged += g.pole ? 1 : 0;
    total += curve.size();
    if (w.csv()) w.write(spec.name + ".csv", gain_csv(curve));
    if (w.json_out()) {
        json doc = metadata(spec);
        doc["delta_p"] = -spec.params.omega_n;
        doc["delta_s"] = 0.0;
        json pts = json::array();
        for (const auto& g : curve) {
            pts.push_back({{"pump_power_w", g.power},
                           {"gain", std::isfinite(g.gain) ? json(g.gain) : json(nullptr)},
                           {"n_p", g.n_p},
                           {"cooperativity", g.cooperativity},
                           {"stable", g.stable},
                           {"pole", g.pole}});
        }
        doc["curve"] = pts;
        w.write(spec.name + ".json", doc.dump(2));
    }
    if (spec.svg) {
        PlotSeries s{"gain", {}, {}};
        for (const auto& g : curve) {
            s.x.push_back(g.power * 1e12);
            s.y.push_back(g.gain);
        }
        w.write(spec.name + ".svg", svg_plot({s}, spec.name, "pump power (pW)", "|t_p|^2 at Delta_s = 0"));
    }
}

void run_threshold(const ExperimentSpec& spec, Writer& w) {
    ThresholdOptions opts;
    if (!spec.pump_powers.empty()) {
        opts.power_lo = spec.pump_powers.front();
        opts.power_hi = spec.pump_powers.back();
    }
    std::string csv = "delta_p_rad_s,threshold_w,n_p,found\n";
    json rows = json::array();
    for (double dp : spec.detunings) {
        const auto t = instability_threshold(spec.params, dp, opts);
        csv += format_number(dp) + ',' + (t ? format_number(t->power) : "nan") + ',' +
               (t ? format_number(t->n_p) : "nan") + ',' + (t ? "1" : "0") + '\n';
        json row = {{"delta_p", dp}, {"found", t.has_value()}};
        if (t) {
            row["threshold_w"] = t->power;
            row["n_p"] = t->n_p;
            row["cooperativity"] = cooperativity(spec.params, t->n_p);
        }
        rows.push_back(row);
    }
    w.result.summary["thresholds"] = rows;
    if (w.csv()) w.write(spec.name + ".csv", csv);
    if (w.json_out()) {
        json doc = metadata(spec);
        doc["bracket_w"] = {opts.power_lo, opts.power_hi};
        doc["thresholds"] = rows;
        w.write(spec.name + ".json", doc.dump(2));
    }
}

void run_oracle(const ExperimentSpec& spec, Writer& w, std::size_t& flagged, std::size_t& total) {
    json doc = metadata(spec);
    doc["runs"] = json::array();
    double worst = 0.0;
    for (std::size_t di = 0; di < spec.detunings.size(); ++di) {
        for (std::size_t pi = 0; pi < spec.pump_powers.size(); ++pi) {
            const double power = spec.pump_powers[pi];
            const double dp = spec.detunings[di];
            const auto drive = make_drive(spec.params, {.pump_power = power,
                                                        .signal_power = power * spec.signal_ratio,
                                                        .delta_p = dp,
                                                        .delta = dp});
            const auto ss = select_steady_state(spec.params, drive, Selection::LowestStable);
            const double half = spec.half_span.value_or(default_half_span(spec.params, ss.n_p));
            auto deltas = linear_grid(dp, half, spec.points);
            const auto report = oracle_compare(spec.params, drive, deltas);
            flagged += report.not_converged;
            total += report.entries.size();
            worst = std::max(worst, report.max_deviation);

            std::string csv = "delta_rad_s,delta_s_rad_s,re_direct,im_direct,re_estimated,im_estimated,deviation,converged\n";
            json entries = json::array();
            for (const auto& e : report.entries) {
                csv += format_number(e.delta) + ',' + format_number(e.delta - dp) + ',' +
                       format_number(e.direct.real()) + ',' + format_number(e.direct.imag()) + ',' +
                       format_number(e.estimated.real()) + ',' + format_number(e.estimated.imag()) + ',' +
                       format_number(e.deviation) + ',' + (e.converged ? "1" : "0") + '\n';
                entries.push_back({{"delta", e.delta},
                                   {"deviation", std::isfinite(e.deviation) ? json(e.deviation) : json(nullptr)},
                                   {"converged", e.converged},
                                   {"note", e.note}});
            }
            const std::string stem = spec.name + "_" + detuning_tag(di) + "_" + power_tag(pi);
            if (w.csv()) w.write(stem + ".csv", csv);
            doc["runs"].push_back({{"file_stem", stem},
                                   {"drive", to_json(drive)},
                                   {"max_deviation", report.max_deviation},
                                   {"median_deviation", report.median_deviation},
                                   {"not_converged", report.not_converged},
                                   {"entries", entries}});
        }
    }
    w.result.summary["max_deviation"] = worst;
    if (w.json_out()) w.write(spec.name + ".json", doc.dump(2));
}

void run_steady_map(const ExperimentSpec& spec, Writer& w) {
    std::string csv = "delta_p_rad_s,pump_power_w,branch,n_p,q_s,stable_flag,degenerate\n";
    json rows = json::array();
    for (double dp : spec.detunings) {
        for (double power : spec.pump_powers) {
            const auto drive = make_drive(spec.params, {.pump_power = power, .delta_p = dp});
            for (const auto& ss : steady_state(spec.params, drive, Selection::All)) {
                csv += format_number(dp) + ',' + format_number(power) + ',' + to_string(ss.branch) + ',' +
                       format_number(ss.n_p) + ',' + format_number(ss.q_s) + ',' +
                       (ss.dynamically_stable ? "1" : "0") + ',' + (ss.degenerate ? "1" : "0") + '\n';
                json row = to_json(ss);
                row["pump_power_w"] = power;
                rows.push_back(row);
            }
        }
    }
    if (w.csv()) w.write(spec.name + ".csv", csv);
    if (w.json_out()) {
        json doc = metadata(spec);
        doc["states"] = rows;
        w.write(spec.name + ".json", doc.dump(2));
    }
}

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::GainCurve: return "gain_curve";
        case ExperimentKind::Threshold: return "threshold";
        case ExperimentKind::OracleCompare: return "oracle_compare";
        case ExperimentKind::SteadyMap: return "steady_map";
    }
    return "spectrum";
}

ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::Spectrum, ExperimentKind::GainCurve, ExperimentKind::Threshold,
                   ExperimentKind::OracleCompare, ExperimentKind::SteadyMap}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
        case OutputFormat::Both: return "both";
    }
    return "both";
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    if (s == "both") return OutputFormat::Both;
    throw ConfigError("unknown format '" + s + "' (csv|json|both)");
}

nlohmann::json to_json(const ExperimentSpec& spec) {
    json j = {{"kind", to_string(spec.kind)},
              {"name", spec.name},
              {"params_ref", spec.params_ref},
              {"params", to_json(spec.params)},
              {"lambda_units", lambda_units_name(spec.lambda_units)},
              {"pump_powers_w", spec.pump_powers},
              {"detunings_rad_s", spec.detunings},
              {"signal_ratio", spec.signal_ratio},
              {"points", spec.points},
              {"normalization", to_string(spec.normalization)},
              {"out_dir", spec.out_dir},
              {"format", to_string(spec.format)},
              {"svg", spec.svg},
              {"max_flagged_fraction", spec.max_flagged_fraction}};
    j["half_span_rad_s"] = spec.half_span ? json(*spec.half_span) : json(nullptr);
    return j;
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.name = j.at("name").get<std::string>();
    s.params_ref = j.at("params_ref").get<std::string>();
    s.params = params_from_json(j.at("params"));
    s.lambda_units = parse_lambda_units(j.at("lambda_units").get<std::string>());
    s.pump_powers = j.at("pump_powers_w").get<std::vector<double>>();
    s.detunings = j.at("detunings_rad_s").get<std::vector<double>>();
    s.signal_ratio = j.at("signal_ratio").get<double>();
    if (!j.at("half_span_rad_s").is_null()) s.half_span = j["half_span_rad_s"].get<double>();
    s.points = j.at("points").get<std::size_t>();
    s.normalization = parse_normalization(j.at("normalization").get<std::string>());
    s.out_dir = j.at("out_dir").get<std::string>();
    s.format = parse_format(j.at("format").get<std::string>());
    s.svg = j.at("svg").get<bool>();
    s.max_flagged_fraction = j.at("max_flagged_fraction").get<double>();
    return s;
}

std::vector<std::string> preset_names() { return {"fig2a", "fig2b", "fig3b", "nms"}; }

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    s.params_ref = "reference";
    s.params = reference_params();
    const double wn = s.params.omega_n;
    if (name == "fig2a") {
        s.kind = ExperimentKind::Spectrum;
        s.detunings = {wn};
        s.pump_powers = {0.0, 0.1e-12, 0.3e-12, 1e-12, 3e-12, 10e-12, 100e-12, 1e-9, 10e-9};
    } else if (name == "fig2b") {
        s.kind = ExperimentKind::Spectrum;
        s.detunings = {-wn};
        s.pump_powers = {0.0, 0.3e-12, 0.5e-12, 0.6e-12, 0.8e-12, 0.9e-12};
        s.half_span = 4000.0;
    } else if (name == "fig3b") {
        s.kind = ExperimentKind::GainCurve;
        s.detunings = {-wn};
        s.points = 121;
        for (std::size_t i = 0; i < s.points; ++i) s.pump_powers.push_back(1.2e-12 * static_cast<double>(i) / 120.0);
    } else if (name == "nms") {
        s.kind = ExperimentKind::Spectrum;
        s.detunings = {wn};
        s.pump_powers = {10e-9};
        s.half_span = 3.0e6;
    } else {
        throw ConfigError("unknown preset '" + name + "' (fig2a|fig2b|fig3b|nms)");
    }
    return s;
}

void validate(const ExperimentSpec& spec) {
    if (spec.name.empty()) throw ConfigError("experiment name is empty");
    if (spec.pump_powers.empty()) throw ConfigError("pump power list is empty");
    if (!is_monotone(spec.pump_powers)) throw ConfigError("pump powers must be monotone");
    for (double p : spec.pump_powers) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("pump powers must be finite and non-negative");
    }
    if (spec.kind == ExperimentKind::GainCurve && !std::is_sorted(spec.pump_powers.begin(), spec.pump_powers.end())) {
        throw ConfigError("gain curve powers must be ascending");
    }
    if (spec.kind != ExperimentKind::GainCurve && spec.detunings.empty()) throw ConfigError("detuning list is empty");
    if (spec.points == 0) throw ConfigError("points must be positive");
    if (spec.half_span && !(*spec.half_span > 0.0)) throw ConfigError("span must be positive");
    if (!(spec.signal_ratio > 0.0)) throw ConfigError("signal ratio must be positive");
    if (spec.kind == ExperimentKind::Threshold && spec.pump_powers.size() < 2) {
        throw ConfigError("threshold search needs a power bracket (two powers)");
    }
    if (!(spec.params.omega_n > 0.0 && spec.params.kappa > 0.0 && spec.params.gamma_n > 0.0 &&
          spec.params.lambda_c > 0.0 && spec.params.omega_c > 0.0)) {
        throw ConfigError("system parameters must be strictly positive");
    }
}

RunResult run(const ExperimentSpec& spec) {
    validate(spec);
    RunResult result;
    Writer w{spec, result, std::filesystem::path(spec.out_dir)};
    std::size_t flagged = 0;
    std::size_t total = 0;
    switch (spec.kind) {
        case ExperimentKind::Spectrum: run_spectra(spec, w, flagged, total); break;
        case ExperimentKind::GainCurve: run_gain(spec, w, flagged, total); break;
        case ExperimentKind::Threshold: run_threshold(spec, w); break;
        case ExperimentKind::OracleCompare: run_oracle(spec, w, flagged, total); break;
        case ExperimentKind::SteadyMap: run_steady_map(spec, w); break;
    }
    result.summary["kind"] = to_string(spec.kind);
    result.summary["flagged_points"] = flagged;
    result.summary["total_points"] = total;
    if (total > 0 && static_cast<double>(flagged) > spec.max_flagged_fraction * static_cast<double>(total)) {
        result.exit_code = 3;
    }
    return result;
}

}  // namespace cem
