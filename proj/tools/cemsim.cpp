// cemsim: batch front-end for the cavity electromechanics engine.
//
//   cemsim preset fig2b --out out/ --svg
//   cemsim spectrum --params device.cfg --pump 0.3pW,0.5pW --detuning blue
//   cemsim threshold --detuning blue,red
//   cemsim oracle --pump 0.3pW --points 21

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cem/experiment.hpp"
#include "cem/output.hpp"
#include "cem/params.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Flags {
    std::optional<std::string> params;
    std::optional<std::string> out;
    std::optional<std::string> normalization;
    std::optional<std::string> lambda_units;
    std::optional<std::size_t> points;
    std::optional<std::string> format;
    std::optional<std::string> pump;
    std::optional<std::string> detuning;
    std::optional<double> span;
    std::optional<double> signal_ratio;
    std::optional<double> max_flagged;
    std::optional<std::string> name;
    bool svg = false;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) items.push_back(item.substr(a, b - a + 1));
    }
    return items;
}

std::vector<double> parse_powers(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(cem::parse_power(item));
    if (out.empty()) throw cem::ConfigError("empty pump power list");
    return out;
}

std::vector<double> parse_detunings(const std::string& s, const cem::SystemParams& p) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        if (item == "red") {
            out.push_back(p.omega_n);
        } else if (item == "blue") {
            out.push_back(-p.omega_n);
        } else {
            out.push_back(cem::parse_frequency(item));
        }
    }
    if (out.empty()) throw cem::ConfigError("empty detuning list");
    return out;
}

cem::LambdaUnits parse_lambda_units(const std::string& s) {
    if (s == "angular") return cem::LambdaUnits::Angular;
    if (s == "hz") return cem::LambdaUnits::Hz;
    throw cem::ConfigError("--lambda-units must be angular or hz, got '" + s + "'");
}

// Config-file keys that mirror command-line flags.
void merge_file_settings(const cem::ParsedConfigText& file, Flags& f) {
    auto text_of = [&](const std::string& key) -> std::optional<std::string> {
        if (auto it = file.text.find(key); it != file.text.end()) return it->second;
        if (auto it = file.numeric.find(key); it != file.numeric.end()) {
            return cem::format_number(it->second.value) + it->second.unit;
        }
        return std::nullopt;
    };
    auto number_of = [&](const std::string& key) -> std::optional<double> {
        if (auto it = file.numeric.find(key); it != file.numeric.end()) return it->second.value;
        if (file.text.count(key)) throw cem::ConfigError("config key '" + key + "' must be numeric");
        return std::nullopt;
    };
    if (!f.out) f.out = text_of("out");
    if (!f.normalization) f.normalization = text_of("normalization");
    if (!f.lambda_units) f.lambda_units = text_of("lambda_units");
    if (!f.format) f.format = text_of("format");
    if (!f.pump) f.pump = text_of("pump");
    if (!f.detuning) f.detuning = text_of("detuning");
    if (!f.name) f.name = text_of("name");
    if (!f.points) {
        if (auto v = number_of("points")) f.points = static_cast<std::size_t>(*v);
    }
    if (!f.span) {
        if (auto v = text_of("span")) f.span = cem::parse_frequency(*v);
    }
    if (!f.signal_ratio) f.signal_ratio = number_of("signal_ratio");
    if (!f.max_flagged) f.max_flagged = number_of("max_flagged");
    if (!f.svg) {
        if (auto v = text_of("svg")) f.svg = (*v == "true" || *v == "1");
    }
}

cem::RawConfig device_keys(const cem::ParsedConfigText& file) {
    static const std::vector<std::string> keys = {"omega_c", "omega_n", "kappa", "lambda",
                                                  "gamma_n", "q_n",     "mass",  "g_pull"};
    cem::RawConfig raw;
    for (const auto& k : keys) {
        if (auto it = file.numeric.find(k); it != file.numeric.end()) raw[k] = it->second;
        if (file.text.count(k)) throw cem::ConfigError("parameter '" + k + "' is not numeric");
    }
    return raw;
}

cem::ExperimentSpec default_spec(cem::ExperimentKind kind, const cem::SystemParams& p) {
    cem::ExperimentSpec s;
    s.kind = kind;
    s.params = p;
    const double wn = p.omega_n;
    switch (kind) {
        case cem::ExperimentKind::Spectrum:
            s.name = "spectrum";
            s.detunings = {-wn};
            s.pump_powers = {0.3e-12};
            break;
        case cem::ExperimentKind::GainCurve:
            s.name = "gain";
            s.detunings = {-wn};
            s.points = 121;
            break;
        case cem::ExperimentKind::Threshold:
            s.name = "threshold";
            s.detunings = {-wn, wn};
            s.pump_powers = {0.0, 100e-12};
            break;
        case cem::ExperimentKind::OracleCompare:
            s.name = "oracle";
            s.detunings = {-wn};
            s.pump_powers = {0.3e-12};
            s.points = 21;
            break;
        case cem::ExperimentKind::SteadyMap:
            s.name = "steady";
            s.detunings = {wn};
            for (int i = 0; i <= 40; ++i) s.pump_powers.push_back(1e-12 * std::pow(10.0, i * 0.15));
            break;
    }
    return s;
}

cem::ExperimentSpec build_spec(std::optional<cem::ExperimentKind> kind, const std::string& preset_name, Flags f) {
    cem::ParsedConfigText file;
    if (f.params) {
        file = cem::parse_config_file(*f.params);
        merge_file_settings(file, f);
    }

    cem::BuildOptions build;
    if (f.lambda_units) build.lambda_units = parse_lambda_units(*f.lambda_units);

    cem::SystemParams params;
    std::string params_ref = "reference";
    if (f.params && !device_keys(file).empty()) {
        params = cem::build_params(device_keys(file), build);
        params_ref = *f.params;
    } else {
        params = cem::build_params(cem::reference_raw(), build);
    }

    cem::ExperimentSpec spec = kind ? default_spec(*kind, params) : cem::preset(preset_name);
    spec.params = params;
    spec.params_ref = params_ref;
    spec.lambda_units = build.lambda_units;
    if (f.name) spec.name = *f.name;
    if (f.out) spec.out_dir = *f.out;
    if (f.normalization) spec.normalization = cem::parse_normalization(*f.normalization);
    if (f.format) spec.format = cem::parse_format(*f.format);
    if (f.points) spec.points = *f.points;
    if (f.span) spec.half_span = *f.span;
    if (f.signal_ratio) spec.signal_ratio = *f.signal_ratio;
    if (f.max_flagged) spec.max_flagged_fraction = *f.max_flagged;
    if (f.detuning) spec.detunings = parse_detunings(*f.detuning, params);
    if (f.svg) spec.svg = true;
    if (f.pump) {
        spec.pump_powers = parse_powers(*f.pump);
    } else if (kind && *kind == cem::ExperimentKind::GainCurve) {
        spec.pump_powers.clear();
        const std::size_t n = std::max<std::size_t>(spec.points, 2);
        for (std::size_t i = 0; i < n; ++i) spec.pump_powers.push_back(1.2e-12 * double(i) / double(n - 1));
    }
    if (!kind && preset_name == "fig3b" && f.points && !f.pump) {
        spec.pump_powers.clear();
        const std::size_t n = std::max<std::size_t>(spec.points, 2);
        for (std::size_t i = 0; i < n; ++i) spec.pump_powers.push_back(1.2e-12 * double(i) / double(n - 1));
    }
    return spec;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--params", f.params, "Key/value device + settings file");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--normalization", f.normalization, "critical | literal | single-sided");
    cmd->add_option("--lambda-units", f.lambda_units, "angular | hz (reading of the coupling strength)");
    cmd->add_option("--points", f.points, "Grid points");
    cmd->add_option("--format", f.format, "csv | json | both");
    cmd->add_option("--pump", f.pump, "Pump powers, comma separated (e.g. 0.3pW,0.5pW)");
    cmd->add_option("--detuning", f.detuning, "Pump detunings Delta_p: red, blue or a frequency, comma separated");
    cmd->add_option("--span", f.span, "Half width of the Delta_s window, rad/s");
    cmd->add_option("--signal-ratio", f.signal_ratio, "Signal power as a fraction of pump power");
    cmd->add_option("--max-flagged", f.max_flagged, "Fraction of flagged points tolerated before exit code 3");
    cmd->add_option("--name", f.name, "File stem for outputs");
    cmd->add_flag("--svg", f.svg, "Also write an SVG plot");
}

void print_error(const std::string& kind, const std::string& message) {
    nlohmann::json err = {{"error", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity electromechanics: steady states, signal transmission, stability and time-domain checks"};
    app.require_subcommand(1);
    Flags flags;
    std::string preset_name;

    struct Sub {
        const char* name;
        const char* help;
        std::optional<cem::ExperimentKind> kind;
    };
    const Sub subs[] = {
        {"spectrum", "Transmission spectra vs signal-cavity detuning", cem::ExperimentKind::Spectrum},
        {"gain", "Transistor gain vs pump power (blue sideband, Delta_s = 0)", cem::ExperimentKind::GainCurve},
        {"threshold", "Parametric-instability threshold table", cem::ExperimentKind::Threshold},
        {"oracle", "Time-domain integration vs linear response", cem::ExperimentKind::OracleCompare},
        {"steady", "Steady-state branches vs pump power", cem::ExperimentKind::SteadyMap},
        {"preset", "Figure presets: fig2a | fig2b | fig3b | nms", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, std::optional<cem::ExperimentKind>>> commands;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, flags);
        if (!s.kind) cmd->add_option("preset", preset_name, "Preset name")->required();
        commands.emplace_back(cmd, s.kind);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("validation", e.what());
        return kExitValidation;
    }

    std::optional<cem::ExperimentKind> kind;
    for (const auto& [cmd, k] : commands) {
        if (cmd->parsed()) kind = k;
    }

    cem::ExperimentSpec spec;
    try {
        spec = build_spec(kind, preset_name, flags);
        cem::validate(spec);
    } catch (const cem::ConfigError& e) {
        print_error("validation", e.what());
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        print_error("validation", e.what());
        return kExitValidation;
    }

    try {
        const auto result = cem::run(spec);
        nlohmann::json summary = result.summary;
        summary["files"] = result.files;
        summary["exit_code"] = result.exit_code;
        std::cout << summary.dump(2) << "\n";
        if (spec.kind == cem::ExperimentKind::Threshold && summary.contains("thresholds")) {
            std::printf("%-18s %-16s %-12s %s\n", "Delta_p (rad/s)", "threshold (pW)", "n_p", "C");
            for (const auto& row : summary["thresholds"]) {
                if (row["found"].get<bool>()) {
                    std::printf("%-18.6g %-16.6g %-12.6g %.4g\n", row["delta_p"].get<double>(),
                                row["threshold_w"].get<double>() * 1e12, row["n_p"].get<double>(),
                                row["cooperativity"].get<double>());
                } else {
                    std::printf("%-18.6g %-16s\n", row["delta_p"].get<double>(), "none in bracket");
                }
            }
        }
        if (result.exit_code != 0) {
            print_error("numerical", "flagged points exceeded the quota");
            return kExitNumerical;
        }
    } catch (const cem::ConfigError& e) {
        print_error("validation", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        print_error("numerical", e.what());
        return kExitNumerical;
    }
    return 0;
}
