#include "cem/params.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cem {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct SplitQuantity {
    double value;
    std::string unit;
};

// "2pi*6.3 MHz" -> {6.3, "2pi*MHz"}; "0.9pW" -> {0.9, "pW"}.
std::optional<SplitQuantity> split_quantity(std::string_view text) {
    std::string s = trim(text);
    std::string prefix;
    for (std::string_view tag : {"2pi*", "2π×", "2π*", "2pi x", "2pix"}) {
        if (s.rfind(tag, 0) == 0) {
            prefix = "2pi*";
            s = trim(std::string_view(s).substr(tag.size()));
            break;
        }
    }
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || !std::isfinite(value)) return std::nullopt;
    std::string unit = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
    if (!prefix.empty()) {
        if (unit.rfind("2pi*", 0) == 0) throw ConfigError("doubled 2pi factor in '" + std::string(text) + "'");
        unit = prefix + unit;
    }
    return SplitQuantity{value, unit};
}

std::optional<double> si_prefix(std::string_view p) {
    if (p.empty()) return 1.0;
    if (p == "f") return 1e-15;
    if (p == "p") return 1e-12;
    if (p == "n") return 1e-9;
    if (p == "u" || p == "µ") return 1e-6;
    if (p == "m") return 1e-3;
    if (p == "k") return 1e3;
    if (p == "M") return 1e6;
    if (p == "G") return 1e9;
    return std::nullopt;
}

// Multiplier taking the written number to rad/s.
std::optional<double> frequency_scale(std::string_view unit) {
    if (unit == "rad/s") return 1.0;
    std::string_view u = unit;
    if (u.rfind("2pi*", 0) == 0) u.remove_prefix(4);
    if (u.size() < 2 || u.substr(u.size() - 2) != "Hz") return std::nullopt;
    auto scale = si_prefix(u.substr(0, u.size() - 2));
    if (!scale) return std::nullopt;
    return kTwoPi * *scale;
}

std::optional<double> power_scale(std::string_view unit) {
    if (unit.empty() || unit.back() != 'W') return std::nullopt;
    return si_prefix(unit.substr(0, unit.size() - 1));
}

const RawValue* find(const RawConfig& raw, const std::string& key) {
    auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
}

double frequency_field(const RawConfig& raw, const std::string& key) {
    const RawValue* v = find(raw, key);
    if (!v) throw ConfigError("missing mandatory field '" + key + "'");
    auto scale = frequency_scale(v->unit);
    if (!scale) {
        throw ConfigError("field '" + key + "' needs a frequency unit tag (rad/s, Hz, 2pi*MHz, ...), got '" +
                          v->unit + "'");
    }
    if (v->value < 0.0) throw ConfigError("field '" + key + "' must be non-negative");
    return v->value * *scale;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("field '") + name + "' must be strictly positive, got " + fmt_double(v));
    }
}

}  // namespace

SystemParams build_params(const RawConfig& raw, const BuildOptions& options) {
    for (const auto& [key, _] : raw) {
        static const char* known[] = {"omega_c", "omega_n", "kappa", "lambda", "gamma_n", "q_n", "mass", "g_pull"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown parameter '" + key + "'");
    }

    SystemParams p;
    p.omega_c = frequency_field(raw, "omega_c");
    p.omega_n = frequency_field(raw, "omega_n");
    p.kappa = frequency_field(raw, "kappa");
    require_positive(p.omega_c, "omega_c");
    require_positive(p.omega_n, "omega_n");
    require_positive(p.kappa, "kappa");

    if (const RawValue* q = find(raw, "q_n")) {
        if (!q->unit.empty()) throw ConfigError("q_n is dimensionless; unexpected unit '" + q->unit + "'");
        require_positive(q->value, "q_n");
        p.q_n = q->value;
    }
    if (find(raw, "gamma_n")) {
        p.gamma_n = frequency_field(raw, "gamma_n");
        require_positive(p.gamma_n, "gamma_n");
        if (p.q_n) {
            const double from_q = p.omega_n / *p.q_n;
            if (std::abs(p.gamma_n - from_q) / p.gamma_n > 0.02) {
                throw ConfigError("gamma_n = " + fmt_double(p.gamma_n) + " rad/s inconsistent with omega_n/q_n = " +
                                  fmt_double(from_q) + " rad/s (tolerance 2%)");
            }
            // Keep the supplied damping; the quality factor follows from it.
            p.q_n = p.omega_n / p.gamma_n;
        }
    } else if (p.q_n) {
        p.gamma_n = p.omega_n / *p.q_n;
    } else {
        throw ConfigError("missing mandatory field: one of 'gamma_n' or 'q_n'");
    }

    if (const RawValue* m = find(raw, "mass")) {
        if (m->unit != "kg") throw ConfigError("mass needs unit 'kg', got '" + m->unit + "'");
        require_positive(m->value, "mass");
        p.mass = m->value;
    }
    if (const RawValue* g = find(raw, "g_pull")) {
        std::string_view unit = g->unit;
        double scale = 0.0;
        if (unit == "rad/s/m") {
            scale = 1.0;
        } else if (unit.size() > 2 && unit.substr(unit.size() - 2) == "/m") {
            auto s = frequency_scale(unit.substr(0, unit.size() - 2));
            if (!s) throw ConfigError("g_pull has unsupported unit '" + g->unit + "'");
            scale = *s;
        } else {
            throw ConfigError("g_pull needs a unit like 'rad/s/m' or '2pi*MHz/m', got '" + g->unit + "'");
        }
        require_positive(g->value, "g_pull");
        p.g_pull = g->value * scale;
    }

    if (const RawValue* l = find(raw, "lambda")) {
        auto scale = frequency_scale(l->unit);
        if (!scale) throw ConfigError("field 'lambda' needs a frequency unit tag, got '" + l->unit + "'");
        // The flag decides whether the written number is angular or cycles;
        // any SI prefix in the tag is kept.
        const double prefix = l->unit == "rad/s" ? 1.0 : *scale / kTwoPi;
        switch (options.lambda_units) {
            case LambdaUnits::FromFile: break;
            case LambdaUnits::Angular: scale = prefix; break;
            case LambdaUnits::Hz: scale = prefix * kTwoPi; break;
        }
        require_positive(l->value, "lambda");
        p.lambda_c = l->value * *scale;
    } else if (p.g_pull && p.mass) {
        const double zero_point = std::sqrt(kHbar / (2.0 * p.omega_n * *p.mass));
        p.lambda_c = *p.g_pull * zero_point;
    } else {
        throw ConfigError("missing mandatory field: 'lambda' or both 'g_pull' and 'mass'");
    }
    return p;
}

RawConfig to_raw(const SystemParams& p) {
    RawConfig raw;
    raw["omega_c"] = {p.omega_c, "rad/s"};
    raw["omega_n"] = {p.omega_n, "rad/s"};
    raw["kappa"] = {p.kappa, "rad/s"};
    raw["gamma_n"] = {p.gamma_n, "rad/s"};
    raw["lambda"] = {p.lambda_c, "rad/s"};
    if (p.q_n) raw["q_n"] = {*p.q_n, ""};
    if (p.mass) raw["mass"] = {*p.mass, "kg"};
    if (p.g_pull) raw["g_pull"] = {*p.g_pull, "rad/s/m"};
    return raw;
}

std::string serialize(const SystemParams& params) {
    std::string out;
    for (const auto& [key, v] : to_raw(params)) {
        out += key + " = " + fmt_double(v.value);
        if (!v.unit.empty()) out += " " + v.unit;
        out += "\n";
    }
    return out;
}

ParsedConfigText parse_config_text(const std::string& content) {
    ParsedConfigText parsed;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (parsed.numeric.count(key) || parsed.text.count(key)) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        auto q = value.find(',') == std::string::npos ? split_quantity(value) : std::nullopt;
        if (q) {
            parsed.numeric[key] = {q->value, q->unit};
        } else {
            parsed.text[key] = value;
        }
    }
    return parsed;
}

ParsedConfigText parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

double parse_power(const std::string& text) {
    auto q = split_quantity(text);
    if (!q) throw ConfigError("not a power: '" + text + "'");
    auto scale = power_scale(q->unit);
    if (!scale) throw ConfigError("power '" + text + "' needs a unit (W, mW, nW, pW, ...)");
    if (q->value < 0.0) throw ConfigError("power must be non-negative: '" + text + "'");
    return q->value * *scale;
}

double parse_frequency(const std::string& text) {
    auto q = split_quantity(text);
    if (!q) throw ConfigError("not a frequency: '" + text + "'");
    auto scale = frequency_scale(q->unit);
    if (!scale) throw ConfigError("frequency '" + text + "' needs a unit (rad/s, Hz, 2pi*MHz, ...)");
    return q->value * *scale;
}

RawConfig reference_raw() {
    RawConfig raw;
    raw["omega_c"] = {7.5, "2pi*GHz"};
    raw["omega_n"] = {6.3, "2pi*MHz"};
    raw["kappa"] = {600.0, "2pi*kHz"};
    raw["lambda"] = {250.0, "rad/s"};
    raw["q_n"] = {1e6, ""};
    return raw;
}

SystemParams reference_params() { return build_params(reference_raw()); }

double drive_amplitude(double power, double omega, double kappa) {
    if (!(omega > 0.0)) throw std::domain_error("drive_amplitude: omega must be positive");
    if (!(kappa > 0.0)) throw std::domain_error("drive_amplitude: kappa must be positive");
    if (!(power >= 0.0)) throw std::domain_error("drive_amplitude: power must be non-negative");
    return std::sqrt(2.0 * power * kappa / (kHbar * omega));
}

double cooperativity(const SystemParams& params, double n_p) {
    if (!(n_p >= 0.0)) throw std::domain_error("cooperativity: n_p must be non-negative");
    return 4.0 * params.lambda_c * params.lambda_c * n_p / (params.gamma_n * params.kappa);
}

double photons_for_cooperativity(const SystemParams& params, double target) {
    return target * params.gamma_n * params.kappa / (4.0 * params.lambda_c * params.lambda_c);
}

DriveConfig make_drive(const SystemParams& params, const DriveSettings& s) {
    if (!(s.pump_power >= 0.0) || !(s.signal_power >= 0.0)) {
        throw ConfigError("drive powers must be non-negative");
    }
    DriveConfig d;
    d.pump_power = s.pump_power;
    d.signal_power = s.signal_power;
    d.delta_p = s.delta_p;
    d.delta = s.delta;
    d.pump_phase = s.pump_phase;
    d.omega_p = s.omega_p;
    d.omega_s = s.omega_s;
    d.e_p = drive_amplitude(s.pump_power, s.omega_p.value_or(params.omega_c), params.kappa);
    d.e_s = drive_amplitude(s.signal_power, s.omega_s.value_or(params.omega_c), params.kappa);
    return d;
}

}  // namespace cem
