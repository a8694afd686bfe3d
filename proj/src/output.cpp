#include "cem/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace cem {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
    }
}

std::string spectrum_csv(const Spectrum& s) {
    std::string out =
        "delta_s_rad_s,transmission,re_tp,im_tp,re_a_plus,im_a_plus,re_a_minus,im_a_minus,closedform_deviation,"
        "stable_flag\n";
    const int stable = s.stability.stable ? 1 : 0;
    for (const auto& p : s.points) {
        out += format_number(p.delta_s) + ',' + format_number(p.transmission) + ',' + format_number(p.t_p.real()) +
               ',' + format_number(p.t_p.imag()) + ',' + format_number(p.a_plus.real()) + ',' +
               format_number(p.a_plus.imag()) + ',' + format_number(p.a_minus.real()) + ',' +
               format_number(p.a_minus.imag()) + ',' + format_number(p.closed_form_deviation) + ',' +
               std::to_string(p.pole ? 0 : stable) + '\n';
    }
    return out;
}

std::string gain_csv(const std::vector<GainPoint>& curve) {
    std::string out = "pump_power_w,gain,n_p,cooperativity,stable_flag\n";
    for (const auto& g : curve) {
        out += format_number(g.power) + ',' + format_number(g.gain) + ',' + format_number(g.n_p) + ',' +
               format_number(g.cooperativity) + ',' + std::to_string(g.stable && !g.pole ? 1 : 0) + '\n';
    }
    return out;
}

std::string trace_csv(const TimeTrace& trace, std::size_t decimation) {
    decimation = std::max<std::size_t>(decimation, 1);
    std::string out = "t,re_a,im_a,q,q_dot\n";
    for (std::size_t i = 0; i < trace.size(); i += decimation) {
        out += format_number(trace.t[i]) + ',' + format_number(trace.a[i].real()) + ',' +
               format_number(trace.a[i].imag()) + ',' + format_number(trace.q[i]) + ',' +
               format_number(trace.q_dot[i]) + '\n';
    }
    return out;
}

nlohmann::json to_json(const SystemParams& p) {
    nlohmann::json j = {{"omega_c", p.omega_c},   {"omega_n", p.omega_n},   {"kappa", p.kappa},
                        {"gamma_n", p.gamma_n},   {"lambda_c", p.lambda_c}, {"units", "rad/s"},
                        {"resolved_sideband", p.resolved_sideband()}};
    if (p.q_n) j["q_n"] = *p.q_n;
    if (p.mass) j["mass"] = *p.mass;
    if (p.g_pull) j["g_pull"] = *p.g_pull;
    return j;
}

SystemParams params_from_json(const nlohmann::json& j) {
    SystemParams p;
    p.omega_c = j.at("omega_c").get<double>();
    p.omega_n = j.at("omega_n").get<double>();
    p.kappa = j.at("kappa").get<double>();
    p.gamma_n = j.at("gamma_n").get<double>();
    p.lambda_c = j.at("lambda_c").get<double>();
    if (j.contains("q_n")) p.q_n = j["q_n"].get<double>();
    if (j.contains("mass")) p.mass = j["mass"].get<double>();
    if (j.contains("g_pull")) p.g_pull = j["g_pull"].get<double>();
    return p;
}

nlohmann::json to_json(const DriveConfig& d) {
    nlohmann::json j = {{"pump_power_w", d.pump_power}, {"signal_power_w", d.signal_power},
                        {"delta_p", d.delta_p},         {"delta", d.delta},
                        {"pump_phase", d.pump_phase},   {"e_p", d.e_p},
                        {"e_s", d.e_s}};
    if (d.omega_p) j["omega_p"] = *d.omega_p;
    if (d.omega_s) j["omega_s"] = *d.omega_s;
    return j;
}

nlohmann::json to_json(const SteadyState& ss) {
    return {{"n_p", ss.n_p},
            {"a_s", {ss.a_s.real(), ss.a_s.imag()}},
            {"phase", ss.phase},
            {"q_s", ss.q_s},
            {"delta_p", ss.delta_p},
            {"branch", to_string(ss.branch)},
            {"degenerate", ss.degenerate},
            {"dynamically_stable", ss.dynamically_stable}};
}

nlohmann::json to_json(const StabilityReport& r) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : r.eigenvalues) ev.push_back({e.real(), e.imag()});
    return {{"eigenvalues", ev},
            {"stable", r.stable},
            {"margin", r.margin},
            {"effective_damping", r.effective_damping},
            {"cooperativity", r.cooperativity}};
}

nlohmann::json spectrum_json(const Spectrum& s) {
    nlohmann::json points = nlohmann::json::array();
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    for (const auto& p : s.points) {
        points.push_back({{"delta_s", p.delta_s},
                          {"delta", p.delta},
                          {"transmission", num(p.transmission)},
                          {"t_p", {num(p.t_p.real()), num(p.t_p.imag())}},
                          {"a_plus", {num(p.a_plus.real()), num(p.a_plus.imag())}},
                          {"a_minus", {num(p.a_minus.real()), num(p.a_minus.imag())}},
                          {"q_plus", {num(p.q_plus.real()), num(p.q_plus.imag())}},
                          {"closedform_deviation", num(p.closed_form_deviation)},
                          {"pole", p.pole}});
    }
    return {{"normalization", to_string(s.normalization)},
            {"e_s", s.e_s},
            {"steady_state", to_json(s.steady)},
            {"stability", to_json(s.stability)},
            {"flagged_points", s.flagged()},
            {"points", points}};
}

std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                     const std::string& y_label) {
    constexpr double width = 720, height = 480, left = 80, right = 160, top = 40, bottom = 60;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmax > xmin)) { xmin -= 1; xmax += 1; }
    if (!(ymax > ymin)) { ymin -= 1; ymax += 1; }
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
        << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << format_number(static_cast<float>(xv)) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
            << format_number(static_cast<float>(yv)) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">" << x_label
        << "</text>\n";
    svg << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << top + ph / 2 << ")\">" << y_label << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % 10];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 16 + 16 * k << "\" fill=\"" << color << "\">"
            << s.label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace cem
