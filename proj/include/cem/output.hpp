#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cem/linear_response.hpp"
#include "cem/params.hpp"
#include "cem/stability.hpp"
#include "cem/steady_state.hpp"
#include "cem/timedomain.hpp"

namespace cem {

/// Shortest round-tripping decimal form; "nan"/"inf" for non-finite values.
std::string format_number(double v);

/// Writes via a temporary sibling file and rename, so readers never see a
/// partial file.
void write_atomic(const std::string& path, const std::string& content);

std::string spectrum_csv(const Spectrum& spectrum);
std::string gain_csv(const std::vector<GainPoint>& curve);
std::string trace_csv(const TimeTrace& trace, std::size_t decimation = 1);

nlohmann::json to_json(const SystemParams& params);
SystemParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DriveConfig& drive);
nlohmann::json to_json(const SteadyState& ss);
nlohmann::json to_json(const StabilityReport& report);
nlohmann::json spectrum_json(const Spectrum& spectrum);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal standalone SVG line plot.
std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                     const std::string& y_label);

}  // namespace cem
