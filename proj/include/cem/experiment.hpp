#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cem/linear_response.hpp"
#include "cem/params.hpp"

namespace cem {

enum class ExperimentKind { Spectrum, GainCurve, Threshold, OracleCompare, SteadyMap };
enum class OutputFormat { Csv, Json, Both };

std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);
std::string to_string(OutputFormat f);
OutputFormat parse_format(const std::string& s);

/// A batch job: what to compute, on which device, where to write it.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Spectrum;
    std::string name;         // used as the file stem
    std::string params_ref;   // file path, or "reference" for the built-in device
    SystemParams params;      // resolved
    LambdaUnits lambda_units = LambdaUnits::FromFile;
    std::vector<double> pump_powers;  // W
    std::vector<double> detunings;    // Delta_p values, rad/s
    double signal_ratio = 1e-6;       // P_s / P_p
    std::optional<double> half_span;  // Delta_s half window, rad/s; auto when empty
    std::size_t points = 2001;
    Normalization normalization = Normalization::Critical;
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::Both;
    bool svg = false;
    double max_flagged_fraction = 0.05;

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);

/// Figure presets on the reference device: fig2a (red sideband ladder),
/// fig2b (blue sideband, 0 to 0.9 pW), fig3b (gain vs pump power), nms
/// (10 nW red sideband, normal-mode splitting).
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// Throws ConfigError on an invalid spec (empty or non-monotone grids, ...).
void validate(const ExperimentSpec& spec);

struct RunResult {
    int exit_code = 0;  // 0 ok, 3 flagged points above quota
    std::vector<std::string> files;
    nlohmann::json summary;
};

/// Executes the spec, writing CSV / JSON (and optional SVG) into spec.out_dir.
/// Numeric payloads depend only on the spec; only the JSON "generated_at"
/// field varies between runs.
RunResult run(const ExperimentSpec& spec);

}  // namespace cem
