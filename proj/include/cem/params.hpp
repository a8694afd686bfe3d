#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace cem {

/// Reduced Planck constant, CODATA 2018 (J s).
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Raised when a configuration record is missing a field, carries an unknown
/// unit, or is internally inconsistent.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Override for the ambiguous coupling-strength unit ("lambda = 250 Hz").
enum class LambdaUnits { FromFile, Angular, Hz };

/// Physical constants of the cavity + resonator system. All rates in rad/s.
struct SystemParams {
    double omega_c = 0.0;   // cavity resonance
    double omega_n = 0.0;   // mechanical resonance
    double kappa = 0.0;     // cavity amplitude decay rate
    double gamma_n = 0.0;   // mechanical damping rate
    double lambda_c = 0.0;  // single-photon coupling strength
    std::optional<double> q_n;     // mechanical quality factor
    std::optional<double> mass;    // effective mass, kg
    std::optional<double> g_pull;  // d(omega_c)/dx, rad/(s m)

    /// Good-cavity limit: mechanical sidebands resolved outside the cavity line.
    [[nodiscard]] bool resolved_sideband() const { return omega_n > kappa; }

    /// alpha = 2 lambda^2 / omega_n^2, the Kerr-like shift per photon over omega_n.
    [[nodiscard]] double alpha() const { return 2.0 * lambda_c * lambda_c / (omega_n * omega_n); }

    /// Static frequency shift per intracavity photon, omega_n * alpha (rad/s).
    [[nodiscard]] double kerr_shift() const { return 2.0 * lambda_c * lambda_c / omega_n; }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// One numeric field of the external key/value config: the number as written
/// plus the unit tag it was written with.
struct RawValue {
    double value = 0.0;
    std::string unit;
};

/// Order-insensitive record parsed from the flat config format.
using RawConfig = std::map<std::string, RawValue>;

struct BuildOptions {
    LambdaUnits lambda_units = LambdaUnits::FromFile;
};

/// Converts an external record to SystemParams.
///
/// Frequency fields accept `rad/s`, `Hz`/`kHz`/`MHz`/`GHz` (cycles, so
/// multiplied by 2*pi) and the explicit forms `2pi*Hz` ... `2pi*GHz`.
/// Recognised keys: omega_c, omega_n, kappa, lambda, gamma_n, q_n, mass, g_pull.
/// Throws ConfigError on missing, unknown-unit, or inconsistent input.
SystemParams build_params(const RawConfig& raw, const BuildOptions& options = {});

/// Inverse of build_params: a record that rebuilds the same SystemParams.
RawConfig to_raw(const SystemParams& params);

/// Parses `key = value unit` lines; `#` starts a comment. Keys whose value is
/// not numeric are returned in `text` instead.
struct ParsedConfigText {
    RawConfig numeric;
    std::map<std::string, std::string> text;
};
ParsedConfigText parse_config_text(const std::string& content);
ParsedConfigText parse_config_file(const std::string& path);

std::string serialize(const SystemParams& params);

/// Parses a quantity like "0.9pW", "10 nW", "2pi*6.3MHz" or "-1.5e3 rad/s"
/// into SI (W or rad/s). Throws ConfigError.
double parse_power(const std::string& text);
double parse_frequency(const std::string& text);

/// The parameter set of the reference device: omega_c = 2pi 7.5 GHz,
/// omega_n = 2pi 6.3 MHz, kappa = 2pi 600 kHz, lambda = 250 rad/s, Q_n = 1e6.
SystemParams reference_params();
RawConfig reference_raw();

/// |E| = sqrt(2 P kappa / (hbar omega)). Throws std::domain_error for
/// negative power or non-positive omega / kappa.
double drive_amplitude(double power, double omega, double kappa);

/// C = 4 lambda^2 n_p / (gamma_n kappa).
double cooperativity(const SystemParams& params, double n_p);

/// Photon number at which cooperativity(params, n_p) == target.
double photons_for_cooperativity(const SystemParams& params, double target);

/// Pump and signal tones in the frame rotating at the pump frequency.
struct DriveConfig {
    double pump_power = 0.0;    // W
    double signal_power = 0.0;  // W
    double delta_p = 0.0;       // omega_c - omega_p
    double delta = 0.0;         // omega_s - omega_p
    double pump_phase = 0.0;    // global phase of E_p, rad
    std::optional<double> omega_p;  // absolute pump frequency when known
    std::optional<double> omega_s;  // absolute signal frequency when known
    double e_p = 0.0;  // |E_p|
    double e_s = 0.0;  // |E_s|

    /// Delta_s = omega_s - omega_c.
    [[nodiscard]] double delta_s() const { return delta - delta_p; }
    [[nodiscard]] std::complex<double> pump_amplitude() const {
        return std::polar(e_p, pump_phase);
    }
};

struct DriveSettings {
    double pump_power = 0.0;
    double signal_power = 0.0;
    double delta_p = 0.0;
    double delta = 0.0;
    double pump_phase = 0.0;
    std::optional<double> omega_p;
    std::optional<double> omega_s;
};

/// Builds a DriveConfig, deriving E_p and E_s. When absolute tone frequencies
/// are not given, omega_c stands in for them in the amplitude conversion.
DriveConfig make_drive(const SystemParams& params, const DriveSettings& settings);

}  // namespace cem
