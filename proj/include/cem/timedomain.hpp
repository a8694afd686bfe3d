#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cem/params.hpp"

namespace cem {

/// Uniformly sampled mean-field trajectory in the frame rotating at the pump.
struct TimeTrace {
    std::vector<double> t;                   // s
    std::vector<std::complex<double>> a;     // cavity amplitude
    std::vector<double> q;                   // resonator amplitude Q
    std::vector<double> q_dot;               // dQ/dt, 1/s
    /// Set when |a| left the escape radius; the trace stops there.
    std::optional<double> escape_time;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

struct InitialState {
    std::complex<double> a0{0.0, 0.0};
    double q0 = 0.0;
    double q_dot0 = 0.0;
};

struct IntegrateOptions {
    double tolerance = 1e-10;  // relative and absolute, on the scaled state
    /// Sampling interval; 0 picks 0.1 / max(omega_n, |Delta_p|, kappa, |delta|).
    double sample_dt = 0.0;
    /// Largest internal step in units of 1/omega_n.
    double max_step = 0.5;
    double escape_factor = 1e6;
};

/// Integrates the noise-free nonlinear equations of motion
///   a'  = -(i Delta_p + kappa) a + i lambda a Q + E_p + E_s e^{-i delta t}
///   Q'' + gamma_n Q' + omega_n^2 Q = 2 omega_n lambda |a|^2
/// from `initial` over [0, t_final] with an adaptive Dormand-Prince 5(4) stepper.
TimeTrace integrate(const SystemParams& params, const DriveConfig& drive, double t_final,
                    const InitialState& initial = {}, const IntegrateOptions& options = {});

class NotConverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Demodulated {
    std::complex<double> a_plus;   // coefficient of e^{-i delta t}
    std::complex<double> a_minus;  // coefficient of e^{+i delta t}
    std::complex<double> offset;   // stationary part (the steady amplitude)
};

struct DemodulateOptions {
    double window = 0.25;        // trailing fraction of the trace
    double min_periods = 100.0;  // beat periods 2 pi / |delta| required in the window
    double drift_tolerance = 1e-3;
};

/// Least-squares fit of a(t) = c0 + c+ e^{-i delta t} + c- e^{+i delta t} over the
/// trailing window. Throws NotConverged when the two halves of the window
/// disagree by more than the drift tolerance, std::invalid_argument when the
/// window is too short.
Demodulated demodulate(const TimeTrace& trace, double delta, const DemodulateOptions& options = {});

/// Initial state on the linearized steady oscillation at signal detuning
/// drive.delta: steady state plus the sideband ansatz from the direct solve.
InitialState steady_ansatz(const SystemParams& params, const DriveConfig& drive);

struct OracleEntry {
    double delta = 0.0;
    std::complex<double> direct;     // a_+ from the linear solve (physical phase)
    std::complex<double> estimated;  // demodulated a_+
    double deviation = 0.0;          // |estimated - direct| / |direct|
    bool converged = true;
    std::string note;
};

struct OracleReport {
    std::vector<OracleEntry> entries;
    double max_deviation = 0.0;
    double median_deviation = 0.0;
    std::size_t not_converged = 0;
};

struct OracleOptions {
    IntegrateOptions integrate;
    DemodulateOptions demodulate;
    /// Trace length in beat periods; the demodulation window is its trailing part.
    double periods = 400.0;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Integrates at every signal detuning in `deltas` starting on the steady
/// ansatz and compares the demodulated a_+ against the direct linear solve.
OracleReport oracle_compare(const SystemParams& params, const DriveConfig& drive, const std::vector<double>& deltas,
                            const OracleOptions& options = {});

}  // namespace cem
