#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cem/params.hpp"
#include "cem/stability.hpp"
#include "cem/steady_state.hpp"

namespace cem {

using cplx = std::complex<double>;

/// Raised at a parametric pole, where the small-signal response diverges.
class PoleError : public std::runtime_error {
public:
    PoleError(const std::string& what, double delta) : std::runtime_error(what), delta_(delta) {}
    [[nodiscard]] double delta() const { return delta_; }

private:
    double delta_;
};

/// Auxiliary quantities of the closed-form sideband amplitude.
struct ClosedFormTerms {
    cplx eta;     // omega_n^2 / (omega_n^2 - delta^2 - i gamma_n delta)
    double alpha; // 2 lambda^2 / omega_n^2
    cplx beta;    // alpha^2 eta^2 omega_n^2 n_p^2
    cplx theta;   // i alpha omega_n n_p (eta + 1)
};

ClosedFormTerms closed_form_terms(const SystemParams& params, double n_p, double delta);

/// a_+ = [i(delta + Delta_p) - (kappa + theta)] / [(delta + i kappa)^2 + (theta - i Delta_p)^2 + beta] * E_s.
/// Throws PoleError when the denominator vanishes.
cplx response_closed_form(const SystemParams& params, const SteadyState& ss, double delta, double e_s);

struct SidebandAmplitudes {
    cplx a_plus;
    cplx a_minus;
    cplx q_plus;  // Q_- is conj(q_plus)
    double condition = 1.0;  // of the equilibrated 3x3 system
};

/// Solves the linearized equations for the e^{-i delta t} / e^{+i delta t}
/// components by a 3x3 complex solve in (a_+, conj(a_-), Q_+). Works for any
/// phase of ss.a_s. Throws PoleError when the condition number exceeds 1e12.
SidebandAmplitudes response_direct_solve(const SystemParams& params, const SteadyState& ss, double delta,
                                         double e_s);

enum class Normalization { Critical, Literal, SingleSided };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

/// Signal transmission t_p = 1 - c a_+ / E_s with c = kappa (critical),
/// sqrt(2 kappa) (literal) or 2 kappa (single-sided).
cplx transmission(cplx a_plus, double e_s, const SystemParams& params,
                  Normalization normalization = Normalization::Critical);

struct ResponsePoint {
    double delta = 0.0;
    double delta_s = 0.0;
    cplx a_plus;
    cplx a_minus;
    cplx q_plus;
    cplx t_p;
    double transmission = 0.0;
    cplx a_plus_closed_form;
    /// |closed form - direct| / |direct|
    double closed_form_deviation = 0.0;
    bool pole = false;  // non-finite values; sweep continued
};

struct Spectrum {
    SteadyState steady;
    StabilityReport stability;
    Normalization normalization = Normalization::Critical;
    double e_s = 1.0;
    std::vector<ResponsePoint> points;

    [[nodiscard]] std::size_t flagged() const;
};

ResponsePoint response_point(const SystemParams& params, const SteadyState& ss, double delta_s, double e_s,
                             Normalization normalization);

/// One ResponsePoint per signal-cavity detuning in `delta_s_grid` (must be
/// monotone). A zero signal power is treated as a unit probe amplitude.
Spectrum sweep_spectrum(const SystemParams& params, const DriveConfig& drive, const std::vector<double>& delta_s_grid,
                        Normalization normalization = Normalization::Critical,
                        Selection selection = Selection::LowestStable);

/// Evenly spaced grid of `points` values on [center - half_span, center + half_span].
std::vector<double> linear_grid(double center, double half_span, std::size_t points);

/// Half-width of the default detuning window: 50 gamma_n (1 + C), the
/// linewidth of the hybridised mechanical feature with a x50 margin.
double default_half_span(const SystemParams& params, double n_p);

struct GainPoint {
    double power = 0.0;
    double gain = 0.0;  // |t_p|^2 at the signal-cavity resonance
    double n_p = 0.0;
    double cooperativity = 0.0;
    bool stable = true;
    bool pole = false;
};

/// Transistor characteristic under blue-sideband pumping (Delta_p = -omega_n)
/// with the signal on the cavity resonance (|delta| = omega_n, Delta_s = 0).
std::vector<GainPoint> gain_curve(const SystemParams& params, const std::vector<double>& powers,
                                  Normalization normalization = Normalization::Critical);

}  // namespace cem
