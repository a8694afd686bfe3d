#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cem/params.hpp"

namespace cem {

enum class Branch { OnlyRoot, Lower, Middle, Upper };

std::string to_string(Branch b);

/// Real non-negative roots of n [kappa^2 + (Delta_p - omega_n alpha n)^2] = |E_p|^2,
/// ascending. `degenerate` is set when two of the three roots coincide (a fold);
/// the coincident pair is then reported once, so the list has two entries.
struct PhotonNumberRoots {
    std::vector<double> n_p;
    bool degenerate = false;
};

/// Real roots of x^3 + a x^2 + b x + c, ascending, by the trigonometric /
/// Cardano closed form. A double root appears twice. Unpolished.
std::vector<double> real_cubic_roots(double a, double b, double c);

PhotonNumberRoots photon_number_roots(const SystemParams& params, const DriveConfig& drive);

/// Residual of the photon-number cubic at n, normalised by max(|E_p|^2, kappa^2 n).
double cubic_relative_residual(const SystemParams& params, double e_p_squared, double delta_p, double n);

/// One steady state of the driven system.
struct SteadyState {
    double n_p = 0.0;
    /// Cavity amplitude in the pump-phase convention: real and non-negative.
    std::complex<double> a_s;
    /// Phase that was removed from the physical amplitude to reach `a_s`.
    double phase = 0.0;
    /// Q_s = 2 lambda n_p / omega_n.
    double q_s = 0.0;
    /// Pump detuning the state was solved for.
    double delta_p = 0.0;
    Branch branch = Branch::OnlyRoot;
    bool degenerate = false;
    bool dynamically_stable = true;

    /// Amplitude in the frame where E_p carries its configured phase.
    [[nodiscard]] std::complex<double> physical_amplitude() const { return a_s * std::polar(1.0, phase); }
};

/// Copy of `ss` whose a_s is the physical (unrotated) amplitude. Response and
/// stability routines accept either form.
SteadyState with_physical_phase(const SteadyState& ss);

enum class Selection { Lowest, Middle, Highest, LowestStable, All };

class NoSuchBranch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the steady states for the requested branch selection. Stability of
/// every returned state is filled in from the linearized dynamics.
std::vector<SteadyState> steady_state(const SystemParams& params, const DriveConfig& drive,
                                      Selection selection = Selection::All);

/// Convenience: the single state picked by `selection` (not All).
SteadyState select_steady_state(const SystemParams& params, const DriveConfig& drive,
                                Selection selection = Selection::LowestStable);

}  // namespace cem
