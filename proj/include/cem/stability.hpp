#pragma once

#include <array>
#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "cem/params.hpp"
#include "cem/steady_state.hpp"

namespace cem {

/// Linearized drift matrix for the real fluctuation vector
/// (Re da, Im da, dQ, dQ'), so that d/dt v = M v.
Eigen::Matrix4d dynamics_matrix(const SystemParams& params, const SteadyState& ss);

struct StabilityReport {
    std::array<std::complex<double>, 4> eigenvalues{};  // rad/s, sorted by real part, descending
    bool stable = true;
    double margin = 0.0;  // -max Re(eigenvalue)
    /// Rotating-wave estimate of the mechanical damping under blue-sideband
    /// pumping, gamma_n (1 - C/2) with C = 4 lambda^2 n_p / (gamma_n kappa).
    double effective_damping = 0.0;
    double cooperativity = 0.0;
};

StabilityReport analyze_stability(const SystemParams& params, const SteadyState& ss);

struct ThresholdOptions {
    double power_lo = 0.0;
    double power_hi = 100e-12;
    double relative_tolerance = 1e-3;
    int scan_points = 64;  // coarse scan used to bracket the first stability flip
};

struct Threshold {
    double power = 0.0;  // W
    double n_p = 0.0;
};

/// Lowest pump power at which the lowest branch loses stability, found by a
/// coarse scan and then bisection. Empty when the margin never changes sign
/// inside the bracket.
std::optional<Threshold> instability_threshold(const SystemParams& params, double delta_p,
                                               const ThresholdOptions& options = {});

/// Pump power whose lowest steady state holds `n_p` photons at detuning delta_p,
/// by direct evaluation of the cubic (the photon number fixes |E_p|^2).
double power_for_photon_number(const SystemParams& params, double delta_p, double n_p);

}  // namespace cem
