#include "cem/stability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace cem {

Eigen::Matrix4d dynamics_matrix(const SystemParams& params, const SteadyState& ss) {
    const double detuning = ss.delta_p - params.lambda_c * ss.q_s;
    const double ar = ss.a_s.real();
    const double ai = ss.a_s.imag();
    const double lam = params.lambda_c;
    const double wn = params.omega_n;

    // d(da)/dt = -(kappa + i detuning) da + i lambda a_s dQ
    // dQ'' + gamma dQ' + wn^2 dQ = 2 wn lambda (a_s^* da + a_s da^*)
    Eigen::Matrix4d m;
    m << -params.kappa, detuning, -lam * ai, 0.0,
         -detuning, -params.kappa, lam * ar, 0.0,
         0.0, 0.0, 0.0, 1.0,
         4.0 * wn * lam * ar, 4.0 * wn * lam * ai, -wn * wn, -params.gamma_n;
    return m;
}

StabilityReport analyze_stability(const SystemParams& params, const SteadyState& ss) {
    // Measure velocity in units of omega_n and time in 1/omega_n so every
    // entry is O(1) before the dense solve.
    const double wn = params.omega_n;
    Eigen::Matrix4d scaled = dynamics_matrix(params, ss);
    scaled.row(3) /= wn;
    scaled.col(3) *= wn;
    scaled /= wn;

    Eigen::EigenSolver<Eigen::Matrix4d> solver(scaled, /*computeEigenvectors=*/false);
    StabilityReport report;
    const auto& ev = solver.eigenvalues();
    for (int i = 0; i < 4; ++i) report.eigenvalues[i] = ev[i] * wn;
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() < b.imag();
    });
    report.margin = -report.eigenvalues.front().real();
    report.stable = report.margin > 0.0;
    report.cooperativity = cooperativity(params, ss.n_p);
    report.effective_damping = params.gamma_n * (1.0 - 0.5 * report.cooperativity);
    return report;
}

double power_for_photon_number(const SystemParams& params, double delta_p, double n_p) {
    const double detuning = delta_p - params.kerr_shift() * n_p;
    const double e2 = n_p * (params.kappa * params.kappa + detuning * detuning);
    return e2 * kHbar * params.omega_c / (2.0 * params.kappa);
}

std::optional<Threshold> instability_threshold(const SystemParams& params, double delta_p,
                                               const ThresholdOptions& options) {
    auto margin_at = [&](double power) {
        const auto drive = make_drive(params, {.pump_power = power, .delta_p = delta_p});
        const auto ss = select_steady_state(params, drive, Selection::Lowest);
        return analyze_stability(params, ss).margin;
    };

    const int n = std::max(options.scan_points, 2);
    double lo = options.power_lo;
    bool lo_stable = margin_at(lo) > 0.0;
    double hi = lo;
    bool found = false;
    for (int i = 1; i <= n; ++i) {
        hi = options.power_lo + (options.power_hi - options.power_lo) * i / n;
        const bool stable = margin_at(hi) > 0.0;
        if (stable != lo_stable) {
            found = true;
            break;
        }
        lo = hi;
    }
    if (!found) return std::nullopt;

    while (hi - lo > options.relative_tolerance * 0.5 * hi) {
        const double mid = 0.5 * (lo + hi);
        if ((margin_at(mid) > 0.0) == lo_stable) lo = mid; else hi = mid;
    }
    Threshold t;
    t.power = 0.5 * (lo + hi);
    const auto drive = make_drive(params, {.pump_power = t.power, .delta_p = delta_p});
    t.n_p = select_steady_state(params, drive, Selection::Lowest).n_p;
    return t;
}

}  // namespace cem
