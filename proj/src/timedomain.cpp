#include "cem/timedomain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <thread>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "cem/linear_response.hpp"
#include "cem/steady_state.hpp"

namespace odeint = boost::numeric::odeint;

namespace cem {
namespace {

using State = std::array<double, 4>;

struct Escaped {
    double time;
};

// Equations of motion in tau = omega_n t with a / a_scale and Q / q_scale,
// velocity stored as Q' / (omega_n q_scale).
struct ScaledSystem {
    double wn, kappa, gamma, lambda, delta_p, delta;
    std::complex<double> e_p;
    double e_s;
    double a_scale, q_scale;

    void operator()(const State& y, State& dydt, double tau) const {
        const double t = tau / wn;
        const std::complex<double> a(y[0] * a_scale, y[1] * a_scale);
        const double q = y[2] * q_scale;
        const std::complex<double> signal = e_s * std::polar(1.0, -delta * t);
        const std::complex<double> da =
            -std::complex<double>(kappa, delta_p) * a + std::complex<double>(0.0, lambda * q) * a + e_p + signal;
        dydt[0] = da.real() / (wn * a_scale);
        dydt[1] = da.imag() / (wn * a_scale);
        dydt[2] = y[3];
        const double force = 2.0 * wn * lambda * std::norm(a);
        dydt[3] = (force / (wn * wn) - q) / q_scale - (gamma / wn) * y[3];
    }
};

}  // namespace

TimeTrace integrate(const SystemParams& params, const DriveConfig& drive, double t_final, const InitialState& initial,
                    const IntegrateOptions& options) {
    if (!(t_final > 0.0)) throw std::invalid_argument("integrate: t_final must be positive");
    const double wn = params.omega_n;

    const double n_ref = drive.e_p > 0.0 ? photon_number_roots(params, drive).n_p.front() : 0.0;
    double a_scale = std::max({std::sqrt(n_ref), std::abs(initial.a0), drive.e_s / params.kappa});
    if (!(a_scale > 0.0)) a_scale = 1.0;
    double q_scale = std::max({2.0 * params.lambda_c * a_scale * a_scale / wn, std::abs(initial.q0),
                               std::abs(initial.q_dot0) / wn});
    if (!(q_scale > 0.0)) q_scale = 1.0;

    ScaledSystem sys{wn, params.kappa, params.gamma_n, params.lambda_c, drive.delta_p, drive.delta,
                     drive.pump_amplitude(), drive.e_s, a_scale, q_scale};

    double sample_dt = options.sample_dt;
    if (!(sample_dt > 0.0)) {
        sample_dt = 0.1 / std::max({wn, std::abs(drive.delta_p), params.kappa, std::abs(drive.delta)});
    }
    const auto samples = static_cast<std::size_t>(std::floor(t_final / sample_dt + 1e-9)) + 1;

    TimeTrace trace;
    trace.t.reserve(samples);
    trace.a.reserve(samples);
    trace.q.reserve(samples);
    trace.q_dot.reserve(samples);

    const double escape_radius = options.escape_factor * std::max(std::sqrt(n_ref), std::abs(initial.a0));
    State y{initial.a0.real() / a_scale, initial.a0.imag() / a_scale, initial.q0 / q_scale,
            initial.q_dot0 / (wn * q_scale)};

    auto observer = [&](const State& s, double tau) {
        if (trace.t.size() >= samples) return;
        const std::complex<double> a(s[0] * a_scale, s[1] * a_scale);
        const double t = tau / wn;
        if (escape_radius > 0.0 && std::abs(a) > escape_radius) throw Escaped{t};
        trace.t.push_back(t);
        trace.a.push_back(a);
        trace.q.push_back(s[2] * q_scale);
        trace.q_dot.push_back(s[3] * q_scale * wn);
    };

    auto stepper = odeint::make_dense_output(options.tolerance, options.tolerance, options.max_step,
                                             odeint::runge_kutta_dopri5<State>());
    const double dtau = sample_dt * wn;
    try {
        odeint::integrate_const(stepper, sys, y, 0.0, dtau * static_cast<double>(samples - 1) * (1.0 + 1e-12), dtau,
                                observer);
    } catch (const Escaped& e) {
        trace.escape_time = e.time;
    }
    return trace;
}

namespace {

Demodulated fit_window(const TimeTrace& trace, double delta, std::size_t begin, std::size_t end) {
    const auto n = static_cast<Eigen::Index>(end - begin);
    Eigen::MatrixXcd design(n, 3);
    Eigen::VectorXcd values(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t k = begin + static_cast<std::size_t>(i);
        const auto phase = std::polar(1.0, -delta * trace.t[k]);
        design(i, 0) = 1.0;
        design(i, 1) = phase;
        design(i, 2) = std::conj(phase);
        values[i] = trace.a[k];
    }
    const Eigen::Vector3cd c = design.colPivHouseholderQr().solve(values);
    return {c[1], c[2], c[0]};
}

}  // namespace

Demodulated demodulate(const TimeTrace& trace, double delta, const DemodulateOptions& options) {
    if (delta == 0.0) throw std::invalid_argument("demodulate: delta must be non-zero");
    if (trace.size() < 8) throw std::invalid_argument("demodulate: trace too short");
    const std::size_t n = trace.size();
    const auto width = static_cast<std::size_t>(std::round(options.window * static_cast<double>(n)));
    if (width < 8) throw std::invalid_argument("demodulate: window too short");
    const std::size_t begin = n - width;
    const double span = trace.t.back() - trace.t[begin] + trace.dt();
    const double periods = span * std::abs(delta) / kTwoPi;
    if (periods < options.min_periods * (1.0 - 1e-3)) {
        throw std::invalid_argument("demodulate: window covers " + std::to_string(periods) + " beat periods, need " +
                                    std::to_string(options.min_periods));
    }

    const Demodulated full = fit_window(trace, delta, begin, n);
    const std::size_t mid = begin + width / 2;
    const Demodulated first = fit_window(trace, delta, begin, mid);
    const Demodulated second = fit_window(trace, delta, mid, n);

    const double offset_scale = std::abs(full.offset);
    const double sideband_scale = std::abs(full.a_plus) + std::abs(full.a_minus);
    const double offset_drift = std::abs(first.offset - second.offset);
    const double sideband_drift =
        std::abs(first.a_plus - second.a_plus) + std::abs(first.a_minus - second.a_minus);
    if (offset_drift > options.drift_tolerance * std::max(offset_scale, sideband_scale) ||
        sideband_drift > options.drift_tolerance * std::max(sideband_scale, 1e-12 * offset_scale)) {
        throw NotConverged("demodulate: envelope still drifting across the window (offset drift " +
                           std::to_string(offset_drift) + ", sideband drift " + std::to_string(sideband_drift) +
                           "); increase t_final");
    }
    return full;
}

InitialState steady_ansatz(const SystemParams& params, const DriveConfig& drive) {
    const auto ss = with_physical_phase(select_steady_state(params, drive, Selection::LowestStable));
    InitialState init;
    init.a0 = ss.a_s;
    init.q0 = ss.q_s;
    if (drive.e_s > 0.0) {
        const auto side = response_direct_solve(params, ss, drive.delta, drive.e_s);
        init.a0 += side.a_plus + side.a_minus;
        // dQ = Q+ e^{-i delta t} + c.c.
        init.q0 += 2.0 * side.q_plus.real();
        init.q_dot0 = 2.0 * drive.delta * side.q_plus.imag();
    }
    return init;
}

OracleReport oracle_compare(const SystemParams& params, const DriveConfig& drive, const std::vector<double>& deltas,
                            const OracleOptions& options) {
    auto run_one = [&](double delta) {
        OracleEntry entry;
        entry.delta = delta;
        try {
            DriveConfig d = drive;
            d.delta = delta;
            const auto ss = with_physical_phase(select_steady_state(params, d, Selection::LowestStable));
            const double e_s = d.e_s > 0.0 ? d.e_s : 1.0;
            entry.direct = response_direct_solve(params, ss, delta, e_s).a_plus;
            if (d.e_s <= 0.0) {
                // No signal: the linear response is still defined, but there is nothing to demodulate.
                entry.estimated = 0.0;
                entry.deviation = 1.0;
                entry.converged = false;
                entry.note = "signal power is zero";
                return entry;
            }
            const double t_final = options.periods * kTwoPi / std::abs(delta);
            const auto trace = integrate(params, d, t_final, steady_ansatz(params, d), options.integrate);
            if (trace.escape_time) {
                entry.converged = false;
                entry.note = "trajectory escaped at t = " + std::to_string(*trace.escape_time) + " s";
                entry.deviation = std::numeric_limits<double>::quiet_NaN();
                return entry;
            }
            const auto est = demodulate(trace, delta, options.demodulate);
            entry.estimated = est.a_plus;
            entry.deviation = std::abs(est.a_plus - entry.direct) / std::abs(entry.direct);
        } catch (const std::exception& e) {
            entry.converged = false;
            entry.deviation = std::numeric_limits<double>::quiet_NaN();
            entry.note = e.what();
        }
        return entry;
    };

    OracleReport report;
    report.entries.resize(deltas.size());
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < deltas.size(); start += threads) {
        std::vector<std::future<OracleEntry>> batch;
        const std::size_t stop = std::min(deltas.size(), start + threads);
        for (std::size_t i = start; i < stop; ++i) batch.push_back(std::async(std::launch::async, run_one, deltas[i]));
        for (std::size_t i = start; i < stop; ++i) report.entries[i] = batch[i - start].get();
    }

    std::vector<double> devs;
    for (const auto& e : report.entries) {
        if (e.converged) devs.push_back(e.deviation); else ++report.not_converged;
    }
    if (!devs.empty()) {
        report.max_deviation = *std::max_element(devs.begin(), devs.end());
        std::sort(devs.begin(), devs.end());
        const std::size_t m = devs.size() / 2;
        report.median_deviation = devs.size() % 2 ? devs[m] : 0.5 * (devs[m - 1] + devs[m]);
    }
    return report;
}

}  // namespace cem
