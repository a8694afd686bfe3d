#include "cem/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cem/stability.hpp"

namespace cem {

std::string to_string(Branch b) {
    switch (b) {
        case Branch::OnlyRoot: return "only-root";
        case Branch::Lower: return "lower";
        case Branch::Middle: return "middle";
        case Branch::Upper: return "upper";
    }
    return "unknown";
}

std::vector<double> real_cubic_roots(double a, double b, double c) {
    // Depressed cubic y^3 + p y + q with x = y - a/3.
    const double shift = a / 3.0;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    std::vector<double> roots;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (p == 0.0 && q == 0.0) {
        roots = {-shift, -shift, -shift};
    } else if (disc > 0.0) {
        // One real root; Cardano with the cancellation-free sign choice.
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + (q <= 0.0 ? sq : -sq));
        const double y = u - p / (3.0 * u);
        roots = {y - shift};
    } else {
        const double r = std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (2.0 * p * r), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            roots.push_back(2.0 * r * std::cos(phi - kTwoPi * k / 3.0) - shift);
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

// Scaled cubic g(x) - F with x = kerr_shift * n / kappa, d = Delta_p / kappa:
// g(x) = x (1 + (d - x)^2).
struct ScaledCubic {
    double d;
    double f;
    [[nodiscard]] double g(double x) const { return x * (1.0 + (d - x) * (d - x)); }
    [[nodiscard]] double value(double x) const { return g(x) - f; }
    [[nodiscard]] double slope(double x) const { return 3.0 * x * x - 4.0 * d * x + 1.0 + d * d; }
};

// Newton iteration kept inside a sign-changing bracket [lo, hi].
double polish(const ScaledCubic& cubic, double guess, double lo, double hi) {
    const bool rising = cubic.value(lo) <= 0.0;
    double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double v = cubic.value(x);
        if (v == 0.0) return x;
        if ((v < 0.0) == rising) lo = x; else hi = x;
        const double s = cubic.slope(x);
        double next = (s != 0.0) ? x - v / s : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), 1e-300)) {
            return next;
        }
        x = next;
        if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) break;
    }
    return x;
}

double nearest(const std::vector<double>& candidates, double lo, double hi) {
    for (double c : candidates) {
        if (c >= lo && c <= hi) return c;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

PhotonNumberRoots photon_number_roots(const SystemParams& params, const DriveConfig& drive) {
    PhotonNumberRoots out;
    const double e2 = drive.e_p * drive.e_p;
    if (e2 == 0.0) {
        out.n_p = {0.0};
        return out;
    }
    const double shift = params.kerr_shift();
    const double kappa = params.kappa;
    const ScaledCubic cubic{drive.delta_p / kappa, shift * e2 / (kappa * kappa * kappa)};
    const double d = cubic.d;
    const double f = cubic.f;

    // x^3 - 2d x^2 + (1 + d^2) x - F
    const auto estimates = real_cubic_roots(-2.0 * d, 1.0 + d * d, -f);

    std::vector<double> xs;
    const double disc = 4.0 * d * d - 12.0;
    bool folded = false;
    double x1 = 0.0, x2 = 0.0;
    if (disc > 0.0 && d > 0.0) {
        x1 = (4.0 * d - std::sqrt(disc)) / 6.0;
        x2 = (1.0 + d * d) / (3.0 * x1);  // product of the critical points
        folded = true;
    }
    // Every root lies in (0, F] because g(x) >= x.
    const double upper = std::max(f, 1e-300);
    const double tol = 1e-12 * f;
    if (!folded) {
        xs.push_back(polish(cubic, nearest(estimates, 0.0, upper), 0.0, upper));
    } else {
        const double g_max = cubic.g(x1);  // local maximum of g
        const double g_min = cubic.g(x2);  // local minimum of g
        if (std::abs(f - g_max) <= tol) {
            out.degenerate = true;
            xs.push_back(x1);
            xs.push_back(polish(cubic, nearest(estimates, x2, upper), x2, upper));
        } else if (std::abs(f - g_min) <= tol) {
            out.degenerate = true;
            xs.push_back(polish(cubic, nearest(estimates, 0.0, x1), 0.0, x1));
            xs.push_back(x2);
        } else if (f < g_min) {
            xs.push_back(polish(cubic, nearest(estimates, 0.0, x1), 0.0, x1));
        } else if (f > g_max) {
            xs.push_back(polish(cubic, nearest(estimates, x2, upper), x2, upper));
        } else {
            xs.push_back(polish(cubic, nearest(estimates, 0.0, x1), 0.0, x1));
            xs.push_back(polish(cubic, nearest(estimates, x1, x2), x1, x2));
            xs.push_back(polish(cubic, nearest(estimates, x2, upper), x2, upper));
        }
    }
    for (double x : xs) out.n_p.push_back(x * kappa / shift);
    return out;
}

double cubic_relative_residual(const SystemParams& params, double e_p_squared, double delta_p, double n) {
    const double detuning = delta_p - params.kerr_shift() * n;
    const double lhs = n * (params.kappa * params.kappa + detuning * detuning);
    const double scale = std::max(e_p_squared, params.kappa * params.kappa * n);
    if (scale == 0.0) return std::abs(lhs);
    return std::abs(lhs - e_p_squared) / scale;
}

SteadyState with_physical_phase(const SteadyState& ss) {
    SteadyState out = ss;
    out.a_s = ss.physical_amplitude();
    out.phase = 0.0;
    return out;
}

std::vector<SteadyState> steady_state(const SystemParams& params, const DriveConfig& drive, Selection selection) {
    const auto roots = photon_number_roots(params, drive);
    std::vector<SteadyState> states;
    const std::size_t count = roots.n_p.size();
    for (std::size_t i = 0; i < count; ++i) {
        SteadyState ss;
        ss.n_p = roots.n_p[i];
        ss.q_s = 2.0 * params.lambda_c * ss.n_p / params.omega_n;
        ss.delta_p = drive.delta_p;
        ss.degenerate = roots.degenerate;
        if (count == 1) {
            ss.branch = Branch::OnlyRoot;
        } else if (i == 0) {
            ss.branch = Branch::Lower;
        } else if (i + 1 == count) {
            ss.branch = Branch::Upper;
        } else {
            ss.branch = Branch::Middle;
        }
        const std::complex<double> physical =
            drive.pump_amplitude() / std::complex<double>(params.kappa, drive.delta_p - params.lambda_c * ss.q_s);
        ss.a_s = std::sqrt(ss.n_p);
        ss.phase = physical == 0.0 ? 0.0 : std::arg(physical);
        ss.dynamically_stable = analyze_stability(params, ss).stable;
        states.push_back(ss);
    }

    switch (selection) {
        case Selection::All: return states;
        case Selection::Lowest: return {states.front()};
        case Selection::Highest: return {states.back()};
        case Selection::Middle:
            for (const auto& s : states) {
                if (s.branch == Branch::Middle) return {s};
            }
            throw NoSuchBranch("no middle branch: the cubic has " + std::to_string(count) + " distinct root(s)");
        case Selection::LowestStable:
            for (const auto& s : states) {
                if (s.dynamically_stable) return {s};
            }
            return {states.front()};
    }
    return states;
}

SteadyState select_steady_state(const SystemParams& params, const DriveConfig& drive, Selection selection) {
    if (selection == Selection::All) selection = Selection::LowestStable;
    return steady_state(params, drive, selection).front();
}

}  // namespace cem
