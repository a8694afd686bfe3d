#include "cem/linear_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace cem {
namespace {

constexpr double kMaxCondition = 1e12;
constexpr cplx kI{0.0, 1.0};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ClosedFormTerms closed_form_terms(const SystemParams& params, double n_p, double delta) {
    const double wn = params.omega_n;
    ClosedFormTerms t;
    t.eta = (wn * wn) / cplx(wn * wn - delta * delta, -params.gamma_n * delta);
    t.alpha = params.alpha();
    const cplx k = t.alpha * t.eta * wn * n_p;
    t.beta = k * k;
    t.theta = kI * t.alpha * wn * n_p * (t.eta + 1.0);
    return t;
}

cplx response_closed_form(const SystemParams& params, const SteadyState& ss, double delta, double e_s) {
    const auto t = closed_form_terms(params, ss.n_p, delta);
    const double kappa = params.kappa;
    const double dp = ss.delta_p;
    const cplx num = kI * (delta + dp) - (kappa + t.theta);
    const cplx u = cplx(delta, kappa);
    const cplx v = t.theta - kI * dp;
    const cplx den = u * u + v * v + t.beta;
    const double scale = std::max({std::norm(u), std::norm(v), std::abs(t.beta)});
    if (!(std::abs(den) > 1e-12 * scale)) {
        throw PoleError("closed-form denominator vanishes", delta);
    }
    return num / den * e_s;
}

SidebandAmplitudes response_direct_solve(const SystemParams& params, const SteadyState& ss, double delta,
                                         double e_s) {
    const double kappa = params.kappa;
    const double wn = params.omega_n;
    const double lam = params.lambda_c;
    const double detuning = ss.delta_p - lam * ss.q_s;
    const cplx a = ss.a_s;

    // Unknowns (a_+, conj(a_-), Q_+).
    Eigen::Matrix3cd m;
    m << cplx(kappa, detuning - delta), 0.0, -kI * lam * a,
         0.0, cplx(kappa, -(detuning + delta)), kI * lam * std::conj(a),
         -2.0 * wn * lam * std::conj(a), -2.0 * wn * lam * a, cplx(wn * wn - delta * delta, -params.gamma_n * delta);
    Eigen::Vector3cd rhs(e_s, 0.0, 0.0);

    // Row then column equilibration; the condition number is judged on the
    // balanced system.
    Eigen::Vector3d row_scale, col_scale;
    for (int i = 0; i < 3; ++i) {
        const double r = m.row(i).cwiseAbs().maxCoeff();
        row_scale[i] = r > 0.0 ? 1.0 / r : 1.0;
    }
    m = row_scale.asDiagonal() * m;
    rhs = row_scale.cast<cplx>().asDiagonal() * rhs;
    for (int j = 0; j < 3; ++j) {
        const double c = m.col(j).cwiseAbs().maxCoeff();
        col_scale[j] = c > 0.0 ? 1.0 / c : 1.0;
    }
    m = m * col_scale.asDiagonal();

    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(m);
    const auto& sv = svd.singularValues();
    const double condition = sv[2] > 0.0 ? sv[0] / sv[2] : std::numeric_limits<double>::infinity();
    if (!(condition <= kMaxCondition)) {
        throw PoleError("linearized response matrix is singular (condition " + std::to_string(condition) + ")",
                        delta);
    }
    const Eigen::Vector3cd y = m.partialPivLu().solve(rhs);
    SidebandAmplitudes out;
    out.a_plus = y[0] * col_scale[0];
    out.a_minus = std::conj(y[1] * col_scale[1]);
    out.q_plus = y[2] * col_scale[2];
    out.condition = condition;
    return out;
}

std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::Critical: return "critical";
        case Normalization::Literal: return "literal";
        case Normalization::SingleSided: return "single-sided";
    }
    return "unknown";
}

Normalization parse_normalization(const std::string& s) {
    if (s == "critical") return Normalization::Critical;
    if (s == "literal") return Normalization::Literal;
    if (s == "single-sided") return Normalization::SingleSided;
    throw ConfigError("unknown normalization '" + s + "' (critical|literal|single-sided)");
}

cplx transmission(cplx a_plus, double e_s, const SystemParams& params, Normalization normalization) {
    double c = params.kappa;
    switch (normalization) {
        case Normalization::Critical: c = params.kappa; break;
        case Normalization::Literal: c = std::sqrt(2.0 * params.kappa); break;
        case Normalization::SingleSided: c = 2.0 * params.kappa; break;
    }
    return 1.0 - c * (a_plus / e_s);
}

ResponsePoint response_point(const SystemParams& params, const SteadyState& ss, double delta_s, double e_s,
                             Normalization normalization) {
    ResponsePoint p;
    p.delta_s = delta_s;
    p.delta = delta_s + ss.delta_p;
    try {
        const auto direct = response_direct_solve(params, ss, p.delta, e_s);
        p.a_plus = direct.a_plus;
        p.a_minus = direct.a_minus;
        p.q_plus = direct.q_plus;
        p.t_p = transmission(p.a_plus, e_s, params, normalization);
        p.transmission = std::norm(p.t_p);
    } catch (const PoleError&) {
        p.pole = true;
        p.a_plus = p.a_minus = p.q_plus = p.t_p = cplx(nan(), nan());
        p.transmission = nan();
    }
    try {
        p.a_plus_closed_form = response_closed_form(params, ss, p.delta, e_s);
        p.closed_form_deviation = p.pole ? nan() : std::abs(p.a_plus_closed_form - p.a_plus) / std::abs(p.a_plus);
    } catch (const PoleError&) {
        p.a_plus_closed_form = cplx(nan(), nan());
        p.closed_form_deviation = nan();
    }
    return p;
}

std::size_t Spectrum::flagged() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.pole; }));
}

Spectrum sweep_spectrum(const SystemParams& params, const DriveConfig& drive, const std::vector<double>& delta_s_grid,
                        Normalization normalization, Selection selection) {
    const bool ascending = std::is_sorted(delta_s_grid.begin(), delta_s_grid.end());
    const bool descending = std::is_sorted(delta_s_grid.rbegin(), delta_s_grid.rend());
    if (!ascending && !descending) throw std::invalid_argument("sweep_spectrum: detuning grid must be monotone");

    Spectrum s;
    s.steady = select_steady_state(params, drive, selection);
    s.stability = analyze_stability(params, s.steady);
    s.normalization = normalization;
    s.e_s = drive.e_s > 0.0 ? drive.e_s : 1.0;
    s.points.reserve(delta_s_grid.size());
    for (double ds : delta_s_grid) s.points.push_back(response_point(params, s.steady, ds, s.e_s, normalization));
    return s;
}

std::vector<double> linear_grid(double center, double half_span, std::size_t points) {
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = center;
        return grid;
    }
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = center - half_span + 2.0 * half_span * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

double default_half_span(const SystemParams& params, double n_p) {
    return 50.0 * params.gamma_n * (1.0 + cooperativity(params, n_p));
}

std::vector<GainPoint> gain_curve(const SystemParams& params, const std::vector<double>& powers,
                                  Normalization normalization) {
    if (!std::is_sorted(powers.begin(), powers.end())) {
        throw std::invalid_argument("gain_curve: powers must be ascending");
    }
    std::vector<GainPoint> curve;
    curve.reserve(powers.size());
    const double delta_p = -params.omega_n;
    for (double power : powers) {
        const auto drive = make_drive(params, {.pump_power = power, .delta_p = delta_p});
        const auto ss = select_steady_state(params, drive, Selection::LowestStable);
        GainPoint g;
        g.power = power;
        g.n_p = ss.n_p;
        g.cooperativity = cooperativity(params, ss.n_p);
        g.stable = ss.dynamically_stable;
        const auto point = response_point(params, ss, 0.0, 1.0, normalization);
        g.pole = point.pole;
        g.gain = point.transmission;
        curve.push_back(g);
    }
    return curve;
}

}  // namespace cem
