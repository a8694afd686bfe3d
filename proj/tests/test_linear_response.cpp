#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "cem/linear_response.hpp"

using namespace cem;

namespace {

DriveConfig drive_at(const SystemParams& p, double power, double delta_p, double phase = 0.0) {
    return make_drive(p, {.pump_power = power, .signal_power = 1e-6 * power, .delta_p = delta_p, .pump_phase = phase});
}

// Sideband equations written out directly from the fluctuation ansatz
// a = A + a+ e^{-i d t} + a- e^{i d t}, Q = Q_s + Q+ e^{-i d t} + c.c.
cplx reference_a_plus(const SystemParams& p, double n_p, double delta_p, cplx amp, double delta, double e_s) {
    const double q_s = 2.0 * p.lambda_c * n_p / p.omega_n;
    const double det = delta_p - p.lambda_c * q_s;
    const cplx i(0.0, 1.0);
    Eigen::Matrix3cd m;
    m << p.kappa + i * (det - delta), 0.0, -i * p.lambda_c * amp,
        0.0, p.kappa - i * (det + delta), i * p.lambda_c * std::conj(amp),
        -2.0 * p.omega_n * p.lambda_c * std::conj(amp), -2.0 * p.omega_n * p.lambda_c * amp,
        p.omega_n * p.omega_n - delta * delta - i * p.gamma_n * delta;
    Eigen::Vector3cd rhs(e_s, 0.0, 0.0);
    return m.fullPivLu().solve(rhs)[0];
}

}  // namespace

TEST_CASE("pump off reduces to the bare cavity Lorentzian") {
    const auto p = reference_params();
    const auto d = make_drive(p, {.delta_p = -p.omega_n});
    const auto spec = sweep_spectrum(p, d, linear_grid(0.0, 5.0 * p.kappa, 201));
    for (const auto& pt : spec.points) {
        const double x = pt.delta_s;
        CHECK(pt.transmission == doctest::Approx(x * x / (p.kappa * p.kappa + x * x)).epsilon(1e-12));
        CHECK(std::abs(pt.a_minus) == 0.0);
    }
}

TEST_CASE("direct solve matches an unscaled reference solve") {
    const auto p = reference_params();
    for (double power : {0.1e-12, 0.5e-12}) {
        for (double dp : {p.omega_n, -p.omega_n}) {
            const auto d = drive_at(p, power, dp);
            const auto ss = select_steady_state(p, d);
            for (double delta : linear_grid(-dp, 200.0 * p.gamma_n, 41)) {
                const auto got = response_direct_solve(p, ss, delta, d.e_s).a_plus;
                const auto want = reference_a_plus(p, ss.n_p, dp, ss.a_s, delta, d.e_s);
                CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
            }
        }
    }
}

TEST_CASE("closed form agrees with the direct solve") {
    const auto p = reference_params();
    for (double power : {0.3e-12, 0.5e-12}) {
        const auto d = drive_at(p, power, -p.omega_n);
        const auto ss = select_steady_state(p, d);
        for (double delta : linear_grid(p.omega_n, 3000.0, 101)) {
            const auto direct = response_direct_solve(p, ss, delta, d.e_s).a_plus;
            const auto closed = response_closed_form(p, ss, delta, d.e_s);
            CHECK(std::abs(closed - direct) <= 1e-8 * std::abs(direct));
        }
    }
}

TEST_CASE("response is linear in the probe amplitude") {
    const auto p = reference_params();
    const auto d = drive_at(p, 0.3e-12, p.omega_n);
    const auto ss = select_steady_state(p, d);
    const auto one = response_direct_solve(p, ss, p.omega_n + 50.0, 1.0);
    const auto two = response_direct_solve(p, ss, p.omega_n + 50.0, 2.0);
    CHECK(std::abs(two.a_plus - 2.0 * one.a_plus) < 1e-12 * std::abs(two.a_plus));
    CHECK(std::abs(two.q_plus - 2.0 * one.q_plus) < 1e-12 * std::abs(two.q_plus));
}

TEST_CASE("mechanical response peaks at the resonator frequency") {
    const auto p = reference_params();
    const auto d = drive_at(p, 0.1e-12, p.omega_n);
    const auto ss = select_steady_state(p, d);
    double best = 0.0, arg = 0.0;
    for (double delta : linear_grid(p.omega_n, 20.0 * p.gamma_n, 4001)) {
        const double m = std::abs(response_direct_solve(p, ss, delta, 1.0).q_plus);
        if (m > best) {
            best = m;
            arg = delta;
        }
    }
    CHECK(std::abs(arg - p.omega_n) < 2.0 * p.gamma_n);
}

TEST_CASE("normalization conventions") {
    const auto p = reference_params();
    const cplx a(0.3, -0.2);
    const double e_s = 2.0;
    CHECK(transmission(a, e_s, p, Normalization::Critical) == 1.0 - p.kappa * a / e_s);
    CHECK(std::abs(transmission(a, e_s, p, Normalization::Literal) - (1.0 - std::sqrt(2 * p.kappa) * a / e_s)) < 1e-12);
    CHECK(transmission(a, e_s, p, Normalization::SingleSided) == 1.0 - 2.0 * p.kappa * a / e_s);
    for (auto n : {Normalization::Critical, Normalization::Literal, Normalization::SingleSided}) {
        CHECK(parse_normalization(to_string(n)) == n);
    }
    CHECK_THROWS(parse_normalization("bogus"));
}

TEST_CASE("gain under blue pumping follows the cooperativity") {
    const auto p = reference_params();
    const auto curve = gain_curve(p, {0.0, 0.3e-12, 0.5e-12, 0.8e-12, 0.9e-12});
    REQUIRE(curve.size() == 5);
    CHECK(curve[0].gain == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double c = curve[i].cooperativity;
        const double rwa = (c / 2) * (c / 2) / ((1 - c / 2) * (1 - c / 2));
        CHECK(curve[i].gain == doctest::Approx(rwa).epsilon(0.05));
        CHECK(curve[i].gain > curve[i - 1].gain);
        CHECK(curve[i].stable);
    }
}

TEST_CASE("red sideband transmission at resonance approaches unity") {
    const auto p = reference_params();
    double prev = -1.0;
    for (double power : {0.1e-12, 1e-12, 10e-12, 100e-12}) {
        const auto spec = sweep_spectrum(p, drive_at(p, power, p.omega_n), {-10.0, 0.0, 10.0});
        const double t0 = spec.points[1].transmission;
        const double c = spec.stability.cooperativity;
        CHECK(t0 == doctest::Approx((c / 2) * (c / 2) / ((1 + c / 2) * (1 + c / 2))).epsilon(0.02));
        CHECK(t0 > prev);
        prev = t0;
    }
}

TEST_CASE("grids") {
    const auto g = linear_grid(1.0, 2.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == -1.0);
    CHECK(g[2] == 1.0);
    CHECK(g.back() == 3.0);
    const auto p = reference_params();
    CHECK_THROWS(sweep_spectrum(p, make_drive(p, {}), {0.0, 2.0, 1.0}));
}
