#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "cem/steady_state.hpp"

using namespace cem;

namespace {

// Brute-force reference: sign changes of the photon-number cubic on a dense
// log grid, refined by plain bisection.
std::vector<double> scan_roots(double kappa, double shift, double delta_p, double e2) {
    auto f = [&](double n) {
        const double d = delta_p - shift * n;
        return n * (kappa * kappa + d * d) - e2;
    };
    const double n_max = e2 / (kappa * kappa) * 1.01 + 1.0;
    std::vector<double> roots;
    const int steps = 200000;
    double lo = 0.0, f_lo = f(0.0);
    for (int i = 1; i <= steps; ++i) {
        const double hi = n_max * std::pow(10.0, -12.0 * (1.0 - double(i) / steps));
        const double f_hi = f(hi);
        if ((f_lo < 0.0) != (f_hi < 0.0)) {
            double a = lo, b = hi;
            for (int k = 0; k < 200 && b - a > 1e-15 * b; ++k) {
                const double m = 0.5 * (a + b);
                ((f(m) < 0.0) == (f(a) < 0.0) ? a : b) = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    return roots;
}

DriveConfig drive_at(const SystemParams& p, double power, double delta_p, double phase = 0.0) {
    return make_drive(p, {.pump_power = power, .delta_p = delta_p, .pump_phase = phase});
}

}  // namespace

TEST_CASE("real_cubic_roots on known factorisations") {
    auto r = real_cubic_roots(-6.0, 11.0, -6.0);  // (x-1)(x-2)(x-3)
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(2.0));
    CHECK(r[2] == doctest::Approx(3.0));
    r = real_cubic_roots(0.0, 1.0, -2.0);  // x^3 + x - 2, one real root at 1
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0));
}

TEST_CASE("blue sideband, 0.9 pW: single low-photon root") {
    const auto p = reference_params();
    const auto d = drive_at(p, 0.9e-12, -p.omega_n);
    const auto roots = photon_number_roots(p, d);
    REQUIRE(roots.n_p.size() == 1);
    const auto ref = scan_roots(p.kappa, p.kerr_shift(), d.delta_p, d.e_p * d.e_p);
    REQUIRE(ref.size() == 1);
    CHECK(roots.n_p[0] == doctest::Approx(ref[0]).epsilon(1e-9));
    CHECK(roots.n_p[0] == doctest::Approx(864).epsilon(0.01));
}

TEST_CASE("red sideband, 10 nW") {
    const auto p = reference_params();
    const auto ss = select_steady_state(p, drive_at(p, 10e-9, p.omega_n), Selection::Lowest);
    CHECK(ss.n_p == doctest::Approx(9.6e6).epsilon(0.01));
    CHECK(ss.q_s == doctest::Approx(2 * p.lambda_c * ss.n_p / p.omega_n).epsilon(1e-14));
    CHECK(ss.q_s == doctest::Approx(121).epsilon(0.01));
    CHECK(ss.a_s.imag() == 0.0);
    CHECK(ss.a_s.real() == doctest::Approx(std::sqrt(ss.n_p)));
    CHECK(ss.dynamically_stable);
}

TEST_CASE("bistable regime with a strong coupling") {
    auto p = reference_params();
    p.lambda_c *= 1000.0;
    const auto d = drive_at(p, 0.5e-12, p.omega_n);
    const auto roots = photon_number_roots(p, d);
    const auto ref = scan_roots(p.kappa, p.kerr_shift(), d.delta_p, d.e_p * d.e_p);
    REQUIRE(ref.size() == 3);
    REQUIRE(roots.n_p.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(roots.n_p[i] == doctest::Approx(ref[i]).epsilon(1e-9));

    const auto all = steady_state(p, d, Selection::All);
    REQUIRE(all.size() == 3);
    CHECK(all[0].branch == Branch::Lower);
    CHECK(all[1].branch == Branch::Middle);
    CHECK(all[2].branch == Branch::Upper);
    CHECK_FALSE(all[1].dynamically_stable);
    CHECK(select_steady_state(p, d, Selection::Middle).n_p == doctest::Approx(ref[1]).epsilon(1e-9));
}

TEST_CASE("middle branch missing outside the bistable window") {
    const auto p = reference_params();
    CHECK_THROWS_AS(select_steady_state(p, drive_at(p, 1e-12, p.omega_n), Selection::Middle), NoSuchBranch);
}

TEST_CASE("zero pump gives the empty cavity") {
    const auto p = reference_params();
    const auto ss = select_steady_state(p, drive_at(p, 0.0, p.omega_n));
    CHECK(ss.n_p == 0.0);
    CHECK(ss.q_s == 0.0);
}

TEST_CASE("physical amplitude solves the field equation for any pump phase") {
    const auto p = reference_params();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> phase(-3.14159, 3.14159);
    for (int i = 0; i < 10; ++i) {
        const auto d = drive_at(p, 0.5e-12, -p.omega_n, phase(rng));
        const auto ss = select_steady_state(p, d);
        const auto a = ss.physical_amplitude();
        // 0 = -(i Delta_p + kappa) a + i lambda Q_s a + E_p
        const auto residual = -std::complex<double>(p.kappa, d.delta_p - p.lambda_c * ss.q_s) * a + d.pump_amplitude();
        CHECK(std::abs(residual) < 1e-9 * std::abs(d.pump_amplitude()));
        CHECK(std::norm(a) == doctest::Approx(ss.n_p));
        CHECK(with_physical_phase(ss).a_s == a);
    }
}

TEST_CASE("randomised roots agree with the scan") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double kappa = std::pow(10.0, 4.0 + 3.0 * u(rng));
        const double shift = std::pow(10.0, -6.0 + 6.0 * u(rng));
        const double delta_p = kappa * (-10.0 + 20.0 * u(rng));
        const double e2 = kappa * kappa * kappa / shift * std::pow(10.0, -3.0 + 4.0 * u(rng));
        SystemParams p;
        p.kappa = kappa;
        p.omega_n = 1.0;
        p.lambda_c = std::sqrt(shift / 2.0);
        p.gamma_n = 1e-6;
        DriveConfig d;
        d.delta_p = delta_p;
        d.e_p = std::sqrt(e2);
        const auto roots = photon_number_roots(p, d);
        const auto ref = scan_roots(kappa, p.kerr_shift(), delta_p, e2);
        if (roots.degenerate) continue;
        REQUIRE(roots.n_p.size() == ref.size());
        for (std::size_t k = 0; k < ref.size(); ++k) {
            CHECK(roots.n_p[k] == doctest::Approx(ref[k]).epsilon(1e-7));
            CHECK(cubic_relative_residual(p, e2, delta_p, roots.n_p[k]) < 1e-10);
        }
    }
}
