#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cem/params.hpp"

using namespace cem;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("reference device converts cycle units to rad/s") {
    const auto p = reference_params();
    CHECK(p.omega_c == doctest::Approx(2 * kPi * 7.5e9).epsilon(1e-14));
    CHECK(p.omega_n == doctest::Approx(2 * kPi * 6.3e6).epsilon(1e-14));
    CHECK(p.kappa == doctest::Approx(2 * kPi * 600e3).epsilon(1e-14));
    CHECK(p.lambda_c == 250.0);
    CHECK(p.gamma_n == doctest::Approx(2 * kPi * 6.3e6 / 1e6).epsilon(1e-14));
    CHECK(p.resolved_sideband());
    CHECK(p.kerr_shift() == doctest::Approx(2 * 250.0 * 250.0 / (2 * kPi * 6.3e6)));
}

TEST_CASE("plain Hz and 2pi*Hz tags both mean cycles") {
    RawConfig a = reference_raw();
    a["omega_n"] = {6.3, "MHz"};
    RawConfig b = reference_raw();
    b["omega_n"] = {2 * kPi * 6.3e6, "rad/s"};
    CHECK(build_params(a).omega_n == doctest::Approx(build_params(b).omega_n).epsilon(1e-15));
}

TEST_CASE("lambda unit override") {
    const RawConfig raw = reference_raw();
    CHECK(build_params(raw, {LambdaUnits::Angular}).lambda_c == 250.0);
    CHECK(build_params(raw, {LambdaUnits::Hz}).lambda_c == doctest::Approx(2 * kPi * 250.0));
    RawConfig hz = raw;
    hz["lambda"] = {250.0, "Hz"};
    CHECK(build_params(hz).lambda_c == doctest::Approx(2 * kPi * 250.0));
    CHECK(build_params(hz, {LambdaUnits::Angular}).lambda_c == doctest::Approx(250.0));
}

TEST_CASE("lambda from mass and frequency pull") {
    RawConfig raw = reference_raw();
    raw.erase("lambda");
    raw["mass"] = {1e-15, "kg"};
    raw["g_pull"] = {1e12, "rad/s/m"};
    const auto p = build_params(raw);
    const double x_zpf = std::sqrt(1.054571817e-34 / (2 * p.omega_n * 1e-15));
    CHECK(p.lambda_c == doctest::Approx(1e12 * x_zpf).epsilon(1e-14));
}

TEST_CASE("round trip through the text format") {
    const auto p = reference_params();
    const auto text = serialize(p);
    const auto parsed = parse_config_text(text);
    CHECK(parsed.text.empty());
    CHECK(build_params(parsed.numeric) == p);
    CHECK(build_params(to_raw(p)) == p);
}

TEST_CASE("config parsing is order insensitive and skips comments") {
    const std::string a =
        "# device\nomega_c = 7.5 2pi*GHz\nomega_n = 6.3 2pi*MHz\nkappa = 600 2pi*kHz\nlambda = 250 rad/s\nq_n = 1e6\n";
    const std::string b =
        "q_n = 1e6   # quality\nlambda = 250 rad/s\n\nkappa = 600 2pi*kHz\nomega_n = 6.3 2pi*MHz\nomega_c = 7.5 2pi*GHz\n";
    CHECK(build_params(parse_config_text(a).numeric) == build_params(parse_config_text(b).numeric));
    CHECK(build_params(parse_config_text(a).numeric) == reference_params());
}

TEST_CASE("config errors") {
    RawConfig raw = reference_raw();
    SUBCASE("missing field") {
        raw.erase("kappa");
        CHECK_THROWS_AS(build_params(raw), ConfigError);
    }
    SUBCASE("missing unit") {
        raw["kappa"].unit = "";
        CHECK_THROWS_AS(build_params(raw), ConfigError);
    }
    SUBCASE("unknown unit") {
        raw["kappa"].unit = "furlong";
        CHECK_THROWS_AS(build_params(raw), ConfigError);
    }
    SUBCASE("unknown key") {
        raw["bogus"] = {1.0, "rad/s"};
        CHECK_THROWS_AS(build_params(raw), ConfigError);
    }
    SUBCASE("inconsistent damping") {
        raw["gamma_n"] = {100.0, "rad/s"};
        CHECK_THROWS_AS(build_params(raw), ConfigError);
    }
    SUBCASE("no damping at all") {
        raw.erase("q_n");
        CHECK_THROWS_AS(build_params(raw), ConfigError);
    }
    SUBCASE("duplicate key in text") {
        CHECK_THROWS_AS(parse_config_text("kappa = 1 rad/s\nkappa = 2 rad/s\n"), ConfigError);
    }
}

TEST_CASE("quantity parsing") {
    CHECK(parse_power("0.9pW") == doctest::Approx(0.9e-12));
    CHECK(parse_power("10 nW") == doctest::Approx(10e-9));
    CHECK(parse_frequency("2pi*6.3MHz") == doctest::Approx(2 * kPi * 6.3e6));
    CHECK(parse_frequency("-1.5e3 rad/s") == -1.5e3);
    CHECK_THROWS_AS(parse_power("3"), ConfigError);
    CHECK_THROWS_AS(parse_power("-1 pW"), ConfigError);
    CHECK_THROWS_AS(parse_frequency("abc"), ConfigError);
}

TEST_CASE("drive amplitude") {
    const double omega = 2 * kPi * 7.5e9;
    const double kappa = 2 * kPi * 600e3;
    const double p = 0.3e-12;
    CHECK(drive_amplitude(p, omega, kappa) == doctest::Approx(std::sqrt(2 * p * kappa / (1.054571817e-34 * omega))));
    CHECK(drive_amplitude(0.0, omega, kappa) == 0.0);
    double prev = 0.0;
    for (double pw : {1e-15, 1e-13, 1e-12, 1e-9}) {
        const double e = drive_amplitude(pw, omega, kappa);
        CHECK(e > prev);
        prev = e;
    }
    CHECK_THROWS_AS(drive_amplitude(-1.0, omega, kappa), std::domain_error);
    CHECK_THROWS_AS(drive_amplitude(1.0, 0.0, kappa), std::domain_error);
    CHECK_THROWS_AS(drive_amplitude(1.0, omega, -1.0), std::domain_error);
}

TEST_CASE("cooperativity inversion") {
    const auto p = reference_params();
    const double n = photons_for_cooperativity(p, 1.0);
    CHECK(n == doctest::Approx(p.gamma_n * p.kappa / (4 * 250.0 * 250.0)));
    CHECK(cooperativity(p, n) == doctest::Approx(1.0));
    CHECK(n == doctest::Approx(597).epsilon(0.01));
}

TEST_CASE("make_drive uses omega_c unless tone frequencies are given") {
    const auto p = reference_params();
    const auto d = make_drive(p, {.pump_power = 1e-12, .signal_power = 1e-18, .delta_p = -p.omega_n});
    CHECK(d.e_p == doctest::Approx(drive_amplitude(1e-12, p.omega_c, p.kappa)));
    CHECK(d.e_s == doctest::Approx(drive_amplitude(1e-18, p.omega_c, p.kappa)));
    const auto d2 = make_drive(p, {.pump_power = 1e-12, .omega_p = p.omega_c + p.omega_n});
    CHECK(d2.e_p < d.e_p);
    CHECK_THROWS_AS(make_drive(p, {.pump_power = -1.0}), ConfigError);
}
