#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cem/experiment.hpp"
#include "cem/output.hpp"

using namespace cem;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("cem_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("presets validate and round trip through JSON") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const auto spec = preset(name);
        CHECK_NOTHROW(validate(spec));
        const auto back = spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
        CHECK(back == spec);
    }
    CHECK_THROWS_AS(preset("fig9"), ConfigError);
}

TEST_CASE("params JSON round trip is exact") {
    const auto p = reference_params();
    CHECK(params_from_json(nlohmann::json::parse(to_json(p).dump())) == p);
}

TEST_CASE("invalid specs are rejected") {
    auto spec = preset("fig2b");
    SUBCASE("empty powers") { spec.pump_powers.clear(); }
    SUBCASE("non monotone powers") { spec.pump_powers = {1e-12, 0.0, 2e-12}; }
    SUBCASE("negative power") { spec.pump_powers = {-1e-12}; }
    SUBCASE("no detunings") { spec.detunings.clear(); }
    SUBCASE("zero points") { spec.points = 0; }
    SUBCASE("bad span") { spec.half_span = -1.0; }
    SUBCASE("bad params") { spec.params.kappa = 0.0; }
    CHECK_THROWS_AS(validate(spec), ConfigError);
}

TEST_CASE("runs are deterministic") {
    auto spec = preset("fig2b");
    spec.points = 201;
    spec.format = OutputFormat::Both;
    const auto a = scratch("det_a"), b = scratch("det_b");
    spec.out_dir = a.string();
    const auto ra = run(spec);
    spec.out_dir = b.string();
    const auto rb = run(spec);
    CHECK(ra.exit_code == 0);
    REQUIRE(ra.files.size() == rb.files.size());
    REQUIRE_FALSE(ra.files.empty());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        const auto fa = fs::path(ra.files[i]);
        CHECK(fa.filename() == fs::path(rb.files[i]).filename());
        if (fa.extension() == ".csv") CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("spectrum CSV has the documented columns") {
    const auto p = reference_params();
    const auto d = make_drive(p, {.pump_power = 0.3e-12, .signal_power = 0.3e-18, .delta_p = -p.omega_n});
    const auto csv = spectrum_csv(sweep_spectrum(p, d, linear_grid(0.0, 1000.0, 11)));
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "delta_s_rad_s,transmission,re_tp,im_tp,re_a_plus,im_a_plus,re_a_minus,im_a_minus,closedform_deviation,stable_flag");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 11);
}

TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
