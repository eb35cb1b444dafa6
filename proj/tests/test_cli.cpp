#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "opo/commands.hpp"
#include "opo/error.hpp"

using namespace opo;
namespace fs = std::filesystem;

namespace {

const std::string kScenario = std::string(OPO_SCENARIO_DIR) + "/paper.scenario";

CommandContext paper_context() {
    CommandContext ctx;
    ctx.scenario = load_scenario(kScenario);
    ctx.scenario_dir = OPO_SCENARIO_DIR;
    return ctx;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("opo_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "opo");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), err);
    if (err_text)
        *err_text = err.str();
    return code;
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        out.emplace_back();
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ','))
            out.back().push_back(cell);
    }
    return out;
}

fs::path write_scenario(const fs::path& dir, const std::string& text) {
    fs::create_directories(dir);
    const auto path = dir / "test.scenario";
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("supermode table of the paper basis") {
    const auto table = rows(supermodes_csv(paper_context()));
    REQUIRE(table.size() == 5);
    CHECK(table[0][0] == "index");
    CHECK(table[0][1] == "lambda_relative");
    CHECK(table[0][2] == "threshold_w");
    CHECK(table[0].size() == 7);
    CHECK(std::stod(table[1][1]) == 1.0);
    CHECK(std::stod(table[2][1]) == doctest::Approx(-1.0));
    CHECK(std::stod(table[3][1]) == doctest::Approx(0.64).epsilon(1e-6));
    CHECK(std::stod(table[1][2]) == doctest::Approx(0.25));
    // block structure: TEM00 pair supermodes do not touch TEM10/TEM01
    CHECK(std::stod(table[1][5]) == 0.0);
    CHECK(std::stod(table[3][3]) == 0.0);
}

TEST_CASE("single-mode basis gives one row") {
    auto ctx = paper_context();
    ctx.scenario.modes = {{1, 0, 0.0}};
    const auto table = rows(supermodes_csv(ctx));
    REQUIRE(table.size() == 2);
    CHECK(std::stod(table[1][1]) == 1.0);
    CHECK(std::stod(table[1][3]) == 1.0);
}

TEST_CASE("threshold disagreement is reported as a warning") {
    auto ctx = paper_context();
    std::ostringstream diag;
    ctx.diagnostics = &diag;
    supermodes_csv(ctx);
    CHECK(diag.str().find("610 mW") != std::string::npos);
}

TEST_CASE("spectrum at the fitted operating point") {
    auto ctx = paper_context();
    const auto table = rows(spectrum_csv(ctx, 3));
    CHECK(table[0] == std::vector<std::string>{"frequency_hz", "v_min", "v_max", "v_min_db", "v_max_db"});
    CHECK(std::stod(table[1][3]) == doctest::Approx(-1.0).epsilon(0.01));
    CHECK(std::stod(rows(spectrum_csv(ctx, 1))[1][3]) == doctest::Approx(-1.5).epsilon(0.01));
    CHECK(spectrum_csv(ctx, 3) == spectrum_csv(ctx, 3));
}

TEST_CASE("spectrum errors") {
    auto ctx = paper_context();
    ctx.scenario.pump_power_mw = 400;
    CHECK_THROWS_AS(spectrum_csv(ctx, 1), PhysicsError);
    CHECK_NOTHROW(spectrum_csv(ctx, 3));
    CHECK_THROWS_AS(spectrum_csv(ctx, 5), ConfigError);
    CHECK_THROWS_AS(spectrum_csv(ctx, 0), ConfigError);
}

TEST_CASE("threshold scan clamps") {
    auto ctx = paper_context();
    const auto table = rows(threshold_scan_csv(ctx, 3));
    REQUIRE(table.size() == ctx.scenario.power_factors.size() + 1);
    std::string above_vmin;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (table[i][2] != "above")
            continue;
        CHECK(std::stod(table[i][3]) == doctest::Approx(1.0).epsilon(1e-12));
        if (above_vmin.empty())
            above_vmin = table[i][4];
        CHECK(table[i][4] == above_vmin);
    }
    CHECK(!above_vmin.empty());
    // below threshold the squeezing is weaker
    CHECK(std::stod(table[1][4]) > std::stod(above_vmin));
    CHECK_THROWS_AS(threshold_scan_csv(ctx, 1), PhysicsError);
}

TEST_CASE("wavelength report") {
    const auto report = wavelengths_report(paper_context());
    auto value = [&](const std::string& key) {
        const auto pos = report.find(key + " = ");
        REQUIRE(pos != std::string::npos);
        return std::stod(report.substr(pos + key.size() + 3));
    };
    CHECK(value("signal_nm") == doctest::Approx(1051).epsilon(3.0 / 1051));
    CHECK(value("idler_nm") == doctest::Approx(1077).epsilon(3.0 / 1077));
    CHECK(std::abs(value("residual_rad_per_m")) < 1e-3);
    CHECK(value("degenerate_signal_nm") == doctest::Approx(1064).epsilon(1e-6));
    CHECK(value("degenerate_idler_nm") == doctest::Approx(1064).epsilon(1e-6));
    CHECK(value("energy_residual_relative") < 1e-9);
}

TEST_CASE("error-signal sweep") {
    const auto table = rows(error_signal_csv(paper_context()));
    CHECK(table[0] == std::vector<std::string>{"phase_rad", "error_signal", "parametric_gain"});
    CHECK(table.size() == 182);
    const auto report = lock_points_report(paper_context());
    CHECK(report.find("deamplification_phase_rad = 1.5707963267948966") != std::string::npos);
}

TEST_CASE("trajectory ensemble of one equals the single trajectory") {
    auto ctx = paper_context();
    ctx.scenario.segment_length = 256;
    TrajectoryOptions opt;
    opt.k = 3;
    opt.ensemble = 1;
    opt.raw_records = true;
    opt.duration = 256 * 20 * ctx.scenario.cavity_params().round_trip_time /
                   (ctx.scenario.dt_divisor * ctx.scenario.cavity_params().gamma());
    const auto a = trajectory_output(ctx, opt);
    opt.threads = 3;
    opt.ensemble = 3;
    const auto b = trajectory_output(ctx, opt);
    REQUIRE(a.records.size() == 1);
    REQUIRE(b.records.size() == 3);
    CHECK(a.records[0] == b.records[0]);
    CHECK(a.psd_csv != b.psd_csv);
    CHECK(rows(a.psd_csv)[0] ==
          std::vector<std::string>{"frequency_hz", "psd", "psd_se", "psd_corrected", "psd_corrected_se",
                                   "analytic_corrected"});

    ctx.scenario.seed += 1;
    const auto c = trajectory_output(ctx, opt);
    CHECK(c.records[0] != b.records[0]);
}

TEST_CASE("command line: success, config and physics exit codes") {
    const auto out = scratch("codes");
    std::string err;
    CHECK(run({"--scenario", kScenario, "--out", out.string(), "supermodes"}, &err) == 0);
    CHECK(fs::exists(out / "supermodes.csv"));
    CHECK(err.find("warning") != std::string::npos);

    CHECK(run({"spectrum", "--scenario", kScenario, "--out", out.string(), "--mode", "3"}) == 0);
    CHECK(fs::exists(out / "spectrum_k3.csv"));
    CHECK(run({"--scenario", kScenario, "--out", out.string(), "threshold-scan", "--mode", "2"}) == 0);
    CHECK(run({"--scenario", kScenario, "--out", out.string(), "wavelengths"}) == 0);
    CHECK(fs::exists(out / "tuning_curve.csv"));
    CHECK(run({"--scenario", kScenario, "--out", out.string(), "error-signal"}) == 0);
    CHECK(fs::exists(out / "lock_points.txt"));

    CHECK(run({"--scenario", kScenario, "--out", out.string(), "spectrum", "--mode", "9"}, &err) == 2);
    CHECK(err.find("mode") != std::string::npos);
    CHECK(run({"--scenario", "/nonexistent.scenario", "supermodes"}) == 2);
    CHECK(run({"--scenario", kScenario, "frobnicate"}) == 2);
    CHECK(run({"supermodes"}) == 2);

    const auto empty = write_scenario(out / "empty", "[basis]\nmodes =\n");
    CHECK(run({"--scenario", empty.string(), "--out", out.string(), "supermodes"}, &err) == 2);
    CHECK(err.find("basis.modes") != std::string::npos);

    std::ostringstream hot;
    hot << slurp(kScenario);
    auto text = hot.str();
    text.replace(text.find("power_mw = 5.5517"), 17, "power_mw = 400");
    text.replace(text.find("coefficients = ../data/ktp_z.coeffs"), 35, "coefficients = " OPO_DATA_DIR "/ktp_z.coeffs");
    const auto above = write_scenario(out / "above", text);
    CHECK(run({"--scenario", above.string(), "--out", out.string(), "spectrum", "--mode", "1"}, &err) == 3);
    CHECK(err.find("supermode 1") != std::string::npos);
    CHECK(run({"--scenario", above.string(), "--out", out.string(), "spectrum", "--mode", "4"}) == 0);
    fs::remove_all(out);
}

TEST_CASE("command line outputs are byte-identical across runs") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& dir : {a, b}) {
        REQUIRE(run({"--scenario", kScenario, "--out", dir.string(), "spectrum", "--mode", "3"}) == 0);
        REQUIRE(run({"--scenario", kScenario, "--out", dir.string(), "--seed", "5", "trajectory", "--mode", "3",
                     "--duration", "2e-4", "--ensemble", "2", "--raw"}) == 0);
    }
    for (const auto& name : {"spectrum_k3.csv", "trajectory_psd_k3.csv", "record_k3_t0.csv", "record_k3_t1.csv"})
        CHECK(slurp(a / name) == slurp(b / name));
    fs::remove_all(a);
    fs::remove_all(b);
}

}
