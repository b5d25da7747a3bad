#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <string>

#include "dropletlink/device_io.hpp"
#include "dropletlink/experiments.hpp"
#include "dropletlink/inks.hpp"
#include "dropletlink/ook_codec.hpp"
#include "test_helpers.hpp"

using namespace dropletlink;
using testutil::default_config;

namespace {

double metric(const experiments::ExperimentReport& report, const std::string& key) {
    for (const auto& [k, v] : report.metrics)
        if (k == key) return std::stod(v);
    FAIL("metric not found: " << key);
    return 0.0;
}

}  // namespace

TEST_CASE("run_transmission: sample sequence decodes clean across trials") {
    testutil::TempDir dir("tx");
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    const auto report =
        experiments::run_transmission(bits, default_config(), ook::OokParams{}, 5, dir.str());

    CHECK(metric(report, "ber_mean") == 0.0);
    CHECK(metric(report, "ber_max") == 0.0);
    CHECK(std::filesystem::exists(dir.path() / "transmission_ir_trial0.csv"));
    CHECK(std::filesystem::exists(dir.path() / "transmission_report.txt"));

    // per-trial bit strings are reported verbatim
    std::size_t trial_lines = 0;
    for (const auto& [k, v] : report.metrics)
        if (k.find("_bits") != std::string::npos) {
            CHECK(v == testutil::kSampleSequence);
            ++trial_lines;
        }
    CHECK(trial_lines == 5);
}

TEST_CASE("run_transmission: drowning noise degrades BER gracefully") {
    testutil::TempDir dir("tx_noisy");
    auto cfg = default_config();
    cfg.noise_sigma_v = 0.5;  // threshold sits at 0.4 sigma
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    const auto report =
        experiments::run_transmission(bits, cfg, ook::OokParams{}, 5, dir.str());
    CHECK(metric(report, "ber_max") > 0.0);  // reported, not thrown
}

TEST_CASE("run_transmission: empty bit string is rejected") {
    testutil::TempDir dir("tx_empty");
    CHECK_THROWS_AS(experiments::run_transmission({}, default_config(), ook::OokParams{}, 1,
                                                  dir.str()),
                    std::invalid_argument);
}

TEST_CASE("run_dilution: colour-invariant IR response across the sweep") {
    testutil::TempDir dir("dilution");
    const std::vector<double> sweep = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
    const auto report =
        experiments::run_dilution(inks::blue(), sweep, default_config(), dir.str());

    const auto cfg = default_config();
    CHECK(std::abs(metric(report, "ir_grand_mean_v") - cfg.ir_amplitude_v) <= 0.02);
    CHECK(metric(report, "ir_max_deviation_from_grand_mean_v") <= 0.13);
    CHECK(metric(report, "estimates_monotone") == 1.0);
    for (const std::string pct : {"0", "5", "10", "15", "20", "25"}) {
        CHECK(std::filesystem::exists(dir.path() / ("dilution_ir_" + pct + "pct.csv")));
        CHECK(std::filesystem::exists(dir.path() / ("dilution_colour_" + pct + "pct.csv")));
    }
    // water droplet is still seen by the IR sensor
    CHECK(metric(report, "ir_plateau_mean_v_0pct") > 0.5);
    CHECK(metric(report, "concentration_estimate_0pct") <= 0.02);
    CHECK(metric(report, "concentration_estimate_25pct") ==
          doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("run_dilution: impossible tolerance trips the experiment assertion") {
    testutil::TempDir dir("dilution_strict");
    CHECK_THROWS_AS(experiments::run_dilution(inks::blue(), {0.0, 0.25}, default_config(),
                                              dir.str(), 1e-6),
                    ExperimentAssertionError);
}

TEST_CASE("run_sizing: single trial reports zero spread") {
    testutil::TempDir dir("sizing_one");
    const auto report = experiments::run_sizing({3.0}, 1, default_config(), dir.str());
    CHECK(metric(report, "std_mm_3") == 0.0);
    CHECK(std::filesystem::exists(dir.path() / "sizing_results.csv"));
}

TEST_CASE("run_sizing: short sweep stays inside the precision envelope") {
    testutil::TempDir dir("sizing_sweep");
    const auto report =
        experiments::run_sizing({1.0, 2.0, 3.0, 4.0, 5.0}, 5, default_config(), dir.str());
    CHECK(metric(report, "precision_mm") <= 0.48);
}

TEST_CASE("reports: identical config and seed give identical bytes") {
    testutil::TempDir dir_a("det_a"), dir_b("det_b");
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    experiments::run_transmission(bits, default_config(99), ook::OokParams{}, 3, dir_a.str());
    experiments::run_transmission(bits, default_config(99), ook::OokParams{}, 3, dir_b.str());

    for (const char* name : {"transmission_report.txt", "transmission_ir_trial0.csv"}) {
        const auto a = io::read_text_file((dir_a.path() / name).string());
        const auto b = io::read_text_file((dir_b.path() / name).string());
        CHECK(a == b);
        CHECK(!a.empty());
    }
}

TEST_CASE("reports: config echo carries every channel field and the seed") {
    testutil::TempDir dir("echo");
    const auto report = experiments::run_sizing({2.0}, 1, default_config(1234), dir.str());
    const auto rendered = experiments::render_report(report);
    for (const char* key :
         {"config.v_chan_mm_s", "config.speed_jitter_frac", "config.sensor_separation_mm",
          "config.ir_sample_rate_hz", "config.spectral_sample_rate_hz",
          "config.ir_amplitude_v", "config.noise_sigma_v", "config.spectral_noise_rel",
          "config.edge_time_s", "config.baseline_counts", "config.path_length_mm",
          "config.ir_sensor_upstream", "config.rng_seed"})
        CHECK(rendered.find(key) != std::string::npos);
    CHECK(rendered.find("config.rng_seed = 1234") != std::string::npos);
}

TEST_CASE("calibrate_reference_library: six distinct labelled signatures") {
    const auto lib =
        experiments::calibrate_reference_library(inks::all_colours(), 0.25, default_config());
    REQUIRE(lib.entries.size() == 6);
    for (const auto& entry : lib.entries) {
        const auto expected =
            sim::transmittance(inks::by_name(entry.label), 0.25, 1.0);
        for (std::size_t c = 0; c < 6; ++c)
            CHECK(entry.signature.normalized[c] == doctest::Approx(expected[c]).epsilon(1e-6));
    }
}
