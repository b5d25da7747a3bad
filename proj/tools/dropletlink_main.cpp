/**
 * dropletlink -- simulate the droplet channel and run the receiver chain.
 *
 * Verbs: simulate, decode, classify, size, experiment {transmission |
 * dilution | sizing}. Channel and receiver flags mirror the config field
 * names 1:1 and may also come from a key = value config file (flags win).
 * DROPLETLINK_SEED overrides a config-file seed; a --rng_seed flag beats
 * both. Every run writes a key = value report plus CSV artifacts into
 * --out_dir; nothing is reported on the console only.
 *
 * Exit codes: 0 success, 2 bad input or file format, 3 experiment assertion
 * failure.
 */
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dropletlink/channel_sim.hpp"
#include "dropletlink/device_io.hpp"
#include "dropletlink/experiments.hpp"
#include "dropletlink/inks.hpp"
#include "dropletlink/ook_codec.hpp"
#include "dropletlink/sizing.hpp"
#include "dropletlink/spectral.hpp"

namespace {

using namespace dropletlink;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitAssertionFailure = 3;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct Options {
    ChannelConfig channel;
    ook::OokParams ook;
    long long n_bits = -1;  // <0 means decode to trace end
    std::vector<double> baseline_counts;
    std::string out_dir = ".";

    // per-verb inputs
    std::string bits;
    std::string ink_name = "red";
    double concentration = 0.25;
    double droplet_length_mm = 5.0;
    std::size_t trials = 100;
    std::vector<double> concentrations = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
    double ir_mean_tolerance_v = 0.13;
    std::vector<double> lengths_mm = {1.0, 2.0, 3.0, 4.0, 5.0};
    bool assert_zero_ber = false;
    std::string ir_path;
    std::string spectral_path;
    std::string library_path;
    std::string write_library_path;
    double baseline_span_s = 0.8;
};

void finalize(Options& opt) {
    if (!opt.baseline_counts.empty()) {
        if (opt.baseline_counts.size() != 6)
            throw CLI::ValidationError("baseline_counts", "expected exactly 6 values");
        std::copy(opt.baseline_counts.begin(), opt.baseline_counts.end(),
                  opt.channel.baseline_counts.begin());
    }
    if (opt.n_bits >= 0) opt.ook.n_bits = static_cast<std::size_t>(opt.n_bits);
    std::filesystem::create_directories(opt.out_dir);
}

void add_channel_flags(CLI::App& app, Options& opt) {
    auto& c = opt.channel;
    app.add_option("--v_chan_mm_s", c.v_chan_mm_s, "Nominal droplet speed [mm/s]")
        ->capture_default_str();
    app.add_option("--speed_jitter_frac", c.speed_jitter_frac,
                   "Per-droplet speed jitter bound, 0..1")
        ->capture_default_str();
    app.add_option("--sensor_separation_mm", c.sensor_separation_mm,
                   "IR to colour sensor distance [mm]")
        ->capture_default_str();
    app.add_option("--ir_sample_rate_hz", c.ir_sample_rate_hz, "IR trace sample rate [S/s]")
        ->capture_default_str();
    app.add_option("--spectral_sample_rate_hz", c.spectral_sample_rate_hz,
                   "Colour sensor sample rate [S/s]")
        ->capture_default_str();
    app.add_option("--ir_amplitude_v", c.ir_amplitude_v, "Droplet pulse amplitude [V]")
        ->capture_default_str();
    app.add_option("--noise_sigma_v", c.noise_sigma_v, "Additive IR noise sigma [V]")
        ->capture_default_str();
    app.add_option("--spectral_noise_rel", c.spectral_noise_rel,
                   "Relative spectral count noise")
        ->capture_default_str();
    app.add_option("--edge_time_s", c.edge_time_s, "Pulse rise/fall time [s]")
        ->capture_default_str();
    app.add_option("--baseline_counts", opt.baseline_counts,
                   "No-droplet spectral counts, 6 comma-separated values")
        ->delimiter(',');
    app.add_option("--path_length_mm", c.path_length_mm, "Optical path length [mm]")
        ->capture_default_str();
    app.add_flag("--ir_sensor_upstream,!--spectral_sensor_upstream", c.ir_sensor_upstream,
                 "Which sensor the droplet reaches first");
    app.add_option("--rng_seed", c.rng_seed, "Seed for noise and jitter")
        ->capture_default_str();
    app.add_option("--out_dir", opt.out_dir, "Directory for reports and CSV artifacts")
        ->capture_default_str();
}

void add_ook_flags(CLI::App& app, Options& opt) {
    auto& p = opt.ook;
    app.add_option("--threshold_v", p.threshold_v, "Detection threshold [V]")
        ->capture_default_str();
    app.add_option("--duty_fraction", p.duty_fraction, "1-bit duty fraction")
        ->capture_default_str();
    app.add_option("--symbol_period_s", p.symbol_period_s, "Symbol interval [s]")
        ->capture_default_str();
    app.add_option("--n_bits", opt.n_bits, "Expected bit count (omit: decode to trace end)");
    app.add_option("--baseline_window_s", p.baseline_window_s,
                   "Leading span for offset estimation [s]")
        ->capture_default_str();
}

DropletEvent droplet_template(const Options& opt) {
    DropletEvent ev;
    ev.ink = inks::by_name(opt.ink_name);
    ev.concentration = opt.concentration;
    ev.length_mm = opt.droplet_length_mm;
    return ev;
}

ChannelVector spectral_baseline(const Options& opt, const SpectralTrace& trace) {
    return spectral::baseline_profile(trace, trace.t0_s, trace.t0_s + opt.baseline_span_s);
}

void announce(const experiments::ExperimentReport& report, const std::string& out_dir) {
    std::printf("report: %s\n",
                (std::filesystem::path(out_dir) / (report.experiment + "_report.txt"))
                    .string()
                    .c_str());
    for (const auto& name : report.artifacts)
        std::printf("artifact: %s\n",
                    (std::filesystem::path(out_dir) / name).string().c_str());
}

// ----------------------------------------------------------------- verbs

int run_simulate(Options& opt) {
    finalize(opt);
    const auto bits = ook::bits_from_string(opt.bits);
    const auto schedule = ook::encode(bits, opt.ook.symbol_period_s, droplet_template(opt));
    const auto run = sim::simulate(schedule, opt.channel);

    experiments::ExperimentReport report;
    report.experiment = "simulate";
    report.config_echo.emplace_back("bits", opt.bits);
    report.config_echo.emplace_back("ink", opt.ink_name);
    report.config_echo.emplace_back("concentration", fmt(opt.concentration));
    report.config_echo.emplace_back("droplet_length_mm", fmt(opt.droplet_length_mm));
    report.config_echo.emplace_back("symbol_period_s", fmt(opt.ook.symbol_period_s));
    for (auto& kv : experiments::echo_channel_config(opt.channel))
        report.config_echo.push_back(std::move(kv));

    io::write_text_file((std::filesystem::path(opt.out_dir) / "simulate_ir.csv").string(),
                        io::write_ir_csv(run.ir));
    report.artifacts.push_back("simulate_ir.csv");
    io::write_text_file(
        (std::filesystem::path(opt.out_dir) / "simulate_spectral.csv").string(),
        io::write_spectral_csv(run.spectral));
    report.artifacts.push_back("simulate_spectral.csv");

    std::string truth = "droplet_index,ir_arrival_s,spectral_arrival_s,speed_mm_s,length_mm\n";
    for (const auto& p : run.passages)
        truth += std::to_string(p.droplet_index) + ',' + fmt(p.ir_arrival_s) + ',' +
                 fmt(p.spectral_arrival_s) + ',' + fmt(p.actual_speed_mm_s) + ',' +
                 fmt(p.actual_length_mm) + '\n';
    io::write_text_file((std::filesystem::path(opt.out_dir) / "simulate_truth.csv").string(),
                        truth);
    report.artifacts.push_back("simulate_truth.csv");

    report.metrics.emplace_back("n_droplets", std::to_string(run.passages.size()));
    report.metrics.emplace_back("ir_samples", std::to_string(run.ir.samples.size()));
    report.metrics.emplace_back("spectral_samples", std::to_string(run.spectral.samples.size()));
    experiments::write_report(report, opt.out_dir);
    announce(report, opt.out_dir);
    return kExitOk;
}

int run_decode(Options& opt) {
    finalize(opt);
    const auto trace = io::read_ir_csv(io::read_text_file(opt.ir_path));
    const auto decoded = ook::decode(trace, opt.ook);

    experiments::ExperimentReport report;
    report.experiment = "decode";
    report.config_echo.emplace_back("ir", opt.ir_path);
    for (auto& kv : experiments::echo_ook_params(opt.ook))
        report.config_echo.push_back(std::move(kv));

    report.metrics.emplace_back("bits", ook::bits_to_string(decoded.bits));
    report.metrics.emplace_back("offset_v", fmt(decoded.offset_v));
    report.metrics.emplace_back("n_edges", std::to_string(decoded.edges.size()));
    for (std::size_t k = 0; k < decoded.symbol_intervals.size(); ++k) {
        const auto& iv = decoded.symbol_intervals[k];
        report.metrics.emplace_back("interval_" + std::to_string(k),
                                    fmt(iv.start_s) + ',' + fmt(iv.end_s));
        report.metrics.emplace_back("duty_" + std::to_string(k),
                                    fmt(decoded.duty_per_symbol[k]));
    }
    for (std::size_t e = 0; e < decoded.edges.size(); ++e)
        report.metrics.emplace_back(
            "edge_" + std::to_string(e),
            fmt(decoded.edges[e].time_s) +
                (decoded.edges[e].kind == ook::EdgeKind::Rising ? ",rising" : ",falling"));

    experiments::write_report(report, opt.out_dir);
    std::printf("bits: %s\n", ook::bits_to_string(decoded.bits).c_str());
    announce(report, opt.out_dir);
    return kExitOk;
}

int run_classify(Options& opt) {
    finalize(opt);
    const auto trace = io::read_spectral_csv(io::read_text_file(opt.spectral_path));

    spectral::ReferenceLibrary lib;
    if (!opt.library_path.empty()) {
        lib = io::read_reference_library(io::read_text_file(opt.library_path));
    } else {
        lib = experiments::calibrate_reference_library(inks::all_colours(), opt.concentration,
                                                       opt.channel);
    }
    if (!opt.write_library_path.empty())
        io::write_text_file(opt.write_library_path, io::write_reference_library(lib));

    const auto baseline = spectral_baseline(opt, trace);
    const auto windows = spectral::segment_droplets(trace, baseline);

    experiments::ExperimentReport report;
    report.experiment = "classify";
    report.config_echo.emplace_back("spectral", opt.spectral_path);
    report.config_echo.emplace_back(
        "library", opt.library_path.empty() ? "<calibrated>" : opt.library_path);
    for (auto& kv : experiments::echo_channel_config(opt.channel))
        report.config_echo.push_back(std::move(kv));

    report.metrics.emplace_back("n_droplets", std::to_string(windows.size()));
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const auto sig = spectral::droplet_signature(trace, windows[k], baseline);
        const auto call = spectral::classify(sig, lib);
        report.metrics.emplace_back("droplet_" + std::to_string(k) + "_label", call.label);
        report.metrics.emplace_back("droplet_" + std::to_string(k) + "_distance",
                                    fmt(call.distance));
        report.metrics.emplace_back("droplet_" + std::to_string(k) + "_margin",
                                    fmt(call.margin));
        std::printf("droplet %zu: %s (distance %.4f, margin %.4f)\n", k, call.label.c_str(),
                    call.distance, call.margin);
    }
    experiments::write_report(report, opt.out_dir);
    announce(report, opt.out_dir);
    return kExitOk;
}

int run_size(Options& opt) {
    finalize(opt);
    const auto ir = io::read_ir_csv(io::read_text_file(opt.ir_path));
    const auto spec_trace = io::read_spectral_csv(io::read_text_file(opt.spectral_path));
    const auto baseline = spectral_baseline(opt, spec_trace);
    const auto estimates = sizing::estimate_size(ir, spec_trace, opt.channel, baseline);

    experiments::ExperimentReport report;
    report.experiment = "size";
    report.config_echo.emplace_back("ir", opt.ir_path);
    report.config_echo.emplace_back("spectral", opt.spectral_path);
    for (auto& kv : experiments::echo_channel_config(opt.channel))
        report.config_echo.push_back(std::move(kv));

    std::string csv = "droplet_index,length_mm,speed_mm_s,t_drop_s,delta_t_s\n";
    for (const auto& est : estimates) {
        const auto k = std::to_string(est.droplet_index);
        report.metrics.emplace_back("droplet_" + k + "_length_mm", fmt(est.length_mm));
        report.metrics.emplace_back("droplet_" + k + "_speed_mm_s", fmt(est.speed_mm_s));
        report.metrics.emplace_back("droplet_" + k + "_t_drop_s", fmt(est.t_drop_s));
        report.metrics.emplace_back("droplet_" + k + "_delta_t_s", fmt(est.delta_t_s));
        csv += k + ',' + fmt(est.length_mm) + ',' + fmt(est.speed_mm_s) + ',' +
               fmt(est.t_drop_s) + ',' + fmt(est.delta_t_s) + '\n';
        std::printf("droplet %s: %.3f mm at %.3f mm/s\n", k.c_str(), est.length_mm,
                    est.speed_mm_s);
    }
    io::write_text_file((std::filesystem::path(opt.out_dir) / "size_estimates.csv").string(),
                        csv);
    report.artifacts.push_back("size_estimates.csv");
    experiments::write_report(report, opt.out_dir);
    announce(report, opt.out_dir);
    return kExitOk;
}

int run_experiment_transmission(Options& opt) {
    finalize(opt);
    const auto bits = ook::bits_from_string(opt.bits);
    const auto report = experiments::run_transmission(bits, opt.channel, opt.ook, opt.trials,
                                                      opt.out_dir, droplet_template(opt));
    double ber_max = 0.0;
    for (const auto& [k, v] : report.metrics)
        if (k == "ber_max") ber_max = std::stod(v);
    std::printf("ber_max over %zu trials: %s\n", opt.trials, fmt(ber_max).c_str());
    announce(report, opt.out_dir);
    if (opt.assert_zero_ber && ber_max > 0.0)
        throw ExperimentAssertionError("transmission: BER " + fmt(ber_max) +
                                       " but zero was asserted");
    return kExitOk;
}

int run_experiment_dilution(Options& opt) {
    finalize(opt);
    const auto report =
        experiments::run_dilution(inks::by_name(opt.ink_name), opt.concentrations, opt.channel,
                                  opt.out_dir, opt.ir_mean_tolerance_v);
    for (const auto& [k, v] : report.metrics)
        if (k == "ir_grand_mean_v" || k == "ir_max_deviation_from_grand_mean_v")
            std::printf("%s = %s\n", k.c_str(), v.c_str());
    announce(report, opt.out_dir);
    return kExitOk;
}

int run_experiment_sizing(Options& opt) {
    finalize(opt);
    const auto report =
        experiments::run_sizing(opt.lengths_mm, opt.trials, opt.channel, opt.out_dir,
                                inks::by_name(opt.ink_name), opt.concentration);
    for (const auto& [k, v] : report.metrics)
        if (k == "precision_mm") std::printf("precision_mm = %s\n", v.c_str());
    announce(report, opt.out_dir);
    return kExitOk;
}

bool seed_flag_on_command_line(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--rng_seed" || arg.rfind("--rng_seed=", 0) == 0) return true;
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"droplet-channel simulator and receiver chain"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value configuration file");
    app.fallthrough();

    Options opt;
    add_channel_flags(app, opt);
    add_ook_flags(app, opt);

    auto* sim_cmd = app.add_subcommand("simulate", "Synthesize sensor traces for a bit string");
    sim_cmd->fallthrough();
    sim_cmd->add_option("--bits", opt.bits, "Bit string, e.g. 1011110001011001")->required();
    sim_cmd->add_option("--ink", opt.ink_name, "Droplet ink name")->capture_default_str();
    sim_cmd->add_option("--concentration", opt.concentration, "Ink concentration 0..1")
        ->capture_default_str();
    sim_cmd->add_option("--droplet_length_mm", opt.droplet_length_mm, "Droplet length [mm]")
        ->capture_default_str();

    auto* decode_cmd = app.add_subcommand("decode", "Decode bits from an IR trace CSV");
    decode_cmd->fallthrough();
    decode_cmd->add_option("--ir", opt.ir_path, "IR trace CSV (time,voltage)")->required();

    auto* classify_cmd =
        app.add_subcommand("classify", "Classify droplet colours in a spectral trace CSV");
    classify_cmd->fallthrough();
    classify_cmd->add_option("--spectral", opt.spectral_path, "Spectral trace CSV")->required();
    classify_cmd->add_option("--library", opt.library_path,
                             "Reference library file (default: calibrate built-in inks)");
    classify_cmd->add_option("--write_library", opt.write_library_path,
                             "Write the library in use to this path");
    classify_cmd->add_option("--concentration", opt.concentration,
                             "Calibration concentration for the built-in library")
        ->capture_default_str();
    classify_cmd->add_option("--baseline_span_s", opt.baseline_span_s,
                             "Leading span used for the spectral baseline [s]")
        ->capture_default_str();

    auto* size_cmd = app.add_subcommand("size", "Estimate droplet length and speed");
    size_cmd->fallthrough();
    size_cmd->add_option("--ir", opt.ir_path, "IR trace CSV")->required();
    size_cmd->add_option("--spectral", opt.spectral_path, "Spectral trace CSV")->required();
    size_cmd->add_option("--baseline_span_s", opt.baseline_span_s,
                         "Leading span used for the spectral baseline [s]")
        ->capture_default_str();

    auto* exp_cmd = app.add_subcommand("experiment", "Run a canned experiment");
    exp_cmd->require_subcommand(1);
    exp_cmd->fallthrough();

    auto* tx_cmd = exp_cmd->add_subcommand("transmission", "Encode, transmit and decode");
    tx_cmd->fallthrough();
    tx_cmd->add_option("--bits", opt.bits, "Bit string to transmit")->required();
    tx_cmd->add_option("--trials", opt.trials, "Seeded trials")->capture_default_str();
    tx_cmd->add_option("--ink", opt.ink_name, "Droplet ink")->capture_default_str();
    tx_cmd->add_option("--concentration", opt.concentration, "Ink concentration")
        ->capture_default_str();
    tx_cmd->add_option("--droplet_length_mm", opt.droplet_length_mm, "Droplet length [mm]")
        ->capture_default_str();
    tx_cmd->add_flag("--assert_zero_ber", opt.assert_zero_ber,
                     "Exit with code 3 if any trial has bit errors");

    auto* dil_cmd = exp_cmd->add_subcommand("dilution", "Concentration sweep on one ink");
    dil_cmd->fallthrough();
    dil_cmd->add_option("--ink", opt.ink_name, "Ink to dilute")->capture_default_str();
    dil_cmd->add_option("--concentrations", opt.concentrations,
                        "Comma-separated concentrations in [0,1]")
        ->delimiter(',');
    dil_cmd->add_option("--ir_mean_tolerance_v", opt.ir_mean_tolerance_v,
                        "Allowed IR plateau deviation from the configured amplitude [V]")
        ->capture_default_str();

    auto* sz_cmd = exp_cmd->add_subcommand("sizing", "Length sweep with repeated trials");
    sz_cmd->fallthrough();
    sz_cmd->add_option("--lengths", opt.lengths_mm, "Comma-separated droplet lengths [mm]")
        ->delimiter(',');
    sz_cmd->add_option("--trials", opt.trials, "Trials per length")
        ->default_val(std::size_t{20});
    sz_cmd->add_option("--ink", opt.ink_name, "Droplet ink")->capture_default_str();
    sz_cmd->add_option("--concentration", opt.concentration, "Ink concentration")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    // precedence: flag > DROPLETLINK_SEED > config file > default
    if (!seed_flag_on_command_line(argc, argv)) {
        if (const char* env_seed = std::getenv("DROPLETLINK_SEED"))
            opt.channel.rng_seed = std::strtoull(env_seed, nullptr, 10);
    }

    try {
        if (*sim_cmd) return run_simulate(opt);
        if (*decode_cmd) return run_decode(opt);
        if (*classify_cmd) return run_classify(opt);
        if (*size_cmd) return run_size(opt);
        if (*tx_cmd) return run_experiment_transmission(opt);
        if (*dil_cmd) return run_experiment_dilution(opt);
        if (*sz_cmd) return run_experiment_sizing(opt);
        std::fprintf(stderr, "no verb given\n");
        return kExitInputError;
    } catch (const ExperimentAssertionError& e) {
        std::fprintf(stderr, "experiment assertion failed: %s\n", e.what());
        return kExitAssertionFailure;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    }
}
