#include "dropletlink/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "dropletlink/device_io.hpp"
#include "dropletlink/errors.hpp"
#include "dropletlink/sizing.hpp"

namespace dropletlink::experiments {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

using KV = std::vector<std::pair<std::string, std::string>>;

void put(KV& kv, const std::string& key, const std::string& value) {
    kv.emplace_back(key, value);
}

std::string save_artifact(const std::string& out_dir, const std::string& name,
                          const std::string& content, ExperimentReport& report) {
    const auto path = (std::filesystem::path(out_dir) / name).string();
    io::write_text_file(path, content);
    report.artifacts.push_back(name);
    return path;
}

/// Mean of IR samples over the fully-on plateau of a passage (edges excluded).
double ir_plateau_mean(const IrTrace& trace, const sim::SimulatedPassage& passage,
                       double edge_time_s) {
    const double start = passage.ir_arrival_s + edge_time_s;
    const double end = passage.ir_arrival_s + passage.occupancy_s() - edge_time_s;
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const double t = trace.time_at(i);
        if (t < start || t > end) continue;
        acc += trace.samples[i];
        ++n;
    }
    if (n == 0) throw NoPulseError("ir_plateau_mean: plateau spans no samples");
    return acc / static_cast<double>(n);
}

/// Spectral sample window covering a passage's occupancy at the colour sensor.
spectral::SampleWindow occupancy_window(const SpectralTrace& trace,
                                        const sim::SimulatedPassage& passage) {
    const double fs = trace.sample_rate_hz;
    const double start = passage.spectral_arrival_s;
    const double end = passage.spectral_arrival_s + passage.occupancy_s();
    const auto begin = static_cast<std::size_t>(
        std::max(0.0, std::ceil((start - trace.t0_s) * fs)));
    const auto stop = std::min(trace.samples.size(), static_cast<std::size_t>(std::max(
        0.0, std::floor((end - trace.t0_s) * fs) + 1.0)));
    return {begin, stop};
}

ChannelVector leading_baseline(const SpectralTrace& trace, double span_s = 0.8) {
    return spectral::baseline_profile(trace, trace.t0_s, trace.t0_s + span_s);
}

std::string normalized_csv(const SpectralTrace& trace, const ChannelVector& baseline) {
    SpectralTrace normalized = trace;
    for (auto& s : normalized.samples)
        for (std::size_t c = 0; c < baseline.size(); ++c) s.channels[c] /= baseline[c];
    return io::write_spectral_csv(normalized);
}

std::string percent_label(double concentration) {
    return std::to_string(static_cast<int>(std::lround(concentration * 100.0)));
}

}  // namespace

DropletEvent default_droplet_template() {
    DropletEvent ev;
    ev.ink = inks::red();
    ev.concentration = 0.25;
    ev.length_mm = 5.0;
    return ev;
}

KV echo_channel_config(const ChannelConfig& cfg) {
    KV kv;
    put(kv, "v_chan_mm_s", fmt(cfg.v_chan_mm_s));
    put(kv, "speed_jitter_frac", fmt(cfg.speed_jitter_frac));
    put(kv, "sensor_separation_mm", fmt(cfg.sensor_separation_mm));
    put(kv, "ir_sample_rate_hz", fmt(cfg.ir_sample_rate_hz));
    put(kv, "spectral_sample_rate_hz", fmt(cfg.spectral_sample_rate_hz));
    put(kv, "ir_amplitude_v", fmt(cfg.ir_amplitude_v));
    put(kv, "noise_sigma_v", fmt(cfg.noise_sigma_v));
    put(kv, "spectral_noise_rel", fmt(cfg.spectral_noise_rel));
    put(kv, "edge_time_s", fmt(cfg.edge_time_s));
    std::string counts;
    for (std::size_t c = 0; c < cfg.baseline_counts.size(); ++c) {
        if (c) counts += ',';
        counts += fmt(cfg.baseline_counts[c]);
    }
    put(kv, "baseline_counts", counts);
    put(kv, "path_length_mm", fmt(cfg.path_length_mm));
    put(kv, "ir_sensor_upstream", cfg.ir_sensor_upstream ? "true" : "false");
    put(kv, "rng_seed", std::to_string(cfg.rng_seed));
    return kv;
}

KV echo_ook_params(const ook::OokParams& params) {
    KV kv;
    put(kv, "threshold_v", fmt(params.threshold_v));
    put(kv, "duty_fraction", fmt(params.duty_fraction));
    put(kv, "symbol_period_s", fmt(params.symbol_period_s));
    if (params.n_bits) put(kv, "n_bits", fmt(*params.n_bits));
    put(kv, "baseline_window_s", fmt(params.baseline_window_s));
    return kv;
}

ExperimentReport run_transmission(const ook::BitString& bits, const ChannelConfig& cfg,
                                  const ook::OokParams& params, std::size_t trials,
                                  const std::string& out_dir,
                                  const DropletEvent& droplet_template) {
    if (bits.empty()) throw std::invalid_argument("run_transmission: empty bit string");
    if (trials == 0) throw std::invalid_argument("run_transmission: need at least one trial");

    ExperimentReport report;
    report.experiment = "transmission";
    put(report.config_echo, "bits", ook::bits_to_string(bits));
    put(report.config_echo, "trials", fmt(trials));
    put(report.config_echo, "droplet_length_mm", fmt(droplet_template.length_mm));
    put(report.config_echo, "ink", droplet_template.ink.name);
    put(report.config_echo, "concentration", fmt(droplet_template.concentration));
    for (auto& kv : echo_channel_config(cfg)) report.config_echo.push_back(std::move(kv));
    for (auto& kv : echo_ook_params(params)) report.config_echo.push_back(std::move(kv));

    ook::OokParams decode_params = params;
    if (!decode_params.n_bits) decode_params.n_bits = bits.size();

    const auto schedule = ook::encode(bits, params.symbol_period_s, droplet_template);

    double ber_sum = 0.0;
    double ber_max = 0.0;
    KV per_trial;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        ChannelConfig trial_cfg = cfg;
        trial_cfg.rng_seed = cfg.rng_seed + trial;
        const auto run = sim::simulate(schedule, trial_cfg);
        if (trial == 0)
            save_artifact(out_dir, "transmission_ir_trial0.csv", io::write_ir_csv(run.ir),
                          report);
        const auto decoded = ook::decode(run.ir, decode_params);
        const double ber = ook::bit_error_rate(bits, decoded.bits);
        ber_sum += ber;
        ber_max = std::max(ber_max, ber);
        put(per_trial, "trial_" + std::to_string(trial) + "_bits",
            ook::bits_to_string(decoded.bits));
        put(per_trial, "trial_" + std::to_string(trial) + "_ber", fmt(ber));
    }

    put(report.metrics, "ber_mean", fmt(ber_sum / static_cast<double>(trials)));
    put(report.metrics, "ber_max", fmt(ber_max));
    for (auto& kv : per_trial) report.metrics.push_back(std::move(kv));
    write_report(report, out_dir);
    return report;
}

ExperimentReport run_dilution(const InkSpec& ink, const std::vector<double>& concentrations,
                              const ChannelConfig& cfg, const std::string& out_dir,
                              double ir_mean_tolerance_v) {
    if (concentrations.empty())
        throw std::invalid_argument("run_dilution: no concentrations given");
    for (double c : concentrations)
        if (c < 0.0 || c > 1.0)
            throw std::invalid_argument("run_dilution: concentrations must lie in [0, 1]");

    ExperimentReport report;
    report.experiment = "dilution";
    put(report.config_echo, "ink", ink.name);
    {
        std::string list;
        for (std::size_t i = 0; i < concentrations.size(); ++i) {
            if (i) list += ',';
            list += fmt(concentrations[i]);
        }
        put(report.config_echo, "concentrations", list);
    }
    put(report.config_echo, "ir_mean_tolerance_v", fmt(ir_mean_tolerance_v));
    for (auto& kv : echo_channel_config(cfg)) report.config_echo.push_back(std::move(kv));

    std::vector<double> plateau_means, estimates;
    for (std::size_t idx = 0; idx < concentrations.size(); ++idx) {
        const double c = concentrations[idx];
        ChannelConfig step_cfg = cfg;
        step_cfg.rng_seed = cfg.rng_seed + idx;

        DropletSchedule schedule;
        DropletEvent ev;
        ev.inject_time_s = 0.0;
        ev.length_mm = 5.0;
        ev.ink = ink;
        ev.concentration = c;
        schedule.events.push_back(ev);

        const auto run = sim::simulate(schedule, step_cfg);
        const auto& passage = run.passages.front();
        const double plateau = ir_plateau_mean(run.ir, passage, step_cfg.edge_time_s);
        plateau_means.push_back(plateau);

        const auto baseline = leading_baseline(run.spectral);
        const auto window = occupancy_window(run.spectral, passage);
        const auto signature = spectral::droplet_signature(run.spectral, window, baseline);
        const double estimate =
            spectral::estimate_concentration(signature, ink, step_cfg.path_length_mm);
        estimates.push_back(estimate);

        const std::string label = percent_label(c);
        put(report.metrics, "ir_plateau_mean_v_" + label + "pct", fmt(plateau));
        put(report.metrics, "concentration_estimate_" + label + "pct", fmt(estimate));
        std::string sig_text;
        for (std::size_t ch = 0; ch < signature.normalized.size(); ++ch) {
            if (ch) sig_text += ',';
            sig_text += fmt(signature.normalized[ch]);
        }
        put(report.metrics, "signature_" + label + "pct", sig_text);

        save_artifact(out_dir, "dilution_ir_" + label + "pct.csv", io::write_ir_csv(run.ir),
                      report);
        save_artifact(out_dir, "dilution_colour_" + label + "pct.csv",
                      normalized_csv(run.spectral, baseline), report);
    }

    const double grand_mean =
        std::accumulate(plateau_means.begin(), plateau_means.end(), 0.0) /
        static_cast<double>(plateau_means.size());
    double max_dev_from_grand = 0.0;
    for (double m : plateau_means)
        max_dev_from_grand = std::max(max_dev_from_grand, std::abs(m - grand_mean));
    put(report.metrics, "ir_grand_mean_v", fmt(grand_mean));
    put(report.metrics, "ir_max_deviation_from_grand_mean_v", fmt(max_dev_from_grand));

    bool monotone = true;
    for (std::size_t i = 1; i < estimates.size(); ++i)
        if (concentrations[i] > concentrations[i - 1] && estimates[i] < estimates[i - 1])
            monotone = false;
    put(report.metrics, "estimates_monotone", monotone ? "1" : "0");

    write_report(report, out_dir);

    for (std::size_t i = 0; i < plateau_means.size(); ++i) {
        if (std::abs(plateau_means[i] - cfg.ir_amplitude_v) > ir_mean_tolerance_v)
            throw ExperimentAssertionError(
                "run_dilution: IR plateau mean at " + percent_label(concentrations[i]) +
                "% is " + fmt(plateau_means[i]) + " V, more than " + fmt(ir_mean_tolerance_v) +
                " V away from the configured " + fmt(cfg.ir_amplitude_v) + " V");
    }
    return report;
}

ExperimentReport run_sizing(const std::vector<double>& lengths_mm,
                            std::size_t trials_per_length, const ChannelConfig& cfg,
                            const std::string& out_dir, const InkSpec& ink,
                            double concentration) {
    if (lengths_mm.empty()) throw std::invalid_argument("run_sizing: no lengths given");
    for (double l : lengths_mm)
        if (l <= 0.0) throw std::invalid_argument("run_sizing: lengths must be > 0");
    if (trials_per_length == 0)
        throw std::invalid_argument("run_sizing: need at least one trial per length");

    ExperimentReport report;
    report.experiment = "sizing";
    {
        std::string list;
        for (std::size_t i = 0; i < lengths_mm.size(); ++i) {
            if (i) list += ',';
            list += fmt(lengths_mm[i]);
        }
        put(report.config_echo, "lengths_mm", list);
    }
    put(report.config_echo, "trials_per_length", fmt(trials_per_length));
    put(report.config_echo, "ink", ink.name);
    put(report.config_echo, "concentration", fmt(concentration));
    for (auto& kv : echo_channel_config(cfg)) report.config_echo.push_back(std::move(kv));

    std::string csv = "expected_mm,mean_mm,std_mm,max_abs_dev_mm\n";
    double precision_mm = 0.0;
    for (std::size_t li = 0; li < lengths_mm.size(); ++li) {
        const double expected = lengths_mm[li];
        std::vector<double> measured;
        for (std::size_t trial = 0; trial < trials_per_length; ++trial) {
            ChannelConfig trial_cfg = cfg;
            trial_cfg.rng_seed = cfg.rng_seed + li * trials_per_length + trial;

            DropletSchedule schedule;
            DropletEvent ev;
            ev.inject_time_s = 0.0;
            ev.length_mm = expected;
            ev.ink = ink;
            ev.concentration = concentration;
            schedule.events.push_back(ev);

            const auto run = sim::simulate(schedule, trial_cfg);
            const auto baseline = leading_baseline(run.spectral);
            const auto estimates = sizing::estimate_size(run.ir, run.spectral, trial_cfg, baseline);
            measured.push_back(estimates.front().length_mm);
        }
        const double mean = std::accumulate(measured.begin(), measured.end(), 0.0) /
                            static_cast<double>(measured.size());
        double var = 0.0, max_dev = 0.0;
        for (double m : measured) {
            var += (m - mean) * (m - mean);
            max_dev = std::max(max_dev, std::abs(m - expected));
        }
        const double stddev = std::sqrt(var / static_cast<double>(measured.size()));
        precision_mm = std::max(precision_mm, std::abs(mean - expected));

        const std::string label = fmt(expected);
        put(report.metrics, "mean_mm_" + label, fmt(mean));
        put(report.metrics, "std_mm_" + label, fmt(stddev));
        put(report.metrics, "max_abs_dev_mm_" + label, fmt(max_dev));
        csv += label + ',' + fmt(mean) + ',' + fmt(stddev) + ',' + fmt(max_dev) + '\n';
    }
    put(report.metrics, "precision_mm", fmt(precision_mm));

    save_artifact(out_dir, "sizing_results.csv", csv, report);
    write_report(report, out_dir);
    return report;
}

spectral::ReferenceLibrary calibrate_reference_library(const std::vector<InkSpec>& inks,
                                                       double concentration,
                                                       const ChannelConfig& cfg) {
    ChannelConfig clean = cfg;
    clean.noise_sigma_v = 0.0;
    clean.spectral_noise_rel = 0.0;
    clean.speed_jitter_frac = 0.0;

    spectral::ReferenceLibrary lib;
    for (const auto& ink : inks) {
        DropletSchedule schedule;
        DropletEvent ev;
        ev.inject_time_s = 0.0;
        ev.length_mm = 5.0;
        ev.ink = ink;
        ev.concentration = concentration;
        schedule.events.push_back(ev);

        const auto run = sim::simulate(schedule, clean);
        const auto baseline = leading_baseline(run.spectral);
        const auto windows = spectral::segment_droplets(run.spectral, baseline);
        if (windows.size() != 1)
            throw NoPulseError("calibrate_reference_library: ink '" + ink.name +
                               "' produced " + std::to_string(windows.size()) +
                               " notches instead of 1; coefficients too weak for " +
                               fmt(concentration));
        lib.entries.push_back(
            {ink.name, spectral::droplet_signature(run.spectral, windows.front(), baseline)});
    }
    return lib;
}

std::string render_report(const ExperimentReport& report) {
    std::string out;
    out += "experiment = " + report.experiment + '\n';
    for (const auto& [k, v] : report.config_echo) out += "config." + k + " = " + v + '\n';
    for (const auto& [k, v] : report.metrics) out += "metrics." + k + " = " + v + '\n';
    for (std::size_t i = 0; i < report.artifacts.size(); ++i)
        out += "artifact." + std::to_string(i) + " = " + report.artifacts[i] + '\n';
    return out;
}

std::string write_report(const ExperimentReport& report, const std::string& out_dir) {
    const auto path =
        (std::filesystem::path(out_dir) / (report.experiment + "_report.txt")).string();
    io::write_text_file(path, render_report(report));
    return path;
}

}  // namespace dropletlink::experiments
