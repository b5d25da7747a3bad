#include "dropletlink/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dropletlink::sizing {

namespace {

struct Run {
    std::size_t begin;  // first index at or above the segmentation level
    std::size_t end;    // one past the last
};

std::vector<Run> runs_above(std::span<const double> signal, double level) {
    std::vector<Run> runs;
    bool inside = false;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const bool above = signal[i] >= level;
        if (above && !inside) {
            inside = true;
            begin = i;
        } else if (!above && inside) {
            inside = false;
            runs.push_back({begin, i});
        }
    }
    if (inside) runs.push_back({begin, signal.size()});
    return runs;
}

double max_over(std::span<const double> signal, const Run& run) {
    double m = signal[run.begin];
    for (std::size_t i = run.begin + 1; i < run.end; ++i) m = std::max(m, signal[i]);
    return m;
}

/// Interpolated time (relative to sample 0) where the signal first reaches
/// `level` walking left from `from`. Clamps to the first sample when the
/// signal never drops below the level before the trace starts.
double leading_crossing(std::span<const double> signal, std::size_t from, double level,
                        double dt) {
    std::size_t j = from;
    while (j > 0 && signal[j - 1] >= level) --j;
    if (j == 0) return 0.0;
    const double v0 = signal[j - 1];
    const double v1 = signal[j];
    return (static_cast<double>(j - 1) + (level - v0) / (v1 - v0)) * dt;
}

double trailing_crossing(std::span<const double> signal, std::size_t from, double level,
                         double dt) {
    std::size_t j = from;
    while (j + 1 < signal.size() && signal[j + 1] >= level) ++j;
    if (j + 1 >= signal.size()) return static_cast<double>(signal.size() - 1) * dt;
    const double v0 = signal[j];      // at or above the level
    const double v1 = signal[j + 1];  // below it
    return (static_cast<double>(j) + (v0 - level) / (v0 - v1)) * dt;
}

/// Median used as the IR baseline level; droplets occupy a minority of any
/// sensible trace, so the median sits on the no-droplet floor.
double median_copy(std::span<const double> v) {
    std::vector<double> copy(v.begin(), v.end());
    const std::size_t n = copy.size();
    auto mid = copy.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(copy.begin(), mid, copy.end());
    return *mid;
}

std::vector<double> ir_pulse_signal(const IrTrace& ir) {
    if (ir.samples.empty()) throw NoPulseError("empty infrared trace");
    const double floor = median_copy(ir.samples);
    std::vector<double> signal(ir.samples.size());
    for (std::size_t i = 0; i < signal.size(); ++i) signal[i] = ir.samples[i] - floor;
    return signal;
}

std::vector<double> spectral_depth_signal(const SpectralTrace& spectral,
                                          const ChannelVector& baselines) {
    if (spectral.samples.empty()) throw NoPulseError("empty spectral trace");
    for (std::size_t c = 0; c < baselines.size(); ++c)
        if (baselines[c] <= 0.0)
            throw ZeroBaselineError("sizing: spectral baseline channel " + std::to_string(c) +
                                    " is not positive");
    std::vector<double> depth(spectral.samples.size());
    for (std::size_t i = 0; i < depth.size(); ++i) {
        double mean = 0.0;
        for (std::size_t c = 0; c < baselines.size(); ++c)
            mean += spectral.samples[i].channels[c] / baselines[c];
        depth[i] = 1.0 - mean / static_cast<double>(baselines.size());
    }
    return depth;
}

/// Pulse regions: maximal runs at or above half the global maximum. Empty
/// when the signal never rises above zero.
std::vector<Run> find_pulses(std::span<const double> signal) {
    double global_max = *std::max_element(signal.begin(), signal.end());
    if (global_max <= 0.0) return {};
    return runs_above(signal, global_max / 2.0);
}

void check_matched(std::size_t ir_count, std::size_t spectral_count, const char* where) {
    if (ir_count == 0 && spectral_count == 0)
        throw NoPulseError(std::string(where) + ": no droplet on either sensor");
    if (ir_count != spectral_count)
        throw UnmatchedDropletError(std::string(where) + ": " + std::to_string(ir_count) +
                                    " droplets on the infrared sensor vs " +
                                    std::to_string(spectral_count) +
                                    " on the spectral sensor");
}

/// Slice bounds around pulse k with margins reaching halfway to the
/// neighbouring pulses, so interpolation sees below-half samples.
Run slice_around(const std::vector<Run>& pulses, std::size_t k, std::size_t n) {
    const std::size_t lo = k == 0 ? 0 : (pulses[k - 1].end + pulses[k].begin) / 2;
    const std::size_t hi = k + 1 < pulses.size() ? (pulses[k].end + pulses[k + 1].begin) / 2 : n;
    return {lo, hi};
}

}  // namespace

double fwhm_duration(std::span<const double> signal, double sample_rate_hz) {
    if (signal.empty()) throw NoPulseError("fwhm_duration: empty signal");
    if (sample_rate_hz <= 0.0)
        throw std::invalid_argument("fwhm_duration: sample rate must be > 0");
    const double peak = *std::max_element(signal.begin(), signal.end());
    if (peak <= 0.0) throw NoPulseError("fwhm_duration: signal maximum is not positive");
    const double half = peak / 2.0;
    const auto runs = runs_above(signal, half);
    if (runs.size() > 1)
        throw AmbiguousPulseError("fwhm_duration: " + std::to_string(runs.size()) +
                                  " disjoint runs above half maximum; segment first");
    const double dt = 1.0 / sample_rate_hz;
    const Run& run = runs.front();
    const double lead = leading_crossing(signal, run.begin, half, dt);
    const double trail = trailing_crossing(signal, run.end - 1, half, dt);
    return trail - lead;
}

double cross_sensor_delay(const IrTrace& ir, const SpectralTrace& spectral,
                          std::size_t droplet_index, const ChannelVector& baselines) {
    const auto ir_signal = ir_pulse_signal(ir);
    const auto depth = spectral_depth_signal(spectral, baselines);
    const auto ir_pulses = find_pulses(ir_signal);
    const auto notches = find_pulses(depth);
    check_matched(ir_pulses.size(), notches.size(), "cross_sensor_delay");
    if (droplet_index >= ir_pulses.size())
        throw std::out_of_range("cross_sensor_delay: droplet index out of range");

    const Run& p = ir_pulses[droplet_index];
    const Run& q = notches[droplet_index];
    const double t_ir = ir.t0_s + leading_crossing(ir_signal, p.begin,
                                                   max_over(ir_signal, p) / 2.0,
                                                   1.0 / ir.sample_rate_hz);
    const double t_sp = spectral.t0_s + leading_crossing(depth, q.begin,
                                                         max_over(depth, q) / 2.0,
                                                         1.0 / spectral.sample_rate_hz);
    return t_sp - t_ir;
}

std::vector<SizeEstimate> estimate_size(const IrTrace& ir, const SpectralTrace& spectral,
                                        const ChannelConfig& cfg,
                                        const ChannelVector& baselines) {
    const auto depth = spectral_depth_signal(spectral, baselines);
    const auto notches = find_pulses(depth);
    {
        // Count check happens inside cross_sensor_delay as well; doing it once
        // up front gives a clearer error before any per-droplet work.
        const auto ir_pulses = find_pulses(ir_pulse_signal(ir));
        check_matched(ir_pulses.size(), notches.size(), "estimate_size");
    }

    const double sign = cfg.ir_sensor_upstream ? 1.0 : -1.0;
    std::vector<SizeEstimate> estimates;
    estimates.reserve(notches.size());
    for (std::size_t k = 0; k < notches.size(); ++k) {
        const double raw_delay = cross_sensor_delay(ir, spectral, k, baselines);
        const double delta_t = sign * raw_delay;
        if (delta_t <= 0.0)
            throw UnmatchedDropletError(
                "estimate_size: cross-sensor delay of droplet " + std::to_string(k) +
                " has the wrong sign for the configured sensor order");
        const Run slice = slice_around(notches, k, depth.size());
        const double t_drop =
            fwhm_duration(std::span<const double>(depth).subspan(slice.begin,
                                                                 slice.end - slice.begin),
                          spectral.sample_rate_hz);
        SizeEstimate est;
        est.droplet_index = k;
        est.delta_t_s = delta_t;
        est.speed_mm_s = cfg.sensor_separation_mm / delta_t;
        est.t_drop_s = t_drop;
        est.length_mm = est.speed_mm_s * est.t_drop_s;
        estimates.push_back(est);
    }
    return estimates;
}

}  // namespace dropletlink::sizing
