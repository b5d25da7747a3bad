#include "dropletlink/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace dropletlink::sim {

namespace {

void validate_config(const ChannelConfig& cfg) {
    if (cfg.v_chan_mm_s <= 0.0)
        throw std::invalid_argument("ChannelConfig: v_chan_mm_s must be > 0");
    if (cfg.sensor_separation_mm <= 0.0)
        throw std::invalid_argument("ChannelConfig: sensor_separation_mm must be > 0");
    if (cfg.ir_sample_rate_hz <= 0.0 || cfg.spectral_sample_rate_hz <= 0.0)
        throw std::invalid_argument("ChannelConfig: sample rates must be > 0");
    if (cfg.speed_jitter_frac < 0.0 || cfg.speed_jitter_frac >= 1.0)
        throw std::invalid_argument("ChannelConfig: speed_jitter_frac must be in [0, 1)");
    if (cfg.noise_sigma_v < 0.0 || cfg.spectral_noise_rel < 0.0)
        throw std::invalid_argument("ChannelConfig: noise levels must be >= 0");
    if (cfg.edge_time_s < 0.0)
        throw std::invalid_argument("ChannelConfig: edge_time_s must be >= 0");
    if (cfg.path_length_mm <= 0.0)
        throw std::invalid_argument("ChannelConfig: path_length_mm must be > 0");
}

void validate_schedule(const DropletSchedule& schedule) {
    for (std::size_t i = 0; i < schedule.events.size(); ++i) {
        const auto& ev = schedule.events[i];
        if (ev.length_mm <= 0.0)
            throw std::invalid_argument("DropletEvent: length_mm must be > 0");
        if (ev.concentration < 0.0 || ev.concentration > 1.0)
            throw std::invalid_argument("DropletEvent: concentration must be in [0, 1]");
        if (i > 0 && ev.inject_time_s <= schedule.events[i - 1].inject_time_s)
            throw std::invalid_argument("DropletSchedule: inject times must be strictly increasing");
    }
}

/// Pulse envelope in [0, 1]. Rising edge centered at `arrival`, falling edge
/// centered at `arrival + occupancy`, each spanning edge_time.
double envelope_at(double t, double arrival, double occupancy, double edge_time) {
    const double half = edge_time / 2.0;
    auto edge = [&](double dt) {
        // half-cosine ramp over [-half, +half], 0.5 at dt == 0
        if (edge_time == 0.0) return dt >= 0.0 ? 1.0 : 0.0;
        if (dt <= -half) return 0.0;
        if (dt >= half) return 1.0;
        return 0.5 * (1.0 - std::cos(std::numbers::pi * (dt + half) / edge_time));
    };
    const double rise = edge(t - arrival);
    const double fall = 1.0 - edge(t - (arrival + occupancy));
    return std::min(rise, fall);
}

struct Occupancy {
    double begin_s;
    double end_s;
};

Occupancy occupancy_window(double arrival, double occupancy, double edge_time) {
    return {arrival - edge_time / 2.0, arrival + occupancy + edge_time / 2.0};
}

void check_no_overlap(const std::vector<Occupancy>& windows, const char* sensor) {
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (windows[i].begin_s < windows[i - 1].end_s) {
            throw OverlapError("droplets " + std::to_string(i - 1) + " and " +
                               std::to_string(i) + " overlap at the " + sensor +
                               " sensor; schedule too dense for the configured speed");
        }
    }
}

}  // namespace

ChannelVector transmittance(const InkSpec& ink, double concentration,
                            double path_length_mm) {
    if (concentration < 0.0 || concentration > 1.0)
        throw std::invalid_argument("transmittance: concentration must be in [0, 1]");
    if (path_length_mm <= 0.0)
        throw std::invalid_argument("transmittance: path_length_mm must be > 0");
    ChannelVector out{};
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::exp(-ink.absorption_coeffs[i] * concentration * path_length_mm);
    return out;
}

SimulationResult simulate(const DropletSchedule& schedule, const ChannelConfig& cfg,
                          std::optional<TimeWindow> window) {
    validate_config(cfg);
    validate_schedule(schedule);

    std::mt19937_64 rng(cfg.rng_seed);

    // Per-droplet speed factor, constant over one droplet's transit.
    std::vector<SimulatedPassage> passages;
    passages.reserve(schedule.events.size());
    std::uniform_real_distribution<double> jitter(1.0 - cfg.speed_jitter_frac,
                                                  1.0 + cfg.speed_jitter_frac);
    const double delay_sign = cfg.ir_sensor_upstream ? 1.0 : -1.0;
    for (std::size_t i = 0; i < schedule.events.size(); ++i) {
        const auto& ev = schedule.events[i];
        const double factor = cfg.speed_jitter_frac > 0.0 ? jitter(rng) : 1.0;
        SimulatedPassage p;
        p.droplet_index = i;
        p.actual_speed_mm_s = cfg.v_chan_mm_s * factor;
        p.actual_length_mm = ev.length_mm;
        p.ir_arrival_s = ev.inject_time_s;
        p.spectral_arrival_s =
            ev.inject_time_s + delay_sign * cfg.sensor_separation_mm / p.actual_speed_mm_s;
        passages.push_back(p);
    }

    std::vector<Occupancy> ir_windows, spectral_windows;
    for (const auto& p : passages) {
        ir_windows.push_back(occupancy_window(p.ir_arrival_s, p.occupancy_s(), cfg.edge_time_s));
        spectral_windows.push_back(
            occupancy_window(p.spectral_arrival_s, p.occupancy_s(), cfg.edge_time_s));
    }
    check_no_overlap(ir_windows, "infrared");
    check_no_overlap(spectral_windows, "spectral");

    TimeWindow span;
    if (window) {
        if (window->duration_s <= 0.0)
            throw std::invalid_argument("simulate: window duration must be > 0");
        span = *window;
    } else {
        double lo = 0.0, hi = 1.0;
        for (std::size_t i = 0; i < passages.size(); ++i) {
            lo = std::min({lo, ir_windows[i].begin_s, spectral_windows[i].begin_s});
            hi = std::max({hi, ir_windows[i].end_s, spectral_windows[i].end_s});
        }
        span.start_s = lo - 1.0;
        span.duration_s = (hi + 1.0) - span.start_s;
    }

    SimulationResult result;
    result.passages = std::move(passages);

    // IR trace: sum of pulses, additive noise, clamp to the sensor range.
    {
        IrTrace& tr = result.ir;
        tr.sample_rate_hz = cfg.ir_sample_rate_hz;
        tr.t0_s = span.start_s;
        const auto n = static_cast<std::size_t>(
            std::llround(span.duration_s * cfg.ir_sample_rate_hz)) + 1;
        tr.samples.resize(n);
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma_v);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = tr.time_at(k);
            double v = 0.0;
            for (std::size_t i = 0; i < result.passages.size(); ++i) {
                const auto& p = result.passages[i];
                if (!schedule.events[i].ink.ir_opaque) continue;
                if (t < ir_windows[i].begin_s || t > ir_windows[i].end_s) continue;
                v += cfg.ir_amplitude_v *
                     envelope_at(t, p.ir_arrival_s, p.occupancy_s(), cfg.edge_time_s);
            }
            if (cfg.noise_sigma_v > 0.0) v += noise(rng);
            tr.samples[k] = std::clamp(v, kIrMinVolts, kIrMaxVolts);
        }
    }

    // Spectral trace: baseline scaled by each passing droplet's transmittance,
    // relative noise, counts clamped at zero.
    {
        SpectralTrace& tr = result.spectral;
        tr.sample_rate_hz = cfg.spectral_sample_rate_hz;
        tr.t0_s = span.start_s;
        const auto n = static_cast<std::size_t>(
            std::llround(span.duration_s * cfg.spectral_sample_rate_hz)) + 1;
        tr.samples.resize(n);

        std::vector<ChannelVector> trans;
        trans.reserve(schedule.events.size());
        for (const auto& ev : schedule.events)
            trans.push_back(transmittance(ev.ink, ev.concentration, cfg.path_length_mm));

        std::normal_distribution<double> noise(0.0, cfg.spectral_noise_rel);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = tr.time_at(k);
            ChannelVector counts = cfg.baseline_counts;
            for (std::size_t i = 0; i < result.passages.size(); ++i) {
                const auto& p = result.passages[i];
                if (t < spectral_windows[i].begin_s || t > spectral_windows[i].end_s) continue;
                const double env =
                    envelope_at(t, p.spectral_arrival_s, p.occupancy_s(), cfg.edge_time_s);
                for (std::size_t c = 0; c < counts.size(); ++c)
                    counts[c] *= 1.0 - env * (1.0 - trans[i][c]);
            }
            if (cfg.spectral_noise_rel > 0.0) {
                for (double& c : counts) c *= 1.0 + noise(rng);
            }
            for (double& c : counts) c = std::max(c, 0.0);
            tr.samples[k].channels = counts;
        }
    }

    return result;
}

}  // namespace dropletlink::sim
