/**
 * Deterministic, seedable forward model of the droplet channel.
 *
 * A DropletSchedule plus a ChannelConfig produce the traces both sensors
 * would record: smoothed rectangular pulses on the infrared photodiode and
 * attenuation notches on the spectral sensor, offset by the transit time
 * between the two sensing points.
 *
 * Timing convention: DropletEvent::inject_time_s is the instant the droplet's
 * leading edge passes the IR sensing point. The transmitter-to-sensor transit
 * is folded into the schedule, so per-droplet speed jitter changes pulse
 * width and cross-sensor delay but not the IR arrival itself. Tests that
 * need drifting arrivals construct them through the schedule.
 *
 * Pulse shape: the 50% crossings of each pulse are separated by exactly
 * length/speed (the droplet occupancy time); raised-cosine edges of duration
 * edge_time_s are centered on those crossings. The fully-on plateau is
 * therefore occupancy - edge_time, and the pulse integral equals
 * amplitude * occupancy for any edge_time.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dropletlink/errors.hpp"
#include "dropletlink/types.hpp"

namespace dropletlink::sim {

/// Ground truth for one droplet's passage, as realized after jitter.
struct SimulatedPassage {
    std::size_t droplet_index = 0;
    double ir_arrival_s = 0.0;        ///< leading-edge time at the IR sensor
    double spectral_arrival_s = 0.0;  ///< leading-edge time at the colour sensor
    double actual_speed_mm_s = 0.0;
    double actual_length_mm = 0.0;

    double occupancy_s() const { return actual_length_mm / actual_speed_mm_s; }
};

/// Explicit simulation time span. When absent, simulate() derives a span
/// covering every occupancy window plus one second of lead-in and lead-out.
struct TimeWindow {
    double start_s = 0.0;
    double duration_s = 0.0;
};

struct SimulationResult {
    IrTrace ir;
    SpectralTrace spectral;
    std::vector<SimulatedPassage> passages;
};

/// Per-channel fraction of light surviving a droplet of the given ink at
/// the given concentration over the given optical path (exponential
/// attenuation). Every entry is in (0, 1]; concentration 0 gives all ones.
ChannelVector transmittance(const InkSpec& ink, double concentration,
                            double path_length_mm);

/// Runs the forward model. Throws OverlapError if two droplets' occupancy
/// windows collide at either sensor, std::invalid_argument on a malformed
/// schedule or config. Identical (schedule, cfg) including the seed yield
/// bit-identical traces.
SimulationResult simulate(const DropletSchedule& schedule, const ChannelConfig& cfg,
                          std::optional<TimeWindow> window = std::nullopt);

}  // namespace dropletlink::sim
