/**
 * Droplet speed and length from dual-sensor timing.
 *
 * Speed comes from the leading-edge delay between the two sensors
 * (v = separation / delay); duration comes from the full width at half
 * maximum of the spectral notch; length is their product.
 *
 * Leading-edge times use 50% crossings on both sensors, consistent with the
 * FWHM convention. The droplet duration is measured on the channel-mean
 * normalized depth (1 - mean intensity ratio) so it works for any ink
 * without per-colour channel selection.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dropletlink/errors.hpp"
#include "dropletlink/types.hpp"

namespace dropletlink::sizing {

struct SizeEstimate {
    std::size_t droplet_index = 0;
    double length_mm = 0.0;   ///< speed_mm_s * t_drop_s, exactly
    double speed_mm_s = 0.0;  ///< separation / delta_t
    double t_drop_s = 0.0;    ///< FWHM of the spectral notch depth
    double delta_t_s = 0.0;   ///< cross-sensor leading-edge delay, > 0
};

/// Width between the linear-interpolated half-maximum crossings bracketing
/// the global maximum of a depth-positive pulse. Throws NoPulseError if the
/// maximum is not positive, AmbiguousPulseError if more than one disjoint
/// run sits above half maximum (segment first).
double fwhm_duration(std::span<const double> signal, double sample_rate_hz);

/// Leading 50%-depth crossing on the spectral notch minus leading
/// 50%-amplitude crossing on the IR pulse, for the droplet at the given
/// temporal position (0-based) on both sensors. Throws UnmatchedDropletError
/// if the sensors saw different droplet counts.
double cross_sensor_delay(const IrTrace& ir, const SpectralTrace& spectral,
                          std::size_t droplet_index, const ChannelVector& baselines);

/// Full per-droplet size estimation over a trace pair. Droplets are matched
/// between sensors by temporal order. Throws UnmatchedDropletError on count
/// mismatch or on a delay whose sign contradicts cfg.ir_sensor_upstream;
/// propagates NoPulseError when a sensor saw nothing.
std::vector<SizeEstimate> estimate_size(const IrTrace& ir, const SpectralTrace& spectral,
                                        const ChannelConfig& cfg,
                                        const ChannelVector& baselines);

}  // namespace dropletlink::sizing
