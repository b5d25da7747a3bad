/**
 * Shared domain types for the droplet-channel library.
 *
 * Two sensing points sit on the channel: an analog infrared photodiode
 * (0-5 V output after the amplifier chain) and a six-channel spectral
 * sensor 6.35 mm downstream. Everything here is plain value data;
 * instances are immutable by convention once constructed and safe to
 * share across threads.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dropletlink {

/// One value per spectral channel, ordered by center wavelength.
using ChannelVector = std::array<double, 6>;

/// Center wavelengths of the six spectral channels, nm.
inline constexpr ChannelVector kChannelCentersNm = {450.0, 500.0, 550.0,
                                                    570.0, 600.0, 650.0};

/// Optical bandwidth of each spectral channel, nm (sensor metadata).
inline constexpr double kChannelBandwidthNm = 40.0;

/// Output range of the infrared sensor chain, volts.
inline constexpr double kIrMinVolts = 0.0;
inline constexpr double kIrMaxVolts = 5.0;

/// Uniformly sampled infrared photodiode voltage sequence.
struct IrTrace {
    double sample_rate_hz = 100.0;
    double t0_s = 0.0;                ///< time of samples[0]
    std::vector<double> samples;      ///< volts, within [0, 5]

    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / sample_rate_hz; }
    double end_time_s() const {
        return samples.empty() ? t0_s : time_at(samples.size() - 1);
    }
};

/// One reading of the six-channel spectral sensor (raw counts).
struct SpectralSample {
    ChannelVector channels{};
};

/// Uniformly sampled sequence of spectral readings.
///
/// The physical sensor is limited to 20 S/s by its integration and
/// readout time; higher rates are representable but are an explicit
/// override of that constraint.
struct SpectralTrace {
    double sample_rate_hz = 20.0;
    double t0_s = 0.0;
    std::vector<SpectralSample> samples;

    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / sample_rate_hz; }
    double end_time_s() const {
        return samples.empty() ? t0_s : time_at(samples.size() - 1);
    }
};

/// Optical description of an ink dilution series.
struct InkSpec {
    std::string name;
    /// Per-channel absorption coefficients, 1/(concentration * mm).
    ChannelVector absorption_coeffs{};
    /// Whether a droplet of this liquid interrupts the infrared path.
    /// True for aqueous droplets (water absorbs near 970 nm).
    bool ir_opaque = true;
};

/// One droplet injected by the transmitter.
struct DropletEvent {
    double inject_time_s = 0.0;   ///< leading edge passes the IR sensing point
    double length_mm = 5.0;       ///< > 0
    InkSpec ink;
    double concentration = 0.0;   ///< ink fraction in [0, 1]
};

/// Transmitter-side injection plan, sorted by inject_time_s.
struct DropletSchedule {
    std::vector<DropletEvent> events;
};

/// Physical and sensor parameters of the simulated channel.
struct ChannelConfig {
    double v_chan_mm_s = 10.0;          ///< nominal droplet speed
    double speed_jitter_frac = 0.10;    ///< per-droplet multiplicative bound, [0, 1)
    double sensor_separation_mm = 6.35; ///< IR to spectral sensing point (PCB)
    double ir_sample_rate_hz = 100.0;
    double spectral_sample_rate_hz = 20.0;
    double ir_amplitude_v = 0.73;       ///< droplet pulse height, ink-independent
    double noise_sigma_v = 0.02;        ///< additive Gaussian on the IR trace
    double spectral_noise_rel = 0.02;   ///< relative Gaussian on spectral counts
    double edge_time_s = 0.05;          ///< raised-cosine rise/fall duration
    ChannelVector baseline_counts = {5200.0, 6800.0, 7400.0,
                                     7100.0, 6300.0, 5100.0};
    double path_length_mm = 1.0;        ///< optical path through the channel
    bool ir_sensor_upstream = true;     ///< droplets reach the IR sensor first
    std::uint64_t rng_seed = 1;
};

}  // namespace dropletlink
